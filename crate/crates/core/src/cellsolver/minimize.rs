use std::collections::VecDeque;

use crate::error::Result;
use crate::scalar::{lit, Scalar};

pub(crate) struct Outcome<T> {
    pub x: Vec<T>,
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
}

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

pub(crate) fn sup<T: Scalar>(a: &[T]) -> T {
    a.iter().fold(T::zero(), |acc, &x| acc.max(x.abs()))
}

fn axpy<T: Scalar>(a: T, x: &[T], y: &mut [T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Solves `A x = b` for symmetric positive semidefinite `A` given by `apply`,
/// stopping once `|b − A x|_∞ ≤ tol`.
pub(crate) fn conjugate_gradient<T: Scalar>(
    mut apply: impl FnMut(&[T], &mut [T]) -> Result<()>,
    b: &[T],
    mut x: Vec<T>,
    tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, usize, T, bool)> {
    let n = b.len();
    let mut ax = vec![T::zero(); n];
    apply(&x, &mut ax)?;
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut ap = vec![T::zero(); n];
    for it in 0..max_iter {
        let res = sup(&r);
        if res <= tol {
            return Ok((x, it, res, true));
        }
        apply(&p, &mut ap)?;
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Ok((x, it, res, false));
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, &ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    apply(&x, &mut ax)?;
    let res = sup(&b.iter().zip(&ax).map(|(&bi, &ai)| bi - ai).collect::<Vec<_>>());
    Ok((x, max_iter, res, res <= tol))
}

/// Limited-memory BFGS with Armijo backtracking. `f` returns the value and writes the gradient.
pub(crate) fn lbfgs<T: Scalar>(
    mut f: impl FnMut(&[T], &mut [T]) -> Result<T>,
    mut x: Vec<T>,
    gtol: T,
    max_iter: usize,
    memory: usize,
) -> Result<Outcome<T>> {
    let n = x.len();
    let mut g = vec![T::zero(); n];
    let mut value = f(&x, &mut g)?;
    let mut pairs: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::with_capacity(memory);
    let c1: T = lit(1e-4);
    let half: T = lit(0.5);
    let noise = T::epsilon() * lit(16.0);
    let mut x_new = vec![T::zero(); n];
    let mut g_new = vec![T::zero(); n];
    for it in 0..max_iter {
        let gs = sup(&g);
        if gs <= gtol {
            return Ok(Outcome { x, value, iterations: it, converged: true });
        }
        let mut d: Vec<T> = g.iter().map(|&v| -v).collect();
        let mut alphas = Vec::with_capacity(pairs.len());
        for (s, y, rho) in pairs.iter().rev() {
            let a = *rho * dot(s, &d);
            axpy(-a, y, &mut d);
            alphas.push(a);
        }
        let gamma = match pairs.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => T::one() / T::one().max(gs),
        };
        d.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in pairs.iter().zip(alphas.iter().rev()) {
            let b = *rho * dot(y, &d);
            axpy(*a - b, s, &mut d);
        }
        let mut slope = dot(&g, &d);
        if !(slope < T::zero()) {
            pairs.clear();
            d = g.iter().map(|&v| -v / T::one().max(gs)).collect();
            slope = dot(&g, &d);
        }
        let mut step = T::one();
        let mut accepted = false;
        let mut v_new = value;
        for _ in 0..60 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            v_new = f(&x_new, &mut g_new)?;
            let flat = (v_new - value).abs() <= noise * value.abs().max(T::one());
            if v_new <= value + c1 * step * slope || (flat && sup(&g_new) < gs) {
                accepted = true;
                break;
            }
            step *= half;
        }
        if !accepted {
            return Ok(Outcome { x, value, iterations: it, converged: false });
        }
        let s: Vec<T> = x_new.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = g_new.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > T::epsilon() * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if pairs.len() == memory {
                pairs.pop_front();
            }
            pairs.push_back((s, y, T::one() / sy));
        }
        std::mem::swap(&mut x, &mut x_new);
        std::mem::swap(&mut g, &mut g_new);
        value = v_new;
    }
    let converged = sup(&g) <= gtol;
    Ok(Outcome { x, value, iterations: max_iter, converged })
}
