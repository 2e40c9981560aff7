//! Harmonic approximation of the Lennard-Jones pair potential `V(r) = r^{−12} − 2r^{−6}`
//! and its regrouping into nonnegative multibody terms.

use num_traits::{FromPrimitive, Num};

use crate::error::{invalid, Result};
use crate::lattice::{build_path, path_constant, DirectionOffset};
use crate::potentials::profile::DecayProfile;
use crate::potentials::terms::{Term, TermPotential};
use crate::scalar::{int, lit, Scalar};

/// `V″(r) = 156 r^{−14} − 84 r^{−8}`.
pub fn lj_vpp<T: Scalar>(r: T) -> T {
    let r2 = r * r;
    let r8 = r2 * r2 * r2 * r2;
    let r14 = r8 * r2 * r2 * r2;
    lit::<T>(156.0) / r14 - lit::<T>(84.0) / r8
}

/// `V″` as a function of `r²`, written with ring operations only so that it
/// evaluates exactly in rational arithmetic.
pub fn lj_vpp_sq<T: Num + Clone + FromPrimitive>(r2: T) -> T {
    let r4 = r2.clone() * r2.clone();
    let r8 = r4.clone() * r4;
    let r14 = r8.clone() * r2.clone() * r2.clone() * r2;
    T::from_i64(156).expect("small integer") / r14 - T::from_i64(84).expect("small integer") / r8
}

/// `V″(1) + 12V″(√2) + 3 Σ_{k=2}^{K} V″(k)(3k² − 3k + 1)`.
pub fn lj_margin<T: Scalar>(kmax: usize) -> T {
    let mut acc = lj_vpp_sq::<T>(T::one()) + lit::<T>(12.0) * lj_vpp_sq::<T>(int(2));
    for k in 2..=kmax as i64 {
        acc += int::<T>(3) * lj_vpp_sq::<T>(int(k * k)) * int(3 * k * k - 3 * k + 1);
    }
    acc
}

/// `(K, margin(K))` for `K = 2..=kmax`, accumulated in one pass.
pub fn lj_margin_curve(kmax: usize) -> Vec<(usize, f64)> {
    let mut acc = lj_vpp_sq(1.0) + 12.0 * lj_vpp_sq(2.0);
    let mut out = Vec::with_capacity(kmax.saturating_sub(1));
    for k in 2..=kmax {
        let kf = k as f64;
        acc += 3.0 * lj_vpp_sq(kf * kf) * (3.0 * kf * kf - 3.0 * kf + 1.0);
        out.push((k, acc));
    }
    out
}

/// Upper bound on `|margin(∞) − margin(K)|` from `|V″(k)| ≤ 84 k^{−8}` and
/// `3k² − 3k + 1 ≤ 3k²`: `Σ_{k>K} 756 k^{−6} ≤ 756 / (5 K^5)`.
pub fn lj_tail_bound(kmax: usize) -> f64 {
    756.0 / (5.0 * (kmax as f64).powi(5))
}

/// Directions `ξ ∈ Z^N` with `1 < |ξ|` and `|ξ|_∞ ≤ k`.
fn long_directions(dim: usize, k: usize) -> Vec<DirectionOffset> {
    let k = k as i64;
    let side = (2 * k + 1) as usize;
    let mut out = Vec::new();
    for idx in 0..side.pow(dim as u32) {
        let mut q = idx;
        let mut v = vec![0; dim];
        for a in (0..dim).rev() {
            v[a] = (q % side) as i64 - k;
            q /= side;
        }
        if v.iter().map(|x| x * x).sum::<i64>() > 1 {
            out.push(DirectionOffset::new(v).expect("nonzero direction"));
        }
    }
    out
}

/// `V″(1) − Σ_{ξ_1 > 0, |ξ| > 1, |ξ|_∞ ≤ K} N |V″(|ξ|)| ξ_1/‖ξ‖₁`, the nearest-neighbour
/// coefficient left after routing every long bond along its lattice path.
pub fn lj_nn_coefficient<T: Scalar>(dim: usize, kmax: usize) -> T {
    let c = path_constant::<T>(lit(2.0), dim);
    let mut corr = T::zero();
    for xi in long_directions(dim, kmax) {
        let x1 = xi.as_slice()[0];
        if x1 > 0 {
            corr += c * lj_vpp_sq::<T>(int(xi.l2_sq())).abs() * int(x1) / int(xi.l1());
        }
    }
    lj_vpp_sq::<T>(T::one()) - corr
}

/// Truncation used for the nearest-neighbour correction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LjCorrection {
    /// Correct for exactly the shells `|ξ|_∞ ≤ K`; the regrouped energy then equals
    /// the raw truncated pair energy on periodic fields.
    Matched(usize),
    /// Correct for the whole lattice, so that every truncation level carries the
    /// same nearest-neighbour coefficient and adding shells only adds
    /// nonnegative terms.
    Full,
}

/// Shell radius standing in for the whole lattice in [`LjCorrection::Full`].
const FULL_RADIUS: usize = 128;

#[derive(Clone, Debug)]
pub struct LjLinearized<T> {
    pub dim: usize,
    pub k: usize,
    pub nn_coefficient: T,
    pub potential: TermPotential<T>,
    pub decay: DecayProfile<T>,
}

/// Regrouped linearized LJ density in dimension `dim` with shells `|ξ|_∞ ≤ k`:
/// `φ_i = a Σ_n |D^{e_n} u(i)|² + Σ_{ξ ∈ H, |ξ|>1} |V″(|ξ|)| [N/‖ξ‖₁ Σ_h |D^{v_h} u(i_h)|² − |D^ξ u(i)|²]`,
/// where `H` holds the directions whose first nonzero coordinate is positive.
pub fn lj_regroup<T: Scalar>(dim: usize, k: usize, correction: LjCorrection) -> Result<LjLinearized<T>> {
    if k == 0 {
        return Err(invalid("truncation radius must be at least 1"));
    }
    let kc = match correction {
        LjCorrection::Matched(kc) => kc,
        LjCorrection::Full => FULL_RADIUS,
    };
    let a = lj_nn_coefficient::<T>(dim, kc);
    if !(a > T::zero()) {
        return Err(invalid("nearest-neighbour coefficient is not positive"));
    }
    let two: T = lit(2.0);
    let c = path_constant::<T>(two, dim);
    let mut pot = TermPotential::new(format!("lj-regrouped(N={dim},k={k})"), dim, dim, two, 1)?;
    for axis in 0..dim {
        pot.push(Term::pair(&vec![0; dim], DirectionOffset::unit(dim, axis), vec![a], two)?)?;
    }
    for xi in long_directions(dim, k).into_iter().filter(|x| x.is_positive()) {
        let w = lj_vpp_sq::<T>(int(xi.l2_sq())).abs();
        pot.push(Term::path_gap(xi, w, c, two)?)?;
    }
    let pot = pot.with_coercivity(a);
    Ok(LjLinearized { dim, k, nn_coefficient: a, potential: pot, decay: lj_decay_coefficients(dim, k) })
}

/// Raw truncated pair density `Σ_{ξ ∈ H, |ξ|_∞ ≤ k} V″(|ξ|) |D^ξ u(i)|²`; indefinite.
pub fn lj_raw_pair<T: Scalar>(dim: usize, k: usize) -> Result<TermPotential<T>> {
    let two: T = lit(2.0);
    let mut pot = TermPotential::new(format!("lj-raw(N={dim},k={k})"), dim, dim, two, 1)?;
    let mut dirs: Vec<DirectionOffset> = (0..dim).map(|a| DirectionOffset::unit(dim, a)).collect();
    dirs.extend(long_directions(dim, k).into_iter().filter(|x| x.is_positive()));
    for xi in dirs {
        let v = lj_vpp_sq::<T>(int(xi.l2_sq()));
        pot.push(Term::pair(&vec![0; dim], xi, vec![v], two)?)?;
    }
    Ok(pot)
}

/// `Σ_{ξ: |ξ|>1, |ξ|_∞ ≤ k} N|V″(|ξ|)|/‖ξ‖₁` accumulated on `(j_h, v_h)` along the path
/// of `ξ` from the origin; `v_h` keeps its sign.
pub fn lj_path_table<T: Scalar>(dim: usize, k: usize) -> DecayProfile<T> {
    let c = path_constant::<T>(lit(2.0), dim);
    let mut table = DecayProfile::new();
    for xi in long_directions(dim, k) {
        let w = c * lj_vpp_sq::<T>(int(xi.l2_sq())).abs() / int(xi.l1());
        let path = build_path(&vec![0; dim], &xi);
        for (s, j) in path.steps.iter().zip(&path.visited) {
            table.add(j, s.offset(dim).as_slice(), w);
        }
    }
    table
}

/// Decay table: the path table with the nearest-neighbour entries `(0, ±e_n)` set to `V″(1)`.
pub fn lj_decay_coefficients<T: Scalar>(dim: usize, k: usize) -> DecayProfile<T> {
    let mut table = lj_path_table::<T>(dim, k);
    let zero = vec![0; dim];
    for axis in 0..dim {
        for sign in [1, -1] {
            let mut e = vec![0; dim];
            e[axis] = sign;
            table.set(&zero, &e, lj_vpp_sq::<T>(T::one()));
        }
    }
    table
}
