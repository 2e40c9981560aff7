use crate::error::{invalid, Result};
use crate::lattice::DirectionOffset;
use crate::potentials::terms::{GLaw, Term, TermPotential};
use crate::scalar::{lit, Scalar};

/// One row of a pair coefficient table: `c |D^ξ u(i + j)|^p`, with either one
/// coefficient or one per residue class modulo the period.
#[derive(Clone, Debug, PartialEq)]
pub struct PairEntry<T> {
    pub j: Vec<i64>,
    pub xi: DirectionOffset,
    pub coeffs: Vec<T>,
}

impl<T> PairEntry<T> {
    pub fn new(j: Vec<i64>, xi: DirectionOffset, coeff: T) -> Self {
        PairEntry { j, xi, coeffs: vec![coeff] }
    }
}

fn nn_terms<T: Scalar>(pot: &mut TermPotential<T>, dim: usize, coeffs: Vec<T>, p: T) -> Result<()> {
    for axis in 0..dim {
        pot.push(Term::pair(&vec![0; dim], DirectionOffset::unit(dim, axis), coeffs.clone(), p)?)?;
    }
    Ok(())
}

/// `Σ_n |D^{e_n} u(i)|²`.
pub fn nn_quadratic<T: Scalar>(dim: usize, codim: usize) -> Result<TermPotential<T>> {
    nn_power(dim, codim, lit(2.0))
}

/// `Σ_n |D^{e_n} u(i)|^p`.
pub fn nn_power<T: Scalar>(dim: usize, codim: usize, p: T) -> Result<TermPotential<T>> {
    let mut pot = TermPotential::new(format!("nn(p={p})"), dim, codim, p, 1)?;
    nn_terms(&mut pot, dim, vec![T::one()], p)?;
    Ok(pot.with_coercivity(T::one()))
}

/// Pair density from a coefficient table. The coercivity constant is the smallest
/// nearest-neighbour coefficient anchored at the site when every coefficient is
/// nonnegative and all axes are present.
pub fn pair_table<T: Scalar>(
    name: &str,
    dim: usize,
    codim: usize,
    p: T,
    period: usize,
    entries: &[PairEntry<T>],
) -> Result<TermPotential<T>> {
    if entries.is_empty() {
        return Err(invalid("pair table is empty"));
    }
    let mut pot = TermPotential::new(name, dim, codim, p, period)?;
    for e in entries {
        pot.push(Term::pair(&e.j, e.xi.clone(), e.coeffs.clone(), p)?)?;
    }
    if entries.iter().any(|e| e.coeffs.iter().any(|&c| c < T::zero())) {
        return Ok(pot);
    }
    let mut c = T::infinity();
    for axis in 0..dim {
        let unit = DirectionOffset::unit(dim, axis);
        let best = entries
            .iter()
            .filter(|e| e.j.iter().all(|&x| x == 0) && e.xi == unit)
            .map(|e| e.coeffs.iter().copied().fold(T::infinity(), T::min))
            .fold(T::zero(), |acc: T, x| acc + x);
        c = c.min(best);
    }
    if c > T::zero() && c.is_finite() {
        Ok(pot.with_coercivity(c))
    } else {
        Ok(pot)
    }
}

/// 2D pair density: unit bonds with weight 1, diagonals `(1, ±1)` with weight 1/2 and
/// second neighbours `(2, 0)`, `(0, 2)` with weight 1/4.
pub fn pair_family_default<T: Scalar>(codim: usize) -> Result<TermPotential<T>> {
    let d = |v: [i64; 2]| DirectionOffset::new(v.to_vec()).expect("nonzero");
    let entries = vec![
        PairEntry::new(vec![0, 0], d([1, 0]), T::one()),
        PairEntry::new(vec![0, 0], d([0, 1]), T::one()),
        PairEntry::new(vec![0, 0], d([1, 1]), lit(0.5)),
        PairEntry::new(vec![0, 0], d([1, -1]), lit(0.5)),
        PairEntry::new(vec![0, 0], d([2, 0]), lit(0.25)),
        PairEntry::new(vec![0, 0], d([0, 2]), lit(0.25)),
    ];
    pair_table("pair-default", 2, codim, lit(2.0), 1, &entries)
}

/// 1D chain with period 2 whose springs alternate between stiffness 1 and 3;
/// `f_hom(M) = 1.5 M²`.
pub fn two_spring_chain<T: Scalar>() -> Result<TermPotential<T>> {
    let mut pot = TermPotential::new("two-spring-chain", 1, 1, lit(2.0), 2)?;
    nn_terms(&mut pot, 1, vec![T::one(), lit(3.0)], lit(2.0))?;
    Ok(pot.with_coercivity(T::one()))
}

/// 1D density `c₂|D² u(i+1)|² + c₃|D³ u(i)|²` without a nearest-neighbour term.
///
/// Summed over a period, every unit bond is controlled by the two- and
/// three-bonds through it; `min(c₂, c₃)/18` is the declared lower bound.
pub fn long_bond_density<T: Scalar>(c2: T, c3: T) -> Result<TermPotential<T>> {
    if !(c2 > T::zero() && c3 > T::zero()) {
        return Err(invalid("coefficients must be positive"));
    }
    let entries = vec![
        PairEntry::new(vec![1], DirectionOffset::new(vec![2])?, c2),
        PairEntry::new(vec![0], DirectionOffset::new(vec![3])?, c3),
    ];
    let pot = pair_table("long-bond-density", 1, 1, lit(2.0), 1, &entries)?;
    Ok(pot.with_coercivity(c2.min(c3) / lit(18.0)))
}

/// `Σ_t w_t g(det(D^{ξ_1} u(i), …, D^{ξ_n} u(i))) + Σ_a |D^{e_a} u(i)|^p` with `N = n`.
pub fn determinant<T: Scalar>(
    n: usize,
    p: T,
    tuples: &[(Vec<DirectionOffset>, T)],
    law: GLaw<T>,
    bound: T,
) -> Result<TermPotential<T>> {
    let mut pot = TermPotential::new(format!("determinant(n={n})"), n, n, p, 1)?;
    nn_terms(&mut pot, n, vec![T::one()], p)?;
    for (xis, w) in tuples {
        pot.push(Term::determinant(xis.clone(), *w, law.clone(), bound, p)?)?;
    }
    Ok(pot.with_coercivity(T::one()))
}

/// Determinant density with tuples `(e_1, …, e_n)` at weight 1 and
/// `(2e_1, …, 2e_n)` at weight 1/2, smoothed absolute value with `η = 10⁻⁸`.
pub fn determinant_family<T: Scalar>(n: usize, p: T) -> Result<TermPotential<T>> {
    let unit: Vec<DirectionOffset> = (0..n).map(|a| DirectionOffset::unit(n, a)).collect();
    let double: Vec<DirectionOffset> = (0..n)
        .map(|a| {
            let mut v = vec![0; n];
            v[a] = 2;
            DirectionOffset::new(v).expect("nonzero")
        })
        .collect();
    let tuples = vec![(unit, T::one()), (double, lit(0.5))];
    determinant(n, p, &tuples, GLaw::SmoothAbs { eta: lit(1e-8) }, T::one())
}
