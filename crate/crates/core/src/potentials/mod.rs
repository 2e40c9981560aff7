//! Multibody site densities `φ_i` and the energy `F_ε(u, A) = Σ_{i ∈ Z_ε(A)} ε^N φ_i`.
//!
//! Every density implements [`MultibodyPotential`]: it evaluates `φ_i` through a
//! [`Probe`], supplies the analytic gradient where one is available, and
//! reports the coefficient profiles consumed by the hypothesis checks.

mod energy;
mod families;
mod lj;
mod periodic;
mod profile;
mod terms;

pub use energy::{energy, gradient, site_values};
pub use families::{
    determinant, determinant_family, long_bond_density, nn_power, nn_quadratic, pair_family_default, pair_table,
    two_spring_chain, PairEntry,
};
pub use lj::{
    lj_decay_coefficients, lj_margin, lj_margin_curve, lj_nn_coefficient, lj_path_table, lj_raw_pair, lj_regroup,
    lj_tail_bound, lj_vpp, lj_vpp_sq, LjCorrection, LjLinearized,
};
pub use periodic::{make_periodic, BrokenTranslation, PeriodicComposite};
pub use profile::{DecayProfile, ProfileEntry};
pub use terms::{GLaw, LeveledTerm, Term, TermPotential};

use crate::error::{LathomError, Result};
use crate::lattice::{site_from, AffineProbe, NudgedProbe, Probe, Site, MAX_DIM};
use crate::matrix::Mat;
use crate::scalar::{int, Scalar};

/// A site density `φ_i(u)` depending on `u` through a finite window around `i`.
pub trait MultibodyPotential<T: Scalar>: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn codim(&self) -> usize;

    /// Growth exponent `p`.
    fn exponent(&self) -> T;

    /// Largest `|k − i|_∞` over the sites `k` read by `φ_i`.
    fn window_radius(&self) -> i64;

    /// `Some(T)` if `φ_{i + T e_a}(u) = φ_i(u(· + T e_a))` for every axis.
    fn period(&self) -> Option<usize>;

    /// `true` if `φ_i` is a homogeneous quadratic form in `u`.
    fn is_quadratic(&self) -> bool {
        false
    }

    fn evaluate(&self, site: &[i64], probe: &dyn Probe<T>) -> Result<T>;

    /// Calls `sink(k, ∂φ_i/∂u(k))` for the sites `k` in the window of `i`.
    ///
    /// The default is a central difference; several calls may report the same `k`.
    fn gradient(&self, site: &[i64], probe: &dyn Probe<T>, sink: &mut dyn FnMut(&[i64], &[T])) -> Result<()> {
        finite_difference_gradient(self, site, probe, sink)
    }

    /// `φ_CB(M)`: the density of the affine field averaged over one period cell.
    fn cauchy_born(&self, m: &Mat<T>) -> Result<T> {
        residue_average(self, self.period().unwrap_or(1), m)
    }

    /// Coefficients `C^{j,ξ}` with `φ_i(z) ≤ Σ C^{j,ξ} (|D^ξ_ε z(i+j)|^p + 1)`.
    fn upper_bound_profile(&self) -> Option<DecayProfile<T>> {
        None
    }

    fn cauchy_born_constant(&self) -> Option<T> {
        self.upper_bound_profile().map(|p| p.total_sum())
    }

    /// `C^{j,ξ}_{ε,δ}`: coefficients of the terms that read outside `Q_δ(εi)`.
    fn locality_profile(&self, _eps: T, _delta: T) -> Option<DecayProfile<T>> {
        None
    }

    /// `(C, C^{j,ξ})` for the cut-off blend inequality.
    fn nonconvexity_profile(&self) -> Option<(T, DecayProfile<T>)> {
        None
    }

    /// `c` with `Σ_i φ_i(u) ≥ c Σ_i Σ_a |D^{e_a} u(i)|^p` on periodic fields.
    fn coercivity_constant(&self) -> Option<T> {
        None
    }
}

/// Mean of `φ_i(Mx)` over `i ∈ {0, …, period−1}^N` with `ε = 1`.
pub(crate) fn residue_average<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    period: usize,
    m: &Mat<T>,
) -> Result<T> {
    let dim = pot.dim();
    if m.rows() != pot.codim() || m.cols() != dim {
        return Err(LathomError::DimensionMismatch {
            what: "slope shape",
            expected: pot.codim() * dim,
            found: m.rows() * m.cols(),
        });
    }
    let probe = AffineProbe { m: m.clone(), eps: T::one() };
    let count = period.pow(dim as u32);
    let mut acc = T::zero();
    let mut site: Site = [0; MAX_DIM];
    for r in 0..count {
        let mut q = r;
        for a in (0..dim).rev() {
            site[a] = (q % period) as i64;
            q /= period;
        }
        acc += pot.evaluate(&site[..dim], &probe)?;
    }
    Ok(acc / int(count as i64))
}

fn finite_difference_gradient<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    site: &[i64],
    probe: &dyn Probe<T>,
    sink: &mut dyn FnMut(&[i64], &[T]),
) -> Result<()> {
    let dim = pot.dim();
    let n = pot.codim();
    let r = pot.window_radius();
    let side = (2 * r + 1) as usize;
    let count = side.pow(dim as u32);
    let h0 = T::epsilon().cbrt();
    let two = T::one() + T::one();
    let mut val = [T::zero(); MAX_DIM];
    let mut g = [T::zero(); MAX_DIM];
    for idx in 0..count {
        let mut k = site_from(&site[..dim]);
        let mut q = idx;
        for a in (0..dim).rev() {
            k[a] += (q % side) as i64 - r;
            q /= side;
        }
        probe.read(&k[..dim], &mut val[..n])?;
        for c in 0..n {
            let h = h0 * T::one().max(val[c].abs());
            let plus = NudgedProbe { base: probe, site: k, comp: c, delta: h };
            let minus = NudgedProbe { base: probe, site: k, comp: c, delta: -h };
            g[c] = (pot.evaluate(site, &plus)? - pot.evaluate(site, &minus)?) / (two * h);
        }
        if g[..n].iter().any(|&x| x != T::zero()) {
            sink(&k[..dim], &g[..n]);
        }
    }
    Ok(())
}
