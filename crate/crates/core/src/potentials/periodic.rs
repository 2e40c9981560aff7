use crate::error::{invalid, Result};
use crate::lattice::Probe;
use crate::matrix::Mat;
use crate::potentials::profile::DecayProfile;
use crate::potentials::terms::TermPotential;
use crate::potentials::MultibodyPotential;
use crate::scalar::{int, Scalar};

/// `φ^ε_i(z) = φ^{k(i)}_{i}(z^ε)` with `k(i) = min(⌊d_i/ε⌋, k_max)` and `d_i` the
/// `∞`-distance from `εi` to the complement of a physical box `Ω`.
///
/// Difference quotients are taken at spacing `ε`, which is the same as reading the
/// rescaled field `z^ε(j) = z(εj)/ε` at spacing 1.
#[derive(Clone, Debug)]
pub struct PeriodicComposite<T> {
    base: TermPotential<T>,
    eps: T,
    lower: Vec<T>,
    upper: Vec<T>,
    k_max: usize,
    radius: i64,
    name: String,
}

pub fn make_periodic<T: Scalar>(
    base: TermPotential<T>,
    eps: T,
    lower: &[T],
    upper: &[T],
    k_max: usize,
) -> Result<PeriodicComposite<T>> {
    let dim = base.dim();
    if lower.len() != dim || upper.len() != dim {
        return Err(invalid("box corners must have one entry per axis"));
    }
    if !(eps > T::zero()) {
        return Err(invalid("lattice spacing must be positive"));
    }
    if base.terms().is_empty() {
        return Err(invalid("base family has no terms"));
    }
    if k_max > base.max_level() {
        return Err(invalid(format!("truncation level {k_max} exceeds the family's top level {}", base.max_level())));
    }
    let name = format!("periodic({})", base.name());
    let radius = base.truncated(k_max).window_radius();
    Ok(PeriodicComposite { base, eps, lower: lower.to_vec(), upper: upper.to_vec(), k_max, radius, name })
}

impl<T: Scalar> PeriodicComposite<T> {
    pub fn base(&self) -> &TermPotential<T> {
        &self.base
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `min(⌊d_i/ε⌋, k_max)`, or 0 outside the box.
    pub fn level_at(&self, i: &[i64]) -> usize {
        let mut d = T::infinity();
        for a in 0..self.base.dim() {
            let x = int::<T>(i[a]) * self.eps;
            d = d.min(x - self.lower[a]).min(self.upper[a] - x);
        }
        if !(d > T::zero()) {
            return 0;
        }
        let lev = (d / self.eps + T::epsilon() * int(8)).floor().to_usize().unwrap_or(usize::MAX);
        lev.min(self.k_max)
    }
}

impl<T: Scalar> MultibodyPotential<T> for PeriodicComposite<T> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn codim(&self) -> usize {
        self.base.codim()
    }

    fn exponent(&self) -> T {
        self.base.exponent()
    }

    fn window_radius(&self) -> i64 {
        self.radius
    }

    fn period(&self) -> Option<usize> {
        self.base.period()
    }

    fn is_quadratic(&self) -> bool {
        self.base.is_quadratic()
    }

    fn evaluate(&self, site: &[i64], probe: &dyn Probe<T>) -> Result<T> {
        self.base.evaluate_level(site, probe, self.level_at(site))
    }

    fn gradient(&self, site: &[i64], probe: &dyn Probe<T>, sink: &mut dyn FnMut(&[i64], &[T])) -> Result<()> {
        self.base.gradient_level(site, probe, self.level_at(site), sink)
    }

    fn cauchy_born(&self, m: &Mat<T>) -> Result<T> {
        self.base.cauchy_born(m)
    }

    fn upper_bound_profile(&self) -> Option<DecayProfile<T>> {
        self.base.upper_bound_profile()
    }

    fn locality_profile(&self, eps: T, delta: T) -> Option<DecayProfile<T>> {
        self.base.locality_profile(eps, delta)
    }

    fn nonconvexity_profile(&self) -> Option<(T, DecayProfile<T>)> {
        self.base.nonconvexity_profile()
    }

    fn coercivity_constant(&self) -> Option<T> {
        self.base.coercivity_constant()
    }
}

/// `φ_i(u) + |u(i)|²`: reads absolute positions, so it is not translation invariant.
#[derive(Clone, Debug)]
pub struct BrokenTranslation<P> {
    pub inner: P,
    name: String,
}

impl<P> BrokenTranslation<P> {
    pub fn new<T: Scalar>(inner: P) -> Self
    where
        P: MultibodyPotential<T>,
    {
        let name = format!("broken-translation({})", inner.name());
        BrokenTranslation { inner, name }
    }
}

impl<T: Scalar, P: MultibodyPotential<T>> MultibodyPotential<T> for BrokenTranslation<P> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn codim(&self) -> usize {
        self.inner.codim()
    }

    fn exponent(&self) -> T {
        self.inner.exponent()
    }

    fn window_radius(&self) -> i64 {
        self.inner.window_radius()
    }

    fn period(&self) -> Option<usize> {
        self.inner.period()
    }

    fn evaluate(&self, site: &[i64], probe: &dyn Probe<T>) -> Result<T> {
        let mut v = vec![T::zero(); probe.codim()];
        probe.read(site, &mut v)?;
        Ok(self.inner.evaluate(site, probe)? + v.iter().fold(T::zero(), |a, &x| a + x * x))
    }

    fn gradient(&self, site: &[i64], probe: &dyn Probe<T>, sink: &mut dyn FnMut(&[i64], &[T])) -> Result<()> {
        self.inner.gradient(site, probe, sink)?;
        let mut v = vec![T::zero(); probe.codim()];
        probe.read(site, &mut v)?;
        for x in v.iter_mut() {
            *x = *x + *x;
        }
        sink(&site[..probe.dim()], &v);
        Ok(())
    }
}
