use crate::error::{invalid, LathomError, Result};
use crate::lattice::domain::{LatticeDomain, Site, MAX_DIM};
use crate::lattice::field::LatticeField;
use crate::scalar::{int, lit, Scalar};

/// A lattice function `ψ` with `0 ≤ ψ ≤ 1` and a declared bound on `|D^{e_n}_ε ψ|`.
#[derive(Clone, Debug)]
pub struct CutoffFunction<T> {
    domain: LatticeDomain<T>,
    values: Vec<T>,
    gradient_bound: T,
    max_gradient: T,
}

impl<T: Scalar> CutoffFunction<T> {
    /// Validates range and that `declared_bound` dominates the actual gradient.
    pub fn new(domain: LatticeDomain<T>, values: Vec<T>, declared_bound: T) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(LathomError::DimensionMismatch {
                what: "cut-off values",
                expected: domain.len(),
                found: values.len(),
            });
        }
        if let Some(v) = values.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
            return Err(invalid(format!("cut-off value {v} outside [0, 1]")));
        }
        let max_gradient = max_unit_gradient(&domain, &values);
        if max_gradient > declared_bound * (T::one() + lit::<T>(4.0) * T::epsilon()) {
            return Err(invalid(format!(
                "declared gradient bound {declared_bound} below actual maximum {max_gradient}"
            )));
        }
        Ok(CutoffFunction { domain, values, gradient_bound: declared_bound, max_gradient })
    }

    /// Uses the exact maximum gradient as the declared bound.
    pub fn from_values(domain: LatticeDomain<T>, values: Vec<T>) -> Result<Self> {
        let g = max_unit_gradient(&domain, &values);
        Self::new(domain, values, g)
    }

    pub fn constant(domain: LatticeDomain<T>, c: T) -> Result<Self> {
        let values = vec![c; domain.len()];
        Self::new(domain, values, T::zero())
    }

    /// `1` within `|k − center|_∞ ≤ inner`, `0` beyond `outer`, linear in between.
    pub fn plateau(domain: LatticeDomain<T>, center: &[i64], inner: i64, outer: i64) -> Result<Self> {
        if inner < 0 || outer <= inner {
            return Err(invalid("plateau needs 0 ≤ inner < outer"));
        }
        let dim = domain.dim();
        let width = int::<T>(outer - inner);
        let mut k: Site = [0; MAX_DIM];
        let values = (0..domain.len())
            .map(|idx| {
                domain.site_into(idx, &mut k);
                let d = (0..dim).map(|a| (k[a] - center[a]).abs()).max().unwrap_or(0);
                if d <= inner {
                    T::one()
                } else if d >= outer {
                    T::zero()
                } else {
                    int::<T>(outer - d) / width
                }
            })
            .collect();
        let bound = T::one() / (width * domain.eps());
        Self::new(domain, values, bound)
    }

    /// Indicator of a single site.
    pub fn spike(domain: LatticeDomain<T>, site: &[i64]) -> Result<Self> {
        let idx = domain.index_of(site).ok_or_else(|| LathomError::OutOfDomain { site: site.to_vec() })?;
        let mut values = vec![T::zero(); domain.len()];
        values[idx] = T::one();
        let bound = T::one() / domain.eps();
        Self::new(domain, values, bound)
    }

    pub fn domain(&self) -> &LatticeDomain<T> {
        &self.domain
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, k: &[i64]) -> Option<T> {
        self.domain.index_of(k).map(|i| self.values[i])
    }

    pub fn gradient_bound(&self) -> T {
        self.gradient_bound
    }

    /// `max_{k,n} |D^{e_n}_ε ψ(k)|` over pairs inside the domain.
    pub fn max_gradient(&self) -> T {
        self.max_gradient
    }

    /// The cut-off as a scalar field.
    pub fn to_field(&self) -> Result<LatticeField<T>> {
        LatticeField::from_values(self.domain.with_codim(1)?, self.values.clone())
    }
}

fn max_unit_gradient<T: Scalar>(domain: &LatticeDomain<T>, values: &[T]) -> T {
    let dim = domain.dim();
    let mut k: Site = [0; MAX_DIM];
    let mut best = T::zero();
    for idx in 0..domain.len() {
        domain.site_into(idx, &mut k);
        for a in 0..dim {
            k[a] += 1;
            if let Some(j) = domain.index_of(&k[..dim]) {
                best = best.max((values[j] - values[idx]).abs());
            }
            k[a] -= 1;
        }
    }
    best / domain.eps()
}

/// `v(j) = ψ(j) z(j) + (1 − ψ(j)) w(j)`.
pub fn blend<T: Scalar>(z: &LatticeField<T>, w: &LatticeField<T>, psi: &CutoffFunction<T>) -> Result<LatticeField<T>> {
    if z.domain() != w.domain() {
        return Err(LathomError::Config("blend: z and w live on different domains".into()));
    }
    let (zd, pd) = (z.domain(), psi.domain());
    if zd.lo() != pd.lo() || zd.hi() != pd.hi() || zd.eps() != pd.eps() {
        return Err(LathomError::Config("blend: cut-off domain differs from field domain".into()));
    }
    let n = zd.codim();
    let mut out = z.clone();
    for (idx, &s) in psi.values().iter().enumerate() {
        let (zv, wv) = (z.value(idx), w.value(idx));
        for c in 0..n {
            out.values_mut()[idx * n + c] = s * zv[c] + (T::one() - s) * wv[c];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> LatticeDomain<f64> {
        LatticeDomain::from_index_bounds(2, 1, 0.5, &[-4, -4], &[4, 4]).unwrap()
    }

    #[test]
    fn constructors_respect_declared_bounds() {
        let p = CutoffFunction::plateau(square(), &[0, 0], 1, 3).unwrap();
        assert!(p.max_gradient() <= p.gradient_bound());
        assert!((p.max_gradient() - 1.0).abs() < 1e-15);
        let s = CutoffFunction::spike(square(), &[1, 1]).unwrap();
        assert_eq!(s.max_gradient(), 2.0);
        assert!(CutoffFunction::new(square(), vec![0.5; 81], 0.0).is_ok());
        let mut bad = vec![0.0; 81];
        bad[0] = 1.0;
        assert!(CutoffFunction::new(square(), bad, 0.1).is_err());
        assert!(CutoffFunction::new(square(), vec![1.5; 81], 0.0).is_err());
    }

    #[test]
    fn degenerate_cutoffs_select_one_field() {
        let z = LatticeField::from_fn(square(), |k, o| o[0] = (k[0] * k[1]) as f64);
        let w = LatticeField::from_fn(square(), |k, o| o[0] = (k[0] - k[1]) as f64);
        let one = CutoffFunction::constant(square(), 1.0).unwrap();
        let zero = CutoffFunction::constant(square(), 0.0).unwrap();
        assert_eq!(blend(&z, &w, &one).unwrap(), z);
        assert_eq!(blend(&z, &w, &zero).unwrap(), w);
    }
}
