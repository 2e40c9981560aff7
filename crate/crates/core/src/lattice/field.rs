use crate::error::{LathomError, Result};
use crate::lattice::domain::{LatticeDomain, Site, MAX_DIM};
use crate::matrix::Mat;
use crate::scalar::Scalar;

/// A discrete deformation `u : Z_ε(A) → R^n`, stored densely in enumeration order.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeField<T> {
    domain: LatticeDomain<T>,
    values: Vec<T>,
}

impl<T: Scalar> LatticeField<T> {
    pub fn zeros(domain: LatticeDomain<T>) -> Self {
        let values = vec![T::zero(); domain.len() * domain.codim()];
        LatticeField { domain, values }
    }

    pub fn from_values(domain: LatticeDomain<T>, values: Vec<T>) -> Result<Self> {
        let expected = domain.len() * domain.codim();
        if values.len() != expected {
            return Err(LathomError::DimensionMismatch { what: "field values", expected, found: values.len() });
        }
        Ok(LatticeField { domain, values })
    }

    /// `u(k) = f(k)` for every site.
    pub fn from_fn(domain: LatticeDomain<T>, mut f: impl FnMut(&[i64], &mut [T])) -> Self {
        let n = domain.codim();
        let mut values = vec![T::zero(); domain.len() * n];
        let mut k: Site = [0; MAX_DIM];
        for idx in 0..domain.len() {
            domain.site_into(idx, &mut k);
            f(&k[..domain.dim()], &mut values[idx * n..(idx + 1) * n]);
        }
        LatticeField { domain, values }
    }

    /// The affine field `u(εk) = M εk`.
    pub fn affine(domain: LatticeDomain<T>, m: &Mat<T>) -> Result<Self> {
        check_slope(&domain, m)?;
        let eps = domain.eps();
        Ok(Self::from_fn(domain, |k, out| m.apply_int(k, eps, out)))
    }

    #[inline]
    pub fn domain(&self) -> &LatticeDomain<T> {
        &self.domain
    }

    #[inline]
    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    #[inline]
    pub fn value(&self, idx: usize) -> &[T] {
        let n = self.domain.codim();
        &self.values[idx * n..(idx + 1) * n]
    }

    #[inline]
    pub fn value_mut(&mut self, idx: usize) -> &mut [T] {
        let n = self.domain.codim();
        &mut self.values[idx * n..(idx + 1) * n]
    }

    pub fn get(&self, k: &[i64]) -> Option<&[T]> {
        self.domain.index_of(k).map(|i| self.value(i))
    }

    pub fn set(&mut self, k: &[i64], v: &[T]) -> Result<()> {
        let i = self.domain.index_of(k).ok_or_else(|| LathomError::OutOfDomain { site: k.to_vec() })?;
        self.value_mut(i).copy_from_slice(v);
        Ok(())
    }

    /// `a·self + b·other` on a shared domain.
    pub fn combine(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.domain != other.domain {
            return Err(LathomError::Config("fields live on different domains".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| a * x + b * y).collect();
        Ok(LatticeField { domain: self.domain.clone(), values })
    }

    /// Largest componentwise absolute difference.
    pub fn sup_distance(&self, other: &Self) -> T {
        self.values.iter().zip(&other.values).fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
    }

    /// Read access with the given extension policy outside the domain.
    pub fn probe<'a>(&'a self, ext: &'a Extension<T>) -> FieldProbe<'a, T> {
        FieldProbe { field: self, ext }
    }
}

pub(crate) fn check_slope<T: Scalar>(domain: &LatticeDomain<T>, m: &Mat<T>) -> Result<()> {
    if m.rows() != domain.codim() {
        return Err(LathomError::DimensionMismatch { what: "slope rows", expected: domain.codim(), found: m.rows() });
    }
    if m.cols() != domain.dim() {
        return Err(LathomError::DimensionMismatch { what: "slope columns", expected: domain.dim(), found: m.cols() });
    }
    Ok(())
}

/// How a field is resolved at sites outside its domain.
#[derive(Clone, Debug, PartialEq)]
pub enum Extension<T> {
    /// `u = 0` outside.
    Zero,
    /// `u(εk) = M εk` outside.
    Affine(Mat<T>),
    /// Periodic modulo the domain box, plus the affine drift `M`:
    /// `u(k + P e_a) = u(k) + ε M P e_a`.
    Periodic(Mat<T>),
    /// Reading outside is an error.
    Strict,
}

/// Anything that can resolve field values at integer sites.
pub trait Probe<T: Scalar>: Sync {
    fn dim(&self) -> usize;
    fn codim(&self) -> usize;
    fn eps(&self) -> T;
    fn read(&self, k: &[i64], out: &mut [T]) -> Result<()>;
}

pub struct FieldProbe<'a, T> {
    field: &'a LatticeField<T>,
    ext: &'a Extension<T>,
}

impl<'a, T: Scalar> FieldProbe<'a, T> {
    pub fn field(&self) -> &LatticeField<T> {
        self.field
    }
}

impl<T: Scalar> Probe<T> for FieldProbe<'_, T> {
    #[inline]
    fn dim(&self) -> usize {
        self.field.domain.dim()
    }

    #[inline]
    fn codim(&self) -> usize {
        self.field.domain.codim()
    }

    #[inline]
    fn eps(&self) -> T {
        self.field.domain.eps()
    }

    #[inline]
    fn read(&self, k: &[i64], out: &mut [T]) -> Result<()> {
        let d = &self.field.domain;
        if let Some(i) = d.index_of(k) {
            out.copy_from_slice(self.field.value(i));
            return Ok(());
        }
        match self.ext {
            Extension::Zero => {
                out.iter_mut().for_each(|x| *x = T::zero());
                Ok(())
            }
            Extension::Affine(m) => {
                m.apply_int(k, d.eps(), out);
                Ok(())
            }
            Extension::Periodic(m) => {
                let dim = d.dim();
                let mut wrapped: Site = [0; MAX_DIM];
                let mut shift: Site = [0; MAX_DIM];
                for a in 0..dim {
                    let p = d.extent(a) as i64;
                    wrapped[a] = d.lo()[a] + (k[a] - d.lo()[a]).rem_euclid(p);
                    shift[a] = k[a] - wrapped[a];
                }
                let base = self.field.value(d.index_of(&wrapped[..dim]).expect("wrapped site inside"));
                m.apply_int(&shift[..dim], d.eps(), out);
                for (o, &b) in out.iter_mut().zip(base) {
                    *o += b;
                }
                Ok(())
            }
            Extension::Strict => Err(LathomError::OutOfDomain { site: k[..d.dim()].to_vec() }),
        }
    }
}

/// The affine map `k ↦ M εk` on all of `εZ^N`.
pub struct AffineProbe<T> {
    pub m: Mat<T>,
    pub eps: T,
}

impl<T: Scalar> Probe<T> for AffineProbe<T> {
    fn dim(&self) -> usize {
        self.m.cols()
    }

    fn codim(&self) -> usize {
        self.m.rows()
    }

    fn eps(&self) -> T {
        self.eps
    }

    #[inline]
    fn read(&self, k: &[i64], out: &mut [T]) -> Result<()> {
        self.m.apply_int(k, self.eps, out);
        Ok(())
    }
}

/// Adds `delta` to one component of one site of an underlying probe.
pub(crate) struct NudgedProbe<'a, T: Scalar> {
    pub base: &'a dyn Probe<T>,
    pub site: Site,
    pub comp: usize,
    pub delta: T,
}

impl<T: Scalar> Probe<T> for NudgedProbe<'_, T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn codim(&self) -> usize {
        self.base.codim()
    }

    fn eps(&self) -> T {
        self.base.eps()
    }

    fn read(&self, k: &[i64], out: &mut [T]) -> Result<()> {
        self.base.read(k, out)?;
        let dim = self.base.dim();
        if k[..dim] == self.site[..dim] {
            out[self.comp] += self.delta;
        }
        Ok(())
    }
}

/// Adds a constant vector to every value of an underlying probe.
pub struct ShiftedProbe<'a, T: Scalar> {
    pub base: &'a dyn Probe<T>,
    pub shift: Vec<T>,
}

impl<T: Scalar> Probe<T> for ShiftedProbe<'_, T> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn codim(&self) -> usize {
        self.base.codim()
    }

    fn eps(&self) -> T {
        self.base.eps()
    }

    fn read(&self, k: &[i64], out: &mut [T]) -> Result<()> {
        self.base.read(k, out)?;
        for (o, &s) in out.iter_mut().zip(&self.shift) {
            *o += s;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(lo: i64, hi: i64) -> LatticeDomain<f64> {
        LatticeDomain::from_index_bounds(1, 1, 1.0, &[lo], &[hi]).unwrap()
    }

    #[test]
    fn extensions_resolve_outside_values() {
        let f = LatticeField::from_values(line(0, 3), vec![0.0, 1.0, 5.0, 2.0]).unwrap();
        let m = Mat::from_rows(&[&[2.0]]);
        let mut out = [0.0];
        f.probe(&Extension::Zero).read(&[7], &mut out).unwrap();
        assert_eq!(out[0], 0.0);
        f.probe(&Extension::Affine(m.clone())).read(&[7], &mut out).unwrap();
        assert_eq!(out[0], 14.0);
        f.probe(&Extension::Periodic(m.clone())).read(&[6], &mut out).unwrap();
        assert_eq!(out[0], 5.0 + 8.0);
        f.probe(&Extension::Periodic(m)).read(&[-1], &mut out).unwrap();
        assert_eq!(out[0], 2.0 - 8.0);
        assert!(f.probe(&Extension::Strict).read(&[4], &mut out).is_err());
    }

    #[test]
    fn affine_field_matches_affine_probe() {
        let d = LatticeDomain::<f64>::from_index_bounds(2, 2, 0.25, &[-2, -2], &[2, 2]).unwrap();
        let m = Mat::from_rows(&[&[1.0, 2.0], &[-0.5, 3.0]]);
        let f = LatticeField::affine(d, &m).unwrap();
        let p = AffineProbe { m, eps: 0.25 };
        let mut a = [0.0; 2];
        for k in f.domain().iter() {
            p.read(&k, &mut a).unwrap();
            assert_eq!(f.get(&k).unwrap(), &a);
        }
    }
}
