use crate::error::{invalid, Result};
use crate::scalar::{int, lit, Scalar};

/// Largest spatial and codomain dimension supported by the stack buffers.
pub const MAX_DIM: usize = 4;

/// Integer site buffer; only the first `dim` entries are meaningful.
pub type Site = [i64; MAX_DIM];

pub fn site_from(k: &[i64]) -> Site {
    let mut s = [0; MAX_DIM];
    s[..k.len()].copy_from_slice(k);
    s
}

/// `Z_ε(A) = εZ^N ∩ A` for an axis-aligned box `A`.
///
/// Sites are stored as integer index vectors `k` (the physical point is `εk`)
/// inside the inclusive bounds `lo..=hi`. Enumeration is lexicographic with the
/// last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeDomain<T> {
    dim: usize,
    codim: usize,
    eps: T,
    lo: Vec<i64>,
    hi: Vec<i64>,
    region: Vec<(T, T)>,
    strides: Vec<usize>,
    len: usize,
}

impl<T: Scalar> LatticeDomain<T> {
    /// Sites `k` with `lo ≤ k ≤ hi` componentwise; the region is `[ε lo, ε hi]`.
    pub fn from_index_bounds(dim: usize, codim: usize, eps: T, lo: &[i64], hi: &[i64]) -> Result<Self> {
        let region = lo.iter().zip(hi).map(|(&a, &b)| (int::<T>(a) * eps, int::<T>(b) * eps)).collect();
        Self::build(dim, codim, eps, lo.to_vec(), hi.to_vec(), region)
    }

    /// Sites of `εZ^N` inside the closed box `[lower, upper]`.
    pub fn from_box(dim: usize, codim: usize, eps: T, lower: &[T], upper: &[T]) -> Result<Self> {
        if lower.len() != dim || upper.len() != dim {
            return Err(invalid("box corners must have one entry per axis"));
        }
        if !(eps > T::zero()) {
            return Err(invalid("lattice spacing must be positive"));
        }
        let slack: T = lit(1e-9);
        let mut lo = Vec::with_capacity(dim);
        let mut hi = Vec::with_capacity(dim);
        for a in 0..dim {
            if !(upper[a] >= lower[a]) {
                return Err(invalid(format!("empty box on axis {a}")));
            }
            lo.push(((lower[a] / eps) - slack).ceil().to_i64().ok_or_else(|| invalid("box corner overflow"))?);
            hi.push(((upper[a] / eps) + slack).floor().to_i64().ok_or_else(|| invalid("box corner overflow"))?);
        }
        let region = lower.iter().zip(upper).map(|(&a, &b)| (a, b)).collect();
        Self::build(dim, codim, eps, lo, hi, region)
    }

    /// The closed cube `Q_L(x0)` of side `side` centred at `center`.
    pub fn cube(dim: usize, codim: usize, eps: T, side: T, center: &[T]) -> Result<Self> {
        if !(side > T::zero()) {
            return Err(invalid("cube side must be positive"));
        }
        let h = side * lit(0.5);
        let lower: Vec<T> = center.iter().map(|&c| c - h).collect();
        let upper: Vec<T> = center.iter().map(|&c| c + h).collect();
        Self::from_box(dim, codim, eps, &lower, &upper)
    }

    /// `Z^N ∩ Q_L` with `ε = 1`, the index set of a cell problem of side `L`.
    pub fn cell(dim: usize, codim: usize, side: usize) -> Result<Self> {
        let l = side as i64;
        // ceil(-L/2) and floor(L/2)
        let lo = vec![-(l / 2); dim];
        let hi = vec![l / 2; dim];
        let half: T = lit::<T>(0.5) * int(l);
        let region = vec![(-half, half); dim];
        Self::build(dim, codim, T::one(), lo, hi, region)
    }

    fn build(dim: usize, codim: usize, eps: T, lo: Vec<i64>, hi: Vec<i64>, region: Vec<(T, T)>) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(invalid(format!("spatial dimension must be in 1..={MAX_DIM}")));
        }
        if codim == 0 || codim > MAX_DIM {
            return Err(invalid(format!("codomain dimension must be in 1..={MAX_DIM}")));
        }
        if !(eps > T::zero()) || !eps.is_finite() {
            return Err(invalid("lattice spacing must be positive and finite"));
        }
        if lo.len() != dim || hi.len() != dim {
            return Err(invalid("index bounds must have one entry per axis"));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a > b) {
            return Err(invalid("region contains no lattice sites"));
        }
        let mut strides = vec![0usize; dim];
        let mut len = 1usize;
        for a in (0..dim).rev() {
            strides[a] = len;
            len *= (hi[a] - lo[a] + 1) as usize;
        }
        Ok(LatticeDomain { dim, codim, eps, lo, hi, region, strides, len })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn codim(&self) -> usize {
        self.codim
    }

    #[inline]
    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn lo(&self) -> &[i64] {
        &self.lo
    }

    pub fn hi(&self) -> &[i64] {
        &self.hi
    }

    pub fn region(&self) -> &[(T, T)] {
        &self.region
    }

    /// Number of sites along `axis`.
    pub fn extent(&self, axis: usize) -> usize {
        (self.hi[axis] - self.lo[axis] + 1) as usize
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Lebesgue measure of the region.
    pub fn region_volume(&self) -> T {
        self.region.iter().fold(T::one(), |acc, &(a, b)| acc * (b - a))
    }

    #[inline]
    pub fn contains(&self, k: &[i64]) -> bool {
        (0..self.dim).all(|a| k[a] >= self.lo[a] && k[a] <= self.hi[a])
    }

    #[inline]
    pub fn index_of(&self, k: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for a in 0..self.dim {
            if k[a] < self.lo[a] || k[a] > self.hi[a] {
                return None;
            }
            idx += (k[a] - self.lo[a]) as usize * self.strides[a];
        }
        Some(idx)
    }

    /// Writes the integer coordinates of the `idx`-th site into `out`.
    #[inline]
    pub fn site_into(&self, mut idx: usize, out: &mut [i64]) {
        for a in 0..self.dim {
            let q = idx / self.strides[a];
            idx -= q * self.strides[a];
            out[a] = self.lo[a] + q as i64;
        }
    }

    pub fn site(&self, idx: usize) -> Site {
        let mut s = [0; MAX_DIM];
        self.site_into(idx, &mut s);
        s
    }

    /// Sites in enumeration order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<i64>> + '_ {
        (0..self.len).map(move |i| self.site(i)[..self.dim].to_vec())
    }

    /// Physical position `εk`.
    pub fn position(&self, k: &[i64]) -> Vec<T> {
        k[..self.dim].iter().map(|&x| int::<T>(x) * self.eps).collect()
    }

    pub fn with_codim(&self, codim: usize) -> Result<Self> {
        Self::build(self.dim, codim, self.eps, self.lo.clone(), self.hi.clone(), self.region.clone())
    }

    /// Same sites, bounds restricted to `lo..=hi` (a sub-box of index space).
    pub fn sub_box(&self, lo: &[i64], hi: &[i64]) -> Result<Self> {
        Self::from_index_bounds(self.dim, self.codim, self.eps, lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_sites_are_lattice_points_inside_region() {
        let d = LatticeDomain::<f64>::cube(2, 1, 0.5, 3.0, &[0.0, 0.0]).unwrap();
        assert_eq!(d.lo(), &[-3, -3]);
        assert_eq!(d.hi(), &[3, 3]);
        assert_eq!(d.len(), 49);
        for k in d.iter() {
            for (a, &x) in k.iter().enumerate() {
                let p = x as f64 * 0.5;
                assert!(p >= d.region()[a].0 && p <= d.region()[a].1);
            }
        }
    }

    #[test]
    fn enumeration_is_lexicographic_and_invertible() {
        let d = LatticeDomain::<f64>::from_index_bounds(3, 1, 1.0, &[-1, 0, 2], &[1, 2, 3]).unwrap();
        let sites: Vec<Vec<i64>> = d.iter().collect();
        let mut sorted = sites.clone();
        sorted.sort();
        assert_eq!(sites, sorted);
        for (i, s) in sites.iter().enumerate() {
            assert_eq!(d.index_of(s), Some(i));
        }
        assert_eq!(d.index_of(&[2, 0, 2]), None);
    }

    #[test]
    fn cell_cube_counts() {
        let even = LatticeDomain::<f64>::cell(2, 1, 8).unwrap();
        assert_eq!(even.len(), 81);
        let odd = LatticeDomain::<f64>::cell(1, 1, 3).unwrap();
        assert_eq!((odd.lo()[0], odd.hi()[0]), (-1, 1));
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(LatticeDomain::<f64>::from_box(1, 1, 0.0, &[0.0], &[1.0]).is_err());
        assert!(LatticeDomain::<f64>::from_box(1, 1, 1.0, &[0.2], &[0.8]).is_err());
        assert!(LatticeDomain::<f64>::cube(1, 1, 1.0, -1.0, &[0.0]).is_err());
    }
}
