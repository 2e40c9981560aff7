use crate::lattice::domain::{Site, MAX_DIM};
use crate::lattice::field::LatticeField;
use crate::scalar::{int, lit, norm_pow, Scalar};

/// Piecewise-constant interpolation: `u(x) = u(z_x)` with `z_x` the nearest lattice
/// point, ties going to the lexicographically smaller point, and `0` off the domain.
pub struct Embedding<'a, T> {
    field: &'a LatticeField<T>,
}

pub fn piecewise_constant_embedding<T: Scalar>(field: &LatticeField<T>) -> Embedding<'_, T> {
    Embedding { field }
}

impl<T: Scalar> Embedding<'_, T> {
    /// Index of the nearest site: `k = ⌈x/ε − 1/2⌉` per axis.
    pub fn nearest_site(&self, x: &[T]) -> Vec<i64> {
        let eps = self.field.domain().eps();
        let half: T = lit(0.5);
        x.iter().map(|&c| (c / eps - half).ceil().to_i64().unwrap_or(i64::MAX)).collect()
    }

    pub fn eval(&self, x: &[T]) -> Vec<T> {
        let k = self.nearest_site(x);
        match self.field.get(&k) {
            Some(v) => v.to_vec(),
            None => vec![T::zero(); self.field.domain().codim()],
        }
    }

    /// `‖u‖_{L^p(region)}`, integrating exactly over the Voronoi cells clipped to `region`.
    pub fn lp_norm(&self, p: T, region: &[(T, T)]) -> T {
        let d = self.field.domain();
        let (dim, eps) = (d.dim(), d.eps());
        let half: T = lit(0.5);
        let mut k: Site = [0; MAX_DIM];
        let mut total = T::zero();
        for idx in 0..d.len() {
            d.site_into(idx, &mut k);
            let mut vol = T::one();
            for a in 0..dim {
                let c = int::<T>(k[a]);
                let lo = ((c - half) * eps).max(region[a].0);
                let hi = ((c + half) * eps).min(region[a].1);
                vol *= (hi - lo).max(T::zero());
            }
            if vol > T::zero() {
                total += norm_pow(self.field.value(idx), p) * vol;
            }
        }
        total.powf(T::one() / p)
    }

    /// `lp_norm` over the domain's own region.
    pub fn lp_norm_on_region(&self, p: T) -> T {
        let region = self.field.domain().region().to_vec();
        self.lp_norm(p, &region)
    }
}
