use rayon::prelude::*;

use crate::error::Result;
use crate::lattice::{LatticeDomain, LatticeField, Probe, Site, MAX_DIM};
use crate::potentials::MultibodyPotential;
use crate::scalar::{pairwise_sum, Scalar};

/// `φ_i` for every site of `sites`, in enumeration order.
pub fn site_values<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    probe: &dyn Probe<T>,
    sites: &LatticeDomain<T>,
) -> Result<Vec<T>> {
    (0..sites.len())
        .into_par_iter()
        .map(|idx| {
            let k = sites.site(idx);
            pot.evaluate(&k[..sites.dim()], probe)
        })
        .collect()
}

/// `F_ε(u, A) = Σ_{i ∈ Z_ε(A)} ε^N φ_i` with a fixed-shape pairwise reduction.
pub fn energy<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    probe: &dyn Probe<T>,
    sites: &LatticeDomain<T>,
) -> Result<T> {
    let values = site_values(pot, probe, sites)?;
    Ok(pairwise_sum(&values) * sites.eps().powi(sites.dim() as i32))
}

/// `∂F_ε(u, A)/∂u(k)` for every `k` of `target`; contributions to sites outside
/// `target` are dropped.
///
/// Sites are processed in slabs along the first axis. Each slab accumulates into
/// its own buffer and the buffers are added in slab order, so the result does
/// not depend on the number of threads.
pub fn gradient<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    probe: &dyn Probe<T>,
    sites: &LatticeDomain<T>,
    target: &LatticeDomain<T>,
) -> Result<LatticeField<T>> {
    let dim = sites.dim();
    let n = target.codim();
    let r = pot.window_radius();
    let plane = target.len() / target.extent(0);
    let weight = sites.eps().powi(dim as i32);
    let slabs: Vec<i64> = (sites.lo()[0]..=sites.hi()[0]).collect();
    let per_slab = sites.len() / sites.extent(0);

    let buffers: Vec<(i64, Vec<T>)> = slabs
        .par_iter()
        .map(|&x0| {
            let row_lo = (x0 - r).max(target.lo()[0]);
            let row_hi = (x0 + r).min(target.hi()[0]);
            if row_lo > row_hi {
                return Ok((row_lo, Vec::new()));
            }
            let rows = (row_hi - row_lo + 1) as usize;
            let offset = (row_lo - target.lo()[0]) as usize * plane;
            let mut buf = vec![T::zero(); rows * plane * n];
            let first = (x0 - sites.lo()[0]) as usize * per_slab;
            let mut sink = |k: &[i64], g: &[T]| {
                if k[0] < row_lo || k[0] > row_hi {
                    return;
                }
                if let Some(idx) = target.index_of(k) {
                    let local = (idx - offset) * n;
                    for (b, &x) in buf[local..local + n].iter_mut().zip(g) {
                        *b += x;
                    }
                }
            };
            let mut k: Site = [0; MAX_DIM];
            for idx in first..first + per_slab {
                sites.site_into(idx, &mut k);
                pot.gradient(&k[..dim], probe, &mut sink)?;
            }
            Ok((row_lo, buf))
        })
        .collect::<Result<_>>()?;

    let mut out = LatticeField::zeros(target.clone());
    let values = out.values_mut();
    for (row_lo, buf) in buffers {
        if buf.is_empty() {
            continue;
        }
        let start = (row_lo - target.lo()[0]) as usize * plane * n;
        for (o, &b) in values[start..start + buf.len()].iter_mut().zip(&buf) {
            *o += b;
        }
    }
    for v in values.iter_mut() {
        *v *= weight;
    }
    Ok(out)
}
