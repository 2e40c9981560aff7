use serde::Serialize;

use crate::cellsolver::{solve_cell, CellProblem, Layer, SolverOptions};
use crate::error::{invalid, LathomError, Result};
use crate::lattice::{LatticeDomain, LatticeField, Site, MAX_DIM};
use crate::matrix::Mat;
use crate::potentials::MultibodyPotential;
use crate::scalar::{to_f64, Scalar};

/// Tiles per axis, `⌊(S − √S)/L⌋`.
pub fn tile_count(l: usize, s: usize) -> usize {
    let s_f = s as f64;
    ((s_f - s_f.sqrt()) / l as f64).floor().max(0.0) as usize
}

/// `v_S(i) = u_L(i − c) + Mc` on the tiles `Q_L(c)`, `c = L(t − (K−1)/2)`, and `Mi` elsewhere.
///
/// Sites frozen in `Q_L` keep the target's own affine values, which agree with
/// `M(i − c) + Mc` without rounding.
///
/// Fails unless every non-affine site of the tiles is free in `Q_S`, i.e.
/// `KL/2 − m_L ≤ S/2 − m_S`.
pub fn tile_field<T: Scalar>(
    u_l: &LatticeField<T>,
    l: usize,
    layer_l: Layer,
    s: usize,
    layer_s: Layer,
    m: &Mat<T>,
) -> Result<LatticeField<T>> {
    let src = u_l.domain();
    let dim = src.dim();
    let n = src.codim();
    if src != &LatticeDomain::cell(dim, n, l)? {
        return Err(invalid("source field does not live on Q_L"));
    }
    if m.rows() != n || m.cols() != dim {
        return Err(LathomError::DimensionMismatch {
            what: "slope shape",
            expected: n * dim,
            found: m.rows() * m.cols(),
        });
    }
    if s <= l {
        return Err(invalid("target cube must be larger than the source cube"));
    }
    let k = tile_count(l, s) as i64;
    let (li, si) = (l as i64, s as i64);
    let (hi_l, hi_s) = (li / 2, si / 2);
    if (k - 1) * li % 2 != 0 {
        return Err(LathomError::NotApplicable("tile centres are not lattice sites".into()));
    }
    let outer = (k - 1) * li / 2 + hi_l;
    let wl = layer_l.width(l) as i64;
    let moving = outer - wl;
    if k == 0 || outer > hi_s || moving > hi_s - layer_s.width(s) as i64 {
        return Err(LathomError::NotApplicable(format!(
            "tiles of side {l} do not fit inside the free region of Q_{s}"
        )));
    }
    let target = LatticeDomain::cell(dim, n, s)?;
    let mut v = LatticeField::affine(target.clone(), m)?;
    let mut k_site: Site = [0; MAX_DIM];
    let mut c: Site = [0; MAX_DIM];
    let mut mc = vec![T::zero(); n];
    let tiles = (k.max(0) as usize).pow(dim as u32);
    for t in 0..tiles {
        let mut q = t;
        for a in (0..dim).rev() {
            let ta = (q % k as usize) as i64;
            q /= k as usize;
            c[a] = (2 * ta - (k - 1)) * li / 2;
        }
        m.apply_int(&c[..dim], T::one(), &mut mc);
        for idx in 0..src.len() {
            src.site_into(idx, &mut k_site);
            if (0..dim).any(|a| k_site[a] - wl < src.lo()[a] || k_site[a] + wl > src.hi()[a]) {
                continue;
            }
            for a in 0..dim {
                k_site[a] += c[a];
            }
            let dst = v.value_mut(target.index_of(&k_site[..dim]).expect("tile inside target"));
            for ((d, &x), &o) in dst.iter_mut().zip(u_l.value(idx)).zip(&mc) {
                *d = x + o;
            }
        }
    }
    Ok(v)
}

#[derive(Clone, Debug, Serialize)]
pub struct SubadditivityReport {
    pub small: usize,
    pub large: usize,
    pub tiles_per_axis: usize,
    pub f_small: f64,
    pub f_large: f64,
    /// `E_S(v_S)/S^N`.
    pub tiled_bound: f64,
    /// `(L/S)^N K^N F_L`.
    pub main_term: f64,
    /// `tiled_bound − main_term`.
    pub correction: f64,
    /// `F_S − tiled_bound`; nonpositive up to solver tolerance.
    pub residual: f64,
    pub tiled_admissible: bool,
}

/// Solves on `Q_L` and `Q_S`, tiles the small minimizer and compares.
pub fn subadditivity_check<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    m: &Mat<T>,
    l: usize,
    s: usize,
    layer: Layer,
    opts: &SolverOptions<T>,
) -> Result<SubadditivityReport> {
    if let Some(t) = pot.period() {
        if l % t != 0 || s % t != 0 {
            return Err(invalid(format!("sides must be multiples of the period {t}")));
        }
    }
    let small = solve_cell(pot, m, l, layer, opts, None)?;
    let large = solve_cell(pot, m, s, layer, opts, None)?;
    let v = tile_field(&small.field, l, layer, s, layer, m)?;
    let big = CellProblem::new(pot, m, s, layer)?;
    let admissible = is_admissible(&big, &v);
    let tiled = big.energy_of(&v)? / big.volume();
    let k = tile_count(l, s);
    let dim = pot.dim() as i32;
    let main = (l as f64 / s as f64).powi(dim) * (k as f64).powi(dim) * to_f64(small.per_volume_energy);
    let tiled = to_f64(tiled);
    Ok(SubadditivityReport {
        small: l,
        large: s,
        tiles_per_axis: k,
        f_small: to_f64(small.per_volume_energy),
        f_large: to_f64(large.per_volume_energy),
        tiled_bound: tiled,
        main_term: main,
        correction: tiled - main,
        residual: to_f64(large.per_volume_energy) - tiled,
        tiled_admissible: admissible,
    })
}

/// `true` if `v` equals the affine field on every frozen site of the problem.
pub fn is_admissible<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    problem: &CellProblem<'_, T, P>,
    v: &LatticeField<T>,
) -> bool {
    if v.domain() != problem.domain() {
        return false;
    }
    let affine = problem.affine_field();
    let free = problem.free_sites();
    let mut fi = 0;
    for idx in 0..v.domain().len() {
        if fi < free.len() && free[fi] == idx {
            fi += 1;
            continue;
        }
        if v.value(idx) != affine.value(idx) {
            return false;
        }
    }
    true
}

/// Share of cell sites frozen by a layer of width `width`.
pub fn frozen_fraction(dim: usize, side: usize, width: usize) -> f64 {
    let total = (side + 1) as f64;
    let free = (side as f64 + 1.0 - 2.0 * width as f64).max(0.0);
    1.0 - (free / total).powi(dim as i32)
}
