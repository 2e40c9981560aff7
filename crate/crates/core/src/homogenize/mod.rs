//! Estimates of `f_hom(M) = lim_L F_L(M)` from schedules of cell problems, with
//! the tiling construction behind subadditivity and rank-one convexity probes.

mod sweep;
mod tiling;

pub use sweep::{sweep, sweep_csv, SweepEntry};
pub use tiling::{frozen_fraction, is_admissible, subadditivity_check, tile_count, tile_field, SubadditivityReport};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cellsolver::{solve_cell, Layer, SolverOptions};
use crate::error::{invalid, LathomError, Result};
use crate::lattice::LatticeField;
use crate::matrix::Mat;
use crate::potentials::MultibodyPotential;
use crate::scalar::{lit, to_f64, Scalar};

#[derive(Clone, Debug)]
pub struct EstimateOptions<T> {
    pub layer: Layer,
    pub solver: SolverOptions<T>,
    /// Start each solve from the tiled minimizer of the previous side.
    pub warm_start: bool,
}

impl<T> Default for EstimateOptions<T> {
    fn default() -> Self {
        EstimateOptions { layer: Layer::Sqrt, solver: SolverOptions::default(), warm_start: true }
    }
}

/// Cube sides for `estimate_fhom` by lattice dimension.
pub fn default_schedule(dim: usize) -> Vec<usize> {
    match dim {
        1 => vec![8, 16, 32, 64, 128],
        2 => vec![8, 16, 32, 64],
        _ => vec![4, 8, 16],
    }
}

/// Zero plus the stretch `E₀₀`, the normalized diagonal and a shear, each at
/// Frobenius norm 1/2, 1 and 2.
pub fn default_sweep_grid<T: Scalar>(rows: usize, cols: usize) -> Vec<Mat<T>> {
    let mut stretch = Mat::zeros(rows, cols);
    stretch.set(0, 0, T::one());
    let d = rows.min(cols);
    let mut diag = Mat::zeros(rows, cols);
    for k in 0..d {
        diag.set(k, k, T::one() / lit::<T>(d as f64).sqrt());
    }
    let mut shear = Mat::zeros(rows, cols);
    if cols > 1 {
        shear.set(0, cols - 1, T::one());
    } else {
        shear.set(rows - 1, 0, -T::one());
    }
    let mut grid = vec![Mat::zeros(rows, cols)];
    for dir in [stretch, diag, shear] {
        for s in [0.5, 1.0, 2.0] {
            grid.push(dir.scale(lit(s)));
        }
    }
    grid
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub side: usize,
    pub layer: usize,
    pub frozen_fraction: f64,
    /// `F_L(M)`; an upper bound on the cell infimum.
    pub value: f64,
    pub affine_value: f64,
    pub iterations: usize,
    pub grad_sup: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomogenizationEstimate {
    pub m: Vec<f64>,
    pub rows: usize,
    pub cols: usize,
    pub schedule: Vec<ScheduleEntry>,
    /// `f` in `F_L = f + a·m_L/L + b/L`, least squares on the last three sides.
    pub f_hom: f64,
    pub error: f64,
    /// `f` in `F_L = f + b/L` through the last two sides.
    pub fit_inv_l: Option<f64>,
    /// `f` in `F_L = f + b/√L` through the last two sides.
    pub fit_inv_sqrt_l: Option<f64>,
    /// `F_{L_{k+1}} − F_{L_k}`.
    pub differences: Vec<f64>,
    /// `|differences|` is nonincreasing.
    pub differences_shrink: bool,
}

/// Least-squares `f` in `F_L = f + a·φ_L + b/L`; the last value if the fit fails.
fn fit_three(points: &[(f64, f64, f64)]) -> f64 {
    let a = DMatrix::from_fn(points.len(), 3, |r, c| match c {
        0 => 1.0,
        1 => points[r].1,
        _ => 1.0 / points[r].0,
    });
    let b = DVector::from_iterator(points.len(), points.iter().map(|p| p.2));
    match a.svd(true, true).solve(&b, 1e-12) {
        Ok(x) if x[0].is_finite() => x[0],
        _ => points.last().map(|p| p.2).unwrap_or(f64::NAN),
    }
}

fn two_point(points: &[(f64, f64, f64)], g: impl Fn(f64) -> f64) -> Option<f64> {
    match points {
        [.., a, b] => {
            let (ga, gb) = (g(a.0), g(b.0));
            Some((ga * b.2 - gb * a.2) / (ga - gb))
        }
        _ => None,
    }
}

/// Error bar and extrapolation from `(L, m_L/L, F_L)` triples, `m_L` the layer width.
pub fn extrapolate(points: &[(f64, f64, f64)], floor: f64) -> (f64, f64) {
    let n = points.len();
    let (f, err) = match n {
        0 => return (f64::NAN, f64::NAN),
        1 => (points[0].2, points[0].2.abs()),
        2 => {
            let f = two_point(points, |l| 1.0 / l).unwrap_or(points[1].2);
            (f, (points[1].2 - points[0].2).abs())
        }
        3 => {
            let f = fit_three(points);
            (f, (f - two_point(points, |l| 1.0 / l).unwrap_or(f)).abs())
        }
        _ => {
            let f = fit_three(&points[n - 3..]);
            (f, (f - fit_three(&points[n - 4..n - 1])).abs())
        }
    };
    let min = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let err = err.max(floor).max(f - min);
    (f, err)
}

/// Solves the cell problem along `schedule` and extrapolates `f_hom(M)`.
pub fn estimate_fhom<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    m: &Mat<T>,
    schedule: &[usize],
    opts: &EstimateOptions<T>,
) -> Result<HomogenizationEstimate> {
    let period =
        pot.period().ok_or_else(|| LathomError::NotApplicable("the cell formula needs a periodic density".into()))?;
    if schedule.is_empty() || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("schedule must be nonempty and strictly increasing"));
    }
    if let Some(l) = schedule.iter().find(|&&l| l % period != 0) {
        return Err(invalid(format!("side {l} is not a multiple of the period {period}")));
    }
    let mut entries = Vec::with_capacity(schedule.len());
    let mut prev: Option<(usize, LatticeField<T>)> = None;
    for &l in schedule {
        let warm = match (&prev, opts.warm_start) {
            (Some((pl, f)), true) => tile_field(f, *pl, opts.layer, l, opts.layer, m).ok(),
            _ => None,
        };
        let sol = solve_cell(pot, m, l, opts.layer, &opts.solver, warm.as_ref())?;
        entries.push(ScheduleEntry {
            side: l,
            layer: sol.layer,
            frozen_fraction: frozen_fraction(pot.dim(), l, sol.layer),
            value: to_f64(sol.per_volume_energy),
            affine_value: to_f64(sol.affine_per_volume_energy),
            iterations: sol.iterations,
            grad_sup: to_f64(sol.grad_sup),
            converged: sol.converged,
        });
        prev = Some((l, sol.field));
    }
    let points: Vec<(f64, f64, f64)> =
        entries.iter().map(|e| (e.side as f64, e.layer as f64 / e.side as f64, e.value)).collect();
    let floor = 10.0 * to_f64(opts.solver.resolved_gtol(pot));
    let (f_hom, error) = extrapolate(&points, floor);
    let differences: Vec<f64> = entries.windows(2).map(|w| w[1].value - w[0].value).collect();
    let differences_shrink = differences.windows(2).all(|w| w[1].abs() <= w[0].abs() + floor);
    Ok(HomogenizationEstimate {
        m: m.as_slice().iter().map(|&x| to_f64(x)).collect(),
        rows: m.rows(),
        cols: m.cols(),
        schedule: entries,
        f_hom,
        error,
        fit_inv_l: two_point(&points, |l| 1.0 / l),
        fit_inv_sqrt_l: two_point(&points, |l| 1.0 / l.sqrt()),
        differences,
        differences_shrink,
    })
}

/// `c(|M|^p − 1) ≤ f ≤ C(|M|^p + 1)` with the Frobenius norm.
pub fn growth_sandwich(f: f64, m_frobenius: f64, p: f64, c: f64, big_c: f64, tol: f64) -> bool {
    let mp = m_frobenius.powf(p);
    c * (mp - 1.0) <= f + tol && f <= big_c * (mp + 1.0) + tol
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbePoint {
    pub lambda: f64,
    pub value: f64,
    /// `f̂(λM₁ + (1−λ)M₂) − λf̂(M₁) − (1−λ)f̂(M₂)`.
    pub gap: f64,
    pub error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SegmentProbe {
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
    pub points: Vec<ProbePoint>,
    pub max_gap: f64,
    /// Some gap exceeds its error bar.
    pub violated: bool,
}

/// Convexity along rank-one segments, a necessary condition for quasiconvexity.
#[derive(Clone, Debug, Serialize)]
pub struct ConvexityProbeResult {
    pub segments: Vec<SegmentProbe>,
    pub violations: usize,
}

pub fn rank_one_probe<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    pairs: &[(Mat<T>, Mat<T>)],
    lambdas: &[T],
    schedule: &[usize],
    opts: &EstimateOptions<T>,
) -> Result<ConvexityProbeResult> {
    let mut segments = Vec::with_capacity(pairs.len());
    for (m1, m2) in pairs {
        let diff = m1.combine(T::one(), m2, -T::one());
        if !diff.is_rank_one(lit(1e-9)) {
            return Err(invalid("probe endpoints must differ by a rank-one matrix"));
        }
        let e1 = estimate_fhom(pot, m1, schedule, opts)?;
        let e2 = estimate_fhom(pot, m2, schedule, opts)?;
        let mut points = Vec::with_capacity(lambdas.len());
        for &lam in lambdas {
            if !(lam >= T::zero() && lam <= T::one()) {
                return Err(invalid("λ must lie in [0, 1]"));
            }
            let mid = m1.combine(lam, m2, T::one() - lam);
            let e = estimate_fhom(pot, &mid, schedule, opts)?;
            let l = to_f64(lam);
            points.push(ProbePoint {
                lambda: l,
                value: e.f_hom,
                gap: e.f_hom - l * e1.f_hom - (1.0 - l) * e2.f_hom,
                error: e.error + l * e1.error + (1.0 - l) * e2.error,
            });
        }
        let max_gap = points.iter().map(|p| p.gap).fold(f64::NEG_INFINITY, f64::max);
        let violated = points.iter().any(|p| p.gap > p.error);
        segments.push(SegmentProbe {
            m1: m1.as_slice().iter().map(|&x| to_f64(x)).collect(),
            m2: m2.as_slice().iter().map(|&x| to_f64(x)).collect(),
            points,
            max_gap,
            violated,
        });
    }
    let violations = segments.iter().filter(|s| s.violated).count();
    Ok(ConvexityProbeResult { segments, violations })
}
