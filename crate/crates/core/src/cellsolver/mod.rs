//! Cell problems `F_L(M) = L^{−N} inf { Σ_{i ∈ Z^N ∩ Q_L} φ_i(v) : v ∈ A^{M,m}(Q_L) }`.
//!
//! The admissible class freezes every site whose `m`-neighbourhood leaves the
//! cube to the affine value `Mi`. Homogeneous quadratic densities are minimized
//! by conjugate gradients, everything else by L-BFGS; the brute-force oracle
//! certifies small instances independently.

mod minimize;
mod oracle;
mod problem;

pub use oracle::{brute_oracle, OracleMode, OracleResult, DENSE_LIMIT, GRID_LIMIT};
pub use problem::{CellProblem, Layer};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::lattice::LatticeField;
use crate::matrix::Mat;
use crate::potentials::MultibodyPotential;
use crate::scalar::{lit, to_f64, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Conjugate gradients on the stationarity system; quadratic densities only.
    ExactQuadratic,
    /// L-BFGS with backtracking.
    Iterative,
    /// [`brute_oracle`]; `f64` only.
    BruteOracle,
}

#[derive(Clone, Debug)]
pub struct SolverOptions<T> {
    /// `None` picks exact-quadratic for quadratic densities and iterative otherwise.
    pub method: Option<Method>,
    /// Sup-norm tolerance on the free gradient; defaults to `1e−8` (quadratic) or `1e−6`.
    pub gtol: Option<T>,
    /// Defaults to `10 · #free`.
    pub max_iter: Option<usize>,
    /// Extra iterative runs from seeded perturbations of the start; the lowest value wins.
    pub restarts: usize,
    pub seed: u64,
}

impl<T> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions { method: None, gtol: None, max_iter: None, restarts: 0, seed: 0 }
    }
}

impl<T: Scalar> SolverOptions<T> {
    pub fn resolved_method<P: MultibodyPotential<T> + ?Sized>(&self, pot: &P) -> Method {
        self.method.unwrap_or(if pot.is_quadratic() { Method::ExactQuadratic } else { Method::Iterative })
    }

    pub fn resolved_gtol<P: MultibodyPotential<T> + ?Sized>(&self, pot: &P) -> T {
        self.gtol.unwrap_or(if pot.is_quadratic() { lit(1e-8) } else { lit(1e-6) })
    }
}

/// A reached minimum. `per_volume_energy` is an upper bound on `F_L(M)`; it is exact up
/// to `gtol` for convex densities only.
#[derive(Clone, Debug)]
pub struct CellSolution<T> {
    pub field: LatticeField<T>,
    pub energy: T,
    pub per_volume_energy: T,
    pub affine_per_volume_energy: T,
    pub iterations: usize,
    pub grad_sup: T,
    pub converged: bool,
    pub method: Method,
    pub side: usize,
    pub layer: usize,
    pub free: usize,
    pub wall_time: f64,
}

/// Minimizes the cell problem of side `side` with slope `m`, optionally from `warm`.
pub fn solve_cell<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    m: &Mat<T>,
    side: usize,
    layer: Layer,
    opts: &SolverOptions<T>,
    warm: Option<&LatticeField<T>>,
) -> Result<CellSolution<T>> {
    let problem = CellProblem::new(pot, m, side, layer)?;
    solve(&problem, opts, warm)
}

pub fn solve<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    problem: &CellProblem<'_, T, P>,
    opts: &SolverOptions<T>,
    warm: Option<&LatticeField<T>>,
) -> Result<CellSolution<T>> {
    let start = Instant::now();
    let pot = problem.potential();
    let method = opts.resolved_method(pot);
    let gtol = opts.resolved_gtol(pot);
    let n = problem.num_free();
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));
    let volume = problem.volume();
    let affine_energy = problem.objective(&vec![T::zero(); n])?;
    let x0 = match warm {
        Some(f) => problem.coords_of(f)?,
        None => vec![T::zero(); n],
    };

    let (x, iterations, converged) = if n == 0 {
        (Vec::new(), 0, true)
    } else {
        match method {
            Method::ExactQuadratic => {
                if !pot.is_quadratic() {
                    return Err(invalid("exact-quadratic solver needs a homogeneous quadratic density"));
                }
                let mut g0 = vec![T::zero(); n];
                problem.objective_gradient(&vec![T::zero(); n], &mut g0)?;
                let rhs: Vec<T> = g0.iter().map(|&v| -v).collect();
                let (x, it, _, ok) =
                    minimize::conjugate_gradient(|v, out| problem.hessian_apply(v, out), &rhs, x0, gtol, max_iter)?;
                (x, it, ok)
            }
            Method::Iterative => {
                let run = |x: Vec<T>| minimize::lbfgs(|v, g| problem.objective_gradient(v, g), x, gtol, max_iter, 10);
                let mut best = run(x0.clone())?;
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                let amp = lit::<T>(0.1) * (T::one() + problem.slope().frobenius());
                for _ in 0..opts.restarts {
                    let x: Vec<T> = x0.iter().map(|&v| v + amp * lit::<T>(rng.gen_range(-1.0..1.0))).collect();
                    let out = run(x)?;
                    if out.value < best.value {
                        best = out;
                    }
                }
                (best.x, best.iterations, best.converged)
            }
            Method::BruteOracle => return Err(invalid("use brute_oracle for the oracle method")),
        }
    };

    let field = problem.field_from(&x);
    let mut g = vec![T::zero(); n];
    let energy = problem.objective_gradient(&x, &mut g)?;
    let grad_sup = minimize::sup(&g);
    Ok(CellSolution {
        field,
        energy,
        per_volume_energy: energy / volume,
        affine_per_volume_energy: affine_energy / volume,
        iterations,
        grad_sup,
        converged: converged && grad_sup <= gtol * lit(10.0),
        method,
        side: problem.side(),
        layer: problem.layer(),
        free: n,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Oracle solve packaged as a [`CellSolution`].
pub fn solve_with_oracle<P: MultibodyPotential<f64> + ?Sized>(
    problem: &CellProblem<'_, f64, P>,
    mode: OracleMode,
) -> Result<CellSolution<f64>> {
    let start = Instant::now();
    let res = brute_oracle(problem, mode)?;
    let n = problem.num_free();
    let volume = problem.volume();
    let mut g = vec![0.0; n];
    let energy = problem.objective_gradient(&res.x, &mut g)?;
    Ok(CellSolution {
        field: problem.field_from(&res.x),
        energy,
        per_volume_energy: energy / volume,
        affine_per_volume_energy: problem.objective(&vec![0.0; n])? / volume,
        iterations: 0,
        grad_sup: minimize::sup(&g),
        converged: true,
        method: Method::BruteOracle,
        side: problem.side(),
        layer: problem.layer(),
        free: n,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub side: usize,
    pub layer: usize,
    pub value: f64,
    pub iterations: usize,
    pub grad_sup: f64,
    pub converged: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InfimumCurve {
    pub points: Vec<CurvePoint>,
    /// `F_{L_{k+1}} − F_{L_k}`.
    pub differences: Vec<f64>,
    /// `f` from fitting `F_L = f + b/L` through the last two points.
    pub richardson: Option<f64>,
}

/// `(L, F_L(M))` over an increasing schedule of sides.
pub fn dirichlet_infimum_curve<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    m: &Mat<T>,
    layer: Layer,
    sides: &[usize],
    opts: &SolverOptions<T>,
) -> Result<InfimumCurve> {
    if sides.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("schedule must be strictly increasing"));
    }
    let mut points = Vec::with_capacity(sides.len());
    for &l in sides {
        let s = solve_cell(pot, m, l, layer, opts, None)?;
        points.push(CurvePoint {
            side: l,
            layer: s.layer,
            value: to_f64(s.per_volume_energy),
            iterations: s.iterations,
            grad_sup: to_f64(s.grad_sup),
            converged: s.converged,
        });
    }
    let differences = points.windows(2).map(|w| w[1].value - w[0].value).collect();
    let richardson = match points.as_slice() {
        [.., a, b] => {
            let (la, lb) = (a.side as f64, b.side as f64);
            Some((lb * b.value - la * a.value) / (lb - la))
        }
        _ => None,
    };
    Ok(InfimumCurve { points, differences, richardson })
}
