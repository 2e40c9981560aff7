use nalgebra::{DMatrix, DVector};

use crate::cellsolver::problem::CellProblem;
use crate::error::{LathomError, Result};
use crate::potentials::MultibodyPotential;

/// Largest number of free scalars for the dense quadratic oracle.
pub const DENSE_LIMIT: usize = 400;
/// Largest number of free scalars for grid enumeration.
pub const GRID_LIMIT: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    /// Dense solve for homogeneous quadratic densities, grid otherwise.
    Auto,
    Dense,
    Grid,
}

/// Oracle minimum: the free coordinates and the total energy.
pub struct OracleResult {
    pub x: Vec<f64>,
    pub energy: f64,
}

/// Minimizes the cell problem without reusing the iterative solvers.
///
/// `Dense` recovers the quadratic objective `E(x) = E₀ + bᵀx + ½xᵀAx` from
/// energy evaluations and solves `Ax = −b` by LU. `Grid` evaluates the energy on
/// a tensor grid around the current best point and repeatedly zooms in.
pub fn brute_oracle<P: MultibodyPotential<f64> + ?Sized>(
    problem: &CellProblem<'_, f64, P>,
    mode: OracleMode,
) -> Result<OracleResult> {
    let n = problem.num_free();
    if n == 0 {
        return Ok(OracleResult { x: Vec::new(), energy: problem.objective(&[])? });
    }
    let dense = match mode {
        OracleMode::Dense => true,
        OracleMode::Grid => false,
        OracleMode::Auto => problem.potential().is_quadratic(),
    };
    if dense {
        if n > DENSE_LIMIT {
            return Err(LathomError::InstanceTooLarge { free: n, limit: DENSE_LIMIT });
        }
        dense_solve(problem, n)
    } else {
        if n > GRID_LIMIT {
            return Err(LathomError::InstanceTooLarge { free: n, limit: GRID_LIMIT });
        }
        grid_zoom(problem, n)
    }
}

fn dense_solve<P: MultibodyPotential<f64> + ?Sized>(
    problem: &CellProblem<'_, f64, P>,
    n: usize,
) -> Result<OracleResult> {
    let e = |x: &[f64]| problem.objective(x);
    let unit = |i: usize, s: f64| {
        let mut v = vec![0.0; n];
        v[i] = s;
        v
    };
    let e0 = e(&vec![0.0; n])?;
    let mut e1 = vec![0.0; n];
    let mut a = DMatrix::<f64>::zeros(n, n);
    let mut b = DVector::<f64>::zeros(n);
    for i in 0..n {
        e1[i] = e(&unit(i, 1.0))?;
        let e2 = e(&unit(i, 2.0))?;
        a[(i, i)] = e2 - 2.0 * e1[i] + e0;
        b[i] = e1[i] - e0 - 0.5 * a[(i, i)];
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            v[j] = 1.0;
            let aij = e(&v)? - e1[i] - e1[j] + e0;
            a[(i, j)] = aij;
            a[(j, i)] = aij;
        }
    }
    let x = a.lu().solve(&(-b)).ok_or_else(|| LathomError::NotApplicable("quadratic form is singular".into()))?;
    let x: Vec<f64> = x.iter().copied().collect();
    let energy = e(&x)?;
    Ok(OracleResult { x, energy })
}

fn grid_zoom<P: MultibodyPotential<f64> + ?Sized>(problem: &CellProblem<'_, f64, P>, n: usize) -> Result<OracleResult> {
    let points: usize = if n <= 3 { 9 } else { 5 };
    let mut center = vec![0.0; n];
    let mut best = problem.objective(&center)?;
    let mut half = 2.0 * (1.0 + problem.slope().frobenius()) * (problem.side() as f64).max(1.0) / 2.0;
    let total = points.pow(n as u32);
    let mut x = vec![0.0; n];
    while half > 1e-10 {
        let spacing = 2.0 * half / (points - 1) as f64;
        let mut best_here = center.clone();
        for idx in 0..total {
            let mut q = idx;
            for c in (0..n).rev() {
                x[c] = center[c] - half + spacing * (q % points) as f64;
                q /= points;
            }
            let v = problem.objective(&x)?;
            if v < best {
                best = v;
                best_here.copy_from_slice(&x);
            }
        }
        center = best_here;
        half *= 0.5;
    }
    Ok(OracleResult { x: center, energy: best })
}
