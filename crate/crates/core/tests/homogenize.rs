use lathom::cellsolver::{solve_cell, CellProblem, Layer, SolverOptions};
use lathom::homogenize::{
    default_schedule, default_sweep_grid, estimate_fhom, extrapolate, growth_sandwich, is_admissible, rank_one_probe,
    subadditivity_check, sweep, sweep_csv, tile_count, tile_field, EstimateOptions,
};
use lathom::potentials::{nn_quadratic, two_spring_chain};
use lathom::Mat;

/// Minimum of `Σ_{i=−L/2}^{L/2} c_i (v(i+1) − v(i))²` over `v` equal to `mi` outside
/// `|i| ≤ L/2 − w`, with `c_i = 1` for even and `3` for odd `i`, by the Thomas algorithm.
fn two_spring_oracle(l: i64, w: i64, m: f64) -> f64 {
    let c = |i: i64| if i.rem_euclid(2) == 0 { 1.0 } else { 3.0 };
    let (lo, hi) = (-l / 2 + w, l / 2 - w);
    if lo > hi {
        return (-l / 2..=l / 2).map(|i| c(i) * m * m).sum();
    }
    let n = (hi - lo + 1) as usize;
    // Stationarity in v(k): c_{k−1}(v_k − v_{k−1}) − c_k(v_{k+1} − v_k) = 0.
    let mut diag = vec![0.0; n];
    let mut sub = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for s in 0..n {
        let k = lo + s as i64;
        diag[s] = c(k - 1) + c(k);
        if s > 0 {
            sub[s] = -c(k - 1);
        } else {
            rhs[s] += c(k - 1) * m * (k - 1) as f64;
        }
        if s + 1 < n {
            sup[s] = -c(k);
        } else {
            rhs[s] += c(k) * m * (k + 1) as f64;
        }
    }
    for s in 1..n {
        let f = sub[s] / diag[s - 1];
        diag[s] -= f * sup[s - 1];
        rhs[s] -= f * rhs[s - 1];
    }
    let mut v = vec![0.0; n];
    v[n - 1] = rhs[n - 1] / diag[n - 1];
    for s in (0..n - 1).rev() {
        v[s] = (rhs[s] - sup[s] * v[s + 1]) / diag[s];
    }
    let at = |i: i64| if (lo..=hi).contains(&i) { v[(i - lo) as usize] } else { m * i as f64 };
    (-l / 2..=l / 2).map(|i| c(i) * (at(i + 1) - at(i)).powi(2)).sum()
}

#[test]
fn two_spring_chain_reaches_harmonic_mean() {
    let pot = two_spring_chain::<f64>().unwrap();
    let m = Mat::from_rows(&[&[1.0]]);
    let schedule = [8, 16, 32, 64];
    let est = estimate_fhom(&pot, &m, &schedule, &EstimateOptions::default()).unwrap();
    for e in &est.schedule {
        let oracle = two_spring_oracle(e.side as i64, e.layer as i64, 1.0) / e.side as f64;
        assert!((e.value - oracle).abs() <= 1e-7, "L={} {} vs {oracle}", e.side, e.value);
    }
    assert!((est.f_hom - 1.5).abs() <= 0.015, "{}", est.f_hom);
    assert!(est.schedule.iter().all(|e| e.value <= e.affine_value + 1e-12));
}

#[test]
fn tridiagonal_oracle_is_exact_for_constant_stiffness_data() {
    // With no free sites the oracle is the affine energy: 5 sites, stiffnesses 1,3,1,3,1 at m = 1.
    assert_eq!(two_spring_oracle(4, 3, 1.0), 9.0);
    let pot = two_spring_chain::<f64>().unwrap();
    let sol =
        solve_cell(&pot, &Mat::from_rows(&[&[0.5]]), 20, Layer::Fixed(2), &SolverOptions::default(), None).unwrap();
    assert!((sol.energy - two_spring_oracle(20, 2, 0.5)).abs() < 1e-9);
}

#[test]
fn tiling_is_admissible_and_subadditive() {
    let cases = [
        (nn_quadratic::<f64>(2, 1).unwrap(), Mat::from_rows(&[&[0.7, -0.4]])),
        (two_spring_chain::<f64>().unwrap(), Mat::from_rows(&[&[1.0]])),
    ];
    for (pot, m) in &cases {
        let rep = subadditivity_check(pot, m, 8, 32, Layer::Sqrt, &SolverOptions::default()).unwrap();
        assert!(rep.tiled_admissible);
        assert_eq!(rep.tiles_per_axis, 3);
        let tol = 0.05 * (m.frobenius_sq() + 1.0);
        assert!(rep.f_large <= rep.tiled_bound + tol, "{rep:?}");
        assert!(rep.residual <= 1e-7, "{rep:?}");
    }
}

#[test]
fn tiled_field_keeps_frozen_sites_exact() {
    let pot = two_spring_chain::<f64>().unwrap();
    let m = Mat::from_rows(&[&[0.3]]);
    let small = solve_cell(&pot, &m, 8, Layer::Fixed(1), &SolverOptions::default(), None).unwrap();
    let v = tile_field(&small.field, 8, Layer::Fixed(1), 40, Layer::Fixed(2), &m).unwrap();
    assert!(is_admissible(&CellProblem::new(&pot, &m, 40, Layer::Fixed(2)).unwrap(), &v));
    assert!(tile_field(&small.field, 8, Layer::Fixed(1), 8, Layer::Fixed(2), &m).is_err());
    assert_eq!(tile_count(8, 32), 3);
    assert_eq!(tile_count(4, 4), 0);
}

#[test]
fn extrapolation_recovers_model_data() {
    let model = |l: f64, w: f64| 2.0 + 0.3 * w + 0.7 / l;
    let points: Vec<(f64, f64, f64)> =
        [8.0, 16.0, 32.0, 64.0].iter().map(|&l: &f64| (l, 2.0 * l.sqrt().floor() / (l + 1.0), 0.0)).collect();
    let points: Vec<_> = points.into_iter().map(|(l, w, _)| (l, w, model(l, w))).collect();
    let (f, _) = extrapolate(&points, 0.0);
    assert!((f - 2.0).abs() < 1e-9, "{f}");
}

#[test]
fn sandwich_and_symmetry_in_one_dimension() {
    let pot = two_spring_chain::<f64>().unwrap();
    let grid = default_sweep_grid::<f64>(1, 1);
    let entries = sweep(&pot, &grid, &[8, 16, 32], &EstimateOptions::default(), None).unwrap();
    for e in &entries {
        let est = e.estimate.as_ref().unwrap();
        let norm = e.m[0].abs();
        assert!(growth_sandwich(est.f_hom, norm, 2.0, 1.0, 3.0, 1e-9), "{:?}", e.m);
    }
    // The grid holds ±1/2, ±1, ±2 through the stretch and shear directions.
    for (a, b) in [(1, 7), (2, 8), (3, 9)] {
        let (x, y) = (entries[a].estimate.as_ref().unwrap(), entries[b].estimate.as_ref().unwrap());
        assert_eq!(entries[a].m[0], -entries[b].m[0]);
        assert!((x.f_hom - y.f_hom).abs() <= 2.0 * x.error.max(y.error) + 1e-12);
    }
    let zero = entries[0].estimate.as_ref().unwrap();
    assert_eq!(zero.f_hom, 0.0);
}

#[test]
fn sweep_resumes_without_recomputing() {
    let dir = tempfile::tempdir().unwrap();
    let record = dir.path().join("sweep.jsonl");
    let pot = two_spring_chain::<f64>().unwrap();
    let grid = default_sweep_grid::<f64>(1, 1);
    let first = sweep(&pot, &grid[..4], &[8, 16], &EstimateOptions::default(), Some(&record)).unwrap();
    let lines = std::fs::read_to_string(&record).unwrap().lines().count();
    assert_eq!(lines, 4);
    let second = sweep(&pot, &grid, &[8, 16], &EstimateOptions::default(), Some(&record)).unwrap();
    assert_eq!(std::fs::read_to_string(&record).unwrap().lines().count(), grid.len());
    assert_eq!(&second[..4], &first[..]);
    let csv = sweep_csv(&second).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * grid.len());
    assert!(csv.starts_with("m0,L,layer,F_L"));
}

#[test]
fn schedule_must_respect_the_period() {
    let pot = two_spring_chain::<f64>().unwrap();
    let m = Mat::from_rows(&[&[1.0]]);
    assert!(estimate_fhom(&pot, &m, &[7, 16], &EstimateOptions::default()).is_err());
    assert!(estimate_fhom(&pot, &m, &[16, 8], &EstimateOptions::default()).is_err());
    assert_eq!(default_schedule(2), vec![8, 16, 32, 64]);
}

#[test]
fn quadratic_density_has_no_rank_one_violations() {
    let pot = nn_quadratic::<f64>(2, 1).unwrap();
    let m1 = Mat::from_rows(&[&[1.0, 0.0]]);
    let m2 = Mat::from_rows(&[&[-1.0, 0.5]]);
    let res = rank_one_probe(&pot, &[(m1, m2)], &[0.25, 0.5, 0.75], &[8, 16], &EstimateOptions::default()).unwrap();
    assert_eq!(res.violations, 0);
    assert!(res.segments[0].max_gap <= 1e-9);
}
