use proptest::prelude::*;

use lathom::cellsolver::{solve_cell, CellProblem, Layer, SolverOptions};
use lathom::homogenize::{is_admissible, tile_count, tile_field};
use lathom::lattice::{
    blend, build_path, difference_quotient, path_constant, path_power_inequality_gap, CutoffFunction, DirectionOffset,
    Extension, LatticeDomain, LatticeField, ShiftedProbe,
};
use lathom::potentials::{energy, pair_family_default, two_spring_chain, MultibodyPotential};
use lathom::Mat;

fn cube(dim: usize, codim: usize, eps: f64, r: i64) -> LatticeDomain<f64> {
    LatticeDomain::from_index_bounds(dim, codim, eps, &vec![-r; dim], &vec![r; dim]).unwrap()
}

fn field(d: &LatticeDomain<f64>, values: &[f64]) -> LatticeField<f64> {
    let n = d.len() * d.codim();
    LatticeField::from_values(d.clone(), values.iter().cycle().take(n).copied().collect()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blend_quotients_split_exactly(
        zs in prop::collection::vec(-3.0f64..3.0, 50),
        ws in prop::collection::vec(-3.0f64..3.0, 47),
        ps in prop::collection::vec(0.0f64..=1.0, 43),
        eps in prop::sample::select(vec![1.0, 0.5, 0.25]),
    ) {
        let d = cube(2, 2, eps, 3);
        let (z, w) = (field(&d, &zs), field(&d, &ws));
        let psi_d = d.with_codim(1).unwrap();
        let psi = CutoffFunction::from_values(psi_d.clone(), ps.iter().cycle().take(psi_d.len()).copied().collect()).unwrap();
        let v = blend(&z, &w, &psi).unwrap();
        let psi_f = psi.to_field().unwrap();
        let ext = Extension::Strict;
        for k in d.iter() {
            for axis in 0..2 {
                let e = DirectionOffset::unit(2, axis);
                let mut next = k.clone();
                next[axis] += 1;
                if !d.contains(&next) {
                    continue;
                }
                let lhs = difference_quotient(&v.probe(&ext), &k, &e).unwrap();
                let dz = difference_quotient(&z.probe(&ext), &k, &e).unwrap();
                let dw = difference_quotient(&w.probe(&ext), &k, &e).unwrap();
                let dpsi = difference_quotient(&psi_f.probe(&ext), &k, &e).unwrap()[0];
                let s = psi.value(&k).unwrap();
                let (zn, wn) = (z.get(&next).unwrap(), w.get(&next).unwrap());
                for c in 0..2 {
                    let rhs = s * dz[c] + (1.0 - s) * dw[c] + dpsi * (zn[c] - wn[c]);
                    prop_assert!(rel(lhs[c], rhs) <= 1e-12, "{} vs {}", lhs[c], rhs);
                }
            }
        }
    }

    #[test]
    fn paths_telescope(xi in prop::collection::vec(-10i64..=10, 1..=3), j in prop::collection::vec(-5i64..=5, 3)) {
        prop_assume!(xi.iter().any(|&x| x != 0));
        let off = DirectionOffset::new(xi.clone()).unwrap();
        let path = build_path(&j, &off);
        prop_assert_eq!(path.steps.len() as i64, off.l1());
        prop_assert_eq!(path.visited.len(), path.steps.len() + 1);
        let end: Vec<i64> = j[..xi.len()].iter().zip(&xi).map(|(a, b)| a + b).collect();
        prop_assert_eq!(path.visited.last().unwrap(), &end);
        for (h, s) in path.steps.iter().enumerate() {
            let mut next = path.visited[h].clone();
            next[s.axis] += s.sign;
            prop_assert_eq!(&path.visited[h + 1], &next);
            prop_assert_eq!(s.sign, xi[s.axis].signum());
        }
    }

    #[test]
    fn path_power_inequality_holds(
        vals in prop::collection::vec(-2.0f64..2.0, 30),
        xi in prop::collection::vec(-3i64..=3, 2),
        p in 1.0f64..4.0,
    ) {
        prop_assume!(xi.iter().any(|&x| x != 0));
        let d = cube(2, 1, 0.5, 3);
        let f = field(&d, &vals);
        let off = DirectionOffset::new(xi).unwrap();
        let gap = path_power_inequality_gap(&f.probe(&Extension::Strict), &[0, 0], &off, p, path_constant(p, 2)).unwrap();
        prop_assert!(gap >= -1e-10, "{gap}");
    }

    #[test]
    fn pair_energy_ignores_constant_shifts_and_sign(
        vals in prop::collection::vec(-2.0f64..2.0, 40),
        shift in prop::collection::vec(-8.0f64..8.0, 2),
    ) {
        let pot = pair_family_default::<f64>(2).unwrap();
        let d = cube(2, 2, 0.25, 4);
        let inner = cube(2, 2, 0.25, 2);
        let f = field(&d, &vals);
        let ext = Extension::Strict;
        let e0 = energy(&pot, &f.probe(&ext), &inner).unwrap();
        let probe = f.probe(&ext);
        let shifted = ShiftedProbe { base: &probe, shift: shift.clone() };
        let e1 = energy(&pot, &shifted, &inner).unwrap();
        prop_assert!(rel(e0, e1) <= 1e-9, "{e0} vs {e1}");
        let neg = f.combine(-1.0, &f, 0.0).unwrap();
        let e2 = energy(&pot, &neg.probe(&ext), &inner).unwrap();
        prop_assert!(rel(e0, e2) <= 1e-12);
    }

    #[test]
    fn cauchy_born_value_is_two_homogeneous(a in -3.0f64..3.0, b in -3.0f64..3.0, t in 0.0f64..4.0) {
        let pot = pair_family_default::<f64>(1).unwrap();
        let m = Mat::from_rows(&[&[a, b]]);
        let base = pot.cauchy_born(&m).unwrap();
        let scaled = pot.cauchy_born(&m.scale(t)).unwrap();
        prop_assert!(rel(scaled, t * t * base) <= 1e-12);
        prop_assert!(base <= pot.cauchy_born_constant().unwrap() * (m.frobenius_sq() + 1.0));
    }

    #[test]
    fn solver_never_exceeds_affine_energy(m in -3.0f64..3.0, half in 2usize..20) {
        let pot = two_spring_chain::<f64>().unwrap();
        let sol = solve_cell(&pot, &Mat::from_rows(&[&[m]]), 2 * half, Layer::Sqrt, &SolverOptions::default(), None).unwrap();
        prop_assert!(sol.per_volume_energy <= sol.affine_per_volume_energy + 1e-12);
        prop_assert!(sol.per_volume_energy >= 1.5 * m * m * (1.0 - 1e-9));
    }

    #[test]
    fn tiled_fields_are_admissible(l in 2usize..8, extra in 0usize..20, m in -2.0f64..2.0) {
        let s = 2 * l + extra;
        prop_assume!(tile_count(l, s) > 0);
        let pot = two_spring_chain::<f64>().unwrap();
        let (l, s) = (2 * l, 2 * s);
        let mat = Mat::from_rows(&[&[m]]);
        let small = solve_cell(&pot, &mat, l, Layer::Sqrt, &SolverOptions::default(), None).unwrap();
        if let Ok(v) = tile_field(&small.field, l, Layer::Sqrt, s, Layer::Sqrt, &mat) {
            prop_assert!(is_admissible(&CellProblem::new(&pot, &mat, s, Layer::Sqrt).unwrap(), &v));
        }
    }

    #[test]
    fn hadamard_gap_is_nonnegative(cols in prop::collection::vec(-2.0f64..2.0, 9), p in 1.0f64..5.0) {
        let c: Vec<&[f64]> = cols.chunks(3).collect();
        let det = lathom::matrix::det_columns(&c).abs();
        let mean: f64 = c.iter().map(|v| lathom::scalar::norm(v).powf(p)).sum::<f64>() / 3.0;
        prop_assert!(mean - det.powf(p / 3.0) >= -1e-10);
    }
}
