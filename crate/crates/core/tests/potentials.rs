use lathom::lattice::{AffineProbe, DirectionOffset, Extension, LatticeDomain, LatticeField, Probe};
use lathom::potentials::*;
use lathom::Mat;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_field(domain: LatticeDomain<f64>, m: &Mat<f64>, amp: f64, seed: u64) -> LatticeField<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = domain.eps();
    LatticeField::from_fn(domain, |k, out| {
        m.apply_int(k, eps, out);
        for o in out.iter_mut() {
            *o += amp * rng.gen_range(-1.0..1.0);
        }
    })
}

#[test]
fn nn_quadratic_affine_values() {
    let pot = nn_quadratic::<f64>(1, 1).unwrap();
    let probe = AffineProbe { m: Mat::from_rows(&[&[3.0]]), eps: 0.25 };
    assert_eq!(pot.evaluate(&[5], &probe).unwrap(), 9.0);
    let pot2 = nn_quadratic::<f64>(2, 2).unwrap();
    assert_eq!(pot2.cauchy_born(&Mat::identity(2)).unwrap(), 2.0);
    let m = Mat::from_rows(&[&[1.0, 2.0], &[-1.0, 0.5]]);
    assert!((pot2.cauchy_born(&m).unwrap() - m.frobenius_sq()).abs() < 1e-14);
    let constant = LatticeField::from_fn(LatticeDomain::cell(2, 2, 4).unwrap(), |_, o| o.copy_from_slice(&[1.5, -2.0]));
    assert_eq!(pot2.evaluate(&[0, 0], &constant.probe(&Extension::Strict)).unwrap(), 0.0);
}

#[test]
fn nn_energy_counts_sites_with_right_neighbour() {
    let pot = nn_quadratic::<f64>(1, 1).unwrap();
    let d = LatticeDomain::from_index_bounds(1, 1, 1.0, &[-2], &[2]).unwrap();
    let u = LatticeField::affine(d, &Mat::from_rows(&[&[2.0]])).unwrap();
    let sites = LatticeDomain::from_index_bounds(1, 1, 1.0, &[-1], &[1]).unwrap();
    assert_eq!(energy(&pot, &u.probe(&Extension::Strict), &sites).unwrap(), 12.0);
}

#[test]
fn nn_hand_gradient() {
    let pot = nn_quadratic::<f64>(1, 1).unwrap();
    let d = LatticeDomain::from_index_bounds(1, 1, 1.0, &[0], &[2]).unwrap();
    let u = LatticeField::from_values(d.clone(), vec![0.0, 1.0, 0.0]).unwrap();
    let sites = LatticeDomain::from_index_bounds(1, 1, 1.0, &[0], &[1]).unwrap();
    let g = gradient(&pot, &u.probe(&Extension::Strict), &sites, &d).unwrap();
    assert_eq!(g.get(&[1]).unwrap(), &[4.0]);
}

#[test]
fn determinant_identity_values() {
    let tuple = vec![(vec![DirectionOffset::unit(2, 0), DirectionOffset::unit(2, 1)], 1.0)];
    let pot = determinant::<f64>(2, 2.0, &tuple, GLaw::Abs, 1.0).unwrap();
    assert_eq!(pot.cauchy_born(&Mat::identity(2)).unwrap(), 3.0);
    let rank_one = Mat::outer(&[1.0, 2.0], &[0.5, -1.0]);
    let nn = nn_quadratic::<f64>(2, 2).unwrap().cauchy_born(&rank_one).unwrap();
    assert!((pot.cauchy_born(&rank_one).unwrap() - nn).abs() < 1e-14);
    let smooth = determinant_family::<f64>(2, 2.0).unwrap();
    let v = smooth.cauchy_born(&Mat::identity(2)).unwrap();
    assert!((v - 3.5).abs() < 1e-7, "{v}");
    assert_eq!(smooth.cauchy_born(&Mat::zeros(2, 2)).unwrap(), 0.0);
}

#[test]
fn zero_slope_gives_zero_for_all_families() {
    let z1 = Mat::zeros(1, 1);
    assert_eq!(two_spring_chain::<f64>().unwrap().cauchy_born(&z1).unwrap(), 0.0);
    assert_eq!(pair_family_default::<f64>(1).unwrap().cauchy_born(&Mat::zeros(1, 2)).unwrap(), 0.0);
    let lj = lj_regroup::<f64>(3, 2, LjCorrection::Matched(2)).unwrap();
    assert_eq!(lj.potential.cauchy_born(&Mat::zeros(3, 3)).unwrap(), 0.0);
}

/// Central differences of the total energy against the assembled gradient.
fn check_gradient<P: MultibodyPotential<f64>>(pot: &P, dim: usize, codim: usize, seed: u64) {
    let r = pot.window_radius();
    let field_dom = LatticeDomain::from_index_bounds(dim, codim, 0.5, &vec![-3 - r; dim], &vec![3 + r; dim]).unwrap();
    let sites = LatticeDomain::from_index_bounds(dim, codim, 0.5, &vec![-3; dim], &vec![3; dim]).unwrap();
    let m = Mat::from_row_major(codim, dim, (0..codim * dim).map(|i| 0.3 + 0.2 * i as f64).collect()).unwrap();
    let u = random_field(field_dom.clone(), &m, 0.3, seed);
    let g = gradient(pot, &u.probe(&Extension::Strict), &sites, &field_dom).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed + 99);
    for _ in 0..12 {
        let idx = rng.gen_range(0..field_dom.len());
        let c = rng.gen_range(0..codim);
        let base = u.value(idx)[c];
        let h = 1e-5 * base.abs().max(1.0);
        let mut up = u.clone();
        up.value_mut(idx)[c] = base + h;
        let mut dn = u.clone();
        dn.value_mut(idx)[c] = base - h;
        let fd = (energy(pot, &up.probe(&Extension::Strict), &sites).unwrap()
            - energy(pot, &dn.probe(&Extension::Strict), &sites).unwrap())
            / (2.0 * h);
        let an = g.value(idx)[c];
        let scale = an.abs().max(fd.abs()).max(1e-3);
        assert!((an - fd).abs() <= 1e-6 * scale, "{}: analytic {an} vs fd {fd}", pot.name());
    }
}

#[test]
fn analytic_gradients_match_finite_differences() {
    check_gradient(&nn_power::<f64>(2, 2, 3.0).unwrap(), 2, 2, 1);
    check_gradient(&pair_family_default::<f64>(2).unwrap(), 2, 2, 2);
    check_gradient(&two_spring_chain::<f64>().unwrap(), 1, 1, 3);
    check_gradient(&long_bond_density::<f64>(1.0, 2.0).unwrap(), 1, 1, 4);
    check_gradient(&determinant_family::<f64>(2, 2.0).unwrap(), 2, 2, 5);
    check_gradient(
        &determinant::<f64>(
            2,
            4.0,
            &[(vec![DirectionOffset::unit(2, 0), DirectionOffset::new(vec![1, 1]).unwrap()], 0.7)],
            GLaw::Power { q: 1.5 },
            1.0,
        )
        .unwrap(),
        2,
        2,
        6,
    );
    check_gradient(&lj_regroup::<f64>(2, 2, LjCorrection::Full).unwrap().potential, 2, 2, 7);
    check_gradient(&BrokenTranslation::new(nn_quadratic::<f64>(1, 2).unwrap()), 1, 2, 8);
}

/// Raw pair energy on a periodic box, summed over ordered pairs and halved.
fn raw_torus_energy(dim: usize, k: i64, side: i64, m: &Mat<f64>, values: &[f64]) -> f64 {
    let n = dim;
    let count = (side as usize).pow(dim as u32);
    let read = |k: &[i64], out: &mut [f64]| {
        let mut idx = 0usize;
        let mut shift = vec![0i64; dim];
        for a in 0..dim {
            let w = k[a].rem_euclid(side);
            shift[a] = k[a] - w;
            idx = idx * side as usize + w as usize;
        }
        let mut drift = vec![0.0; n];
        m.apply_int(&shift, 1.0, &mut drift);
        for c in 0..n {
            out[c] = values[idx * n + c] + drift[c];
        }
    };
    let width = (2 * k + 1) as usize;
    let mut total = 0.0;
    let mut i = vec![0i64; dim];
    let mut j = vec![0i64; dim];
    let (mut ui, mut uj) = (vec![0.0; n], vec![0.0; n]);
    for s in 0..count {
        let mut q = s;
        for a in (0..dim).rev() {
            i[a] = (q % side as usize) as i64;
            q /= side as usize;
        }
        read(&i, &mut ui);
        for t in 0..width.pow(dim as u32) {
            let mut q = t;
            let mut r2 = 0;
            for a in (0..dim).rev() {
                let x = (q % width) as i64 - k;
                q /= width;
                j[a] = i[a] + x;
                r2 += x * x;
            }
            if r2 == 0 {
                continue;
            }
            read(&j, &mut uj);
            let d2: f64 = ui.iter().zip(&uj).map(|(a, b)| (a - b) * (a - b)).sum();
            total += 0.5 * lj_vpp((r2 as f64).sqrt()) * d2 / r2 as f64;
        }
    }
    total
}

#[test]
fn lj_regrouping_matches_raw_double_sum_on_torus() {
    let side = 8;
    let m = Mat::from_rows(&[&[1.0, 0.2, 0.0], &[0.1, 0.9, -0.3], &[0.0, 0.4, 1.1]]);
    for k in [2usize, 3] {
        let lj = lj_regroup::<f64>(3, k, LjCorrection::Matched(k)).unwrap();
        let d = LatticeDomain::from_index_bounds(3, 3, 1.0, &[0, 0, 0], &[side - 1; 3]).unwrap();
        let u = random_field(d.clone(), &Mat::zeros(3, 3), 0.2, k as u64);
        let affine = LatticeField::affine(d.clone(), &m).unwrap();
        let u = u.combine(1.0, &affine, 1.0).unwrap();
        let ext = Extension::Periodic(m.clone());
        let regrouped = energy(&lj.potential, &u.probe(&ext), &d).unwrap();
        let raw = raw_torus_energy(3, k as i64, side, &m, u.values());
        assert!((regrouped - raw).abs() <= 1e-10 * raw.abs(), "k={k}: {regrouped} vs {raw}");
    }
}

#[test]
fn lj_margin_second_value_is_exact() {
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let v2 = lj_vpp_sq(r(4, 1));
    assert_eq!(v2, r(156, 16384) - r(84, 256));
    let exact = lj_vpp_sq(r(1, 1)) + r(12, 1) * lj_vpp_sq(r(2, 1)) + r(21, 1) * v2;
    let approx: f64 =
        exact.numer().to_string().parse::<f64>().unwrap() / exact.denom().to_string().parse::<f64>().unwrap();
    assert!((lj_margin::<f64>(2) - approx).abs() < 1e-12);
}

#[test]
fn lj_tables() {
    let decay = lj_decay_coefficients::<f64>(3, 3);
    assert_eq!(decay.get(&[0, 0, 0], &[1, 0, 0]), 72.0);
    assert!(decay.iter().all(|(_, xi, _)| xi.iter().map(|x| x.abs()).max().unwrap() <= 1));
    // Sum over j of the path table on e_1 against the bond-by-bond count.
    let k = 4;
    let table = lj_path_table::<f64>(3, k);
    let summed: f64 = table.iter().filter(|(_, xi, _)| *xi == [1, 0, 0]).map(|(_, _, c)| c).sum();
    let mut fubini = 0.0;
    for a in -(k as i64)..=k as i64 {
        for b in -(k as i64)..=k as i64 {
            for c in 1..=k as i64 {
                let r2 = a * a + b * b + c * c;
                if r2 > 1 {
                    fubini += c as f64 * 3.0 * lj_vpp((r2 as f64).sqrt()).abs() / (a.abs() + b.abs() + c) as f64;
                }
            }
        }
    }
    assert!((summed - fubini).abs() < 1e-9 * fubini);
    let a = lj_nn_coefficient::<f64>(3, k);
    assert!((72.0 - fubini - a).abs() < 1e-9);
}

#[test]
fn lj_regrouped_terms_are_nonnegative() {
    let lj = lj_regroup::<f64>(2, 3, LjCorrection::Full).unwrap();
    let d = LatticeDomain::from_index_bounds(2, 2, 1.0, &[-8, -8], &[8, 8]).unwrap();
    for seed in 0..5 {
        let u = random_field(d.clone(), &Mat::identity(2), 1.0, seed);
        let p = u.probe(&Extension::Strict);
        for t in lj.potential.terms().iter().skip(2) {
            let mut single = TermPotential::new("t", 2, 2, 2.0, 1).unwrap();
            single.push(t.term.clone()).unwrap();
            for i in [[0i64, 0], [1, -2], [-3, 2]] {
                assert!(single.evaluate(&i, &p).unwrap() >= -1e-12);
            }
        }
    }
}

#[test]
fn periodic_composite_levels() {
    let lj = lj_regroup::<f64>(1, 4, LjCorrection::Full).unwrap();
    let comp = make_periodic(lj.potential.clone(), 0.125, &[0.0], &[4.0], 4).unwrap();
    assert_eq!(comp.level_at(&[0]), 0);
    assert_eq!(comp.level_at(&[1]), 1);
    assert_eq!(comp.level_at(&[3]), 3);
    assert_eq!(comp.level_at(&[16]), 4);
    assert_eq!(comp.level_at(&[31]), 1);
    assert_eq!(comp.level_at(&[40]), 0);
    let d = LatticeDomain::from_index_bounds(1, 1, 0.125, &[-10], &[45]).unwrap();
    let u = random_field(d, &Mat::identity(1), 0.05, 3);
    let p = u.probe(&Extension::Strict);
    let full = lj.potential.evaluate(&[16], &p).unwrap();
    assert_eq!(comp.evaluate(&[16], &p).unwrap(), full);
    let nn_only = lj.potential.truncated(0).evaluate(&[0], &p).unwrap();
    assert_eq!(comp.evaluate(&[0], &p).unwrap(), nn_only);
    let two = lj.potential.truncated(2).evaluate(&[2], &p).unwrap();
    assert_eq!(comp.evaluate(&[2], &p).unwrap(), two);
}

#[test]
fn two_spring_chain_has_period_two() {
    let pot = two_spring_chain::<f64>().unwrap();
    let d = LatticeDomain::from_index_bounds(1, 1, 1.0, &[0], &[9]).unwrap();
    let u = LatticeField::from_fn(d, |k, o| o[0] = ((k[0] % 2) as f64) * 0.5 + k[0] as f64);
    let p = u.probe(&Extension::Strict);
    assert_eq!(pot.evaluate(&[2], &p).unwrap(), pot.evaluate(&[4], &p).unwrap());
    assert_ne!(pot.evaluate(&[2], &p).unwrap(), pot.evaluate(&[3], &p).unwrap());
    assert_eq!(pot.cauchy_born(&Mat::from_rows(&[&[1.0]])).unwrap(), 2.0);
}

#[test]
fn hadamard_gap_is_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = 3.0;
    for _ in 0..1000 {
        let cols: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let refs: Vec<&[f64]> = cols.iter().map(|c| c.as_slice()).collect();
        let det = lathom::matrix::det_columns(&refs).abs();
        let mean: f64 = cols.iter().map(|c| lathom::scalar::norm(c).powf(p)).sum::<f64>() / 3.0;
        assert!(mean - det.powf(p / 3.0) >= -1e-10);
    }
}

#[test]
fn broken_translation_reads_absolute_values() {
    let inner = nn_quadratic::<f64>(1, 1).unwrap();
    let pot = BrokenTranslation::new(inner);
    let probe = AffineProbe { m: Mat::from_rows(&[&[1.0]]), eps: 1.0 };
    let shifted = lathom::lattice::ShiftedProbe { base: &probe, shift: vec![2.0] };
    assert_ne!(pot.evaluate(&[0], &probe).unwrap(), pot.evaluate(&[0], &shifted).unwrap());
    let _ = shifted.dim();
}

#[test]
fn upper_bound_totals() {
    let pair = pair_family_default::<f64>(1).unwrap();
    assert_eq!(pair.cauchy_born_constant().unwrap(), 3.5);
    let det = determinant_family::<f64>(2, 2.0).unwrap();
    assert_eq!(det.cauchy_born_constant().unwrap(), 3.5);
    assert_eq!(long_bond_density::<f64>(1.0, 1.0).unwrap().coercivity_constant().unwrap(), 1.0 / 18.0);
}

#[test]
fn f32_evaluation_agrees_with_f64() {
    let p64 = pair_family_default::<f64>(2).unwrap();
    let p32 = pair_family_default::<f32>(2).unwrap();
    let m64 = Mat::from_rows(&[&[1.0, 0.5], &[-0.25, 2.0]]);
    let m32 = m64.map(|x| x as f32);
    let a = p64.cauchy_born(&m64).unwrap();
    let b = p32.cauchy_born(&m32).unwrap();
    assert!((a - b as f64).abs() < 1e-5 * a);
}
