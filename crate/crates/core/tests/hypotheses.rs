use lathom::hypotheses::{
    check_all, check_family, check_h1, check_h2, check_h3, check_hp, replay, replay_hp, Hypothesis, SampleSchedule,
    Status,
};
use lathom::potentials::{
    determinant_family, lj_raw_pair, lj_regroup, long_bond_density, nn_quadratic, pair_family_default,
    two_spring_chain, BrokenTranslation, LjCorrection, MultibodyPotential,
};

fn schedule(samples: usize) -> SampleSchedule {
    SampleSchedule { samples, ..SampleSchedule::default() }
}

fn assert_all_pass(report: &lathom::hypotheses::HypothesisReport) {
    for e in &report.entries {
        assert_ne!(e.status, Status::Fail, "{}: {:?}\n{}", report.potential, e.hypothesis, report.table());
    }
}

#[test]
fn pair_family_passes_every_check() {
    let pot = pair_family_default::<f64>(2).unwrap();
    let report = check_family(&pot, &schedule(200)).unwrap();
    assert_all_pass(&report);
    assert_eq!(report.entries.len(), 9);
    let h2 = report.entry(Hypothesis::H2).unwrap();
    assert!(h2.fitted.unwrap() <= h2.declared.unwrap());
}

#[test]
fn determinant_family_passes_every_check() {
    let pot = determinant_family::<f64>(2, 2.0).unwrap();
    let report = check_family(&pot, &schedule(200)).unwrap();
    assert_all_pass(&report);
}

#[test]
fn regrouped_lj_passes_every_check() {
    let lj = lj_regroup::<f64>(3, 3, LjCorrection::Matched(3)).unwrap();
    let report = check_family(&lj.potential, &schedule(100)).unwrap();
    assert_all_pass(&report);
    let h3 = report.entry(Hypothesis::H3).unwrap();
    assert!(h3.fitted.unwrap() >= lj.nn_coefficient);
}

#[test]
fn broken_translation_fails_h1_and_replays() {
    let pot = BrokenTranslation::new(nn_quadratic::<f64>(2, 2).unwrap());
    let e = check_h1(&pot, &schedule(100)).unwrap();
    assert_eq!(e.status, Status::Fail);
    let worst = e.worst.unwrap();
    assert!(worst.margin < 0.0);
    assert_eq!(replay(&pot, &worst.key).unwrap(), worst.margin);
}

#[test]
fn raw_lj_fails_h3_and_replays() {
    let pot = lj_raw_pair::<f64>(3, 3).unwrap();
    let e = check_h3(&pot, &schedule(100)).unwrap();
    assert_eq!(e.status, Status::Fail);
    assert!(e.fitted.unwrap() < 0.0);
    let worst = e.worst.unwrap();
    assert!(worst.margin < 0.0);
    assert_eq!(replay(&pot, &worst.key).unwrap(), worst.margin);
}

#[test]
fn nn_quadratic_constants() {
    let pot = nn_quadratic::<f64>(2, 2).unwrap();
    let h2 = check_h2(&pot, &schedule(300)).unwrap();
    let c = h2.fitted.unwrap();
    // Σ_n |M e_n|² / (|M|² + 1) = |M|²/(|M|² + 1) < 1, approaching 1 for large stretches.
    assert!(c < 1.0 && c > 100.0 / 101.0 * 0.5, "{c}");
    let h3 = check_h3(&pot, &schedule(300)).unwrap();
    assert_eq!(h3.status, Status::Pass);
    assert!(h3.fitted.unwrap() >= 1.0);
}

/// `min_y y²/4 + (1 + y)²/9` by a fine scan, the per-window coercivity of the
/// two- and three-bond density with unit coefficients.
fn long_bond_window_minimum() -> f64 {
    (-200_000..=200_000)
        .map(|k| {
            let y = k as f64 * 1e-5;
            y * y / 4.0 + (1.0 + y) * (1.0 + y) / 9.0
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn long_bond_density_is_coercive_without_nearest_neighbours() {
    let oracle = long_bond_window_minimum();
    assert!((oracle - 1.0 / 13.0).abs() < 1e-9);
    let pot = long_bond_density::<f64>(1.0, 1.0).unwrap();
    let e = check_h3(&pot, &schedule(500)).unwrap();
    assert_eq!(e.status, Status::Pass);
    assert!(e.fitted.unwrap() >= oracle * (1.0 - 1e-12));
    assert!(e.declared.unwrap() <= oracle);
}

#[test]
fn two_spring_chain_passes_every_check() {
    let pot = two_spring_chain::<f64>().unwrap();
    assert_all_pass(&check_family(&pot, &schedule(200)).unwrap());
}

#[test]
fn lj_truncations_are_close_and_monotone() {
    let lj = lj_regroup::<f64>(2, 6, LjCorrection::Matched(6)).unwrap();
    let entries = check_hp(&lj.potential, &schedule(50)).unwrap();
    for e in &entries {
        assert_eq!(e.status, Status::Pass, "{:?} {}", e.hypothesis, e.note);
    }
    let hp6 = entries.iter().find(|e| e.hypothesis == Hypothesis::Hp6).unwrap();
    assert!(hp6.samples >= 50 * 21);
    let w = hp6.worst.as_ref().unwrap();
    assert_eq!(replay_hp(&lj.potential, &w.key).unwrap(), w.margin);
}

#[test]
fn reports_are_deterministic() {
    let pot = pair_family_default::<f64>(2).unwrap();
    let a = check_all(&pot, &schedule(50)).unwrap();
    let b = check_all(&pot, &schedule(50)).unwrap();
    assert_eq!(a, b);
    let other = check_all(&pot, &SampleSchedule { seed: 7, ..schedule(50) }).unwrap();
    assert_ne!(a.entries[0].worst, other.entries[0].worst);
    assert!(!a.table().is_empty());
    let json = serde_json::to_string(&a).unwrap();
    assert!(json.contains("\"H5\""));
    let _ = pot.name();
}
