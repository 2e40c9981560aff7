use super::sampling::{agree_near, rng, sample_cutoff, sample_field, sample_kind, sample_site, Window};
use super::{
    blend_sides, bound_sum, decays, entry, profile_terms, run_cells, slack, summarize, validate, Context, DecayRow,
    Fit, Hypothesis, HypothesisEntry, Outcome, SampleKey, SampleSchedule, IDENTITY_TOL,
};
use crate::error::{invalid, Result};
use crate::lattice::Extension;
use crate::potentials::{MultibodyPotential, TermPotential};

fn linf(v: &[i64]) -> i64 {
    v.iter().map(|x| x.abs()).max().unwrap_or(0)
}

fn levels(key: &SampleKey, n: usize) -> Result<&[usize]> {
    if key.levels.len() != n {
        return Err(invalid(format!("{:?} sample needs {n} truncation levels", key.hypothesis)));
    }
    Ok(&key.levels)
}

fn context(base: &TermPotential<f64>, key: &SampleKey) -> Result<Context> {
    Ok(match key.hypothesis {
        Hypothesis::Hp5 => {
            let k = levels(key, 1)?[0] as i64;
            let (c, prof) =
                base.nonconvexity_profile().ok_or_else(|| invalid("potential declares no non-convexity profile"))?;
            let terms = profile_terms(&prof, |j, xi| {
                let end: Vec<i64> = j.iter().zip(xi).map(|(a, b)| a + b).collect();
                linf(j) <= k && linf(&end) <= k
            })?;
            Context { terms, constant: Some(c) }
        }
        Hypothesis::Hp6 => {
            let l = levels(key, 2)?;
            let k2 = l[1] as i64;
            let terms = profile_terms(&base.closeness_profile(l[0]), |j, xi| {
                let end: Vec<i64> = j.iter().zip(xi).map(|(a, b)| a + b).collect();
                linf(j) <= k2 && linf(&end) <= k2
            })?;
            Context { terms, constant: None }
        }
        _ => Context { terms: Vec::new(), constant: None },
    })
}

fn evaluate(base: &TermPotential<f64>, ctx: &Context, key: &SampleKey) -> Result<Outcome> {
    let mut r = rng(key.seed);
    let p = base.exponent();
    let strict = Extension::Strict;
    let site = sample_site(&mut r, base.dim(), base.period().unwrap_or(1));
    let win = Window::new(base.dim(), base.codim(), 1.0, site, base.window_radius() + 1)?;
    let kind = sample_kind(&mut r);
    let z = sample_field(&win, &mut r, key.amplitude, kind);
    let zp = z.probe(&strict);
    let at = |k: usize, probe: &dyn crate::lattice::Probe<f64>| base.evaluate_level(&win.site, probe, k);
    let margin = match key.hypothesis {
        Hypothesis::Hp4 => {
            let k = levels(key, 1)?[0];
            let k2 = sample_kind(&mut r);
            let other = sample_field(&win, &mut r, key.amplitude, k2);
            let w = agree_near(&win, &z, &other, k as i64);
            let (a, b) = (at(k, &zp)?, at(k, &w.probe(&strict))?);
            if a == b {
                1.0
            } else {
                -(a - b).abs()
            }
        }
        Hypothesis::Hp5 => {
            let k = levels(key, 1)?[0];
            let k2 = sample_kind(&mut r);
            let w = sample_field(&win, &mut r, key.amplitude, k2);
            let psi = sample_cutoff(&win, &mut r, 1.0 + (k as f64))?;
            let phi = |i: &[i64], probe: &dyn crate::lattice::Probe<f64>| base.evaluate_level(i, probe, k);
            let (lhs, rhs) = blend_sides(&phi, ctx, &win, &z, &w, &psi, p)?;
            slack(lhs, rhs)
        }
        Hypothesis::Hp6 => {
            let l = levels(key, 2)?;
            let lhs = (at(l[0], &zp)? - at(l[1], &zp)?).abs();
            slack(lhs, bound_sum(&ctx.terms, &zp, &win.site, p)?)
        }
        Hypothesis::Hp7 => {
            let k = levels(key, 1)?[0];
            let lo = at(k, &zp)?;
            if k < base.max_level() {
                slack(lo, at(k + 1, &zp)?)
            } else {
                let full = base.evaluate(&win.site, &zp)?;
                IDENTITY_TOL * 1f64.max(full.abs()) - (full - lo).abs()
            }
        }
        h => return Err(invalid(format!("{h:?} is not a truncation check; use replay"))),
    };
    Ok(Outcome { margin, ratio: None, site: win.site })
}

/// Recomputes the margin of one Hp4–Hp7 sample from its key.
pub fn replay_hp(base: &TermPotential<f64>, key: &SampleKey) -> Result<f64> {
    let ctx = context(base, key)?;
    Ok(evaluate(base, &ctx, key)?.margin)
}

fn run(base: &TermPotential<f64>, sched: &SampleSchedule, keys: Vec<SampleKey>) -> Result<Vec<(SampleKey, Outcome)>> {
    let cells: Vec<(Context, SampleKey)> =
        keys.into_iter().map(|k| Ok((context(base, &k)?, k))).collect::<Result<_>>()?;
    run_cells(&cells, sched.samples, sched.seed, |ctx, key| evaluate(base, ctx, key))
}

fn key(h: Hypothesis, levels: Vec<usize>, amplitude: f64) -> SampleKey {
    SampleKey { hypothesis: h, eps: 1.0, delta: None, levels, amplitude, seed: 0 }
}

/// Hp4–Hp7 for the truncations `φ^k`, `k = 1, …, k_max`, of `base` at `ε = 1`.
///
/// `Q_k(i)` is read as the sites with `|j − i|_∞ ≤ k`. Hp5 uses the non-convexity
/// profile of the full density restricted to entries inside `Q_k`, Hp6 the profile
/// `C_k` of the terms above level `k`.
pub fn check_hp(base: &TermPotential<f64>, sched: &SampleSchedule) -> Result<Vec<HypothesisEntry>> {
    validate(sched)?;
    let kmax = base.max_level().max(1);
    let amp = sched.amplitude;
    let ks: Vec<usize> = (1..=kmax).collect();
    let mut out = Vec::with_capacity(4);

    let res = run(base, sched, ks.iter().map(|&k| key(Hypothesis::Hp4, vec![k], amp)).collect())?;
    let s = summarize(&res, Fit::None);
    let pass = s.violations == 0;
    out.push(entry(Hypothesis::Hp4, s, pass, None, Vec::new(), String::new()));

    let (c, prof) =
        base.nonconvexity_profile().ok_or_else(|| invalid("truncation family declares no non-convexity profile"))?;
    let mut decay = vec![DecayRow { eps: None, delta: None, level: None, sum: prof.total_sum() }];
    let mut tails = Vec::new();
    let mut k = 1;
    loop {
        let t = prof.tail_sum(1.0, k as f64);
        decay.push(DecayRow { eps: Some(1.0), delta: None, level: Some(k), sum: t });
        tails.push(t);
        if t == 0.0 || k > 4 * kmax + 4 {
            break;
        }
        k += 1;
    }
    let decaying = prof.total_sum().is_finite() && decays(&tails) && tails.last() == Some(&0.0);
    let res = run(base, sched, ks.iter().map(|&k| key(Hypothesis::Hp5, vec![k], amp)).collect())?;
    let s = summarize(&res, Fit::None);
    let note = if decaying { String::new() } else { "non-convexity tail sums do not vanish".into() };
    let pass = s.violations == 0 && decaying;
    out.push(entry(Hypothesis::Hp5, s, pass, Some(c), decay, note));

    let mut decay = Vec::new();
    let mut sums = Vec::new();
    let mut nested = true;
    for &k in &ks {
        let ck = base.closeness_profile(k);
        if k < kmax {
            let next = base.closeness_profile(k + 1);
            nested &= next.iter().all(|(j, xi, c)| c <= ck.get(j, xi));
        }
        decay.push(DecayRow { eps: Some(1.0), delta: None, level: Some(k), sum: ck.total_sum() });
        sums.push(ck.total_sum());
    }
    let decaying = nested && decays(&sums) && sums.last() == Some(&0.0);
    let pairs: Vec<SampleKey> = ks
        .iter()
        .flat_map(|&a| ks.iter().filter(move |&&b| b >= a).map(move |&b| key(Hypothesis::Hp6, vec![a, b], amp)))
        .collect();
    let res = run(base, sched, pairs)?;
    let s = summarize(&res, Fit::None);
    let note = if decaying { String::new() } else { "closeness coefficients are not nested or do not vanish".into() };
    let pass = s.violations == 0 && decaying;
    out.push(entry(Hypothesis::Hp6, s, pass, None, decay, note));

    let res = run(base, sched, ks.iter().map(|&k| key(Hypothesis::Hp7, vec![k], amp)).collect())?;
    let s = summarize(&res, Fit::None);
    let pass = s.violations == 0;
    out.push(entry(Hypothesis::Hp7, s, pass, None, Vec::new(), String::new()));
    Ok(out)
}
