//! Sampling checks of the structural hypotheses on a site density.
//!
//! Every check is a falsifier: it evaluates the hypothesis on seeded random
//! windows, fields and cut-offs, fits the constant the hypothesis asks for where
//! there is one, and keeps the worst sample so that a failure can be replayed from
//! its [`SampleKey`]. The inequalities use the coefficient profiles the potential
//! declares; nothing is substituted silently.

mod periodic;
mod sampling;

pub use periodic::{check_hp, replay_hp};
pub use sampling::{sample_seed, FieldKind, SampleSchedule};

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::lattice::{blend, difference_quotient, AffineProbe, DirectionOffset, Extension, LatticeField, Probe};
use crate::potentials::{DecayProfile, MultibodyPotential, TermPotential};
use crate::scalar::norm_pow;
use sampling::{
    agree_near, quantize, rng, sample_cb_slope, sample_cutoff, sample_field, sample_kind, sample_site, Window,
};

/// Relative tolerance for identities that hold exactly.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Rounding allowance for inequalities, relative to the larger side and at least absolute.
pub const INEQUALITY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    H1,
    H2,
    H3,
    H4,
    H5,
    Hp4,
    Hp5,
    Hp6,
    Hp7,
}

impl Hypothesis {
    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::H1 => "H1 translation invariance",
            Hypothesis::H2 => "H2 Cauchy-Born upper bound",
            Hypothesis::H3 => "H3 equi-coercivity",
            Hypothesis::H4 => "H4 decaying non-locality",
            Hypothesis::H5 => "H5 controlled non-convexity",
            Hypothesis::Hp4 => "Hp4 locality",
            Hypothesis::Hp5 => "Hp5 controlled non-convexity",
            Hypothesis::Hp6 => "Hp6 closeness",
            Hypothesis::Hp7 => "Hp7 monotonicity",
        }
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

/// Everything needed to regenerate one sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleKey {
    pub hypothesis: Hypothesis,
    pub eps: f64,
    pub delta: Option<f64>,
    /// Truncation levels for the periodic checks.
    pub levels: Vec<usize>,
    /// Field amplitude, or the slope bound for the Cauchy-Born samples.
    pub amplitude: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counterexample {
    pub key: SampleKey,
    pub site: Vec<i64>,
    /// Right side minus left side, rounding allowance included; negative is a violation.
    pub margin: f64,
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub level: Option<usize>,
    pub sum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisEntry {
    pub hypothesis: Hypothesis,
    pub status: Status,
    /// `Ĉ` for H2, `ĉ` for H3.
    pub fitted: Option<f64>,
    pub fitted_per_eps: Vec<(f64, f64)>,
    /// Constant declared by the potential: `C` for H2 and H5, `c` for H3.
    pub declared: Option<f64>,
    pub decay: Vec<DecayRow>,
    /// The violating sample with the smallest margin, or the sample attaining the
    /// fitted constant, or the tightest sample.
    pub worst: Option<Counterexample>,
    pub samples: usize,
    pub violations: usize,
    pub note: String,
}

impl HypothesisEntry {
    fn not_applicable(hypothesis: Hypothesis, note: impl Into<String>) -> Self {
        HypothesisEntry {
            hypothesis,
            status: Status::NotApplicable,
            fitted: None,
            fitted_per_eps: Vec::new(),
            declared: None,
            decay: Vec::new(),
            worst: None,
            samples: 0,
            violations: 0,
            note: note.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub potential: String,
    pub schedule: SampleSchedule,
    pub entries: Vec<HypothesisEntry>,
}

impl HypothesisReport {
    /// No applicable check failed.
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.status != Status::Fail)
    }

    pub fn entry(&self, h: Hypothesis) -> Option<&HypothesisEntry> {
        self.entries.iter().find(|e| e.hypothesis == h)
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "potential: {}", self.potential);
        let _ = writeln!(
            s,
            "{:<32} {:<6} {:>12} {:>12} {:>8} {:>6} {:>12}",
            "hypothesis", "status", "fitted", "declared", "samples", "viol", "worst"
        );
        let num = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.6}"));
        for e in &self.entries {
            let status = match e.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::NotApplicable => "n/a",
            };
            let _ = writeln!(
                s,
                "{:<32} {:<6} {:>12} {:>12} {:>8} {:>6} {:>12}",
                e.hypothesis.label(),
                status,
                num(e.fitted),
                num(e.declared),
                e.samples,
                e.violations,
                num(e.worst.as_ref().map(|w| w.margin)),
            );
            if !e.note.is_empty() {
                let _ = writeln!(s, "    {}", e.note);
            }
        }
        s
    }
}

pub(crate) struct Outcome {
    pub margin: f64,
    pub ratio: Option<f64>,
    pub site: Vec<i64>,
}

/// `rhs − lhs` plus the rounding allowance.
pub(crate) fn slack(lhs: f64, rhs: f64) -> f64 {
    rhs - lhs + INEQUALITY_TOL * 1f64.max(lhs.abs()).max(rhs.abs())
}

/// One `C^{j,ξ}` entry ready for evaluation.
pub(crate) struct ProfileTerm {
    pub j: Vec<i64>,
    pub xi: DirectionOffset,
    pub c: f64,
}

pub(crate) fn profile_terms(
    prof: &DecayProfile<f64>,
    keep: impl Fn(&[i64], &[i64]) -> bool,
) -> Result<Vec<ProfileTerm>> {
    prof.iter()
        .filter(|(j, xi, c)| *c != 0.0 && keep(j, xi))
        .map(|(j, xi, c)| Ok(ProfileTerm { j: j.to_vec(), xi: DirectionOffset::new(xi.to_vec())?, c }))
        .collect()
}

fn shifted(site: &[i64], j: &[i64]) -> Vec<i64> {
    site.iter().zip(j).map(|(a, b)| a + b).collect()
}

/// `Σ C^{j,ξ} (|D^ξ_ε z(i+j)|^p + 1)`.
pub(crate) fn bound_sum(terms: &[ProfileTerm], z: &dyn Probe<f64>, site: &[i64], p: f64) -> Result<f64> {
    let mut acc = 0.0;
    for t in terms {
        let d = difference_quotient(z, &shifted(site, &t.j), &t.xi)?;
        acc += t.c * (norm_pow(&d, p) + 1.0);
    }
    Ok(acc)
}

/// `Σ C^{j,ξ} [(S^p + 1)|z(i+j+ξ) − w(i+j+ξ)|^p + |D^ξ_ε z(i+j)|^p + |D^ξ_ε w(i+j)|^p + 1]`.
pub(crate) fn blend_remainder(
    terms: &[ProfileTerm],
    z: &dyn Probe<f64>,
    w: &dyn Probe<f64>,
    site: &[i64],
    p: f64,
    sup_grad: f64,
) -> Result<f64> {
    let n = z.codim();
    let factor = sup_grad.powf(p) + 1.0;
    let (mut zv, mut wv) = (vec![0.0; n], vec![0.0; n]);
    let mut acc = 0.0;
    for t in terms {
        let x = shifted(site, &t.j);
        let y = shifted(&x, t.xi.as_slice());
        z.read(&y, &mut zv)?;
        w.read(&y, &mut wv)?;
        let diff: Vec<f64> = zv.iter().zip(&wv).map(|(a, b)| a - b).collect();
        let dz = norm_pow(&difference_quotient(z, &x, &t.xi)?, p);
        let dw = norm_pow(&difference_quotient(w, &x, &t.xi)?, p);
        acc += t.c * (factor * norm_pow(&diff, p) + dz + dw + 1.0);
    }
    Ok(acc)
}

/// Runs `eval` over `samples` keys per cell in parallel; results keep cell and sample order.
pub(crate) fn run_cells<C: Sync>(
    cells: &[(C, SampleKey)],
    samples: usize,
    base_seed: u64,
    eval: impl Fn(&C, &SampleKey) -> Result<Outcome> + Sync,
) -> Result<Vec<(SampleKey, Outcome)>> {
    let jobs: Vec<(usize, usize)> = (0..cells.len()).flat_map(|c| (0..samples).map(move |s| (c, s))).collect();
    jobs.par_iter()
        .map(|&(c, s)| {
            let (ctx, template) = &cells[c];
            let key = SampleKey { seed: sample_seed(base_seed, template.hypothesis.tag(), c, s), ..template.clone() };
            let out = eval(ctx, &key)?;
            Ok((key, out))
        })
        .collect()
}

#[derive(Clone, Copy)]
pub(crate) enum Fit {
    None,
    Max,
    Min,
}

pub(crate) struct Summary {
    pub samples: usize,
    pub violations: usize,
    pub worst: Option<Counterexample>,
    pub fitted: Option<f64>,
    pub fitted_per_eps: Vec<(f64, f64)>,
}

pub(crate) fn summarize(results: &[(SampleKey, Outcome)], fit: Fit) -> Summary {
    let violations = results.iter().filter(|(_, o)| o.margin < 0.0).count();
    let better = |a: f64, b: f64| match fit {
        Fit::Max => a > b,
        _ => a < b,
    };
    let mut fitted: Option<(f64, usize)> = None;
    let mut per_eps: Vec<(f64, f64)> = Vec::new();
    let mut tight: Option<usize> = None;
    for (idx, (key, o)) in results.iter().enumerate() {
        if tight.is_none_or(|t| o.margin < results[t].1.margin) {
            tight = Some(idx);
        }
        if matches!(fit, Fit::None) {
            continue;
        }
        if let Some(r) = o.ratio {
            if fitted.is_none_or(|(f, _)| better(r, f) || r.is_nan()) {
                fitted = Some((r, idx));
            }
            match per_eps.iter_mut().find(|(e, _)| *e == key.eps) {
                Some((_, f)) => {
                    if better(r, *f) || r.is_nan() {
                        *f = r;
                    }
                }
                None => per_eps.push((key.eps, r)),
            }
        }
    }
    let pick = if violations > 0 { tight } else { fitted.map(|(_, i)| i).or(tight) };
    let worst = pick.map(|i| {
        let (key, o) = &results[i];
        Counterexample { key: key.clone(), site: o.site.clone(), margin: o.margin, ratio: o.ratio }
    });
    Summary { samples: results.len(), violations, worst, fitted: fitted.map(|(f, _)| f), fitted_per_eps: per_eps }
}

/// `true` if the sums do not increase along the sequence and end at zero or below their start.
pub(crate) fn decays(sums: &[f64]) -> bool {
    let monotone = sums.windows(2).all(|w| w[1] <= w[0] * (1.0 + IDENTITY_TOL) + f64::MIN_POSITIVE);
    let vanishing = match (sums.first(), sums.last()) {
        (Some(&a), Some(&b)) => b == 0.0 || b < a,
        _ => true,
    };
    monotone && vanishing && sums.iter().all(|s| s.is_finite())
}

fn cell_keys(h: Hypothesis, sched: &SampleSchedule, with_delta: bool, amplitude: f64) -> Vec<SampleKey> {
    let mut keys = Vec::new();
    for &eps in &sched.eps {
        let deltas: Vec<Option<f64>> =
            if with_delta { sched.delta.iter().map(|&d| Some(d)).collect() } else { vec![None] };
        for delta in deltas {
            keys.push(SampleKey { hypothesis: h, eps, delta, levels: Vec::new(), amplitude, seed: 0 });
        }
    }
    keys
}

fn validate(sched: &SampleSchedule) -> Result<()> {
    if sched.eps.is_empty() || sched.eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(invalid("sample schedule needs positive finite ε values"));
    }
    if sched.delta.is_empty() || sched.delta.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
        return Err(invalid("sample schedule needs positive finite δ values"));
    }
    if sched.samples == 0 {
        return Err(invalid("sample count must be positive"));
    }
    if !(sched.amplitude > 0.0) || !(sched.slope_bound > 0.0) {
        return Err(invalid("sample amplitudes must be positive"));
    }
    Ok(())
}

type Pot<'a> = &'a dyn MultibodyPotential<f64>;

/// Per-cell data shared by the samples of one `(hypothesis, ε, δ)` cell.
pub(crate) struct Context {
    terms: Vec<ProfileTerm>,
    constant: Option<f64>,
}

fn context(pot: Pot<'_>, key: &SampleKey) -> Result<Context> {
    Ok(match key.hypothesis {
        Hypothesis::H2 => Context { terms: Vec::new(), constant: pot.cauchy_born_constant() },
        Hypothesis::H3 => Context { terms: Vec::new(), constant: pot.coercivity_constant() },
        Hypothesis::H4 => {
            let delta = key.delta.ok_or_else(|| invalid("H4 sample without δ"))?;
            let prof = pot
                .locality_profile(key.eps, delta)
                .ok_or_else(|| invalid("potential declares no locality profile"))?;
            Context { terms: profile_terms(&prof, |_, _| true)?, constant: None }
        }
        Hypothesis::H5 => {
            let (c, prof) =
                pot.nonconvexity_profile().ok_or_else(|| invalid("potential declares no non-convexity profile"))?;
            Context { terms: profile_terms(&prof, |_, _| true)?, constant: Some(c) }
        }
        _ => Context { terms: Vec::new(), constant: None },
    })
}

fn window(pot: Pot<'_>, key: &SampleKey, rng: &mut rand_chacha::ChaCha8Rng) -> Result<Window> {
    let site = sample_site(rng, pot.dim(), pot.period().unwrap_or(1));
    Window::new(pot.dim(), pot.codim(), key.eps, site, pot.window_radius() + 1)
}

fn evaluate(pot: Pot<'_>, ctx: &Context, key: &SampleKey) -> Result<Outcome> {
    let mut r = rng(key.seed);
    let p = pot.exponent();
    let strict = Extension::Strict;
    match key.hypothesis {
        Hypothesis::H1 => {
            let win = window(pot, key, &mut r)?;
            let kind = sample_kind(&mut r);
            let mut z = sample_field(&win, &mut r, key.amplitude, kind);
            quantize(&mut z, 30);
            let shift: Vec<f64> =
                (0..pot.codim()).map(|_| rand::Rng::gen_range(&mut r, -2048i64..=2048) as f64 / 256.0).collect();
            let mut zw = z.clone();
            let n = pot.codim();
            for (i, v) in zw.values_mut().iter_mut().enumerate() {
                *v += shift[i % n];
            }
            let a = pot.evaluate(&win.site, &z.probe(&strict))?;
            let b = pot.evaluate(&win.site, &zw.probe(&strict))?;
            Ok(Outcome { margin: IDENTITY_TOL * 1f64.max(a.abs()) - (a - b).abs(), ratio: None, site: win.site })
        }
        Hypothesis::H2 => {
            let site = sample_site(&mut r, pot.dim(), pot.period().unwrap_or(1));
            let m = sample_cb_slope(&mut r, pot.codim(), pot.dim(), key.amplitude);
            let phi = pot.evaluate(&site, &AffineProbe { m: m.clone(), eps: key.eps })?;
            let denom = m.frobenius().powf(p) + 1.0;
            let margin = match ctx.constant {
                _ if !phi.is_finite() => f64::NEG_INFINITY,
                Some(c) => slack(phi, c * denom),
                None => f64::MAX,
            };
            Ok(Outcome { margin, ratio: Some(phi / denom), site })
        }
        Hypothesis::H3 => {
            let win = window(pot, key, &mut r)?;
            let kind = sample_kind(&mut r);
            let z = sample_field(&win, &mut r, key.amplitude, kind);
            let probe = z.probe(&strict);
            let mut s = 0.0;
            for a in 0..pot.dim() {
                s += norm_pow(&difference_quotient(&probe, &win.site, &DirectionOffset::unit(pot.dim(), a))?, p);
            }
            let phi = pot.evaluate(&win.site, &probe)?;
            let ratio = (s > 1.0).then(|| phi / (s - 1.0));
            let margin = match ctx.constant {
                Some(c) => slack(c * (s - 1.0), phi),
                None if s > 1.0 && phi <= 0.0 => phi.min(-f64::MIN_POSITIVE),
                None if s > 1.0 => phi,
                None => f64::MAX,
            };
            Ok(Outcome { margin, ratio, site: win.site })
        }
        Hypothesis::H4 => {
            let delta = key.delta.ok_or_else(|| invalid("H4 sample without δ"))?;
            let win = window(pot, key, &mut r)?;
            let (k1, k2) = (sample_kind(&mut r), sample_kind(&mut r));
            let z = sample_field(&win, &mut r, key.amplitude, k1);
            let other = sample_field(&win, &mut r, key.amplitude, k2);
            let keep = (delta / (2.0 * key.eps) + 1e-9).floor() as i64;
            let w = agree_near(&win, &z, &other, keep);
            let (zp, wp) = (z.probe(&strict), w.probe(&strict));
            let lhs = pot.evaluate(&win.site, &zp)?;
            let rhs = pot.evaluate(&win.site, &wp)? + bound_sum(&ctx.terms, &zp, &win.site, p)?;
            Ok(Outcome { margin: slack(lhs, rhs), ratio: None, site: win.site })
        }
        Hypothesis::H5 => {
            let delta = key.delta.ok_or_else(|| invalid("H5 sample without δ"))?;
            let win = window(pot, key, &mut r)?;
            let (k1, k2) = (sample_kind(&mut r), sample_kind(&mut r));
            let z = sample_field(&win, &mut r, key.amplitude, k1);
            let w = sample_field(&win, &mut r, key.amplitude, k2);
            let psi = sample_cutoff(&win, &mut r, delta)?;
            let (lhs, rhs) = blend_sides(&|k, probe| pot.evaluate(k, probe), ctx, &win, &z, &w, &psi, p)?;
            Ok(Outcome { margin: slack(lhs, rhs), ratio: None, site: win.site })
        }
        h => Err(invalid(format!("{h:?} needs a truncation family; use replay_hp"))),
    }
}

type Density<'a> = dyn Fn(&[i64], &dyn Probe<f64>) -> Result<f64> + 'a;

/// Left and right side of the cut-off blend inequality at the window's site.
#[allow(clippy::too_many_arguments)]
pub(crate) fn blend_sides(
    phi: &Density<'_>,
    ctx: &Context,
    win: &Window,
    z: &LatticeField<f64>,
    w: &LatticeField<f64>,
    psi: &crate::lattice::CutoffFunction<f64>,
    p: f64,
) -> Result<(f64, f64)> {
    let strict = Extension::Strict;
    let v = blend(z, w, psi)?;
    let (zp, wp) = (z.probe(&strict), w.probe(&strict));
    let lhs = phi(&win.site, &v.probe(&strict))?;
    let c = ctx.constant.unwrap_or(1.0);
    let rhs = c * (phi(&win.site, &zp)? + phi(&win.site, &wp)?)
        + blend_remainder(&ctx.terms, &zp, &wp, &win.site, p, psi.max_gradient())?;
    Ok((lhs, rhs))
}

/// Recomputes the margin of one H1–H5 sample from its key.
pub fn replay(pot: &dyn MultibodyPotential<f64>, key: &SampleKey) -> Result<f64> {
    let ctx = context(pot, key)?;
    Ok(evaluate(pot, &ctx, key)?.margin)
}

fn sampled(
    pot: Pot<'_>,
    h: Hypothesis,
    sched: &SampleSchedule,
    with_delta: bool,
    amplitude: f64,
) -> Result<Vec<(SampleKey, Outcome)>> {
    let cells: Vec<(Context, SampleKey)> = cell_keys(h, sched, with_delta, amplitude)
        .into_iter()
        .map(|k| Ok((context(pot, &k)?, k)))
        .collect::<Result<_>>()?;
    run_cells(&cells, sched.samples, sched.seed, |ctx, key| evaluate(pot, ctx, key))
}

fn entry(
    h: Hypothesis,
    s: Summary,
    pass: bool,
    declared: Option<f64>,
    decay: Vec<DecayRow>,
    note: String,
) -> HypothesisEntry {
    HypothesisEntry {
        hypothesis: h,
        status: if pass { Status::Pass } else { Status::Fail },
        fitted: s.fitted,
        fitted_per_eps: s.fitted_per_eps,
        declared,
        decay,
        worst: s.worst,
        samples: s.samples,
        violations: s.violations,
        note,
    }
}

/// Adding a constant vector to every value leaves `φ_i` unchanged.
///
/// Fields are rounded to multiples of `2^{−30}` and constants to multiples of
/// `2^{−8}`, so the shifted field is exact and any change comes from `φ_i`.
pub fn check_h1(pot: &dyn MultibodyPotential<f64>, sched: &SampleSchedule) -> Result<HypothesisEntry> {
    validate(sched)?;
    let res = sampled(pot, Hypothesis::H1, sched, false, sched.amplitude)?;
    let s = summarize(&res, Fit::None);
    let pass = s.violations == 0;
    Ok(entry(Hypothesis::H1, s, pass, None, Vec::new(), String::new()))
}

/// `Ĉ = max φ_i(Mx)/(|M|^p + 1)` over slopes with `|M| ≤ slope_bound`, sites and `ε`.
pub fn check_h2(pot: &dyn MultibodyPotential<f64>, sched: &SampleSchedule) -> Result<HypothesisEntry> {
    validate(sched)?;
    let declared = pot.cauchy_born_constant();
    let res = sampled(pot, Hypothesis::H2, sched, false, sched.slope_bound)?;
    let s = summarize(&res, Fit::Max);
    let finite = s.fitted_per_eps.iter().all(|(_, c)| c.is_finite()) && s.fitted.is_some_and(f64::is_finite);
    let (lo, hi) =
        s.fitted_per_eps.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(_, c)| (a.min(c), b.max(c)));
    let stable = declared.is_some() || hi - lo <= 1e-6 * hi.abs().max(1.0);
    let note = if stable { String::new() } else { format!("Ĉ varies across ε: {lo:.6e} to {hi:.6e}") };
    let pass = s.violations == 0 && finite && stable;
    Ok(entry(Hypothesis::H2, s, pass, declared, Vec::new(), note))
}

/// `ĉ = min φ_i/(Σ_n |D^{e_n}_ε z(i)|^p − 1)` over samples with a positive denominator.
pub fn check_h3(pot: &dyn MultibodyPotential<f64>, sched: &SampleSchedule) -> Result<HypothesisEntry> {
    validate(sched)?;
    let declared = pot.coercivity_constant();
    let res = sampled(pot, Hypothesis::H3, sched, false, sched.amplitude)?;
    let s = summarize(&res, Fit::Min);
    let positive = !s.fitted_per_eps.is_empty() && s.fitted_per_eps.iter().all(|(_, c)| *c > 0.0);
    let note = if s.fitted.is_none() { "no sample with Σ|D^{e_n}z|^p > 1".to_string() } else { String::new() };
    let pass = s.violations == 0 && positive;
    Ok(entry(Hypothesis::H3, s, pass, declared, Vec::new(), note))
}

/// `φ_i(z) ≤ φ_i(w) + Σ C^{j,ξ}_{ε,δ}(|D^ξ_ε z(i+j)|^p + 1)` whenever `z = w` on `Q_δ(i)`,
/// and `Σ C^{j,ξ}_{ε,δ}` shrinking to zero along the `ε` schedule for each `δ`.
pub fn check_h4(pot: &dyn MultibodyPotential<f64>, sched: &SampleSchedule) -> Result<HypothesisEntry> {
    validate(sched)?;
    if pot.locality_profile(sched.eps[0], sched.delta[0]).is_none() {
        return Ok(HypothesisEntry::not_applicable(Hypothesis::H4, "no locality profile declared"));
    }
    let mut decay = Vec::new();
    let mut decaying = true;
    for &delta in &sched.delta {
        let mut sums = Vec::new();
        for &eps in &sched.eps {
            let sum = pot.locality_profile(eps, delta).map_or(f64::NAN, |p| p.total_sum());
            decay.push(DecayRow { eps: Some(eps), delta: Some(delta), level: None, sum });
            sums.push(sum);
        }
        decaying &= decays(&sums);
    }
    let res = sampled(pot, Hypothesis::H4, sched, true, sched.amplitude)?;
    let s = summarize(&res, Fit::None);
    let note = if decaying { String::new() } else { "locality sums do not shrink along the ε schedule".into() };
    let pass = s.violations == 0 && decaying;
    Ok(entry(Hypothesis::H4, s, pass, None, decay, note))
}

/// The cut-off blend inequality with the declared `C` and `C^{j,ξ}_ε`, the sup of
/// `|D^{e_n}_ε ψ|` taken over the whole sampled window; plus finite total and tail sums
/// `Σ_{max(ε|ξ|, ε|j|) > δ} C^{j,ξ}` shrinking to zero along the `ε` schedule.
pub fn check_h5(pot: &dyn MultibodyPotential<f64>, sched: &SampleSchedule) -> Result<HypothesisEntry> {
    validate(sched)?;
    let Some((c, prof)) = pot.nonconvexity_profile() else {
        return Ok(HypothesisEntry::not_applicable(Hypothesis::H5, "no non-convexity profile declared"));
    };
    let mut decay = vec![DecayRow { eps: None, delta: None, level: None, sum: prof.total_sum() }];
    let mut decaying = prof.total_sum().is_finite();
    for &delta in &sched.delta {
        let sums: Vec<f64> = sched.eps.iter().map(|&eps| prof.tail_sum(eps, delta)).collect();
        for (&eps, &sum) in sched.eps.iter().zip(&sums) {
            decay.push(DecayRow { eps: Some(eps), delta: Some(delta), level: None, sum });
        }
        decaying &= decays(&sums);
    }
    let res = sampled(pot, Hypothesis::H5, sched, true, sched.amplitude)?;
    let s = summarize(&res, Fit::None);
    let note =
        if decaying { String::new() } else { "non-convexity tail sums do not shrink along the ε schedule".into() };
    let pass = s.violations == 0 && decaying;
    Ok(entry(Hypothesis::H5, s, pass, Some(c), decay, note))
}

/// H1–H5 in order.
pub fn check_all(pot: &dyn MultibodyPotential<f64>, sched: &SampleSchedule) -> Result<HypothesisReport> {
    let entries = vec![
        check_h1(pot, sched)?,
        check_h2(pot, sched)?,
        check_h3(pot, sched)?,
        check_h4(pot, sched)?,
        check_h5(pot, sched)?,
    ];
    Ok(HypothesisReport { potential: pot.name().to_string(), schedule: sched.clone(), entries })
}

/// H1–H5 followed by Hp4–Hp7 on the truncations of `base`.
pub fn check_family(base: &TermPotential<f64>, sched: &SampleSchedule) -> Result<HypothesisReport> {
    let mut report = check_all(base, sched)?;
    report.entries.extend(check_hp(base, sched)?);
    Ok(report)
}
