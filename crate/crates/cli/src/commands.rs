use std::path::Path;

use serde::Serialize;
use serde_json::json;

use lathom::cellsolver::{solve, solve_with_oracle, CellProblem, OracleMode};
use lathom::homogenize::{estimate_fhom, sweep, sweep_csv, SweepEntry};
use lathom::hypotheses::{check_all, check_family, check_hp, HypothesisReport};
use lathom::potentials::{lj_margin_curve, lj_tail_bound};
use lathom::LathomError;

use crate::config::{
    build_potential, checked_schedule, estimate_options, slope, sweep_grid, Built, ConfigError, MethodSpec, RunConfig,
};
use crate::output::{num, plot_data, write_atomic};
use crate::{EXIT_CHECK_FAILED, EXIT_NOT_CONVERGED, EXIT_OK};

pub enum Failure {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<LathomError> for Failure {
    fn from(e: LathomError) -> Self {
        match e {
            LathomError::InvalidInput(_)
            | LathomError::Config(_)
            | LathomError::DimensionMismatch { .. }
            | LathomError::NotApplicable(_)
            | LathomError::InstanceTooLarge { .. } => Failure::Config(ConfigError::new(e.to_string())),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type FResult<X> = std::result::Result<X, Failure>;

fn write_json(path: &Path, value: &impl Serialize) -> FResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Runtime(e.to_string()))?;
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

fn potential(cfg: &RunConfig) -> FResult<Built> {
    Ok(build_potential(cfg.potential_spec()?)?)
}

pub fn check(cfg: &RunConfig, out: &Path) -> FResult<i32> {
    let built = potential(cfg)?;
    let report = match &built {
        Built::Family(p) => check_family(p, &cfg.check)?,
        Built::Composite(c) => {
            let mut r: HypothesisReport = check_all(c, &cfg.check)?;
            r.entries.extend(check_hp(c.base(), &cfg.check)?);
            r
        }
    };
    let table = report.table();
    write_json(&out.join("check.json"), &json!({ "config": cfg, "report": report }))?;
    write_atomic(&out.join("check.txt"), table.as_bytes())?;
    print!("{table}");
    Ok(if report.passed() { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub fn cell(cfg: &RunConfig, out: &Path) -> FResult<i32> {
    let built = potential(cfg)?;
    let pot = built.as_dyn();
    let m = slope(cfg.cell.m.as_deref().ok_or_else(|| ConfigError::new("cell needs `m`"))?, pot)?;
    let side = cfg.cell.side.ok_or_else(|| ConfigError::new("cell needs `side`"))?;
    let problem = CellProblem::new(pot, &m, side, cfg.cell.layer.layer())?;
    let sol = match cfg.solver.method {
        MethodSpec::Oracle => solve_with_oracle(&problem, OracleMode::Auto)?,
        _ => solve(&problem, &cfg.solver.options(), None)?,
    };
    let note = if sol.free == 0 { "no free sites" } else { "" };
    let report = json!({
        "config": cfg,
        "inputs": { "m": m.as_slice(), "side": side, "layer": sol.layer, "free": sol.free },
        "F_L": sol.per_volume_energy,
        "affine_F_L": sol.affine_per_volume_energy,
        "energy": sol.energy,
        "iterations": sol.iterations,
        "gradnorm": sol.grad_sup,
        "converged": sol.converged,
        "method": sol.method,
        "note": note,
    });
    write_json(&out.join("cell.json"), &report)?;
    if cfg.cell.dump_field {
        let (dim, n) = (pot.dim(), pot.codim());
        let mut text = String::new();
        let head: Vec<String> = (0..dim).map(|a| format!("k{a}")).chain((0..n).map(|c| format!("u{c}"))).collect();
        text.push_str(&head.join(","));
        text.push('\n');
        let d = sol.field.domain();
        for idx in 0..d.len() {
            let k = d.site(idx);
            let row: Vec<String> =
                k[..dim].iter().map(|x| x.to_string()).chain(sol.field.value(idx).iter().map(|&v| num(v))).collect();
            text.push_str(&row.join(","));
            text.push('\n');
        }
        write_atomic(&out.join("cell_field.csv"), text.as_bytes())?;
    }
    println!(
        "F_L = {} (L = {side}, layer = {}, free = {}{})",
        num(sol.per_volume_energy),
        sol.layer,
        sol.free,
        if note.is_empty() { String::new() } else { format!(", {note}") }
    );
    Ok(if sol.converged { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

fn no_oracle(cfg: &RunConfig) -> FResult<()> {
    if cfg.solver.method == MethodSpec::Oracle {
        return Err(ConfigError::new("the oracle method is available for `cell` only").into());
    }
    Ok(())
}

fn curves(entries: &[SweepEntry]) -> String {
    let blocks: Vec<(String, Vec<Vec<f64>>)> = entries
        .iter()
        .filter_map(|e| {
            let est = e.estimate.as_ref()?;
            let rows = est.schedule.iter().map(|s| vec![s.side as f64, s.value]).collect();
            Some((format!("M = {:?}", e.m), rows))
        })
        .collect();
    plot_data(&["L", "F_L"], &blocks)
}

fn converged(entries: &[SweepEntry]) -> bool {
    entries.iter().all(|e| e.estimate.as_ref().is_some_and(|est| est.schedule.iter().all(|s| s.converged)))
}

pub fn fhom(cfg: &RunConfig, out: &Path) -> FResult<i32> {
    no_oracle(cfg)?;
    let built = potential(cfg)?;
    let pot = built.as_dyn();
    let m = slope(cfg.fhom.m.as_deref().ok_or_else(|| ConfigError::new("fhom needs `m`"))?, pot)?;
    let schedule = checked_schedule(cfg.fhom.schedule.as_ref(), pot)?;
    let mut resolved = cfg.clone();
    resolved.fhom.schedule = Some(schedule.clone());
    let opts = estimate_options(&cfg.solver, cfg.fhom.layer, cfg.fhom.warm_start);
    let est = estimate_fhom(pot, &m, &schedule, &opts)?;
    let entries = vec![SweepEntry { index: 0, m: est.m.clone(), estimate: Some(est.clone()), error: None }];
    write_json(&out.join("fhom.json"), &json!({ "config": resolved, "estimate": est }))?;
    write_atomic(&out.join("fhom.csv"), sweep_csv(&entries)?.as_bytes())?;
    write_atomic(&out.join("fhom_curve.dat"), curves(&entries).as_bytes())?;
    println!("f_hom = {} ± {}", num(est.f_hom), num(est.error));
    Ok(if converged(&entries) { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn sweep_cmd(cfg: &RunConfig, out: &Path) -> FResult<i32> {
    no_oracle(cfg)?;
    let built = potential(cfg)?;
    let pot = built.as_dyn();
    let grid = sweep_grid(&cfg.sweep, pot)?;
    let schedule = checked_schedule(cfg.sweep.schedule.as_ref(), pot)?;
    let mut resolved = cfg.clone();
    resolved.sweep.schedule = Some(schedule.clone());
    resolved.sweep.grid = grid.iter().map(|m| m.as_slice().to_vec()).collect();
    let opts = estimate_options(&cfg.solver, cfg.sweep.layer, cfg.sweep.warm_start);
    std::fs::create_dir_all(out)?;
    let record = out.join("sweep.jsonl");
    let entries = sweep(pot, &grid, &schedule, &opts, cfg.sweep.resume.then_some(record.as_path()))?;
    write_json(&out.join("sweep.json"), &json!({ "config": resolved, "entries": entries }))?;
    write_atomic(&out.join("sweep.csv"), sweep_csv(&entries)?.as_bytes())?;
    write_atomic(&out.join("sweep_curves.dat"), curves(&entries).as_bytes())?;
    let rows: Vec<Vec<f64>> = entries
        .iter()
        .filter_map(|e| {
            let est = e.estimate.as_ref()?;
            let norm = e.m.iter().map(|x| x * x).sum::<f64>().sqrt();
            Some(vec![norm, est.f_hom, est.error])
        })
        .collect();
    write_atomic(
        &out.join("sweep_fhom.dat"),
        plot_data(&["|M|", "f_hom", "error"], &[(String::new(), rows)]).as_bytes(),
    )?;
    for e in &entries {
        match (&e.estimate, &e.error) {
            (Some(est), _) => println!("{:?}: f_hom = {} ± {}", e.m, num(est.f_hom), num(est.error)),
            (None, err) => println!("{:?}: failed: {}", e.m, err.clone().unwrap_or_default()),
        }
    }
    Ok(if converged(&entries) { EXIT_OK } else { EXIT_NOT_CONVERGED })
}

pub fn lj_margin(cfg: &RunConfig, out: &Path) -> FResult<i32> {
    let kmax = cfg.lj_margin.kmax;
    if kmax < 2 {
        return Err(ConfigError::new("lj_margin.kmax must be at least 2").into());
    }
    let curve = lj_margin_curve(kmax);
    let mut csv = String::from("K,margin\n");
    for (k, v) in &curve {
        csv.push_str(&format!("{k},{}\n", num(*v)));
    }
    let rows: Vec<Vec<f64>> = curve.iter().map(|&(k, v)| vec![k as f64, v]).collect();
    let tail = lj_tail_bound(kmax);
    write_json(&out.join("lj_margin.json"), &json!({ "config": cfg, "curve": curve, "tail_bound": tail }))?;
    write_atomic(&out.join("lj_margin.csv"), csv.as_bytes())?;
    write_atomic(&out.join("lj_margin.dat"), plot_data(&["K", "margin"], &[(String::new(), rows)]).as_bytes())?;
    print!("{csv}");
    println!("# tail bound beyond K = {kmax}: {}", num(tail));
    Ok(EXIT_OK)
}
