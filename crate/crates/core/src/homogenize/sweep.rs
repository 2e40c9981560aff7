use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LathomError, Result};
use crate::homogenize::{estimate_fhom, EstimateOptions, HomogenizationEstimate};
use crate::matrix::Mat;
use crate::potentials::MultibodyPotential;
use crate::scalar::{to_f64, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub index: usize,
    pub m: Vec<f64>,
    pub estimate: Option<HomogenizationEstimate>,
    pub error: Option<String>,
}

/// One estimate per slope, in parallel over the grid.
///
/// With a `record` path, finished entries are appended to it as JSON lines and
/// entries already present there (same index and slope) are not recomputed.
/// A failing slope is reported in its entry and does not stop the sweep.
pub fn sweep<T: Scalar, P: MultibodyPotential<T> + ?Sized>(
    pot: &P,
    grid: &[Mat<T>],
    schedule: &[usize],
    opts: &EstimateOptions<T>,
    record: Option<&Path>,
) -> Result<Vec<SweepEntry>> {
    let keys: Vec<Vec<f64>> = grid.iter().map(|m| m.as_slice().iter().map(|&x| to_f64(x)).collect()).collect();
    let mut done: Vec<Option<SweepEntry>> = vec![None; grid.len()];
    if let Some(path) = record {
        if path.exists() {
            let file = std::fs::File::open(path)?;
            for line in BufReader::new(file).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let entry: SweepEntry = serde_json::from_str(&line)?;
                if entry.index < grid.len() && entry.m == keys[entry.index] && entry.estimate.is_some() {
                    let i = entry.index;
                    done[i] = Some(entry);
                }
            }
        }
    }
    let sink = match record {
        Some(path) => Some(Mutex::new(OpenOptions::new().create(true).append(true).open(path)?)),
        None => None,
    };
    let todo: Vec<usize> = (0..grid.len()).filter(|&i| done[i].is_none()).collect();
    let fresh: Vec<(usize, SweepEntry)> = todo
        .par_iter()
        .map(|&i| {
            let entry = match estimate_fhom(pot, &grid[i], schedule, opts) {
                Ok(e) => SweepEntry { index: i, m: keys[i].clone(), estimate: Some(e), error: None },
                Err(e) => SweepEntry { index: i, m: keys[i].clone(), estimate: None, error: Some(e.to_string()) },
            };
            if let (Some(sink), Some(_)) = (&sink, &entry.estimate) {
                let line = serde_json::to_string(&entry)?;
                let mut f = sink.lock().map_err(|_| LathomError::Config("sweep record lock poisoned".into()))?;
                writeln!(f, "{line}")?;
                f.flush()?;
            }
            Ok((i, entry))
        })
        .collect::<Result<_>>()?;
    for (i, e) in fresh {
        done[i] = Some(e);
    }
    Ok(done.into_iter().map(|e| e.expect("every slope visited")).collect())
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// One row per slope and side, in grid order.
pub fn sweep_csv(entries: &[SweepEntry]) -> Result<String> {
    let width = entries.iter().map(|e| e.m.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (0..width).map(|k| format!("m{k}")).collect();
    header.extend(
        ["L", "layer", "F_L", "gradnorm", "iterations", "converged", "f_hom_extrapolated", "error_bar", "status"]
            .map(String::from),
    );
    let csv_err = |e: csv::Error| LathomError::Config(e.to_string());
    w.write_record(&header).map_err(csv_err)?;
    for e in entries {
        let mut m: Vec<String> = e.m.iter().map(|&x| fmt(x)).collect();
        m.resize(width, String::new());
        match &e.estimate {
            Some(est) => {
                for s in &est.schedule {
                    let mut row = m.clone();
                    row.extend([
                        s.side.to_string(),
                        s.layer.to_string(),
                        fmt(s.value),
                        fmt(s.grad_sup),
                        s.iterations.to_string(),
                        s.converged.to_string(),
                        fmt(est.f_hom),
                        fmt(est.error),
                        "ok".to_string(),
                    ]);
                    w.write_record(&row).map_err(csv_err)?;
                }
            }
            None => {
                let mut row = m.clone();
                row.extend(std::iter::repeat_n(String::new(), 8));
                row.push(e.error.clone().unwrap_or_default());
                w.write_record(&row).map_err(csv_err)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| LathomError::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| LathomError::Config(e.to_string()))
}
