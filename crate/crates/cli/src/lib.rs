//! Command-line driver: configuration, orchestration and result files.
//!
//! Exit codes: 0 success, 1 a hypothesis check failed, 2 a solve did not converge
//! or failed at run time, 3 the configuration is invalid.

pub mod config;
pub mod output;

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde_json::json;

use commands::Failure;
use config::{Command, ConfigError, LayerSpec, MethodSpec, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

/// Environment variable with the default number of worker threads.
pub const THREADS_ENV: &str = "LATHOM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "lathom", version, about = "Multibody lattice energies and homogenized densities")]
pub struct Cli {
    /// Worker threads (overrides the config file and LATHOM_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (overrides the config file).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Run the structural hypothesis checks on a potential.
    Check {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Solve one cell problem.
    Cell {
        #[arg(long)]
        config: PathBuf,
        /// Row-major slope, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        m: Option<Vec<f64>>,
        #[arg(long)]
        side: Option<usize>,
        /// `sqrt` or a fixed width.
        #[arg(long)]
        layer: Option<String>,
        /// auto, exact, iterative or oracle.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        gtol: Option<f64>,
        #[arg(long)]
        dump_field: bool,
    },
    /// Estimate f_hom(M) over a schedule of cube sides.
    Fhom {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        m: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<usize>>,
        #[arg(long)]
        layer: Option<String>,
    },
    /// Estimate f_hom over a grid of slopes, resuming recorded ones.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<usize>>,
        #[arg(long)]
        layer: Option<String>,
        #[arg(long)]
        no_resume: bool,
    },
    /// Tabulate the regrouped Lennard-Jones coercivity margin over K.
    LjMargin {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        kmax: Option<usize>,
    },
}

fn method(s: &str) -> Result<MethodSpec, ConfigError> {
    match s {
        "auto" => Ok(MethodSpec::Auto),
        "exact" => Ok(MethodSpec::Exact),
        "iterative" => Ok(MethodSpec::Iterative),
        "oracle" => Ok(MethodSpec::Oracle),
        _ => Err(ConfigError::new(format!("unknown method `{s}`"))),
    }
}

fn layer(s: &Option<String>) -> Result<Option<LayerSpec>, ConfigError> {
    s.as_deref().map(LayerSpec::parse).transpose()
}

/// The config file with command-line overrides applied.
pub fn resolve(cli: &Cli) -> Result<RunConfig, ConfigError> {
    let mut cfg = match &cli.command {
        Sub::Check { config, .. } | Sub::Cell { config, .. } | Sub::Fhom { config, .. } | Sub::Sweep { config, .. } => {
            RunConfig::load(config)?
        }
        Sub::LjMargin { config, .. } => match config {
            Some(c) => RunConfig::load(c)?,
            None => RunConfig::default(),
        },
    };
    match &cli.command {
        Sub::Check { samples, seed, .. } => {
            cfg.command = Some(Command::Check);
            if let Some(s) = samples {
                cfg.check.samples = *s;
            }
            if let Some(s) = seed {
                cfg.check.seed = *s;
            }
        }
        Sub::Cell { m, side, layer: l, method: meth, gtol, dump_field, .. } => {
            cfg.command = Some(Command::Cell);
            if m.is_some() {
                cfg.cell.m = m.clone();
            }
            if side.is_some() {
                cfg.cell.side = *side;
            }
            if let Some(l) = layer(l)? {
                cfg.cell.layer = l;
            }
            if let Some(s) = meth {
                cfg.solver.method = method(s)?;
            }
            if gtol.is_some() {
                cfg.solver.gtol = *gtol;
            }
            cfg.cell.dump_field |= *dump_field;
        }
        Sub::Fhom { m, schedule, layer: l, .. } => {
            cfg.command = Some(Command::Fhom);
            if m.is_some() {
                cfg.fhom.m = m.clone();
            }
            if schedule.is_some() {
                cfg.fhom.schedule = schedule.clone();
            }
            if let Some(l) = layer(l)? {
                cfg.fhom.layer = l;
            }
        }
        Sub::Sweep { schedule, layer: l, no_resume, .. } => {
            cfg.command = Some(Command::Sweep);
            if schedule.is_some() {
                cfg.sweep.schedule = schedule.clone();
            }
            if let Some(l) = layer(l)? {
                cfg.sweep.layer = l;
            }
            if *no_resume {
                cfg.sweep.resume = false;
            }
        }
        Sub::LjMargin { kmax, .. } => {
            cfg.command = Some(Command::LjMargin);
            if let Some(k) = kmax {
                cfg.lj_margin.kmax = *k;
            }
        }
    }
    if cli.threads.is_some() {
        cfg.threads = cli.threads;
    }
    if cli.out.is_some() {
        cfg.output = cli.out.clone();
    }
    Ok(cfg)
}

fn threads(cfg: &RunConfig) -> Result<Option<usize>, ConfigError> {
    let n = match cfg.threads {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(
                s.trim().parse().map_err(|_| ConfigError::new(format!("{THREADS_ENV} must be a positive integer")))?,
            ),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(ConfigError::new("thread count must be positive"));
    }
    Ok(n)
}

fn report(f: Failure) -> i32 {
    match f {
        Failure::Config(e) => {
            eprintln!("{}", json!({ "error": "config", "detail": e }));
            EXIT_CONFIG
        }
        Failure::Runtime(msg) => {
            eprintln!("{}", json!({ "error": "runtime", "detail": { "message": msg } }));
            EXIT_NOT_CONVERGED
        }
    }
}

/// Runs a resolved configuration and returns the exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let command = match cfg.command {
        Some(c) => c,
        None => return report(Failure::Config(ConfigError::new("no command given"))),
    };
    let n = match threads(cfg) {
        Ok(n) => n,
        Err(e) => return report(Failure::Config(e)),
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = n {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => return report(Failure::Runtime(e.to_string())),
    };
    let out = cfg.output_dir();
    let result = pool.install(|| match command {
        Command::Check => commands::check(cfg, &out),
        Command::Cell => commands::cell(cfg, &out),
        Command::Fhom => commands::fhom(cfg, &out),
        Command::Sweep => commands::sweep_cmd(cfg, &out),
        Command::LjMargin => commands::lj_margin(cfg, &out),
    });
    match result {
        Ok(code) => code,
        Err(f) => report(f),
    }
}

/// Parses `args` (program name first), runs and returns the exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match resolve(&cli) {
        Ok(cfg) => run(&cfg),
        Err(e) => report(Failure::Config(e)),
    }
}
