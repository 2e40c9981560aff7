use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use lathom::cellsolver::{Layer, Method, SolverOptions};
use lathom::homogenize::{default_schedule, default_sweep_grid, EstimateOptions};
use lathom::hypotheses::SampleSchedule;
use lathom::lattice::DirectionOffset;
use lathom::potentials::{
    determinant, determinant_family, lj_raw_pair, lj_regroup, long_bond_density, make_periodic, nn_power,
    pair_family_default, pair_table, two_spring_chain, GLaw, LjCorrection, MultibodyPotential, PairEntry,
    PeriodicComposite, TermPotential,
};
use lathom::Mat;

/// Largest inline coefficient table; longer tables go through `table_csv`.
pub const MAX_INLINE_ROWS: usize = 10_000;

/// A configuration problem, with its position in the offending file when known.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConfigError {
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        ConfigError { message: message.into(), file: None, line: None, column: None }
    }

    fn at(mut self, file: &Path, line: usize, column: usize) -> Self {
        self.file = Some(file.to_path_buf());
        self.line = Some(line);
        self.column = Some(column);
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(file) = &self.file {
            write!(f, "{}", file.display())?;
            if let (Some(l), Some(c)) = (self.line, self.column) {
                write!(f, ":{l}:{c}")?;
            }
            write!(f, ": ")?;
        }
        write!(f, "{}", self.message)
    }
}

impl From<lathom::LathomError> for ConfigError {
    fn from(e: lathom::LathomError) -> Self {
        ConfigError::new(e.to_string())
    }
}

type CResult<X> = std::result::Result<X, ConfigError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Check,
    Cell,
    Fhom,
    Sweep,
    LjMargin,
}

/// Everything a run needs. Every section has defaults; unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Worker threads; falls back to `LATHOM_THREADS`, then to the number of cores.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Output directory, `lathom-out` by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    pub solver: SolverConfig,
    pub cell: CellConfig,
    pub fhom: FhomConfig,
    pub sweep: SweepConfig,
    pub check: SampleSchedule,
    pub lj_margin: LjMarginConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum PotentialSpec {
    Pair(PairSpec),
    Determinant(DeterminantSpec),
    Lj(LjSpec),
    PeriodicComposite(CompositeSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairPreset {
    /// Nearest-neighbour bonds `Σ_n |D^{e_n} u|^p`.
    Nn,
    /// The 2D table with unit, diagonal and second-neighbour bonds.
    Default,
    /// The 1D chain with alternating stiffness 1 and 3.
    TwoSpring,
    /// Two- and three-bonds only, weights `c2`, `c3`.
    LongBond,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<PairPreset>,
    #[serde(default = "one")]
    pub dim: usize,
    #[serde(default = "one")]
    pub codim: usize,
    #[serde(default = "two")]
    pub p: f64,
    #[serde(default = "one")]
    pub period: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub table: Vec<PairRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_csv: Option<PathBuf>,
    #[serde(default = "unit")]
    pub c2: f64,
    #[serde(default = "unit")]
    pub c3: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairRow {
    pub j: Vec<i64>,
    pub xi: Vec<i64>,
    pub value: Coefficient,
}

/// One coefficient, or one per residue class modulo the period.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    One(f64),
    PerResidue(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterminantSpec {
    #[serde(default = "two_usize")]
    pub n: usize,
    #[serde(default = "two")]
    pub p: f64,
    /// Empty means the tuples `(e_1, …, e_n)` at weight 1 and `(2e_1, …, 2e_n)` at 1/2.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tuples: Vec<TupleSpec>,
    #[serde(default)]
    pub law: LawSpec,
    #[serde(default = "unit")]
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleSpec {
    pub xis: Vec<Vec<i64>>,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LawSpec {
    SmoothAbs { eta: f64 },
    Abs,
    Power { q: f64 },
}

impl Default for LawSpec {
    fn default() -> Self {
        LawSpec::SmoothAbs { eta: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LjSpec {
    #[serde(default = "two_usize")]
    pub dim: usize,
    /// Shells `|ξ|_∞ ≤ k`.
    pub k: usize,
    /// Nearest-neighbour correction radius; `None` corrects for the whole lattice.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub correction: Option<usize>,
    /// The unregrouped, indefinite pair density.
    #[serde(default)]
    pub raw: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompositeSpec {
    pub base: Box<PotentialSpec>,
    pub eps: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub k_max: usize,
}

fn one() -> usize {
    1
}
fn two_usize() -> usize {
    2
}
fn two() -> f64 {
    2.0
}
fn unit() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}

/// `"sqrt"` for `⌊√L⌋` or a fixed width.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LayerSpec {
    Fixed(usize),
    Named(LayerName),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerName {
    Sqrt,
}

impl Default for LayerSpec {
    fn default() -> Self {
        LayerSpec::Named(LayerName::Sqrt)
    }
}

impl LayerSpec {
    pub fn layer(self) -> Layer {
        match self {
            LayerSpec::Fixed(m) => Layer::Fixed(m),
            LayerSpec::Named(LayerName::Sqrt) => Layer::Sqrt,
        }
    }

    pub fn parse(s: &str) -> CResult<Self> {
        match s {
            "sqrt" => Ok(LayerSpec::Named(LayerName::Sqrt)),
            _ => s
                .parse()
                .map(LayerSpec::Fixed)
                .map_err(|_| ConfigError::new(format!("layer must be `sqrt` or a width, got `{s}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodSpec {
    #[default]
    Auto,
    Exact,
    Iterative,
    Oracle,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: MethodSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gtol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
}

impl SolverConfig {
    pub fn options(&self) -> SolverOptions<f64> {
        let method = match self.method {
            MethodSpec::Auto | MethodSpec::Oracle => None,
            MethodSpec::Exact => Some(Method::ExactQuadratic),
            MethodSpec::Iterative => Some(Method::Iterative),
        };
        SolverOptions { method, gtol: self.gtol, max_iter: self.max_iter, restarts: self.restarts, seed: self.seed }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CellConfig {
    /// Row-major `n × N` slope.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<usize>,
    pub layer: LayerSpec,
    /// Also write the minimizer as CSV.
    pub dump_field: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FhomConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<f64>>,
    /// Defaults by dimension: 8–128 in 1D, 8–64 in 2D, 4–16 in 3D.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<usize>>,
    pub layer: LayerSpec,
    #[serde(default = "yes")]
    pub warm_start: bool,
}

impl Default for FhomConfig {
    fn default() -> Self {
        FhomConfig { m: None, schedule: None, layer: LayerSpec::default(), warm_start: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Row-major slopes; empty means the default grid.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub grid: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<usize>>,
    pub layer: LayerSpec,
    pub warm_start: bool,
    /// Skip slopes already recorded in the output directory.
    pub resume: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { grid: Vec::new(), schedule: None, layer: LayerSpec::default(), warm_start: true, resume: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LjMarginConfig {
    pub kmax: usize,
}

impl Default for LjMarginConfig {
    fn default() -> Self {
        LjMarginConfig { kmax: 1000 }
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map(|s| s.chars().count()).unwrap_or(0) + 1;
    (line, column)
}

/// Offset of the key named in a serde message such as "unknown field `x`". The
/// tagged `[potential]` section is buffered before it is decoded, so toml reports
/// no useful span for errors inside it.
fn key_offset(text: &str, message: &str) -> Option<usize> {
    let start = message.find('`')? + 1;
    let key = &message[start..start + message[start..].find('`')?];
    let from = text.find("[potential").unwrap_or(0);
    let mut pos = from;
    while let Some(i) = text[pos..].find(key) {
        let at = pos + i;
        let before = text[..at].chars().next_back();
        let rest = text[at + key.len()..].trim_start();
        if !before.is_some_and(|c| c.is_alphanumeric() || c == '_') && rest.starts_with('=') {
            return Some(at);
        }
        pos = at + key.len();
    }
    (from > 0).then_some(from)
}

impl RunConfig {
    pub fn from_toml(text: &str, file: &Path) -> CResult<Self> {
        toml::from_str(text).map_err(|e| {
            let err = ConfigError::new(e.message().to_string());
            let offset = match e.span() {
                Some(span) if span.start > 0 => Some(span.start),
                _ => key_offset(text, e.message()),
            };
            match offset {
                Some(o) => {
                    let (l, c) = line_col(text, o);
                    err.at(file, l, c)
                }
                None => ConfigError { file: Some(file.to_path_buf()), ..err },
            }
        })
    }

    pub fn load(path: &Path) -> CResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { file: Some(path.to_path_buf()), ..ConfigError::new(e.to_string()) })?;
        let mut cfg = Self::from_toml(&text, path)?;
        if let Some(PotentialSpec::Pair(p)) = &mut cfg.potential {
            if let Some(csv) = &p.table_csv {
                if csv.is_relative() {
                    let base = path.parent().unwrap_or(Path::new("."));
                    p.table_csv = Some(base.join(csv));
                }
            }
        }
        Ok(cfg)
    }

    pub fn potential_spec(&self) -> CResult<&PotentialSpec> {
        self.potential.as_ref().ok_or_else(|| ConfigError::new("missing [potential] section"))
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("lathom-out"))
    }
}

/// A built potential: a term family or the ε-dependent composite over a box.
pub enum Built {
    Family(TermPotential<f64>),
    Composite(PeriodicComposite<f64>),
}

impl Built {
    pub fn as_dyn(&self) -> &dyn MultibodyPotential<f64> {
        match self {
            Built::Family(p) => p,
            Built::Composite(p) => p,
        }
    }
}

fn offset(v: &[i64]) -> CResult<DirectionOffset> {
    DirectionOffset::new(v.to_vec()).map_err(|e| ConfigError::new(e.to_string()))
}

fn ints(field: &str) -> std::result::Result<Vec<i64>, String> {
    field
        .split(|c: char| c.is_whitespace() || c == ';')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>().map_err(|_| format!("`{s}` is not an integer")))
        .collect()
}

fn floats(field: &str) -> std::result::Result<Vec<f64>, String> {
    field
        .split(|c: char| c.is_whitespace() || c == ';')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("`{s}` is not a number")))
        .collect()
}

/// Rows of a coefficient CSV with columns `j`, `xi`, `value`; vector entries are
/// separated by spaces or semicolons.
pub fn read_table_csv(path: &Path) -> CResult<Vec<PairRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| ConfigError { file: Some(path.to_path_buf()), ..ConfigError::new(e.to_string()) })?;
    let headers = rdr.headers().map_err(|e| ConfigError::new(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (cj, cx, cv) = match (col("j"), col("xi"), col("value")) {
        (Some(a), Some(b), Some(c)) => (a, b, c),
        _ => return Err(ConfigError::new("coefficient CSV needs columns j, xi, value").at(path, 1, 1)),
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            ConfigError::new(e.to_string()).at(path, line, 1)
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let cell = |c: usize| rec.get(c).unwrap_or("");
        let fail = |c: usize, msg: String| {
            let column = (0..c).map(|k| rec.get(k).map(|s| s.len() + 1).unwrap_or(0)).sum::<usize>() + 1;
            ConfigError::new(msg).at(path, line, column)
        };
        let j = ints(cell(cj)).map_err(|m| fail(cj, m))?;
        let xi = ints(cell(cx)).map_err(|m| fail(cx, m))?;
        let values = floats(cell(cv)).map_err(|m| fail(cv, m))?;
        let value = match values.as_slice() {
            [] => return Err(fail(cv, "missing coefficient".into())),
            [v] => Coefficient::One(*v),
            _ => Coefficient::PerResidue(values),
        };
        rows.push(PairRow { j, xi, value });
    }
    Ok(rows)
}

fn build_family(spec: &PotentialSpec) -> CResult<TermPotential<f64>> {
    Ok(match spec {
        PotentialSpec::Pair(p) => match p.preset {
            Some(PairPreset::Nn) => nn_power(p.dim, p.codim, p.p)?,
            Some(PairPreset::Default) => pair_family_default(p.codim)?,
            Some(PairPreset::TwoSpring) => two_spring_chain()?,
            Some(PairPreset::LongBond) => long_bond_density(p.c2, p.c3)?,
            None => {
                if !p.table.is_empty() && p.table_csv.is_some() {
                    return Err(ConfigError::new("give either `table` or `table_csv`, not both"));
                }
                if p.table.len() > MAX_INLINE_ROWS {
                    return Err(ConfigError::new(format!(
                        "inline table has {} rows; use `table_csv` above {MAX_INLINE_ROWS}",
                        p.table.len()
                    )));
                }
                let rows = match &p.table_csv {
                    Some(path) => read_table_csv(path)?,
                    None => p.table.clone(),
                };
                let mut entries = Vec::with_capacity(rows.len());
                for (r, row) in rows.iter().enumerate() {
                    if row.j.len() != p.dim || row.xi.len() != p.dim {
                        return Err(ConfigError::new(format!("table row {}: j and xi need {} entries", r + 1, p.dim)));
                    }
                    let coeffs = match &row.value {
                        Coefficient::One(v) => vec![*v],
                        Coefficient::PerResidue(v) => v.clone(),
                    };
                    entries.push(PairEntry { j: row.j.clone(), xi: offset(&row.xi)?, coeffs });
                }
                pair_table("pair", p.dim, p.codim, p.p, p.period, &entries)?
            }
        },
        PotentialSpec::Determinant(d) => {
            if d.tuples.is_empty() {
                determinant_family(d.n, d.p)?
            } else {
                let law = match d.law {
                    LawSpec::SmoothAbs { eta } => GLaw::SmoothAbs { eta },
                    LawSpec::Abs => GLaw::Abs,
                    LawSpec::Power { q } => GLaw::Power { q },
                };
                let mut tuples = Vec::with_capacity(d.tuples.len());
                for t in &d.tuples {
                    if t.xis.len() != d.n {
                        return Err(ConfigError::new(format!("determinant tuples need {} directions", d.n)));
                    }
                    let xis = t.xis.iter().map(|x| offset(x)).collect::<CResult<Vec<_>>>()?;
                    tuples.push((xis, t.weight));
                }
                determinant(d.n, d.p, &tuples, law, d.bound)?
            }
        }
        PotentialSpec::Lj(l) => {
            if l.raw {
                lj_raw_pair(l.dim, l.k)?
            } else {
                let corr = l.correction.map(LjCorrection::Matched).unwrap_or(LjCorrection::Full);
                lj_regroup(l.dim, l.k, corr)?.potential
            }
        }
        PotentialSpec::PeriodicComposite(_) => {
            return Err(ConfigError::new("a periodic composite cannot be the base of another composite"))
        }
    })
}

pub fn build_potential(spec: &PotentialSpec) -> CResult<Built> {
    match spec {
        PotentialSpec::PeriodicComposite(c) => {
            let base = build_family(&c.base)?;
            Ok(Built::Composite(make_periodic(base, c.eps, &c.lower, &c.upper, c.k_max)?))
        }
        other => Ok(Built::Family(build_family(other)?)),
    }
}

/// A row-major `codim × dim` slope.
pub fn slope(values: &[f64], pot: &dyn MultibodyPotential<f64>) -> CResult<Mat<f64>> {
    let (n, d) = (pot.codim(), pot.dim());
    if values.iter().any(|x| !x.is_finite()) {
        return Err(ConfigError::new("slope entries must be finite"));
    }
    Mat::from_row_major(n, d, values.to_vec())
        .ok_or_else(|| ConfigError::new(format!("slope needs {} entries ({n}×{d}), got {}", n * d, values.len())))
}

pub fn checked_schedule(schedule: Option<&Vec<usize>>, pot: &dyn MultibodyPotential<f64>) -> CResult<Vec<usize>> {
    let s = schedule.cloned().unwrap_or_else(|| default_schedule(pot.dim()));
    if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) || s[0] == 0 {
        return Err(ConfigError::new("schedule must be a nonempty increasing list of positive sides"));
    }
    let period = pot.period().ok_or_else(|| ConfigError::new("homogenization needs a periodic potential"))?;
    if let Some(l) = s.iter().find(|&&l| l % period != 0) {
        return Err(ConfigError::new(format!("side {l} is not a multiple of the period {period}")));
    }
    Ok(s)
}

pub fn estimate_options(solver: &SolverConfig, layer: LayerSpec, warm_start: bool) -> EstimateOptions<f64> {
    EstimateOptions { layer: layer.layer(), solver: solver.options(), warm_start }
}

pub fn sweep_grid(cfg: &SweepConfig, pot: &dyn MultibodyPotential<f64>) -> CResult<Vec<Mat<f64>>> {
    if cfg.grid.is_empty() {
        return Ok(default_sweep_grid(pot.codim(), pot.dim()));
    }
    cfg.grid.iter().map(|m| slope(m, pot)).collect()
}
