//! Input parsing, run configuration and report output for the `mvph` binary.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use mvph::engine::{self, BettiReport, EngineConfig};
use mvph::{Error as CoreError, PointCloud};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(CoreError::BudgetExceeded { .. }) => 3,
            CliError::Core(CoreError::Config(_) | CoreError::NotPrime(_)) => 1,
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Core(_) => 2,
            CliError::VerifyFailed(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Clone, PartialEq)]
pub enum Scales {
    List(Vec<f64>),
    Steps(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub epsilon: f64,
    pub scales: Scales,
    pub max_dim: usize,
    pub field: u32,
    pub workers: usize,
    pub grid: Option<Vec<usize>>,
    pub budget: usize,
    pub verify: bool,
    pub output: Option<PathBuf>,
    pub slack: f64,
    pub timings: bool,
}

impl RunConfig {
    pub fn engine_config(&self, dim: usize) -> Result<EngineConfig> {
        if let Some(g) = &self.grid {
            if g.len() != dim {
                return Err(CliError::Usage(format!(
                    "--grid has {} entries but the data has dimension {dim}",
                    g.len()
                )));
            }
            if g.contains(&0) {
                return Err(CliError::Usage("--grid entries must be positive".into()));
            }
        }
        let mut cfg = EngineConfig::new(self.epsilon);
        cfg.scales = match &self.scales {
            Scales::List(s) => s.clone(),
            Scales::Steps(m) => engine::evenly_spaced(self.epsilon, *m),
        };
        cfg.max_dim = self.max_dim;
        cfg.field = self.field;
        cfg.workers = self.workers.max(1);
        cfg.parallelism = self.workers.max(1);
        cfg.grid = self.grid.clone();
        cfg.budget = self.budget;
        cfg.slack = self.slack;
        Ok(cfg)
    }
}

fn is_number(s: &str) -> bool {
    s.parse::<f64>().is_ok()
}

/// Parses CSV text: one point per line, an optional header line, blank lines
/// ignored. Line numbers in errors are 1-based.
pub fn parse_points(text: &str) -> Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut dim = None;
    let mut first = true;
    let mut record = csv::StringRecord::new();
    loop {
        let more = reader.read_record(&mut record).map_err(|e| CliError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        if !more {
            break;
        }
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if std::mem::take(&mut first) && !is_number(&record[0]) {
            continue;
        }
        let expected = *dim.get_or_insert(record.len());
        if record.len() != expected {
            return Err(CliError::Parse {
                line,
                message: format!("expected {expected} fields, found {}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(expected);
        for f in record.iter() {
            let v: f64 = f
                .parse()
                .map_err(|_| CliError::Parse { line, message: format!("not a number: {f:?}") })?;
            if !v.is_finite() {
                return Err(CliError::Parse { line, message: format!("not finite: {f:?}") });
            }
            row.push(v);
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Parse { line: text.lines().count().max(1), message: "no data rows".into() });
    }
    Ok(PointCloud::new(rows)?)
}

pub fn parse_input(path: &Path) -> Result<PointCloud> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
    parse_points(&text)
}

/// CSV text that [`parse_points`] reads back to the same cloud.
pub fn format_points(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for p in cloud.points() {
        let row: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_report(report: &BettiReport, path: Option<&Path>, include_timings: bool) -> Result<()> {
    let mut json = report.to_json(include_timings);
    json.push('\n');
    match path {
        Some(p) => fs::write(p, json).map_err(|source| CliError::Io { path: p.display().to_string(), source }),
        None => io::stdout()
            .write_all(json.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

/// Runs the engine on the configured input and writes the report. A verify
/// mismatch is reported after the JSON has been written.
pub fn execute(cfg: &RunConfig) -> Result<BettiReport> {
    let cloud = Arc::new(parse_input(&cfg.input)?);
    let engine_cfg = cfg.engine_config(cloud.dim())?;
    let report = engine::run(cloud, engine_cfg, cfg.verify)?;
    emit_report(&report, cfg.output.as_deref(), cfg.timings)?;
    if let Some(v) = &report.verify {
        if !v.pass {
            let msg = match &v.error {
                Some(e) => e.clone(),
                None => format!("{} mismatching Betti numbers", v.mismatches.len()),
            };
            return Err(CliError::VerifyFailed(msg));
        }
    }
    Ok(report)
}
