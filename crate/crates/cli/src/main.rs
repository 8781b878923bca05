use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use mvph::complex::DEFAULT_BUDGET;
use mvph_cli::{execute, RunConfig, Scales};

/// Betti numbers of the Rips complex of a point cloud at one or more scales,
/// computed on an overlapping grid and glued back together.
#[derive(Debug, Parser)]
#[command(name = "mvph", version)]
struct Args {
    /// CSV file with one point per line.
    input: PathBuf,
    /// Largest scale; also the cell overlap width.
    #[arg(long)]
    epsilon: f64,
    /// Comma-separated scales in (0, epsilon].
    #[arg(long, value_delimiter = ',', conflicts_with = "scale_steps")]
    scales: Option<Vec<f64>>,
    /// Number of evenly spaced scales epsilon*i/m.
    #[arg(long, default_value_t = 10)]
    scale_steps: usize,
    #[arg(long, default_value_t = 1)]
    max_dim: usize,
    /// Prime coefficient field.
    #[arg(long, default_value_t = 2)]
    field: u32,
    /// Worker count, also used to choose the grid [default: available cores].
    #[arg(long)]
    parallel: Option<usize>,
    /// Cells per axis, comma-separated; overrides the automatic choice.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Maximum number of simplices in any one cell.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Compare against the global persistence computation.
    #[arg(long)]
    verify: bool,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Distance tolerance added to every scale comparison.
    #[arg(long, default_value_t = 0.0)]
    slack: f64,
    /// Include wall-clock timings in the report.
    #[arg(long)]
    timings: bool,
}

impl From<Args> for RunConfig {
    fn from(a: Args) -> Self {
        RunConfig {
            input: a.input,
            epsilon: a.epsilon,
            scales: match a.scales {
                Some(s) => Scales::List(s),
                None => Scales::Steps(a.scale_steps),
            },
            max_dim: a.max_dim,
            field: a.field,
            workers: a
                .parallel
                .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
            grid: a.grid,
            budget: a.budget,
            verify: a.verify,
            output: a.output,
            slack: a.slack,
            timings: a.timings,
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(&args.into()) {
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mvph: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

