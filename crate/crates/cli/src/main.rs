//! `ellcover`: evaluate distances, validate covers, certify metric
//! properties, run the cover round trip, and export ball profiles.

mod commands;
mod config;
mod select;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Rejected before any computation; exit code 2.
    Usage(String),
    /// Failed while computing; exit code 1.
    Runtime(String),
}

impl From<ellcover::Error> for CliError {
    fn from(e: ellcover::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "ellcover", version, about = "Ellipsoid covers and the quasi-distances they induce")]
struct Cli {
    /// Worker threads (defaults to all cores); never changes results.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// JSON config keyed like the flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate ρ(x, y); x is the ball centre.
    Dist(commands::DistArgs),
    /// Validate a cover: volume, shape condition, engulfing constants.
    Validate(commands::ValidateArgs),
    /// Certify one property of a metric.
    Check(commands::CheckArgs),
    /// Build the inscribed-ellipsoid cover of a metric and compare distances.
    Roundtrip(commands::RoundtripArgs),
    /// Write the boundary profile R(u) of a ball as CSV.
    Ball(commands::BallArgs),
}

/// What a command produced: its JSON document (without timing), whether it
/// passed, and where to write the document.
pub struct Outcome {
    pub name: &'static str,
    pub config: Value,
    pub pass: bool,
    pub body: Value,
    pub out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let file = cli.config.as_deref();
    match cli.command {
        Command::Dist(a) => commands::dist(a, file),
        Command::Validate(a) => commands::validate(a, file),
        Command::Check(a) => commands::check(a, file),
        Command::Roundtrip(a) => commands::roundtrip(a, file),
        Command::Ball(a) => commands::ball(a, file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli.workers;
    if workers == Some(0) {
        eprintln!("error: --workers must be at least 1");
        return ExitCode::from(2);
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let outcome = pool.install(|| run(cli));
    let elapsed = start.elapsed().as_secs_f64();
    match outcome {
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Ok(o) => {
            let mut doc = json!({
                "schema_version": SCHEMA_VERSION,
                "command": o.name,
                "config": o.config,
                "pass": o.pass,
            });
            if let (Value::Object(d), Value::Object(b)) = (&mut doc, o.body) {
                d.extend(b);
                d.insert(
                    "timing".into(),
                    json!({ "wall_seconds": elapsed, "workers": pool.current_num_threads() }),
                );
            }
            let text = serde_json::to_string_pretty(&doc).expect("reports serialise") + "\n";
            match &o.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(1);
                    }
                }
                None => print!("{text}"),
            }
            if o.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
