//! Command-line driver for polynomial-entropy experiments.
//!
//! Three commands share one configuration: `estimate` writes count tables
//! and slope fits, `verify-construction` builds and checks a witness set,
//! and `diagnose` runs recurrence, distality or word-complexity checks.

use std::ffi::OsString;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_diagnose, cmd_estimate, cmd_verify_construction, DiagnoseOutcome, EstimateOutcome,
};
pub use config::{Config, MethodChoice, Settings, SystemSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_VERIFICATION: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Core(polyent::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<polyent::Error> for CliError {
    fn from(e: polyent::Error) -> Self {
        use polyent::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::InvalidFamily(_)
            | E::InvalidGrid(_)
            | E::NearlyRational { .. } => Self::Usage(e.to_string()),
            other => Self::Core(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Verification(_) => EXIT_VERIFICATION,
            _ => EXIT_FAILURE,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Which {
    #[value(name = "A")]
    A,
    #[value(name = "S")]
    S,
    #[value(name = "hedlund")]
    Hedlund,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Recurrence,
    Distality,
    Complexity,
}

#[derive(Parser, Debug)]
#[command(name = "polyent", version, about = "Polynomial entropy experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count tables, slope fits and log-log data files.
    Estimate(#[command(flatten)] Settings),
    /// Build and verify a witness set; writes construction.json.
    VerifyConstruction {
        #[arg(long, value_enum)]
        which: Which,
        #[command(flatten)]
        settings: Settings,
    },
    /// Recurrence, distality or complexity report.
    Diagnose {
        #[arg(long, value_enum)]
        check: Check,
        #[command(flatten)]
        settings: Settings,
    },
}

/// Runs `f` on a pool of `threads` workers (all cores when `None`).
pub fn with_threads<T: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    pool.install(f)
}

/// Parses `args` (including the program name), runs the command, and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Estimate(settings) => {
            let threads = settings.threads;
            Config::resolve(settings).and_then(|c| {
                let out = with_threads(threads, || cmd_estimate(&c))?;
                println!(
                    "{}: {:?} headline {} over eps >= {}",
                    c.system,
                    out.estimate.mode,
                    out.estimate.headline,
                    c.eps[c.eps.len() - 1]
                );
                Ok(())
            })
        }
        Command::VerifyConstruction { which, settings } => {
            let threads = settings.threads;
            Config::resolve(settings).and_then(|c| {
                for r in with_threads(threads, || cmd_verify_construction(&c, which))? {
                    println!(
                        "{:?} eps {}: cardinality {} verified",
                        r.kind,
                        r.eps,
                        r.cardinality()
                    );
                }
                Ok(())
            })
        }
        Command::Diagnose { check, settings } => {
            let threads = settings.threads;
            Config::resolve(settings).and_then(|c| {
                let out = with_threads(threads, || cmd_diagnose(&c, check))?;
                println!("{}", out.summary);
                Ok(())
            })
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("polyent: {e}");
            e.exit_code()
        }
    }
}
