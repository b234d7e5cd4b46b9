//! Command-line front end: `verify`, `integrate`, `brackets`, `actions`,
//! `catalog`.
//!
//! Exit codes: 0 when every requested check passes, 1 when a check fails
//! (the report is still written), 2 on input errors (no report).

mod commands;
pub mod config;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{Resolved, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed configuration or arguments.
    #[error("{0}")]
    Input(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "hamverify", version, about = "Numerical checks for time-dependent Hamiltonian systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Source {
    /// Catalog system name.
    #[arg(long, conflicts_with = "config")]
    pub system: Option<String>,
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the sampling seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the sample count.
    #[arg(long)]
    pub count: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run integrability checks and print a JSON verdict.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Comma-separated checks, overriding the config.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<String>>,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a trajectory; CSV to --out, JSON summary to stdout.
    Integrate {
        #[command(flatten)]
        source: Source,
        /// Integrate the lifted system on T*Q from the section point.
        #[arg(long)]
        lifted: bool,
        /// Final time.
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Also run the lifted-versus-vertical comparison.
        #[arg(long)]
        compare: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Structure-matrix entries at sampled points, as CSV.
    Brackets {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Loop actions, frequencies and chart verification.
    Actions {
        #[command(flatten)]
        source: Source,
        /// Comma-separated energies.
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        energies: Vec<f64>,
        /// Restrict to one degree of freedom (1-based).
        #[arg(long)]
        dof: Option<usize>,
        /// Verify a deliberately broken chart instead.
        #[arg(long)]
        corrupt_chart: bool,
        /// Re-gauge the angles by ℋ'(I), e.g. "I1".
        #[arg(long)]
        regauge: Option<String>,
        /// Write the action table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List or show catalog entries.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CatalogAction {
    List,
    Show { name: String },
}

impl Source {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let mut cfg = match (&self.system, &self.config) {
            (Some(name), None) => RunConfig::named(name),
            (None, Some(path)) => RunConfig::load(path)?,
            _ => return Err(CliError::Input("pass exactly one of --system or --config".into())),
        };
        if let Some(seed) = self.seed {
            cfg.sampling.seed = Some(seed);
        }
        if let Some(count) = self.count {
            cfg.sampling.count = Some(count);
        }
        cfg.resolve()
    }
}

/// Caps the global worker pool at `HAMVERIFY_THREADS` when set.
fn init_threads() {
    if let Some(n) = std::env::var("HAMVERIFY_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Runs a parsed command, writing reports to `stdout`.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Verify { source, checks, out } => commands::verify(&source.resolve()?, checks.as_deref(), out.as_deref(), stdout),
        Command::Integrate {
            source,
            lifted,
            t_end,
            compare,
            out,
        } => commands::integrate(&source.resolve()?, *lifted, *t_end, *compare, out.as_deref(), stdout),
        Command::Brackets { source, out } => commands::brackets(&source.resolve()?, out.as_deref(), stdout),
        Command::Actions {
            source,
            energies,
            dof,
            corrupt_chart,
            regauge,
            out,
        } => {
            let opts = commands::ActionOptions {
                energies: energies.clone(),
                dof: *dof,
                corrupt: *corrupt_chart,
                regauge: regauge.clone(),
            };
            commands::actions(&source.resolve()?, &opts, out.as_deref(), stdout)
        }
        Command::Catalog { action } => commands::catalog(action, stdout),
    }
}

/// Entry point shared by the binary: parses `args` and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_threads();
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match execute(&cli, &mut lock) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
