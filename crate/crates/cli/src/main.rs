//! Batch driver for the perfect-simulation engine.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 clan cap exceeded,
//! 3 diluteness verdict failed under --strict.

mod commands;

use clap::{Parser, Subcommand};
use gassim_core::error::SamplerError;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "gassim",
    version,
    about = "Perfect simulation of heavily diluted gas models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diluteness coefficients of a model: closed form, generic integrator,
    /// and the heavily-diluted verdict.
    Coeff {
        #[arg(long)]
        spec: PathBuf,
        /// Exit with code 3 unless the model is certified heavily diluted.
        #[arg(long)]
        strict: bool,
        /// Report the envelope coefficient at this inflation instead of the
        /// impact coefficient.
        #[arg(long)]
        envelope: Option<f64>,
    },
    /// Perfect samples of the unique gas measure on a window.
    Sample {
        #[arg(long)]
        spec: PathBuf,
        /// Window as comma-separated corner coordinates lo..hi, e.g.
        /// `0,0,2,2`.
        #[arg(long)]
        window: String,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Sample the finite-volume kernel on the window instead of the
        /// infinite-volume measure.
        #[arg(long)]
        finite_volume: bool,
        /// Boundary condition records (finite-volume runs only).
        #[arg(long)]
        boundary: Option<PathBuf>,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        cell_edge: Option<f64>,
    },
    /// Coupled samples of a model family across an epsilon grid.
    Couple {
        #[arg(long)]
        spec: PathBuf,
        /// identity | fugacity | spatial-disc | spin-disc
        #[arg(long)]
        family: String,
        #[arg(long)]
        window: String,
        /// Descending comma-separated grid ending in 0; defaults to the
        /// dyadic grid 2^-1..2^-12,0.
        #[arg(long)]
        eps_grid: Option<String>,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        cell_edge: Option<f64>,
    },
    /// Contour catalog counts and the truncated Peierls bound.
    Contours {
        #[arg(long, default_value_t = 8)]
        lmax: u32,
        #[arg(long)]
        beta: Option<f64>,
        /// Catalog cache file; reused when present, written otherwise.
        #[arg(long)]
        cache: Option<PathBuf>,
    },
    /// Forward finite-volume dynamics: time-ordered birth/death events.
    Dynamics {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        volume: String,
        #[arg(long, default_value_t = 5.0)]
        horizon: f64,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// `exact` draws the initial state from the enumerated kernel,
        /// `empty` starts from the empty configuration.
        #[arg(long, default_value = "exact")]
        initial: String,
    },
    /// Named validation suites (oracle-wr, substrate, contours, embedding,
    /// coupling-ac, all).
    Validate {
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version requests are successes, everything else is usage
            let kind = err.kind();
            let _ = err.print();
            return if kind == clap::error::ErrorKind::DisplayHelp
                || kind == clap::error::ErrorKind::DisplayVersion
            {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    let result = match cli.command {
        Command::Coeff {
            spec,
            strict,
            envelope,
        } => commands::coeff(&spec, strict, envelope),
        Command::Sample {
            spec,
            window,
            replicas,
            seed,
            out,
            finite_volume,
            boundary,
            cap,
            cell_edge,
        } => commands::sample(
            &spec,
            &window,
            replicas,
            seed,
            &out,
            finite_volume,
            boundary.as_deref(),
            cap,
            cell_edge,
        ),
        Command::Couple {
            spec,
            family,
            window,
            eps_grid,
            replicas,
            seed,
            out,
            cap,
            cell_edge,
        } => commands::couple(
            &spec,
            &family,
            &window,
            eps_grid.as_deref(),
            replicas,
            seed,
            &out,
            cap,
            cell_edge,
        ),
        Command::Contours { lmax, beta, cache } => commands::contours(lmax, beta, cache.as_deref()),
        Command::Dynamics {
            spec,
            volume,
            horizon,
            replicas,
            seed,
            out,
            initial,
        } => commands::dynamics(&spec, &volume, horizon, replicas, seed, &out, &initial),
        Command::Validate { suite, seed } => commands::validate(&suite, seed),
    };
    match result {
        Ok(code) => code,
        Err(commands::CliError::ClanCap(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(commands::CliError::Strict(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(3)
        }
        Err(commands::CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

impl From<SamplerError> for commands::CliError {
    fn from(e: SamplerError) -> Self {
        match e {
            SamplerError::ClanCapExceeded { .. } => commands::CliError::ClanCap(e),
            other => commands::CliError::Usage(other.to_string()),
        }
    }
}
