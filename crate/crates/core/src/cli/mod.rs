//! Command-line front end: `simulate | distance | scan | validate | figure1`.
//!
//! Exit codes: 0 when every assertion passes, 1 when one fails, 2 for usage,
//! schema and runtime errors.

mod commands;
pub mod config;
pub mod presets;
pub mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{
    check_assertions, cmd_distance, cmd_figure1, cmd_scan, cmd_simulate, cmd_validate, values_csv, AssertionResult,
    Outcome,
};
pub use config::{apply_override, load_config, ExperimentConfig, KernelSpec, LoadedConfig, OUT_ENV};

use crate::error::Result;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ASSERTION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "skorokhod", version, about = "M1 distances, Levy-driven convolutions and convergence scans")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON config file, or `preset:NAME`.
    pub config: String,
    /// Override a config entry, e.g. `--set scan.n_paths=400`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory (default: config `output_dir`, then $SKOROKHOD_OUT, then ./skorokhod-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a driver (and its convolution) and write path CSVs.
    Simulate(RunArgs),
    /// Strong M1 distance between two path CSVs.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        mesh: Option<f64>,
        /// Write the matched parametrization here.
        #[arg(long)]
        matching: Option<PathBuf>,
    },
    /// Run convergence scans and check the configured assertions.
    Scan(RunArgs),
    /// Characteristic-function validation and maximal-inequality audits.
    Validate(RunArgs),
    /// The four Figure-1 panels; the config is optional.
    Figure1 {
        #[arg(default_value = "preset:figure1")]
        config: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a preset config as JSON.
    Preset { name: Option<String> },
}

fn run_inner(cli: Cli) -> Result<(bool, Vec<String>)> {
    let done = |o: Outcome| {
        let mut lines = o.summary;
        lines.extend(o.files.iter().map(|f| format!("wrote {}", f.display())));
        (o.passed, lines)
    };
    Ok(match cli.command {
        Command::Simulate(a) => {
            let l = load_config(&a.config, &a.set)?;
            done(cmd_simulate(&l.config, &l.config.resolve_output_dir(a.out.as_deref()))?)
        }
        Command::Scan(a) => {
            let l = load_config(&a.config, &a.set)?;
            let out = l.config.resolve_output_dir(a.out.as_deref());
            done(cmd_scan(&l, &out)?)
        }
        Command::Validate(a) => {
            let l = load_config(&a.config, &a.set)?;
            done(cmd_validate(&l.config, &l.config.resolve_output_dir(a.out.as_deref()))?)
        }
        Command::Figure1 { config, set, out } => {
            let l = load_config(&config, &set)?;
            done(cmd_figure1(&l.config, &l.config.resolve_output_dir(out.as_deref()))?)
        }
        Command::Distance { a, b, mesh, matching } => {
            let r = cmd_distance(&a, &b, mesh, matching.as_deref())?;
            (true, vec![format!("distance {}", r.distance), format!("mesh {}", r.mesh)])
        }
        Command::Preset { name } => match name {
            Some(n) => (true, vec![presets::preset(&n)?.to_json()?]),
            None => (true, presets::PRESETS.iter().map(|s| s.to_string()).collect()),
        },
    })
}

/// Runs a parsed command line, printing to stdout and stderr; returns the exit code.
pub fn run(cli: Cli) -> i32 {
    match run_inner(cli) {
        Ok((passed, lines)) => {
            for l in lines {
                println!("{l}");
            }
            if passed {
                EXIT_PASS
            } else {
                EXIT_ASSERTION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
