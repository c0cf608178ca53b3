//! `pmc-rotor`: construct, analyze, and classify rotational hypersurfaces
//! whose mean curvature is a prescribed function of the angle function.
//!
//! The run is described by a JSON config (see `config::RunConfig`); the
//! command line picks the mode and may override the output prefix and the
//! integrator tolerances. Exit status: 0 success, 1 numerical or runtime
//! failure, 2 invalid configuration or usage.

mod config;
mod run;

use clap::Parser;
use config::{ConfigSource, Mode};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "pmc-rotor",
    version,
    about = "Rotational hypersurfaces with prescribed mean curvature: orbits, portraits, classification"
)]
struct Cli {
    /// One of: portrait, orbit, classify, family, mesh, check-dirichlet,
    /// verify
    mode: String,
    /// JSON run configuration; optional only for `verify`
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output path prefix, overriding the config's `output`
    #[arg(long, value_name = "PREFIX")]
    out: Option<String>,
    /// Override both integrator error tolerances
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
    /// Override the arclength budget
    #[arg(long = "s-max", value_name = "FLOAT")]
    s_max: Option<f64>,
}

/// Failure channel deciding the exit status: bad configs exit 2, everything
/// that goes wrong while running exits 1.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Runtime(m) => m,
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(failure) = execute(&cli) {
        eprintln!("error: {}", failure.message());
        std::process::exit(failure.code());
    }
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let mode = Mode::parse(&cli.mode).ok_or_else(|| {
        Failure::Config(format!(
            "unknown mode '{}'; expected one of portrait, orbit, classify, family, mesh, \
             check-dirichlet, verify",
            cli.mode
        ))
    })?;
    let src = match &cli.config {
        Some(path) => Some(ConfigSource::load(path).map_err(Failure::Config)?),
        None => None,
    };
    if let Some(s) = &src {
        if let Some(configured) = s.cfg.mode {
            if configured != mode {
                return Err(Failure::Config(s.complain(
                    "mode",
                    &format!(
                        "config says mode '{}' but the command asked for '{}'",
                        configured.name(),
                        mode.name()
                    ),
                )));
            }
        }
    }
    let over = run::Overrides {
        out: cli.out.clone(),
        tol: cli.tol,
        s_max: cli.s_max,
    };
    match (&src, mode) {
        (_, Mode::Verify) => run::run_verify(),
        (Some(s), m) => run::run_with_config(m, s, &over),
        (None, m) => Err(Failure::Config(format!(
            "mode '{}' requires --config <file>",
            m.name()
        ))),
    }
}
