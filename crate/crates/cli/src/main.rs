//! `hopfield <command> <config.toml>`

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::{Context, Failure};
use crate::output::Writer;

#[derive(Parser)]
#[command(name = "hopfield", about = "Covariant Hopfield model toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write frequencies as ω/c (c = 1).
    #[arg(long, global = true)]
    natural_units: bool,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Name {
    Dispersion,
    Diagonalize,
    Norms,
    Constraints,
    Scatter,
    Sweep,
    Validate,
}

#[derive(Subcommand)]
enum Command {
    /// Polariton branches over the k grid.
    Dispersion { config: PathBuf },
    /// Fano diagonalization and the unphysical sector.
    Diagonalize { config: PathBuf },
    /// Scalar products and plane-wave norms.
    Norms { config: PathBuf },
    /// Dirac brackets and the constraint chain on the lattice.
    Constraints { config: PathBuf },
    /// Transfer matrix and Bogoliubov coefficients at one point.
    Scatter { config: PathBuf },
    /// Scattering over the (ω′, k_y, k_z) grid.
    Sweep { config: PathBuf },
    /// Run every self-check.
    Validate { config: PathBuf },
}

fn error_name(e: &hopfield::Error) -> String {
    let s = format!("{e:?}");
    s.split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or("Error")
        .to_string()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, path) = match cli.command {
        Command::Dispersion { config } => (Name::Dispersion, config),
        Command::Diagonalize { config } => (Name::Diagonalize, config),
        Command::Norms { config } => (Name::Norms, config),
        Command::Constraints { config } => (Name::Constraints, config),
        Command::Scatter { config } => (Name::Scatter, config),
        Command::Sweep { config } => (Name::Sweep, config),
        Command::Validate { config } => (Name::Validate, config),
    };
    let loaded = match config::load(&path) {
        Ok(l) => l,
        Err(e) => {
            eprintln!("ConfigError: {e}");
            return ExitCode::from(2);
        }
    };
    let writer = Writer {
        dir: output::output_dir(&loaded.config.output.path),
        format: loaded.config.output.format,
        hash: loaded.hash.clone(),
    };
    let cx = Context {
        config: &loaded.config,
        writer: &writer,
        natural_units: cli.natural_units,
    };
    let result = match name {
        Name::Dispersion => commands::dispersion(&cx),
        Name::Diagonalize => commands::diagonalize(&cx),
        Name::Norms => commands::norms(&cx),
        Name::Constraints => commands::constraints(&cx),
        Name::Scatter => commands::scatter(&cx),
        Name::Sweep => commands::sweep(&cx),
        Name::Validate => commands::validate(&cx),
    };
    match result {
        Ok(checks) => {
            let mut ok = true;
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                println!(
                    "{tag} {} residual={:e} tolerance={:e}",
                    c.name, c.residual, c.tolerance
                );
                ok &= c.passed;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("NumericalFailure: {}: {e}", error_name(&e));
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
