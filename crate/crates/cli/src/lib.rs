//! Command-line front end: TOML configs in, CSV series, SVG panels and a TOML
//! manifest out.

// `!(x > 0.0)` guards are intended: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod svg;
pub mod units;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use config::{parse_config, Overrides, RunConfig};
pub use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Parser)]
#[command(name = "tll-cd-sim", version, about = "Counterdiabatic driving of Tomonaga-Luttinger liquids")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `outputs`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub cd: Option<Switch>,
    /// Ramp time; overrides `t_f`.
    #[arg(long)]
    pub tf: Option<f64>,
    /// Number of momentum pairs; overrides `n_modes`.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Worker threads. Outputs do not depend on it.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full run: stability pre-check, per-mode evolution, CSV output.
    Simulate(CommonArgs),
    /// Stability criterion and speed window only.
    Stability(CommonArgs),
    /// One run per entry of `sweep_tf`.
    Sweep(CommonArgs),
    /// Cross-checks against the Fock-space oracle; fails on any tolerance miss.
    Validate(CommonArgs),
    /// SVG panels from the CSVs in the output directory.
    Plot(CommonArgs),
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            cd: self.cd.map(|s| s == Switch::On),
            t_f: self.tf,
            n_modes: self.modes,
            outputs: self.out.clone(),
        }
    }

    fn load(&self) -> Result<RunConfig, CliError> {
        let path = self.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
        if self.workers == Some(0) {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        commands::load_config(path, &self.overrides())
    }

    fn runtime(&self) -> commands::Runtime {
        commands::Runtime { workers: self.workers }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut stdout = std::io::stdout().lock();
    match &cli.command {
        Command::Simulate(a) => {
            let config = a.load()?;
            let s = commands::simulate(&config, a.runtime())?;
            println!(
                "simulate: {} modes ok, final residual {:.3e}, outputs in {}",
                s.modes_ok.unwrap_or(0),
                s.final_total_residual.unwrap_or(f64::NAN),
                config.outputs.display()
            );
        }
        Command::Stability(a) => {
            let config = a.load()?;
            commands::stability(&config, &mut stdout)?;
        }
        Command::Sweep(a) => {
            let config = a.load()?;
            let rows = commands::sweep(&config, a.runtime())?;
            for r in rows {
                println!(
                    "t_f = {}: residual {} {}",
                    r.t_f,
                    r.final_residual.map(|x| format!("{x:.6e}")).unwrap_or_else(|| "-".into()),
                    r.error.unwrap_or_default()
                );
            }
        }
        Command::Validate(a) => {
            let config = a.load()?;
            commands::validate(&config, a.runtime(), &mut stdout)?;
        }
        Command::Plot(a) => {
            let dir = match (&a.out, &a.config) {
                (Some(dir), _) => dir.clone(),
                (None, Some(_)) => a.load()?.outputs,
                (None, None) => return Err(CliError::Config("plot needs --out or --config".into())),
            };
            for path in commands::plot(&dir)? {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}
