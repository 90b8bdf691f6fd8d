//! Command-line front end.
//!
//! A run is fully described by a [`RunConfig`]: values come from the TOML
//! file given by `--config` (or the defaults) and flags override them.
//! Outputs go to the output directory together with the effective config
//! and a `manifest.json` holding checksums.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{Format, Grid, RunConfig};
pub use output::{write_all, Manifest, Table};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "qrho", version, about = "Random quantum reactive harmonic oscillator experiments")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all logical cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// λ grid: `log:a:b:n`, `lin:a:b:n` or a comma list.
    #[arg(long, global = true, alias = "lambdas", allow_hyphen_values = true)]
    pub lambda_grid: Option<Grid>,
    /// ρ grid, same syntax as the λ grid.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub rho_grid: Option<Grid>,
    /// θ̄ grid for stationary densities.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub theta_grid: Option<Grid>,
    /// x grid for wave functions.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub x_grid: Option<Grid>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Stationary densities, one file per λ.
    Stationary,
    /// Langevin ensemble summary and optional per-path dumps.
    Paths {
        /// Write every stored path as `t,theta`.
        #[arg(long)]
        dump: bool,
    },
    /// Fokker-Planck evolution snapshots.
    Fp,
    /// Wave function on the x grid at the end time.
    Wavefunction {
        #[arg(long)]
        level: Option<usize>,
        /// Average over the Langevin ensemble.
        #[arg(long)]
        ensemble: bool,
    },
    /// Vacuum-vacuum transition probability over the λ × ρ grid.
    Transition,
    /// Vacuum thermodynamics at the configured parameters and over λ.
    Thermo,
    /// Data behind one of the figures.
    Figures {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
        fig: u8,
    },
    /// Print the effective configuration as TOML.
    Config,
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Stationary => "stationary".into(),
            Command::Paths { .. } => "paths".into(),
            Command::Fp => "fp".into(),
            Command::Wavefunction { .. } => "wavefunction".into(),
            Command::Transition => "transition".into(),
            Command::Thermo => "thermo".into(),
            Command::Figures { fig } => format!("figures --fig {fig}"),
            Command::Config => "config".into(),
        }
    }
}

impl Cli {
    /// Loads the config file (if any) and applies flag overrides.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.output_dir = o.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        let grids = [
            (&self.lambda_grid, &mut cfg.grids.lambda),
            (&self.rho_grid, &mut cfg.grids.rho),
            (&self.theta_grid, &mut cfg.grids.theta_bar),
            (&self.x_grid, &mut cfg.grids.x),
        ];
        for (flag, slot) in grids {
            if let Some(g) = flag {
                *slot = g.clone();
            }
        }
        match &self.command {
            Command::Paths { dump: true } => cfg.sde.dump_paths = true,
            Command::Wavefunction { level, ensemble } => {
                if let Some(n) = level {
                    cfg.wavefunction.level = *n;
                }
                cfg.wavefunction.ensemble |= *ensemble;
            }
            _ => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Computes the tables of `command` without writing anything.
pub fn tables(cfg: &RunConfig, command: &Command) -> Result<Vec<Table>> {
    match command {
        Command::Stationary => commands::stationary(cfg),
        Command::Paths { .. } => commands::paths(cfg),
        Command::Fp => commands::fp(cfg),
        Command::Wavefunction { .. } => commands::wavefunction(cfg),
        Command::Transition => commands::fig3(cfg),
        Command::Thermo => commands::thermo(cfg),
        Command::Figures { fig } => commands::figure(cfg, *fig),
        Command::Config => Ok(Vec::new()),
    }
}

/// Runs one invocation end to end.
pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.resolve()?;
    if let Command::Config = cli.command {
        print!("{}", cfg.to_toml()?);
        return Ok(());
    }
    let work = || -> Result<Vec<PathBuf>> {
        let t = tables(&cfg, &cli.command)?;
        write_all(&cfg, &cli.command.name(), &t)
    };
    let written = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?
            .install(work)?,
        None => work()?,
    };
    for p in written {
        println!("{}", p.display());
    }
    Ok(())
}

/// 1 for invalid input, 2 for numerical failure.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_configuration() {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("qrho").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn flags_override_defaults() {
        let cli = parse(&["figures", "--fig", "1", "--lambdas", "0.5,2,8", "--seed", "7"]);
        let cfg = cli.resolve().unwrap();
        assert_eq!(cfg.grids.lambda, Grid::List(vec![0.5, 2.0, 8.0]));
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn negative_grid_bounds_parse() {
        let cli = parse(&["stationary", "--theta-grid", "lin:-5:5:11"]);
        assert_eq!(cli.resolve().unwrap().grids.theta_bar.values()[0], -5.0);
    }

    #[test]
    fn bad_figure_is_rejected() {
        assert!(Cli::try_parse_from(["qrho", "figures", "--fig", "9"]).is_err());
    }

    #[test]
    fn invalid_config_maps_to_exit_one() {
        let cli = parse(&["transition", "--rho-grid", "1.5"]);
        let e = cli.resolve().unwrap_err();
        assert_eq!(exit_code(&e), 1);
        assert!(e.to_string().contains("grids.rho"));
        assert_eq!(exit_code(&Error::Accuracy { estimate: 1.0, error: 1.0 }), 2);
    }

    #[test]
    fn figure_tables_have_expected_shape() {
        let cli = parse(&["figures", "--fig", "1", "--lambdas", "0.5,2,8"]);
        let cfg = cli.resolve().unwrap();
        let t = tables(&cfg, &cli.command).unwrap();
        assert_eq!(t[0].columns, ["theta_bar", "density", "lambda"]);
        assert_eq!(t[0].rows.len(), 3 * 401);
        let cli = parse(&["transition", "--lambda-grid", "log:0.01:100:4", "--rho-grid", "lin:0:0.95:3"]);
        let cfg = cli.resolve().unwrap();
        assert_eq!(tables(&cfg, &cli.command).unwrap()[0].rows.len(), 12);
    }
}
