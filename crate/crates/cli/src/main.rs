//! `nlac`: run the model solvers, the E1-E4 comparisons, identity checks, eps sweeps and
//! the dispersion check from flat `key = value` configuration files.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nlac_core::harness::commands::{self, exit_code, identity_params};
use nlac_core::harness::{ExperimentConfig, ExperimentId, ModelKind};
use nlac_core::remainders::IdentityKind;
use nlac_core::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "nlac",
    version,
    about = "Nonlinear acoustics model solvers and comparisons"
)]
struct Cli {
    /// Output root; overrides `out_dir` and `$NLAC_OUT_DIR`.
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate one model from a standard profile and record its history.
    Simulate {
        #[arg(value_parser = parse_model)]
        model: ModelKind,
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Run one comparison (E1 to E4) at the configured eps.
    Compare {
        #[arg(value_parser = parse_comparison)]
        experiment: ExperimentId,
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
    /// Refinement study of a derivation identity.
    Identity {
        #[arg(value_parser = parse_kind)]
        kind: IdentityKind,
        /// Number of refinement levels (3 to 5), ending at 256 points.
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long, value_name = "FILE")]
        config: Option<PathBuf>,
    },
    /// Run the configured comparison at every entry of `eps_list` and fit the order.
    Sweep {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
    /// Compare measured modal decay with the linear dispersion relation.
    Dispersion {
        #[arg(long, value_name = "FILE")]
        config: PathBuf,
    },
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    ModelKind::parse(s).ok_or_else(|| {
        format!(
            "expected one of {}",
            ModelKind::ALL.map(ModelKind::name).join(", ")
        )
    })
}

fn parse_comparison(s: &str) -> std::result::Result<ExperimentId, String> {
    ExperimentId::parse(s)
        .filter(|id| id.is_comparison())
        .ok_or_else(|| "expected E1, E2, E3 or E4".to_string())
}

fn parse_kind(s: &str) -> std::result::Result<IdentityKind, String> {
    IdentityKind::parse(s).ok_or_else(|| "expected kzk, npe or wes".to_string())
}

fn load(
    path: Option<&Path>,
    id: ExperimentId,
    out_dir: &Option<PathBuf>,
) -> Result<ExperimentConfig> {
    let mut cfg = match path {
        Some(p) => ExperimentConfig::load(p, Some(id))?,
        None => ExperimentConfig::new(id),
    };
    if out_dir.is_some() {
        cfg.out_dir = out_dir.clone();
    }
    Ok(cfg)
}

fn require_experiment(cfg: &ExperimentConfig, id: ExperimentId) -> Result<()> {
    if cfg.experiment != id {
        return Err(Error::Config(format!(
            "the config names experiment {} but the command asks for {id}",
            cfg.experiment
        )));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<PathBuf> {
    let out = &cli.out_dir;
    match cli.command {
        Command::Simulate { model, config } => {
            // The experiment id plays no part in `simulate`.
            let cfg = load(config.as_deref(), ExperimentId::Identity, out)?;
            if let Some(m) = cfg.model.filter(|m| *m != model) {
                return Err(Error::Config(format!(
                    "the config names model {} but the command asks for {}",
                    m.name(),
                    model.name()
                )));
            }
            commands::simulate(&cfg, model)
        }
        Command::Compare { experiment, config } => {
            let cfg = load(Some(&config), experiment, out)?;
            require_experiment(&cfg, experiment)?;
            commands::compare(&cfg)
        }
        Command::Identity {
            kind,
            levels,
            config,
        } => {
            let cfg = load(config.as_deref(), ExperimentId::Identity, out)?;
            let params = if config.is_some() {
                cfg.params
            } else {
                identity_params(kind)
            };
            let levels = levels.unwrap_or(cfg.levels);
            let (path, report) =
                commands::identity(kind, levels, &params, &cfg.output_root(), &cfg.echo)?;
            if let Some(order) = report.order {
                println!("observed order {order:.3}");
            }
            Ok(path)
        }
        Command::Sweep { config } => {
            let text = std::fs::read_to_string(&config).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", config.display()))
            })?;
            let mut cfg = ExperimentConfig::parse(&text, None)?;
            if out.is_some() {
                cfg.out_dir = out.clone();
            }
            commands::sweep(&cfg)
        }
        Command::Dispersion { config } => {
            let cfg = load(Some(&config), ExperimentId::Dispersion, out)?;
            require_experiment(&cfg, ExperimentId::Dispersion)?;
            commands::dispersion(&cfg)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
