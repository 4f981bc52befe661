use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use vqsd_cli::config::{preset, resolve_experiment, ExperimentConfig, PRESET_NAMES};
use vqsd_cli::runner::{run_baselines, run_classify_iris, run_discriminate, ClassifyArgs};
use vqsd_cli::CliError;

/// Train, verify, and apply variational POVM discriminators.
#[derive(Parser)]
#[command(name = "vqsd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a POVM circuit on a configured state ensemble and compare it
    /// against the analytic baselines.
    Discriminate {
        /// JSON experiment description.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in ensemble: fig4a, fig4b, fig4c, or fig4d.
        #[arg(long)]
        preset: Option<String>,
        /// Output directory (default: "out", or the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override; VQSD_SEED in the environment wins over this flag.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Cross-validated ternary classification of the Iris dataset.
    ClassifyIris {
        /// Iris CSV path (default: the bundled data/iris.csv).
        #[arg(long)]
        data: Option<PathBuf>,
        /// Number of measured target qubits.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        ntarget: u8,
        /// Feature-map encoding: invcoscos or gaussian.
        #[arg(long)]
        encoding: String,
        /// Feature-map layers.
        #[arg(long, default_value_t = 2)]
        layers: usize,
        /// Cross-validation folds.
        #[arg(long, default_value_t = 5)]
        folds: usize,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate Helstrom/PGM/grid baselines for a configured ensemble
    /// without training.
    Baselines {
        /// JSON experiment description.
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(
    config: Option<&PathBuf>,
    preset_name: Option<&str>,
) -> Result<ExperimentConfig, CliError> {
    match (config, preset_name) {
        (Some(path), None) => ExperimentConfig::from_file(path),
        (None, Some(name)) => preset(name).ok_or_else(|| {
            CliError::Config(format!(
                "unknown preset {name:?} (available: {})",
                PRESET_NAMES.join(", ")
            ))
        }),
        _ => Err(CliError::Config(
            "exactly one of --config or --preset is required".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Discriminate {
            config,
            preset,
            out,
            seed,
        } => {
            let experiment = load_config(config.as_ref(), preset.as_deref())?;
            let resolved =
                resolve_experiment(&experiment, "discriminate", seed, out.as_deref())?;
            let artifacts = run_discriminate(&resolved)?;
            for file in &artifacts.files {
                println!("wrote {}", file.display());
            }
            if let Some(cost) = artifacts.document.final_cost {
                println!("final cost: {cost}");
            }
            Ok(())
        }
        Command::ClassifyIris {
            data,
            ntarget,
            encoding,
            layers,
            folds,
            seed,
            out,
        } => {
            let artifacts = run_classify_iris(&ClassifyArgs {
                data,
                n_target: ntarget as usize,
                encoding,
                layers,
                folds,
                seed,
                out,
            })?;
            for file in &artifacts.files {
                println!("wrote {}", file.display());
            }
            if let Some(classification) = &artifacts.document.classification {
                println!(
                    "mean accuracy: {}, mean AUC: {}",
                    classification.mean.accuracy, classification.mean.mean_auc
                );
            }
            Ok(())
        }
        Command::Baselines { config } => {
            let experiment = ExperimentConfig::from_file(&config)?;
            let resolved = resolve_experiment(&experiment, "baselines", None, None)?;
            let artifacts = run_baselines(&resolved)?;
            for file in &artifacts.files {
                println!("wrote {}", file.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
