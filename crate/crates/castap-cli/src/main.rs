//! Command-line entry point.

use castap_cli::config::{CliError, ExperimentConfig};
use castap_cli::presets;
use castap_cli::runner;
use clap::{Parser, Subcommand};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "castap-cli",
    about = "Coprime-array STAP experiments: Monte Carlo runs and CSV output",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment from a config file and/or a named preset.
    Run {
        /// TOML experiment configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Named preset; config file fields are ignored when given unless
        /// combined with overrides below.
        #[arg(long)]
        preset: Option<String>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the Monte Carlo trial count.
        #[arg(long)]
        trials: Option<usize>,
        /// Output CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    ListPresets,
    /// Write the knowledge-aided dictionary of a configuration to CSV.
    DumpDictionary {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn resolve_config(
    config: Option<PathBuf>,
    preset: Option<String>,
) -> Result<ExperimentConfig, CliError> {
    match (config, preset) {
        (Some(path), None) => ExperimentConfig::load(&path),
        (None, Some(name)) => presets::get_preset(&name)
            .ok_or_else(|| CliError::Config(format!("unknown preset '{name}'"))),
        (Some(path), Some(name)) => {
            // preset provides the base; the file overrides it wholesale is
            // ambiguous, so the file wins and the preset must agree on kind
            let file = ExperimentConfig::load(&path)?;
            let preset_cfg = presets::get_preset(&name)
                .ok_or_else(|| CliError::Config(format!("unknown preset '{name}'")))?;
            if file.experiment.kind != preset_cfg.experiment.kind {
                return Err(CliError::Config(format!(
                    "config kind {:?} conflicts with preset '{name}'",
                    file.experiment.kind
                )));
            }
            Ok(file)
        }
        (None, None) => Err(CliError::Config(
            "provide --config <file> and/or --preset <name>".into(),
        )),
    }
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            preset,
            seed,
            trials,
            out,
        } => {
            let mut cfg = resolve_config(config, preset)?;
            if let Some(seed) = seed {
                cfg.experiment.seed = seed;
            }
            if let Some(trials) = trials {
                cfg.experiment.trials = trials;
            }
            if let Some(out) = out {
                cfg.experiment.out = Some(out.to_string_lossy().into_owned());
            }
            if cfg.experiment.trials == 0 {
                eprintln!("warning: trials = 0, emitting an empty table");
                let empty = runner::RunOutput {
                    rows: Vec::new(),
                    csv: "sweep,metric,value,trials,config\r\n".into(),
                };
                runner::write_output(&cfg, &empty)?;
                return Ok(());
            }
            let output = runner::run_experiment(&cfg)?;
            runner::write_output(&cfg, &output)?;
            if cfg.experiment.out.is_none() {
                print!("{}", output.csv);
            } else {
                eprintln!(
                    "wrote {} rows to {}",
                    output.rows.len(),
                    cfg.experiment.out.as_deref().unwrap_or("-")
                );
            }
            Ok(())
        }
        Command::ListPresets => {
            for p in presets::list_presets() {
                println!("{:<18} {}", p.name, p.description);
            }
            Ok(())
        }
        Command::DumpDictionary { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let csv = runner::dump_dictionary(&cfg)?;
            std::fs::write(&out, csv.as_bytes())
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", out.display())))?;
            eprintln!("wrote dictionary to {}", out.display());
            Ok(())
        }
    }
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
