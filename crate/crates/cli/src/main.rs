use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use zenosim_cli::config::{parse_config, ExperimentConfig};
use zenosim_cli::presets::{all_presets, find_preset};
use zenosim_cli::runner::{run_experiment, RunArtifacts, RunError};
use zenosim_cli::table::{emit_csv, emit_summary};

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "zenosim",
    version,
    about = "Density-operator simulator of repeated projective questioning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV table and JSON summary
    Simulate {
        /// JSON config file describing the experiment
        config: Option<PathBuf>,
        /// Built-in preset name (see list-presets)
        #[arg(long, conflicts_with = "config")]
        preset: Option<String>,
        /// Override the config's RNG seed
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (default: $ZENOSIM_OUT, else the working directory)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets
    ListPresets,
    /// Parse a config file and report every problem found
    Validate {
        /// JSON config file to check
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Simulate { config, preset, seed, out } => simulate(config, preset, seed, out),
        Command::ListPresets => {
            list_presets();
            ExitCode::SUCCESS
        }
        Command::Validate { config } => validate(&config),
    }
}

fn simulate(
    path: Option<PathBuf>,
    preset: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> ExitCode {
    let (mut config, base, preset_name) = match (path, preset) {
        (Some(p), None) => {
            let config = match load_config(&p) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let base = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "run".to_string());
            (config, base, None)
        }
        (None, Some(name)) => match find_preset(&name) {
            Some(preset) => (preset.config.clone(), name.clone(), Some(name)),
            None => {
                eprintln!("error: unknown preset `{name}`; available presets:");
                for p in all_presets() {
                    eprintln!("  {}", p.name);
                }
                return ExitCode::from(EXIT_CONFIG);
            }
        },
        _ => {
            eprintln!("error: pass a config file or --preset <name>");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(s) = seed {
        config.seed = Some(s);
    }

    let artifacts = match run_experiment(&config, preset_name.as_deref()) {
        Ok(a) => a,
        Err(e @ RunError::Core(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
        Err(e @ RunError::Unsupported(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };

    let dir = out_dir(out);
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create {}: {e}", dir.display());
        return ExitCode::from(EXIT_IO);
    }
    let output = config.output.as_ref();
    let csv_name = output
        .and_then(|o| o.csv.clone())
        .unwrap_or_else(|| format!("{base}.csv"));
    let summary_name = output
        .and_then(|o| o.summary.clone())
        .unwrap_or_else(|| format!("{base}.summary.json"));
    let csv_path = dir.join(csv_name);
    let summary_path = dir.join(summary_name);

    if let Err(e) = emit_csv(&artifacts.table, &csv_path) {
        eprintln!("error: cannot write {}: {e}", csv_path.display());
        return ExitCode::from(EXIT_IO);
    }
    if let Err(e) = emit_summary(&artifacts.summary, &summary_path) {
        eprintln!("error: cannot write {}: {e}", summary_path.display());
        return ExitCode::from(EXIT_IO);
    }
    println!("wrote {}", csv_path.display());
    println!("wrote {}", summary_path.display());

    report(&artifacts);
    if artifacts.all_checks_pass() {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: one or more battery checks failed");
        ExitCode::from(EXIT_NUMERICAL)
    }
}

/// Console echo of the headline numbers, per-check lines for battery runs.
fn report(artifacts: &RunArtifacts) {
    if let Some(Value::Object(checks)) = artifacts.summary.scalars.get("checks") {
        for (name, entry) in checks {
            let measured = entry["measured"].as_f64().unwrap_or(f64::NAN);
            let bound = entry["bound"].as_f64().unwrap_or(f64::NAN);
            let verdict = if entry["pass"].as_bool().unwrap_or(false) { "PASS" } else { "FAIL" };
            println!("check {name}: {verdict} (measured {measured:.3e}, bound {bound:.3e})");
        }
    }
    for (key, value) in &artifacts.summary.scalars {
        if key != "checks" {
            println!("  {key} = {value}");
        }
    }
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    if let Some(d) = flag {
        return d;
    }
    match std::env::var("ZENOSIM_OUT") {
        Ok(d) if !d.is_empty() => PathBuf::from(d),
        _ => PathBuf::from("."),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, ExitCode> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_IO)
    })?;
    parse_config(&text).map_err(|errors| {
        eprintln!("{errors}");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn validate(path: &Path) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return ExitCode::from(EXIT_IO);
        }
    };
    match parse_config(&text) {
        Ok(config) => {
            println!("ok: valid {} config", config.experiment.as_str());
            ExitCode::SUCCESS
        }
        Err(errors) => {
            eprintln!("{errors}");
            eprintln!("{} problem(s) found", errors.0.len());
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

fn list_presets() {
    let presets = all_presets();
    let width = presets.iter().map(|p| p.name.len()).max().unwrap_or(0);
    for p in &presets {
        println!("{:width$}  {}", p.name, p.description);
    }
}
