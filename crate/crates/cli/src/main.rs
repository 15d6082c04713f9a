//! `coexist`: runs radar/radio coexistence sweeps and writes figure data.

mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use coexist_core::config::{parse_config, ConfigError, ScenarioConfig};
use coexist_core::dump::dump_channels;
use coexist_core::report::{rates_csv, sir_cdf_csv, trials_csv};
use coexist_core::sim::{run_sweep, Scenario};

use manifest::{OutputFiles, RunManifest, MANIFEST_SCHEMA};

const RATES_FILE: &str = "rates.csv";
const SIR_CDF_FILE: &str = "sir_cdf.csv";
const TRIALS_FILE: &str = "trials.csv";
const MANIFEST_FILE: &str = "manifest.json";
const CHANNELS_FILE: &str = "channels.json";

#[derive(Parser)]
#[command(name = "coexist", version, about = "Hybrid beamforming for a colocated radar and MIMO radio")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the SNR sweep and write rates.csv, sir_cdf.csv, trials.csv and manifest.json.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output directory (created if missing).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Re-run the sweep recorded in a manifest instead of reading a config.
        #[arg(long, value_name = "PATH", conflicts_with_all = ["config", "seed", "trials"])]
        from_manifest: Option<PathBuf>,
    },
    /// Write the channels and RF beamformers of one trial seed as JSON.
    DumpChannels {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output directory; the dump goes to channels.json inside it.
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check a config and report degrees-of-freedom warnings.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// TOML config; omitted keys take their defaults.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed for `sweep`, trial seed for `dump-channels`.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Trials per SNR point.
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
}

#[derive(Debug)]
enum Failure {
    Config(String),
    Runtime(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<coexist_core::Error> for Failure {
    fn from(e: coexist_core::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load(args: &ScenarioArgs) -> Result<ScenarioConfig, Failure> {
    let mut config = match &args.config {
        Some(path) => parse_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(trials) = args.trials {
        config.trials_per_point = trials;
    }
    if let Some(seed) = args.seed {
        config.base_seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn cmd_sweep(config: ScenarioConfig, out: &Path) -> Result<(), Failure> {
    let scenario = Scenario::new(&config)?;
    for w in scenario.dof_warnings() {
        eprintln!("warning: {w}");
    }
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", out.display())))?;

    let start = Instant::now();
    let sweep = run_sweep(&config)?;
    let elapsed = start.elapsed().as_secs_f64();

    write(&out.join(RATES_FILE), &rates_csv(&sweep))?;
    write(&out.join(SIR_CDF_FILE), &sir_cdf_csv(&sweep))?;
    write(&out.join(TRIALS_FILE), &trials_csv(&sweep))?;
    let manifest = RunManifest {
        schema: MANIFEST_SCHEMA.to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        base_seed: config.base_seed,
        outputs: OutputFiles {
            rates: RATES_FILE.to_string(),
            sir_cdf: SIR_CDF_FILE.to_string(),
            trials: TRIALS_FILE.to_string(),
        },
        num_trials: sweep.num_trials(),
        dof_warnings: scenario.dof_warnings(),
        wall_clock_seconds: elapsed,
        config,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest is always serializable");
    write(&out.join(MANIFEST_FILE), &json)?;
    println!(
        "{} trials in {elapsed:.1} s, outputs in {}",
        manifest.num_trials,
        out.display()
    );
    Ok(())
}

fn cmd_dump_channels(config: ScenarioConfig, seed: u64, out: &Path) -> Result<(), Failure> {
    let scenario = Scenario::new(&config)?;
    let dump = dump_channels(&scenario, seed)?;
    std::fs::create_dir_all(out)
        .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", out.display())))?;
    let path = out.join(CHANNELS_FILE);
    write(&path, &dump.to_json())?;
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_validate(config: ScenarioConfig) -> Result<(), Failure> {
    let scenario = Scenario::new(&config)?;
    let warnings = scenario.dof_warnings();
    for w in &warnings {
        println!("warning: {w}");
    }
    println!(
        "config ok: {} SNR points x {} trials, {} warning(s)",
        config.snr_grid_db.len(),
        config.trials_per_point,
        warnings.len()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Sweep {
            scenario,
            out,
            from_manifest,
        } => {
            let config = match from_manifest {
                Some(path) => {
                    let m = RunManifest::read(&path).map_err(Failure::Config)?;
                    m.config.validate()?;
                    m.config
                }
                None => load(&scenario)?,
            };
            cmd_sweep(config, &out)
        }
        Command::DumpChannels { scenario, out } => {
            let seed = scenario.seed.unwrap_or(0);
            cmd_dump_channels(load(&scenario)?, seed, &out)
        }
        Command::Validate { scenario } => cmd_validate(load(&scenario)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Config(msg) | Failure::Runtime(msg)) = &f;
            eprintln!("error: {msg}");
            ExitCode::from(f.exit_code())
        }
    }
}
