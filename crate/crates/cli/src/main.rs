//! `radiant`: run collective-emission experiments from a config file.
//!
//! Exit status: 0 ok, 1 fixture mismatch, 2 configuration error, 3 numerical
//! failure. Log level from `RADIANT_LOG` (error, warn, info, debug).

mod compare;
mod config;
mod error;
mod output;
mod run;
mod sweep;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::compare::compare_fixture;
use crate::config::{RunConfig, Tolerance};
use crate::error::CliError;
use crate::output::{sha256_hex, OutputDir};

#[derive(Debug, Parser)]
#[command(
    name = "radiant",
    version,
    about = "Collective spontaneous emission from atomic arrays and vapors"
)]
struct Cli {
    /// Run configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs the serial path. Defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for sampled geometries; overrides `seed` in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Compare the primary CSV output against this file after the run.
    #[arg(long)]
    fixture: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compare two CSV files column by column.
    Compare {
        output: PathBuf,
        fixture: PathBuf,
        #[arg(long, default_value_t = Tolerance::default().abs)]
        abs: f64,
        #[arg(long, default_value_t = Tolerance::default().rel)]
        rel: f64,
    },
}

const LOG_LEVELS: [&str; 4] = ["error", "warn", "info", "debug"];

fn init_logging() -> Result<(), CliError> {
    let level = std::env::var("RADIANT_LOG").unwrap_or_else(|_| "warn".into());
    let level = level.trim().to_ascii_lowercase();
    if !LOG_LEVELS.contains(&level.as_str()) {
        return Err(CliError::Config(format!(
            "RADIANT_LOG must be one of {}, got {level:?}",
            LOG_LEVELS.join(", ")
        )));
    }
    env_logger::Builder::new()
        .parse_filters(&level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    Ok(())
}

fn read_text(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn check_fixture(output: &PathBuf, fixture: &PathBuf, tol: Tolerance) -> Result<(), CliError> {
    let report = compare_fixture(&read_text(output)?, &read_text(fixture)?, tol)?;
    print!("{}", report.render());
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Mismatch(report.failures.join("; ")))
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    if let Some(Command::Compare {
        output,
        fixture,
        abs,
        rel,
    }) = &cli.command
    {
        if !(*abs >= 0.0 && *rel >= 0.0) {
            return Err(CliError::Config("tolerances must be nonnegative".into()));
        }
        return check_fixture(
            output,
            fixture,
            Tolerance {
                abs: *abs,
                rel: *rel,
            },
        );
    }
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let (cfg, raw) = RunConfig::load(config_path)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(0);
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .ok_or_else(|| CliError::Config("no output directory: pass --out or set output".into()))?;
    let mut out = OutputDir::create(&dir)?;
    log::info!("running {} into {}", cfg.experiment.as_str(), dir.display());
    let primary = run::run(&cfg, seed, &mut out)?;
    out.write_manifest(&[
        ("radiant_version", env!("CARGO_PKG_VERSION").to_string()),
        ("experiment", cfg.experiment.as_str().to_string()),
        ("config", config_path.display().to_string()),
        ("config_sha256", sha256_hex(&raw)),
        ("seed", seed.to_string()),
        ("rng", radiant::geometry::RNG_ALGORITHM.to_string()),
        ("threads", rayon::current_num_threads().to_string()),
        ("primary", primary.clone()),
    ])?;
    if let Some(fixture) = &cli.fixture {
        check_fixture(
            &out.path().join(&primary),
            fixture,
            cfg.compare.unwrap_or_default(),
        )?;
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    let code = match init_logging().and_then(|_| execute(cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("radiant: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
