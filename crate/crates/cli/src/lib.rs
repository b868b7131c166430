//! Command-line front end for `entrysim`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

pub mod config;
pub mod output;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use entrysim::{run, run_ensemble, Execution, GuidancePhase, Outcome};
use thiserror::Error;

use crate::config::ConfigFile;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "entrysim",
    version,
    about = "Lifting-entry trajectory simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fly one scenario; writes trajectory.csv and report.json.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// KEY=VALUE, applied after the file is read. Repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Fly a dispersed ensemble; writes ensemble.json and runs.csv.
    Montecarlo {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print the standard atmosphere as CSV.
    Atmosphere {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, allow_negative_numbers = true)]
        step: f64,
    },
    /// Print every configuration key with its default and unit.
    Schema,
}

fn read_config(path: Option<&Path>, overrides: &[String]) -> Result<ConfigFile, CliError> {
    let text = match path {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    config::load(&text, overrides)
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, bytes)
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))
}

/// Parallelism from `SIM_THREADS`, or the machine default when unset.
pub fn execution_from_env() -> Result<Execution, CliError> {
    match std::env::var("SIM_THREADS") {
        Err(_) => Ok(Execution::Parallel),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Execution::ParallelWith(n)),
            _ => Err(CliError::Config(format!(
                "SIM_THREADS must be a positive integer, got `{v}`"
            ))),
        },
    }
}

pub fn cmd_run<W: Write>(
    config: Option<&Path>,
    output: &Path,
    overrides: &[String],
    stdout: &mut W,
) -> Result<(), CliError> {
    let scenario = read_config(config, overrides)?.validated_scenario()?;
    let result = run(&scenario).map_err(|e| CliError::Runtime(e.to_string()))?;
    let r = &result.report;

    prepare_dir(output)?;
    let mut csv = Vec::new();
    output::write_trajectory(&mut csv, &result.trajectory)?;
    write_file(output, "trajectory.csv", &csv)?;
    write_file(output, "report.json", output::report_json(r)?.as_bytes())?;

    let phases = GuidancePhase::ALL
        .iter()
        .filter(|&&p| r.phase_entry_times.get(p).is_some())
        .count();
    writeln!(
        stdout,
        "{} t={:.2} s downrange={:.3} km miss={:.3} m phases={}/5",
        r.outcome.as_str(),
        r.impact_time,
        r.downrange / 1e3,
        r.miss_distance,
        phases
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;

    if r.outcome == Outcome::Aborted {
        return Err(CliError::Runtime(format!(
            "run aborted at t={} s (non-finite state)",
            r.impact_time
        )));
    }
    Ok(())
}

pub fn cmd_montecarlo<W: Write>(
    config: Option<&Path>,
    output: &Path,
    overrides: &[String],
    stdout: &mut W,
) -> Result<(), CliError> {
    let cfg = read_config(config, overrides)?;
    let nominal = cfg.validated_scenario()?;
    let spec = cfg.validated_dispersion()?;
    let execution = execution_from_env()?;
    let result =
        run_ensemble(&spec, &nominal, execution).map_err(|e| CliError::Runtime(e.to_string()))?;

    prepare_dir(output)?;
    write_file(
        output,
        "ensemble.json",
        output::stats_json(&result.stats)?.as_bytes(),
    )?;
    let mut csv = Vec::new();
    output::write_runs(&mut csv, &result.runs)?;
    write_file(output, "runs.csv", &csv)?;

    let s = &result.stats;
    writeln!(
        stdout,
        "n={} impacts={} cep={:.3} m p90={:.3} m p95={:.3} m max={:.3} m",
        s.n, s.n_impact, s.cep, s.quantiles.p90, s.quantiles.p95, s.miss_max
    )
    .map_err(|e| CliError::Runtime(e.to_string()))
}

/// Altitudes `from, from + step, ...` up to and including `to`.
pub fn atmosphere_grid(from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(from.is_finite() && to.is_finite() && from >= 0.0 && from < to) {
        return Err(CliError::Config(format!(
            "need 0 <= from < to, got from={from} to={to}"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Config(format!(
            "step must be positive, got {step}"
        )));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

pub fn cmd_atmosphere<W: Write>(
    from: f64,
    to: f64,
    step: f64,
    stdout: &mut W,
) -> Result<(), CliError> {
    let rows = atmosphere_grid(from, to, step)?
        .into_iter()
        .map(entrysim::atmosphere::sample)
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    output::write_atmosphere(stdout, &rows)
}

pub fn cmd_schema<W: Write>(stdout: &mut W) -> Result<(), CliError> {
    stdout
        .write_all(config::schema_text().as_bytes())
        .map_err(|e| CliError::Runtime(e.to_string()))
}

pub fn dispatch<W: Write>(cli: &Cli, stdout: &mut W) -> Result<(), CliError> {
    match &cli.command {
        Command::Run {
            config,
            output,
            overrides,
        } => cmd_run(config.as_deref(), output, overrides, stdout),
        Command::Montecarlo {
            config,
            output,
            overrides,
        } => cmd_montecarlo(config.as_deref(), output, overrides, stdout),
        Command::Atmosphere { from, to, step } => cmd_atmosphere(*from, *to, *step, stdout),
        Command::Schema => cmd_schema(stdout),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_endpoints() {
        assert_eq!(
            atmosphere_grid(0.0, 1000.0, 1000.0).unwrap(),
            vec![0.0, 1000.0]
        );
        assert_eq!(atmosphere_grid(0.0, 1000.0, 300.0).unwrap().len(), 4);
        assert_eq!(atmosphere_grid(0.0, 86_000.0, 1000.0).unwrap().len(), 87);
        assert!(atmosphere_grid(5.0, 5.0, 1.0).is_err());
        assert!(atmosphere_grid(-1.0, 5.0, 1.0).is_err());
        assert!(atmosphere_grid(0.0, 5.0, 0.0).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(String::new()).exit_code(), 2);
        assert_eq!(CliError::Runtime(String::new()).exit_code(), 3);
    }
}
