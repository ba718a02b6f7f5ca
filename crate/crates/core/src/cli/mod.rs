//! Command-line front end.
//!
//! The commands are plain functions returning their output as text so they
//! can be driven from tests; [`run`] adds argument parsing, file output and
//! exit codes.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand};

pub use commands::{
    cmd_contour, cmd_plan, cmd_rate_sweep, cmd_validate, FixedSide, PlanArgs, PlanOutput, SuiteResult,
    ValidationReport, VALIDATE_SEED,
};
pub use config::{parse_bits_grid, parse_converters, parse_snr_grid, RunConfig, KEYS};

use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SIMULATION: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_VALIDATION: i32 = 5;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidConfig(_) | Error::Codebook(_) => EXIT_CONFIG,
        Error::InfeasibleBudget { .. } => EXIT_INFEASIBLE,
        _ => EXIT_SIMULATION,
    }
}

#[derive(Parser, Debug)]
#[command(name = "qmimo", version, about = "Massive-MIMO downlink rates with finite-resolution DACs and ADCs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form (and optionally simulated) rate versus SNR per converter setting.
    RateSweep(ConfigArgs),
    /// Closed-form rate over a grid of DAC and ADC resolutions.
    Contour(ConfigArgs),
    /// Converter resolution needed to stay within a rate-loss budget.
    Plan(PlanCli),
    /// Built-in self-checks.
    Validate(ConfigArgs),
}

/// A config file plus one override flag per key; flags win over the file.
#[derive(Args, Debug, Default)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    n_antennas: Option<String>,
    #[arg(long)]
    n_users: Option<String>,
    #[arg(long)]
    total_power: Option<String>,
    /// Comma list or `start:stop:count`, in dB.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    contour_snr_db: Option<String>,
    /// `dac/adc` pairs, e.g. `inf/inf,3/6`.
    #[arg(long)]
    converters: Option<String>,
    #[arg(long)]
    dac_bits: Option<String>,
    #[arg(long)]
    adc_bits: Option<String>,
    #[arg(long)]
    n_trials: Option<String>,
    #[arg(long)]
    symbols_per_trial: Option<String>,
    #[arg(long)]
    master_seed: Option<String>,
    /// true-quantizer, bussgang-linear or per-term-analytic.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    simulate: Option<String>,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    raw_dump: Option<String>,
    #[arg(long, short)]
    output: Option<String>,
}

impl ConfigArgs {
    fn overrides(&self) -> [(&'static str, &Option<String>); 16] {
        [
            ("n_antennas", &self.n_antennas),
            ("n_users", &self.n_users),
            ("total_power", &self.total_power),
            ("snr_db", &self.snr_db),
            ("contour_snr_db", &self.contour_snr_db),
            ("converters", &self.converters),
            ("dac_bits", &self.dac_bits),
            ("adc_bits", &self.adc_bits),
            ("n_trials", &self.n_trials),
            ("symbols_per_trial", &self.symbols_per_trial),
            ("master_seed", &self.master_seed),
            ("mode", &self.mode),
            ("simulate", &self.simulate),
            ("workers", &self.workers),
            ("raw_dump", &self.raw_dump),
            ("output", &self.output),
        ]
    }

    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        for (key, value) in self.overrides() {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| match e {
                    Error::InvalidConfig(msg) => Error::InvalidConfig(format!("--{}: {msg}", key.replace('_', "-"))),
                    other => other,
                })?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("fixed").required(true).args(["fixed_adc", "fixed_dac"])))]
struct PlanCli {
    /// ADC bits; plans the DAC.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    fixed_adc: Option<u32>,
    /// DAC bits; plans the ADC.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    fixed_dac: Option<u32>,
    /// Rate-loss budget in bits/s/Hz.
    #[arg(long)]
    loss: f64,
    /// Load ratio M/N.
    #[arg(long)]
    beta: f64,
    /// Also report the exact loss at this SNR (dB).
    #[arg(long, allow_hyphen_values = true)]
    snr_check: Option<f64>,
    /// Write the plan as CSV to this path.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::RateSweep(args) => {
            let cfg = args.resolve()?;
            emit(&cmd_rate_sweep(&cfg)?, cfg.output.as_deref())?;
        }
        Command::Contour(args) => {
            let cfg = args.resolve()?;
            emit(&cmd_contour(&cfg)?, cfg.output.as_deref())?;
        }
        Command::Plan(p) => {
            let fixed = match (p.fixed_adc, p.fixed_dac) {
                (Some(b), None) => FixedSide::Adc(b),
                (None, Some(b)) => FixedSide::Dac(b),
                _ => return Err(Error::InvalidConfig("give exactly one of --fixed-adc and --fixed-dac".into())),
            };
            let out = cmd_plan(&PlanArgs { fixed, loss: p.loss, beta: p.beta, snr_check_db: p.snr_check })?;
            print!("{}", out.text);
            if let Some(path) = &p.csv {
                emit(&out.csv, Some(path))?;
            }
        }
        Command::Validate(args) => {
            let cfg = args.resolve()?;
            let report = cmd_validate(&cfg)?;
            emit(&report.render(), cfg.output.as_deref())?;
            if !report.all_passed() {
                return Ok(EXIT_VALIDATION);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
