//! Monte Carlo estimation of per-user SIQNR and achievable rate.
//!
//! Every trial draws one channel from its own substream
//! `(master_seed, trial)`, so estimates are a pure function of the inputs
//! and do not depend on how trials are scheduled. Sweeps over SNR reuse the
//! same channel, symbols and unit-variance noise draws at every point.

mod exec;
mod terms;
mod trial;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

pub use exec::Execution;
pub use terms::{per_term_breakdown, per_term_breakdown_rho, received_power, TermBreakdown};
pub use trial::{estimate_siqnr, simulate_trial, TrialOutput, TrialRunner, MAX_RESAMPLES};

use crate::analysis::asymptotic_terms;
use crate::channel::{substream, SystemConfig};
use crate::numfmt::sig12;
use crate::quantization::distortion_factor;
use crate::{Error, Result};
use terms::RealizationStats;

/// How converters are represented in a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimMode {
    /// Lloyd-Max codebooks applied sample by sample.
    TrueQuantizer,
    /// Linear gain plus independent Gaussian distortion.
    BussgangLinear,
    /// Exact per-realization expectations; no symbols are drawn.
    PerTermAnalytic,
}

impl SimMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimMode::TrueQuantizer => "true-quantizer",
            SimMode::BussgangLinear => "bussgang-linear",
            SimMode::PerTermAnalytic => "per-term-analytic",
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "true-quantizer" | "true" => Ok(SimMode::TrueQuantizer),
            "bussgang-linear" | "bussgang" | "linear" => Ok(SimMode::BussgangLinear),
            "per-term-analytic" | "analytic" => Ok(SimMode::PerTermAnalytic),
            other => Err(Error::InvalidConfig(format!("unknown simulation mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub n_trials: usize,
    pub symbols_per_trial: usize,
    pub mode: SimMode,
    pub master_seed: u64,
    pub execution: Execution,
}

impl SimOptions {
    /// 2000 symbols per trial, true quantizers, default execution.
    pub fn new(n_trials: usize, master_seed: u64) -> Self {
        Self {
            n_trials,
            symbols_per_trial: 2000,
            mode: SimMode::TrueQuantizer,
            master_seed,
            execution: Execution::default(),
        }
    }

    pub fn with_mode(mut self, mode: SimMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_symbols(mut self, symbols_per_trial: usize) -> Self {
        self.symbols_per_trial = symbols_per_trial;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }
}

/// Result of one trial: `siqnr[point][user]` and the user-averaged rate at
/// each sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub trial: usize,
    pub siqnr: Vec<Vec<f64>>,
    pub rate: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate {
    pub mean_rate: f64,
    /// Sample standard deviation over trials divided by `√n_trials`; zero
    /// for a single trial.
    pub std_error: f64,
    pub n_trials: usize,
    pub mode: SimMode,
}

impl SimEstimate {
    fn from_rates(rates: &[f64], mode: SimMode) -> Self {
        let n = rates.len();
        let mean = rates.iter().sum::<f64>() / n as f64;
        let std_error = if n > 1 {
            let var = rates.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean_rate: mean, std_error, n_trials: n, mode }
    }
}

#[derive(Debug, Clone)]
pub struct SweepEstimate {
    pub snr_db: Vec<f64>,
    pub estimates: Vec<SimEstimate>,
    pub records: Vec<TrialRecord>,
}

fn noise_for_db(cfg: &SystemConfig, snr_db: f64) -> f64 {
    cfg.total_power() / 10f64.powf(snr_db / 10.0)
}

/// Runs `opts.n_trials` trials at each SNR (in dB) with common random
/// numbers across the SNR points.
pub fn estimate_rate_sweep(cfg: &SystemConfig, snr_db: &[f64], opts: &SimOptions) -> Result<SweepEstimate> {
    if opts.n_trials == 0 {
        return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
    }
    if snr_db.is_empty() || snr_db.iter().any(|s| !s.is_finite()) {
        return Err(Error::InvalidConfig("SNR grid must be non-empty and finite".into()));
    }
    let noise: Vec<f64> = snr_db.iter().map(|&s| noise_for_db(cfg, s)).collect();
    let runner = TrialRunner::new(cfg, opts.mode, opts.symbols_per_trial)?;

    let outcomes = exec::map_indexed(opts.n_trials, opts.execution, |t| {
        let mut rng = substream(opts.master_seed, t as u64);
        runner.run_sweep(&noise, &mut rng).map(|siqnr| {
            let rate = siqnr
                .iter()
                .map(|users| users.iter().map(|g| (1.0 + g).log2()).sum::<f64>() / users.len() as f64)
                .collect();
            TrialRecord { trial: t, siqnr, rate }
        })
    })?;

    let mut records = Vec::with_capacity(outcomes.len());
    for (t, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(r) => records.push(r),
            Err(e) => {
                return Err(Error::TrialFailed { trial: t, completed: records.len(), source: Box::new(e) });
            }
        }
    }

    let estimates = (0..snr_db.len())
        .map(|i| {
            let rates: Vec<f64> = records.iter().map(|r| r.rate[i]).collect();
            SimEstimate::from_rates(&rates, opts.mode)
        })
        .collect();
    Ok(SweepEstimate { snr_db: snr_db.to_vec(), estimates, records })
}

/// Rate estimate at the configuration's own SNR.
pub fn estimate_rate(cfg: &SystemConfig, opts: &SimOptions) -> Result<SimEstimate> {
    let runner = TrialRunner::new(cfg, opts.mode, opts.symbols_per_trial)?;
    let noise = [cfg.noise_power()];
    if opts.n_trials == 0 {
        return Err(Error::InvalidConfig("n_trials must be at least 1".into()));
    }
    let outcomes = exec::map_indexed(opts.n_trials, opts.execution, |t| {
        runner.run_sweep(&noise, &mut substream(opts.master_seed, t as u64))
    })?;
    let mut rates = Vec::with_capacity(opts.n_trials);
    for (t, outcome) in outcomes.into_iter().enumerate() {
        let siqnr = outcome.map_err(|e| Error::TrialFailed { trial: t, completed: rates.len(), source: Box::new(e) })?;
        let users = &siqnr[0];
        rates.push(users.iter().map(|g| (1.0 + g).log2()).sum::<f64>() / users.len() as f64);
    }
    Ok(SimEstimate::from_rates(&rates, opts.mode))
}

/// CSV sink for trial-level records: `config,trial,snr_db,user,siqnr,rate`,
/// one row per user and SNR point.
pub struct TrialDumpWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> TrialDumpWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(["config", "trial", "snr_db", "user", "siqnr", "rate"])?;
        Ok(Self { inner })
    }

    pub fn append(&mut self, label: &str, sweep: &SweepEstimate) -> Result<()> {
        for rec in &sweep.records {
            for (i, users) in rec.siqnr.iter().enumerate() {
                for (k, g) in users.iter().enumerate() {
                    self.inner.write_record([
                        label.to_string(),
                        rec.trial.to_string(),
                        sig12(sweep.snr_db[i]),
                        k.to_string(),
                        sig12(*g),
                        sig12((1.0 + g).log2()),
                    ])?;
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Per-realization term averages over an ensemble.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleTerms {
    /// Terms averaged over users and realizations.
    pub mean: TermBreakdown,
    /// Largest `I_k / S_k` seen in any realization.
    pub max_interference_ratio: f64,
    pub realizations: usize,
}

/// Averages the exact per-realization terms over `realizations` channels,
/// using the configuration's tabulated distortion factors.
pub fn ensemble_terms(cfg: &SystemConfig, realizations: usize, master_seed: u64, execution: Execution) -> Result<EnsembleTerms> {
    if realizations == 0 {
        return Err(Error::InvalidConfig("at least one realization is needed".into()));
    }
    let runner = TrialRunner::new(cfg, SimMode::PerTermAnalytic, 0)?;
    let (rd, ra) = (distortion_factor(cfg.dac()), distortion_factor(cfg.adc()));
    let per = exec::map_indexed(realizations, execution, |t| {
        let (h, p) = runner.draw_channel(&mut substream(master_seed, t as u64))?;
        let stats = RealizationStats::new(&h, &p);
        let mut sum = TermBreakdown::default();
        let mut worst = 0.0f64;
        for k in 0..cfg.n_users() {
            let b = stats.breakdown(k, rd, ra, cfg.noise_power());
            worst = worst.max(b.interference / b.signal);
            sum.add(&b);
        }
        sum.scale(1.0 / cfg.n_users() as f64);
        Ok::<_, Error>((sum, worst))
    })?;
    let mut mean = TermBreakdown::default();
    let mut worst = 0.0f64;
    for (t, r) in per.into_iter().enumerate() {
        let (s, w) = r.map_err(|e| Error::TrialFailed { trial: t, completed: t, source: Box::new(e) })?;
        mean.add(&s);
        worst = worst.max(w);
    }
    mean.scale(1.0 / realizations as f64);
    Ok(EnsembleTerms { mean, max_interference_ratio: worst, realizations })
}

/// One row of [`convergence_study`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n_antennas: usize,
    pub n_users: usize,
    pub empirical: TermBreakdown,
    /// Relative deviation of the ensemble means of `S`, `Q1`, `Q2` from
    /// their large-system limits.
    pub signal_dev: f64,
    pub dac_noise_dev: f64,
    pub adc_noise_dev: f64,
    pub max_interference_ratio: f64,
}

impl ConvergenceRow {
    pub fn max_deviation(&self) -> f64 {
        self.signal_dev.max(self.dac_noise_dev).max(self.adc_noise_dev)
    }
}

fn rel_dev(x: f64, limit: f64) -> f64 {
    if limit == 0.0 {
        x.abs()
    } else {
        (x / limit - 1.0).abs()
    }
}

/// Ensemble term means against their limits for each antenna count, holding
/// the template's load ratio fixed.
pub fn convergence_study(
    template: &SystemConfig,
    antenna_counts: &[usize],
    realizations: usize,
    master_seed: u64,
    execution: Execution,
) -> Result<Vec<ConvergenceRow>> {
    let beta = template.beta();
    let (rd, ra) = (distortion_factor(template.dac()), distortion_factor(template.adc()));
    let limit = asymptotic_terms(beta, rd, ra, template.total_power(), template.noise_power());
    antenna_counts
        .iter()
        .map(|&n| {
            let m = (beta * n as f64).round() as usize;
            if (m as f64 - beta * n as f64).abs() > 1e-9 {
                return Err(Error::InvalidConfig(format!("N={n} does not give an integer user count at β={beta}")));
            }
            let cfg = SystemConfig::new(n, m, template.total_power(), template.noise_power(), template.dac(), template.adc())?;
            let ens = ensemble_terms(&cfg, realizations, master_seed, execution)?;
            Ok(ConvergenceRow {
                n_antennas: n,
                n_users: m,
                empirical: ens.mean,
                signal_dev: rel_dev(ens.mean.signal, limit.signal),
                dac_noise_dev: rel_dev(ens.mean.dac_noise, limit.dac_noise),
                adc_noise_dev: rel_dev(ens.mean.adc_noise, limit.adc_noise),
                max_interference_ratio: ens.max_interference_ratio,
            })
        })
        .collect()
}
