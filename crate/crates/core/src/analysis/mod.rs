//! Large-system (N → ∞, fixed β) closed forms.
//!
//! Everything here is a pure function of an [`OperatingPoint`]: user load
//! β, linear SNR γ0 and the two distortion factors. Rates are in
//! bits/s/Hz (base-2 logarithms).

mod planner;

pub use planner::{ceil_guarded, plan_adc_bits, plan_dac_bits, AdcPlan, DacPlan, PlannerQuery};

use crate::channel::SystemConfig;
use crate::quantization::{distortion_factor, Resolution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub beta: f64,
    pub snr: f64,
    pub rho_da: f64,
    pub rho_ad: f64,
}

impl OperatingPoint {
    /// Resolves the distortion factors from the converter resolutions.
    pub fn new(beta: f64, snr: f64, dac: Resolution, adc: Resolution) -> Self {
        Self::from_rho(beta, snr, distortion_factor(dac), distortion_factor(adc))
    }

    pub fn from_rho(beta: f64, snr: f64, rho_da: f64, rho_ad: f64) -> Self {
        Self { beta, snr, rho_da, rho_ad }
    }

    /// `1/β − 1`, the post-ZF array gain per unit SNR.
    pub fn load_gain(&self) -> f64 {
        1.0 / self.beta - 1.0
    }

    /// Post-ZF SNR with ideal converters, `(1/β − 1)·γ0`.
    pub fn nominal_snr(&self) -> f64 {
        self.load_gain() * self.snr
    }

    pub fn with_rho(self, rho_da: f64, rho_ad: f64) -> Self {
        Self { rho_da, rho_ad, ..self }
    }

    pub fn with_snr(self, snr: f64) -> Self {
        Self { snr, ..self }
    }
}

impl From<&SystemConfig> for OperatingPoint {
    fn from(cfg: &SystemConfig) -> Self {
        Self::new(cfg.beta(), cfg.snr(), cfg.dac(), cfg.adc())
    }
}

/// Asymptotic SIQNR:
/// `(1−ρ_AD)(1−ρ_DA)Kγ0 / (ρ_DA γ0 + ρ_AD(1−ρ_DA)Kγ0 + 1)` with `K = 1/β − 1`.
pub fn asymptotic_siqnr(op: &OperatingPoint) -> f64 {
    let k = op.load_gain();
    let (rd, ra, g) = (op.rho_da, op.rho_ad, op.snr);
    (1.0 - ra) * (1.0 - rd) * k * g / (rd * g + ra * (1.0 - rd) * k * g + 1.0)
}

/// `log₂(1 + γ̄)`.
pub fn asymptotic_rate(op: &OperatingPoint) -> f64 {
    asymptotic_siqnr(op).ln_1p() / std::f64::consts::LN_2
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Rates with one or both converters made ideal, and the SNR degradation
/// multipliers that produce them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Benchmarks {
    /// `R(∞, b_AD)`.
    pub ideal_dac: f64,
    /// `R(b_DA, ∞)`.
    pub ideal_adc: f64,
    /// `R(∞, ∞)`.
    pub ideal: f64,
    pub alpha_ad: f64,
    pub alpha_da: f64,
}

pub fn alpha_ad(op: &OperatingPoint) -> f64 {
    (1.0 - op.rho_ad) / (op.rho_ad * op.nominal_snr() + 1.0)
}

pub fn alpha_da(op: &OperatingPoint) -> f64 {
    (1.0 - op.rho_da) / (op.rho_da * op.snr + 1.0)
}

pub fn benchmark_rates(op: &OperatingPoint) -> Benchmarks {
    let nominal = op.nominal_snr();
    let a_ad = alpha_ad(op);
    let a_da = alpha_da(op);
    Benchmarks {
        ideal_dac: log2_1p(a_ad * nominal),
        ideal_adc: log2_1p(a_da * nominal),
        ideal: log2_1p(nominal),
        alpha_ad: a_ad,
        alpha_da: a_da,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateReport {
    pub siqnr: f64,
    pub rate: f64,
    pub nominal_snr: f64,
    pub benchmarks: Benchmarks,
    /// `R(∞, b_AD) − R(b_DA, b_AD)`.
    pub loss_dac: f64,
    /// `R(∞, ∞) − R(b_DA, b_AD)`.
    pub loss_total: f64,
}

pub fn rate_report(op: &OperatingPoint) -> RateReport {
    let siqnr = asymptotic_siqnr(op);
    let rate = log2_1p(siqnr);
    let benchmarks = benchmark_rates(op);
    RateReport {
        siqnr,
        rate,
        nominal_snr: op.nominal_snr(),
        benchmarks,
        loss_dac: rate_loss_dac(op),
        loss_total: benchmarks.ideal - rate,
    }
}

/// Rate lost to the DACs relative to ideal DACs with the same ADCs.
pub fn rate_loss_dac(op: &OperatingPoint) -> f64 {
    let k = op.load_gain();
    let (ra, g) = (op.rho_ad, op.snr);
    // log((1 + a)/(1 + b)) with a, b the two SIQNRs, written to stay
    // accurate as γ0 → 0.
    let a = (1.0 - ra) * k * g / (ra * k * g + 1.0);
    let b = asymptotic_siqnr(op);
    (log2_1p((a - b) / (1.0 + b))).max(0.0)
}

/// Limit of `ΔR_DA / γ0` as `γ0 → 0`: `ρ_DA(1−ρ_AD)(1/β−1) / ln 2`.
pub fn low_snr_loss_slope(op: &OperatingPoint) -> f64 {
    op.rho_da * (1.0 - op.rho_ad) * op.load_gain() / std::f64::consts::LN_2
}

/// `ΔR_DA` as `γ0 → ∞` for explicit distortion factors.
pub fn high_snr_loss_dac_rho(rho_da: f64, rho_ad: f64, beta: f64) -> f64 {
    if rho_da == 0.0 {
        return 0.0;
    }
    if rho_ad == 0.0 {
        return f64::INFINITY;
    }
    let k = 1.0 / beta - 1.0;
    log2_1p((1.0 / rho_ad - 1.0) / ((1.0 / rho_da - 1.0) * k + 1.0))
}

/// `R(b_DA, ∞) − R(b_DA, b_AD)` as `γ0 → ∞`, the rate the ADCs cost at high
/// SNR for explicit distortion factors.
pub fn high_snr_loss_adc_rho(rho_da: f64, rho_ad: f64, beta: f64) -> f64 {
    if rho_ad == 0.0 {
        return 0.0;
    }
    if rho_da == 0.0 {
        return f64::INFINITY;
    }
    let k = 1.0 / beta - 1.0;
    let ideal = (1.0 - rho_da) * k / rho_da;
    let quantized = (1.0 - rho_ad) * (1.0 - rho_da) * k / (rho_da + rho_ad * (1.0 - rho_da) * k);
    log2_1p((ideal - quantized) / (1.0 + quantized))
}

/// High-SNR DAC rate loss with tabulated distortion factors.
pub fn high_snr_loss_dac(dac: Resolution, adc: Resolution, beta: f64) -> f64 {
    high_snr_loss_dac_rho(distortion_factor(dac), distortion_factor(adc), beta)
}

/// Large-system limits of the per-user received power terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermLimits {
    pub signal: f64,
    pub interference: f64,
    pub dac_noise: f64,
    pub adc_noise: f64,
    pub thermal: f64,
}

impl TermLimits {
    pub fn siqnr(&self) -> f64 {
        self.signal / (self.interference + self.dac_noise + self.adc_noise + self.thermal)
    }
}

/// Limits of `S_k, I_k, Q1_k, Q2_k, N_k` for total power `power` and noise
/// power `noise_power`.
pub fn asymptotic_terms(beta: f64, rho_da: f64, rho_ad: f64, power: f64, noise_power: f64) -> TermLimits {
    let k = 1.0 / beta - 1.0;
    let (rd, ra) = (rho_da, rho_ad);
    TermLimits {
        signal: (1.0 - ra).powi(2) * (1.0 - rd) * power * k,
        interference: 0.0,
        dac_noise: (1.0 - ra).powi(2) * rd * power,
        adc_noise: ra * (1.0 - ra) * (1.0 - rd) * power * k
            + ra * rd * (1.0 - ra) * power
            + ra * (1.0 - ra) * noise_power,
        thermal: (1.0 - ra).powi(2) * noise_power,
    }
}

/// Closed-form rates over a grid of converter resolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct RateGrid {
    pub dac: Vec<Resolution>,
    pub adc: Vec<Resolution>,
    /// `rates[i][j]` is `R(dac[i], adc[j])`.
    pub rates: Vec<Vec<f64>>,
}

impl RateGrid {
    pub fn get(&self, dac: Resolution, adc: Resolution) -> Option<f64> {
        let i = self.dac.iter().position(|d| *d == dac)?;
        let j = self.adc.iter().position(|a| *a == adc)?;
        Some(self.rates[i][j])
    }
}

pub fn rate_grid(beta: f64, snr: f64, dac: &[Resolution], adc: &[Resolution]) -> RateGrid {
    let rates = dac
        .iter()
        .map(|&d| adc.iter().map(|&a| asymptotic_rate(&OperatingPoint::new(beta, snr, d, a))).collect())
        .collect();
    RateGrid { dac: dac.to_vec(), adc: adc.to_vec(), rates }
}
