//! Converter-resolution planning from a high-SNR rate-loss budget.

use crate::analysis::high_snr_loss_dac_rho;
use crate::quantization::{distortion_factor, distortion_factor_approx, Resolution};
use crate::{Error, Result};

/// Slack subtracted before taking a ceiling, so that values which are
/// integers up to round-off are not pushed up a whole bit.
pub const CEIL_GUARD: f64 = 1e-9;

pub fn ceil_guarded(x: f64) -> f64 {
    (x - CEIL_GUARD).ceil()
}

fn to_bits(x: f64) -> u32 {
    ceil_guarded(x).max(1.0) as u32
}

/// Resolution request: the known converter's bits, a loss budget in
/// bits/s/Hz and the user load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerQuery {
    pub fixed_bits: u32,
    pub loss_budget: f64,
    pub beta: f64,
}

impl PlannerQuery {
    pub fn new(fixed_bits: u32, loss_budget: f64, beta: f64) -> Result<Self> {
        if fixed_bits == 0 {
            return Err(Error::InvalidConfig("fixed converter needs at least 1 bit".into()));
        }
        if !(loss_budget.is_finite() && loss_budget > 0.0) {
            return Err(Error::InvalidConfig(format!("loss budget must be positive, got {loss_budget}")));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::InvalidConfig(format!("user load must lie in (0, 1), got {beta}")));
        }
        Ok(Self { fixed_bits, loss_budget, beta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DacPlan {
    /// Smallest DAC resolution meeting the budget at high SNR, with the
    /// DAC distortion following the high-resolution approximation.
    pub bits: u32,
    /// The unrounded bound behind `bits`.
    pub raw: f64,
    /// Approximation assuming `ρ_AD ≪ 1`.
    pub bits_approx_a: u32,
    /// Approximation additionally assuming `β ≪ 1`.
    pub bits_approx_b: u32,
    /// ADC distortion factor used (tabulated).
    pub rho_ad: f64,
    /// High-SNR loss at `bits` with `ρ_DA` from the approximation.
    pub loss_model: f64,
    /// High-SNR loss at `bits` with `ρ_DA` from the table.
    pub loss_table: f64,
}

/// DAC resolution for a fixed-ADC system and budget `r1`.
///
/// Solves `ΔR_DA^high ≤ r1` for `ρ_DA`, then inverts `ρ = (π√3/2)·2^(−2b)`.
/// Errors with [`Error::InfeasibleBudget`] if no positive `ρ_DA` meets the
/// budget. Results below one bit are reported as one bit.
pub fn plan_dac_bits(q: &PlannerQuery) -> Result<DacPlan> {
    let rho_ad = distortion_factor(Resolution::Bits(q.fixed_bits));
    let k = 1.0 / q.beta - 1.0;
    let two_r = q.loss_budget.exp2();
    let a = (two_r - 1.0) * k;
    let denom = a + 1.0 / rho_ad - two_r;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::InfeasibleBudget {
            budget: q.loss_budget,
            reason: format!(
                "(2^r - 1)(1/beta - 1) + 1/rho_AD - 2^r = {denom:.6} is not positive \
                 for b_AD = {}, beta = {}",
                q.fixed_bits, q.beta
            ),
        });
    }
    // largest admissible ρ_DA
    let rho_da_max = a / denom;
    let c = 2.0 / (3f64.sqrt() * std::f64::consts::PI);
    let raw = -0.5 * (c * rho_da_max).log2();
    let bits = to_bits(raw);

    let half_log_budget = 0.5 * (two_r - 1.0).log2();
    let fixed = q.fixed_bits as f64;
    let raw_a = fixed - half_log_budget - 0.5 * k.log2();
    let raw_b = fixed - half_log_budget + 0.5 * q.beta.log2();

    Ok(DacPlan {
        bits,
        raw,
        bits_approx_a: to_bits(raw_a),
        bits_approx_b: to_bits(raw_b),
        rho_ad,
        loss_model: high_snr_loss_dac_rho(distortion_factor_approx(bits), rho_ad, q.beta),
        loss_table: high_snr_loss_dac_rho(distortion_factor(Resolution::Bits(bits)), rho_ad, q.beta),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcPlan {
    pub bits: u32,
    pub raw: f64,
}

/// ADC resolution for a fixed-DAC system and budget `r2`:
/// `⌈b_DA − ½log₂(2^r2 − 1) − ½log₂β⌉`, at least one bit.
pub fn plan_adc_bits(q: &PlannerQuery) -> Result<AdcPlan> {
    let raw = q.fixed_bits as f64 - 0.5 * (q.loss_budget.exp2() - 1.0).log2() - 0.5 * q.beta.log2();
    Ok(AdcPlan { bits: to_bits(raw), raw })
}
