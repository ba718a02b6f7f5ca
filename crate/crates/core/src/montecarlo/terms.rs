//! Per-realization power terms of the linearized downlink.

use crate::channel::{ChannelRealization, SystemConfig};
use crate::precoding::{diag_of_gram, ZfPrecoder};
use crate::quantization::distortion_factor;
use crate::{CMatrix, Complex64};

/// Powers seen by one user, averaged over symbols, noise and quantization
/// distortion for a fixed channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TermBreakdown {
    /// `S_k`
    pub signal: f64,
    /// `I_k`
    pub interference: f64,
    /// `Q1_k`, DAC distortion reaching the user.
    pub dac_noise: f64,
    /// `Q2_k`, the user's own ADC distortion.
    pub adc_noise: f64,
    /// `N_k`
    pub thermal: f64,
}

impl TermBreakdown {
    pub fn siqnr(&self) -> f64 {
        self.signal / (self.interference + self.dac_noise + self.adc_noise + self.thermal)
    }

    pub fn total(&self) -> f64 {
        self.signal + self.interference + self.dac_noise + self.adc_noise + self.thermal
    }

    pub(crate) fn add(&mut self, o: &TermBreakdown) {
        self.signal += o.signal;
        self.interference += o.interference;
        self.dac_noise += o.dac_noise;
        self.adc_noise += o.adc_noise;
        self.thermal += o.thermal;
    }

    pub(crate) fn scale(&mut self, s: f64) {
        self.signal *= s;
        self.interference *= s;
        self.dac_noise *= s;
        self.adc_noise *= s;
        self.thermal *= s;
    }
}

/// Quantities of one realization shared by the term formulas.
pub(crate) struct RealizationStats {
    /// `|h_kᵀ p_j|²`, `M × M`.
    pub effective: Vec<Vec<f64>>,
    /// `h_kᵀ diag(PPᴴ) h_k*` per user.
    pub weighted_norm: Vec<f64>,
}

impl RealizationStats {
    pub fn new(h: &ChannelRealization, p: &ZfPrecoder) -> Self {
        let hp: CMatrix = &h.h * &p.p;
        let m = hp.nrows();
        let effective = (0..m).map(|k| (0..m).map(|j| hp[(k, j)].norm_sqr()).collect()).collect();
        let d = diag_of_gram(p);
        let weighted_norm = h
            .h
            .row_iter()
            .map(|row| row.iter().zip(&d).map(|(v, dn)| v.norm_sqr() * dn).sum())
            .collect();
        Self { effective, weighted_norm }
    }

    /// ADC input power `E{|y_k|²}` under the linear DAC model.
    pub fn adc_input_power(&self, k: usize, rho_da: f64, noise_power: f64) -> f64 {
        let all: f64 = self.effective[k].iter().sum();
        (1.0 - rho_da) * all + rho_da * self.weighted_norm[k] + noise_power
    }

    pub fn breakdown(&self, k: usize, rho_da: f64, rho_ad: f64, noise_power: f64) -> TermBreakdown {
        let (rd, ra) = (rho_da, rho_ad);
        let row = &self.effective[k];
        let own = row[k];
        let others: f64 = row.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| v).sum();
        let g2 = (1.0 - ra).powi(2);
        TermBreakdown {
            signal: g2 * (1.0 - rd) * own,
            interference: g2 * (1.0 - rd) * others,
            dac_noise: g2 * rd * self.weighted_norm[k],
            adc_noise: ra * (1.0 - ra) * ((1.0 - rd) * (own + others) + noise_power + rd * self.weighted_norm[k]),
            thermal: g2 * noise_power,
        }
    }
}

/// Exact `S_k, I_k, Q1_k, Q2_k, N_k` for one channel and precoder, using the
/// configuration's tabulated distortion factors and noise power.
pub fn per_term_breakdown(h: &ChannelRealization, p: &ZfPrecoder, cfg: &SystemConfig) -> Vec<TermBreakdown> {
    per_term_breakdown_rho(h, p, distortion_factor(cfg.dac()), distortion_factor(cfg.adc()), cfg.noise_power())
}

pub fn per_term_breakdown_rho(
    h: &ChannelRealization,
    p: &ZfPrecoder,
    rho_da: f64,
    rho_ad: f64,
    noise_power: f64,
) -> Vec<TermBreakdown> {
    let stats = RealizationStats::new(h, p);
    (0..h.n_users()).map(|k| stats.breakdown(k, rho_da, rho_ad, noise_power)).collect()
}

/// `E{|y_q,k|²}` from the full transmit covariance
/// `(1−ρ_DA)PPᴴ + ρ_DA·diag(PPᴴ)` and the ADC model's output power.
pub fn received_power(h: &ChannelRealization, p: &ZfPrecoder, rho_da: f64, rho_ad: f64, noise_power: f64) -> Vec<f64> {
    let gram = &p.p * p.p.adjoint();
    let mut cov = &gram * Complex64::new(1.0 - rho_da, 0.0);
    for n in 0..cov.nrows() {
        cov[(n, n)] += gram[(n, n)] * rho_da;
    }
    let rx = &h.h * cov * h.h.adjoint();
    (0..h.n_users())
        .map(|k| {
            let y = rx[(k, k)].re + noise_power;
            (1.0 - rho_ad).powi(2) * y + rho_ad * (1.0 - rho_ad) * y
        })
        .collect()
}
