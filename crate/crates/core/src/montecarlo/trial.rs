//! One channel realization pushed through the full downlink chain.

use rand::Rng;

use crate::channel::{gaussian_matrix, generate_channel, ChannelRealization, SystemConfig};
use crate::montecarlo::terms::RealizationStats;
use crate::montecarlo::SimMode;
use crate::precoding::{diag_of_gram, zf_precoder, ZfPrecoder};
use crate::quantization::{distortion_factor, quantize_stream, BussgangLinearModel, Converter, QuantizerCodebook};
use crate::{CMatrix, Complex64, Error, Result};

/// Channel redraws allowed before a trial is declared failed.
pub const MAX_RESAMPLES: u32 = 8;

/// Aligned `(symbols, received)` batches.
type StreamPair = (CMatrix, CMatrix);

/// Output of [`simulate_trial`].
#[derive(Debug, Clone)]
pub struct TrialOutput {
    /// `T × M` transmitted symbols (column `k` is user `k`'s stream).
    pub symbols: Option<CMatrix>,
    /// `T × M` ADC outputs, aligned with `symbols`.
    pub received: Option<CMatrix>,
    /// Empirical (or, in analytic mode, exact) SIQNR per user.
    pub siqnr: Vec<f64>,
}

/// Reusable per-configuration state: codebooks and distortion factors.
#[derive(Debug, Clone)]
pub struct TrialRunner {
    cfg: SystemConfig,
    mode: SimMode,
    symbols: usize,
    dac: Converter,
    adc: Converter,
    rho_da: f64,
    rho_ad: f64,
}

impl TrialRunner {
    pub fn new(cfg: &SystemConfig, mode: SimMode, symbols_per_trial: usize) -> Result<Self> {
        if mode != SimMode::PerTermAnalytic && symbols_per_trial < 2 {
            return Err(Error::InvalidConfig("at least two symbols per trial are needed".into()));
        }
        let (dac, adc) = match mode {
            SimMode::TrueQuantizer => (Converter::design(cfg.dac()), Converter::design(cfg.adc())),
            _ => (Converter::Ideal, Converter::Ideal),
        };
        Ok(Self {
            cfg: *cfg,
            mode,
            symbols: symbols_per_trial,
            dac,
            adc,
            rho_da: distortion_factor(cfg.dac()),
            rho_ad: distortion_factor(cfg.adc()),
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    /// Draws channels until one is well conditioned.
    pub fn draw_channel<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<(ChannelRealization, ZfPrecoder)> {
        let mut last = None;
        for _ in 0..=MAX_RESAMPLES {
            let h = generate_channel(&self.cfg, rng);
            match zf_precoder(&h, self.cfg.total_power()) {
                Ok(p) => return Ok((h, p)),
                Err(e @ Error::SingularChannel { .. }) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one draw"))
    }

    /// Per-user SIQNR at each noise power, with all noise powers sharing the
    /// same channel, symbols and unit-variance noise draws.
    pub fn run_sweep<R: Rng + ?Sized>(&self, noise_powers: &[f64], rng: &mut R) -> Result<Vec<Vec<f64>>> {
        self.run(noise_powers, rng, false).map(|(s, _)| s)
    }

    fn run<R: Rng + ?Sized>(
        &self,
        noise_powers: &[f64],
        rng: &mut R,
        keep: bool,
    ) -> Result<(Vec<Vec<f64>>, Option<StreamPair>)> {
        let (h, p) = self.draw_channel(rng)?;
        let stats = RealizationStats::new(&h, &p);
        let m = self.cfg.n_users();

        if self.mode == SimMode::PerTermAnalytic {
            let out = noise_powers
                .iter()
                .map(|&np| (0..m).map(|k| stats.breakdown(k, self.rho_da, self.rho_ad, np).siqnr()).collect())
                .collect();
            return Ok((out, None));
        }

        let t = self.symbols;
        let n = self.cfg.n_antennas();
        let symbols = gaussian_matrix(t, m, 1.0, rng);
        let thermal = gaussian_matrix(t, m, 1.0, rng);

        // T × N precoded samples; column n is antenna n's stream.
        let mut x = &symbols * p.p.transpose();
        match (&self.mode, &self.dac) {
            (SimMode::TrueQuantizer, Converter::Quantized(cb)) => {
                let gain = 1.0 / (1.0 - cb.rho()).sqrt();
                for mut col in x.column_iter_mut() {
                    quantize_stream(col.as_mut_slice(), cb, gain)?;
                }
            }
            (SimMode::BussgangLinear, _) if self.rho_da > 0.0 => {
                let model = BussgangLinearModel::dac(self.rho_da);
                let unit = gaussian_matrix(t, n, 1.0, rng);
                for ((mut col, w), power) in x.column_iter_mut().zip(unit.column_iter()).zip(diag_of_gram(&p)) {
                    model.apply_with_unit_noise(col.as_mut_slice(), power, w.as_slice());
                }
            }
            _ => {}
        }
        let noiseless = &x * h.h.transpose();
        drop(x);

        let adc_unit = (self.mode == SimMode::BussgangLinear && self.rho_ad > 0.0).then(|| gaussian_matrix(t, m, 1.0, rng));

        let mut out = Vec::with_capacity(noise_powers.len());
        let mut kept = None;
        for (idx, &np) in noise_powers.iter().enumerate() {
            let mut y = &noiseless + &thermal * Complex64::new(np.sqrt(), 0.0);
            match (&self.mode, &self.adc) {
                (SimMode::TrueQuantizer, Converter::Quantized(cb)) => quantize_columns(&mut y, cb)?,
                (SimMode::BussgangLinear, _) => {
                    if let Some(unit) = &adc_unit {
                        let model = BussgangLinearModel::adc(self.rho_ad);
                        for (k, (mut col, w)) in y.column_iter_mut().zip(unit.column_iter()).enumerate() {
                            let power = stats.adc_input_power(k, self.rho_da, np);
                            model.apply_with_unit_noise(col.as_mut_slice(), power, w.as_slice());
                        }
                    }
                }
                _ => {}
            }
            out.push(estimate_siqnr(&symbols, &y));
            if keep && idx + 1 == noise_powers.len() {
                kept = Some(y);
            }
        }
        Ok((out, kept.map(|y| (symbols, y))))
    }
}

fn quantize_columns(y: &mut CMatrix, cb: &QuantizerCodebook) -> Result<()> {
    for mut col in y.column_iter_mut() {
        quantize_stream(col.as_mut_slice(), cb, 1.0)?;
    }
    Ok(())
}

/// Bussgang-consistent SIQNR estimate per user from aligned symbol and
/// output streams: fit `y ≈ g·s`, then compare `|g|²E|s|²` with the residual
/// power.
pub fn estimate_siqnr(symbols: &CMatrix, received: &CMatrix) -> Vec<f64> {
    symbols
        .column_iter()
        .zip(received.column_iter())
        .map(|(s, y)| {
            let ss: f64 = s.iter().map(|v| v.norm_sqr()).sum();
            let ys: Complex64 = y.iter().zip(s.iter()).map(|(a, b)| a * b.conj()).sum();
            let g = ys / ss;
            let resid: f64 = y.iter().zip(s.iter()).map(|(a, b)| (a - g * b).norm_sqr()).sum();
            g.norm_sqr() * ss / resid
        })
        .collect()
}

/// One trial at the configuration's own noise power.
pub fn simulate_trial<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    mode: SimMode,
    symbols_per_trial: usize,
    rng: &mut R,
) -> Result<TrialOutput> {
    let runner = TrialRunner::new(cfg, mode, symbols_per_trial)?;
    let (mut siqnr, kept) = runner.run(&[cfg.noise_power()], rng, true)?;
    let (symbols, received) = match kept {
        Some((s, y)) => (Some(s), Some(y)),
        None => (None, None),
    };
    Ok(TrialOutput { symbols, received, siqnr: siqnr.pop().unwrap_or_default() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::substream;
    use crate::quantization::Resolution;

    #[test]
    fn ideal_chain_reaches_nominal_snr() {
        let cfg = SystemConfig::from_snr(128, 16, 1.0, 1.0, Resolution::Ideal, Resolution::Ideal).unwrap();
        let out = simulate_trial(&cfg, SimMode::BussgangLinear, 4000, &mut substream(1, 0)).unwrap();
        let mean = out.siqnr.iter().sum::<f64>() / 16.0;
        assert!((mean / 7.0 - 1.0).abs() < 0.05, "{mean}");
        assert_eq!(out.received.as_ref().unwrap().shape(), (4000, 16));
    }

    #[test]
    fn estimator_recovers_known_ratio() {
        let mut rng = substream(2, 0);
        let s = gaussian_matrix(200_000, 1, 1.0, &mut rng);
        let w = gaussian_matrix(200_000, 1, 1.0, &mut rng);
        let g = Complex64::new(0.3, -1.1);
        let y = &s * g + &w * Complex64::new(0.5, 0.0);
        let est = estimate_siqnr(&s, &y)[0];
        let truth = g.norm_sqr() / 0.25;
        assert!((est / truth - 1.0).abs() < 0.02, "{est} vs {truth}");
    }

    #[test]
    fn analytic_mode_matches_term_ratio() {
        let cfg = SystemConfig::from_snr(64, 8, 1.0, 10.0, Resolution::Bits(3), Resolution::Bits(4)).unwrap();
        let out = simulate_trial(&cfg, SimMode::PerTermAnalytic, 0, &mut substream(3, 0)).unwrap();
        assert!(out.received.is_none());
        assert_eq!(out.siqnr.len(), 8);
        assert!(out.siqnr.iter().all(|g| *g > 0.0 && g.is_finite()));
    }

    #[test]
    fn linear_mode_converges_to_term_ratio_for_same_channel() {
        let cfg = SystemConfig::from_snr(64, 8, 1.0, 10.0, Resolution::Bits(2), Resolution::Bits(3)).unwrap();
        let lin = simulate_trial(&cfg, SimMode::BussgangLinear, 100_000, &mut substream(4, 0)).unwrap();
        let exact = simulate_trial(&cfg, SimMode::PerTermAnalytic, 0, &mut substream(4, 0)).unwrap();
        for (a, b) in lin.siqnr.iter().zip(&exact.siqnr) {
            assert!((a / b - 1.0).abs() < 0.03, "{a} vs {b}");
        }
    }

    #[test]
    fn too_few_symbols_rejected() {
        let cfg = SystemConfig::from_snr(8, 2, 1.0, 1.0, Resolution::Ideal, Resolution::Ideal).unwrap();
        assert!(TrialRunner::new(&cfg, SimMode::TrueQuantizer, 1).is_err());
    }
}
