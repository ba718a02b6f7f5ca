//! Random generation of channels, data symbols and thermal noise.
//!
//! Every random quantity is drawn from an explicit [`SimRng`] handle. Monte
//! Carlo trials obtain their handle from [`substream`], which maps
//! `(master_seed, trial_index)` to an independent ChaCha stream, so results
//! do not depend on how trials are scheduled across workers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::quantization::Resolution;
use crate::{CMatrix, Complex64, Error, Result};

/// Seeded random stream used for every draw in the crate.
pub type SimRng = ChaCha8Rng;

/// Independent substream for trial `index` of a run seeded with `master_seed`.
pub fn substream(master_seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

/// Dimensions, powers and converter resolutions of one downlink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    n_antennas: usize,
    n_users: usize,
    total_power: f64,
    noise_power: f64,
    dac: Resolution,
    adc: Resolution,
}

impl SystemConfig {
    pub fn new(
        n_antennas: usize,
        n_users: usize,
        total_power: f64,
        noise_power: f64,
        dac: Resolution,
        adc: Resolution,
    ) -> Result<Self> {
        if n_users == 0 || n_antennas == 0 {
            return Err(Error::InvalidConfig(
                "antenna and user counts must be positive".into(),
            ));
        }
        if n_users >= n_antennas {
            return Err(Error::InvalidConfig(format!(
                "user load must be below one (M = {n_users}, N = {n_antennas})"
            )));
        }
        if !(total_power.is_finite() && total_power > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "total power must be positive and finite, got {total_power}"
            )));
        }
        if !(noise_power.is_finite() && noise_power > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "noise power must be positive and finite, got {noise_power}"
            )));
        }
        for r in [dac, adc] {
            if r == Resolution::Bits(0) {
                return Err(Error::InvalidConfig("converter resolution must be at least 1 bit".into()));
            }
        }
        Ok(Self { n_antennas, n_users, total_power, noise_power, dac, adc })
    }

    /// Configuration with the given linear SNR `P / σn²`, keeping `P`.
    pub fn from_snr(
        n_antennas: usize,
        n_users: usize,
        total_power: f64,
        snr: f64,
        dac: Resolution,
        adc: Resolution,
    ) -> Result<Self> {
        Self::new(n_antennas, n_users, total_power, total_power / snr, dac, adc)
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    /// User load ratio `M / N`.
    pub fn beta(&self) -> f64 {
        self.n_users as f64 / self.n_antennas as f64
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    /// Linear SNR `P / σn²`.
    pub fn snr(&self) -> f64 {
        self.total_power / self.noise_power
    }

    pub fn dac(&self) -> Resolution {
        self.dac
    }

    pub fn adc(&self) -> Resolution {
        self.adc
    }

    pub fn with_noise_power(mut self, noise_power: f64) -> Result<Self> {
        self.noise_power = noise_power;
        Self::new(self.n_antennas, self.n_users, self.total_power, noise_power, self.dac, self.adc)
    }

    pub fn with_converters(mut self, dac: Resolution, adc: Resolution) -> Self {
        self.dac = dac;
        self.adc = adc;
        self
    }
}

/// One `M × N` Rayleigh channel draw. Row `k` is user `k`'s channel `h_kᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: CMatrix,
}

impl ChannelRealization {
    pub fn new(h: CMatrix) -> Self {
        Self { h }
    }

    pub fn n_users(&self) -> usize {
        self.h.nrows()
    }

    pub fn n_antennas(&self) -> usize {
        self.h.ncols()
    }
}

/// What a [`SignalVector`] carries in the downlink chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalRole {
    Symbols,
    Precoded,
    DacOutput,
    Received,
    AdcOutput,
    Noise,
    DacNoise,
    AdcNoise,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector {
    pub role: SignalRole,
    pub values: Vec<Complex64>,
}

impl SignalVector {
    pub fn new(role: SignalRole, values: Vec<Complex64>) -> Self {
        Self { role, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Squared Euclidean norm.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Fill `out` with i.i.d. `CN(0, variance)` samples.
pub fn fill_complex_gaussian<R: Rng + ?Sized>(out: &mut [Complex64], variance: f64, rng: &mut R) {
    for v in out.iter_mut() {
        *v = complex_gaussian(rng, variance);
    }
}

/// `rows × cols` matrix of i.i.d. `CN(0, variance)` entries, drawn in
/// column-major order.
pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, variance: f64, rng: &mut R) -> CMatrix {
    let mut m = CMatrix::zeros(rows, cols);
    fill_complex_gaussian(m.as_mut_slice(), variance, rng);
    m
}

/// Draw an `M × N` channel with i.i.d. `CN(0, 1)` entries.
pub fn generate_channel<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> ChannelRealization {
    ChannelRealization::new(gaussian_matrix(cfg.n_users, cfg.n_antennas, 1.0, rng))
}

/// Unit-variance, uncorrelated complex Gaussian data symbols.
pub fn sample_symbols<R: Rng + ?Sized>(n_users: usize, rng: &mut R) -> SignalVector {
    let mut values = vec![Complex64::default(); n_users];
    fill_complex_gaussian(&mut values, 1.0, rng);
    SignalVector::new(SignalRole::Symbols, values)
}

/// Thermal noise with per-entry variance `noise_power`. Zero power yields
/// an all-zero vector without consuming randomness.
pub fn sample_noise<R: Rng + ?Sized>(n: usize, noise_power: f64, rng: &mut R) -> SignalVector {
    assert!(noise_power >= 0.0, "noise power must be non-negative");
    let mut values = vec![Complex64::default(); n];
    if noise_power > 0.0 {
        fill_complex_gaussian(&mut values, noise_power, rng);
    }
    SignalVector::new(SignalRole::Noise, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: usize, m: usize) -> SystemConfig {
        SystemConfig::new(n, m, 1.0, 1.0, Resolution::Ideal, Resolution::Ideal).unwrap()
    }

    #[test]
    fn config_rejects_overloaded_or_degenerate_systems() {
        let ideal = Resolution::Ideal;
        assert!(SystemConfig::new(4, 4, 1.0, 1.0, ideal, ideal).is_err());
        assert!(SystemConfig::new(4, 0, 1.0, 1.0, ideal, ideal).is_err());
        assert!(SystemConfig::new(4, 2, 0.0, 1.0, ideal, ideal).is_err());
        assert!(SystemConfig::new(4, 2, 1.0, 0.0, ideal, ideal).is_err());
        assert!(SystemConfig::new(4, 2, 1.0, 1.0, Resolution::Bits(0), ideal).is_err());
        let c = SystemConfig::from_snr(128, 16, 2.0, 10.0, ideal, ideal).unwrap();
        assert!((c.snr() - 10.0).abs() < 1e-12);
        assert!((c.noise_power() - 0.2).abs() < 1e-12);
        assert_eq!(c.beta() * 128.0, 16.0);
    }

    #[test]
    fn channel_entries_have_unit_variance() {
        let c = cfg(4, 2);
        let mut rng = substream(11, 0);
        let mut acc = 0.0;
        let mut re2 = 0.0;
        let mut count = 0usize;
        for _ in 0..125_000 {
            let h = generate_channel(&c, &mut rng);
            for v in h.h.iter() {
                acc += v.norm_sqr();
                re2 += v.re * v.re;
                count += 1;
            }
        }
        let var = acc / count as f64;
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
        assert!((re2 / count as f64 - 0.5).abs() < 0.01);
    }

    #[test]
    fn same_seed_same_channel() {
        let c = cfg(8, 3);
        let a = generate_channel(&c, &mut substream(5, 17));
        let b = generate_channel(&c, &mut substream(5, 17));
        let other = generate_channel(&c, &mut substream(5, 18));
        assert_eq!(a, b);
        assert_ne!(a, other);
    }

    #[test]
    fn substreams_ignore_sibling_consumption() {
        let c = cfg(8, 3);
        let mut r0 = substream(9, 0);
        for _ in 0..100 {
            generate_channel(&c, &mut r0);
        }
        let a = generate_channel(&c, &mut substream(9, 1));
        let b = generate_channel(&c, &mut substream(9, 1));
        assert_eq!(a, b);
    }

    #[test]
    fn row_energy_concentrates() {
        let c = cfg(1024, 8);
        let mut rng = substream(3, 0);
        let mut total = 0.0;
        let trials = 50;
        for _ in 0..trials {
            let h = generate_channel(&c, &mut rng);
            for k in 0..8 {
                total += h.h.row(k).iter().map(|v| v.norm_sqr()).sum::<f64>() / 1024.0;
            }
        }
        let mean = total / (trials * 8) as f64;
        assert!((mean - 1.0).abs() < 0.005, "mean {mean}");
    }

    #[test]
    fn symbols_are_unit_power_and_uncorrelated() {
        let mut rng = substream(21, 0);
        let n = 1_000_000;
        let mut p1 = 0.0;
        let mut cross = Complex64::default();
        for _ in 0..n {
            let s = sample_symbols(2, &mut rng);
            p1 += s.values[0].norm_sqr();
            cross += s.values[0] * s.values[1].conj();
        }
        let var = p1 / n as f64;
        let xc = (cross / n as f64).norm();
        assert!((var - 1.0).abs() < 0.01, "var {var}");
        assert!(xc < 0.01, "cross {xc}");

        let a = sample_symbols(4, &mut substream(1, 2));
        let b = sample_symbols(4, &mut substream(1, 2));
        assert_eq!(a, b);
        assert_eq!(a.role, SignalRole::Symbols);
    }

    #[test]
    fn noise_variance_and_zero_limit() {
        let mut rng = substream(8, 0);
        let z = sample_noise(5, 0.0, &mut rng);
        assert!(z.values.iter().all(|v| *v == Complex64::default()));

        let n = sample_noise(1_000_000, 2.0, &mut rng);
        let var = n.energy() / n.len() as f64;
        assert!((var - 2.0).abs() < 0.02, "var {var}");

        let a = sample_noise(3, 0.5, &mut substream(4, 4));
        let b = sample_noise(3, 0.5, &mut substream(4, 4));
        assert_eq!(a, b);
    }
}
