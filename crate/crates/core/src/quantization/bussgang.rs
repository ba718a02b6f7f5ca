use rand::Rng;

use crate::channel::{complex_gaussian, SignalRole, SignalVector};
use crate::Complex64;

/// Linearized converter: `out = gain · in + d`, with `d` independent
/// circular Gaussian of per-entry variance `noise_scale · E{|in|²}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BussgangLinearModel {
    pub gain: f64,
    pub noise_scale: f64,
}

impl BussgangLinearModel {
    /// Power-preserving DAC model: gain `√(1−ρ)`, distortion `ρ·E{|x|²}`.
    pub fn dac(rho: f64) -> Self {
        check_rho(rho);
        Self { gain: (1.0 - rho).sqrt(), noise_scale: rho }
    }

    /// ADC model: gain `1−ρ`, distortion `ρ(1−ρ)·E{|y|²}`.
    pub fn adc(rho: f64) -> Self {
        check_rho(rho);
        Self { gain: 1.0 - rho, noise_scale: rho * (1.0 - rho) }
    }

    pub fn noise_variance(&self, input_power: f64) -> f64 {
        self.noise_scale * input_power
    }

    /// Apply to a stream whose entries share `input_power`, adding
    /// pre-drawn unit-variance noise `unit_noise` scaled to the model.
    pub fn apply_with_unit_noise(&self, values: &mut [Complex64], input_power: f64, unit_noise: &[Complex64]) {
        debug_assert_eq!(values.len(), unit_noise.len());
        let s = self.noise_variance(input_power).sqrt();
        for (v, w) in values.iter_mut().zip(unit_noise) {
            *v = *v * self.gain + *w * s;
        }
    }

    fn apply<R: Rng + ?Sized>(&self, input: &SignalVector, power: &[f64], role: SignalRole, rng: &mut R) -> SignalVector {
        assert_eq!(input.len(), power.len(), "one power value per entry");
        let values = input
            .values
            .iter()
            .zip(power)
            .map(|(v, &p)| {
                let var = self.noise_variance(p);
                let noise = if var > 0.0 { complex_gaussian(rng, var) } else { Complex64::default() };
                *v * self.gain + noise
            })
            .collect();
        SignalVector::new(role, values)
    }
}

fn check_rho(rho: f64) {
    assert!((0.0..1.0).contains(&rho), "distortion factor must lie in [0, 1), got {rho}");
}

/// `x_q = √(1−ρ)·x + n_DA` with `E{|n_DA,i|²} = ρ·per_entry_power[i]`.
pub fn bussgang_dac<R: Rng + ?Sized>(x: &SignalVector, rho: f64, per_entry_power: &[f64], rng: &mut R) -> SignalVector {
    BussgangLinearModel::dac(rho).apply(x, per_entry_power, SignalRole::DacOutput, rng)
}

/// `y_q = (1−ρ)·y + n_AD` with `E{|n_AD,i|²} = ρ(1−ρ)·per_entry_power[i]`.
pub fn bussgang_adc<R: Rng + ?Sized>(y: &SignalVector, rho: f64, per_entry_power: &[f64], rng: &mut R) -> SignalVector {
    BussgangLinearModel::adc(rho).apply(y, per_entry_power, SignalRole::AdcOutput, rng)
}
