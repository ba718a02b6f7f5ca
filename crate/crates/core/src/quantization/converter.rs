use crate::channel::{SignalRole, SignalVector};
use crate::quantization::{cached_codebook, quantize_real, QuantizerCodebook, Resolution};
use crate::{Complex64, Error, Result};

/// A converter as applied to sample streams: ideal passthrough or a
/// Lloyd-Max codebook.
#[derive(Debug, Clone, PartialEq)]
pub enum Converter {
    Ideal,
    Quantized(QuantizerCodebook),
}

impl Converter {
    /// Lloyd-Max codebook for a finite resolution (designed once per
    /// process and cached).
    pub fn design(res: Resolution) -> Self {
        match res {
            Resolution::Ideal => Converter::Ideal,
            Resolution::Bits(b) => Converter::Quantized(cached_codebook(b).clone()),
        }
    }

    pub fn codebook(&self) -> Option<&QuantizerCodebook> {
        match self {
            Converter::Ideal => None,
            Converter::Quantized(cb) => Some(cb),
        }
    }

    /// Distortion factor of the designed codebook (zero when ideal).
    pub fn rho(&self) -> f64 {
        self.codebook().map_or(0.0, QuantizerCodebook::rho)
    }
}

fn rms(values: &[Complex64], part: impl Fn(&Complex64) -> f64) -> f64 {
    let ss: f64 = values.iter().map(|v| part(v).powi(2)).sum();
    (ss / values.len() as f64).sqrt()
}

/// Quantize a complex stream in place.
///
/// The real and imaginary parts are each divided by their own RMS over the
/// whole slice, mapped through the unit-variance codebook, rescaled by that
/// RMS and finally multiplied by `post_gain`. A part with zero power stays
/// zero.
pub fn quantize_stream(values: &mut [Complex64], cb: &QuantizerCodebook, post_gain: f64) -> Result<()> {
    if values.is_empty() {
        return Err(Error::ZeroPowerInput);
    }
    let rms_re = rms(values, |v| v.re);
    let rms_im = rms(values, |v| v.im);
    if rms_re * rms_re + rms_im * rms_im < f64::MIN_POSITIVE || !(rms_re + rms_im).is_finite() {
        return Err(Error::ZeroPowerInput);
    }
    let q = |x: f64, s: f64| if s > 0.0 { s * quantize_real(x / s, cb) * post_gain } else { 0.0 };
    for v in values.iter_mut() {
        *v = Complex64::new(q(v.re, rms_re), q(v.im, rms_im));
    }
    Ok(())
}

/// DAC quantization of a precoded vector. The output is scaled by
/// `1/√(1 − ρ)` so that its average power equals the input's.
pub fn apply_dac(x: &SignalVector, dac: &Converter) -> Result<SignalVector> {
    let mut values = x.values.clone();
    if let Converter::Quantized(cb) = dac {
        quantize_stream(&mut values, cb, 1.0 / (1.0 - cb.rho()).sqrt())?;
    }
    Ok(SignalVector::new(SignalRole::DacOutput, values))
}

/// ADC quantization of a received vector, with no power-restoring gain.
pub fn apply_adc(y: &SignalVector, adc: &Converter) -> Result<SignalVector> {
    let mut values = y.values.clone();
    if let Converter::Quantized(cb) = adc {
        quantize_stream(&mut values, cb, 1.0)?;
    }
    Ok(SignalVector::new(SignalRole::AdcOutput, values))
}
