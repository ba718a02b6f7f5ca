//! Scalar quantization of Gaussian sources and the converter models built
//! on it.
//!
//! Two views of a finite-resolution converter live here. The *true*
//! converter ([`apply_dac`], [`apply_adc`]) quantizes the real and imaginary
//! parts of a sample stream with a Lloyd-Max codebook. The *linear* model
//! ([`bussgang_dac`], [`bussgang_adc`]) replaces it by a scalar gain plus
//! independent Gaussian distortion of matched power.

mod bussgang;
mod converter;
mod lloyd_max;

use std::fmt;
use std::str::FromStr;

pub use bussgang::{bussgang_adc, bussgang_dac, BussgangLinearModel};
pub use converter::{apply_adc, apply_dac, quantize_stream, Converter};
pub use lloyd_max::{cached_codebook, design_lloyd_max, quantize_real, QuantizerCodebook, MAX_DESIGN_BITS};

/// Distortion factors of the MSE-optimal quantizer for a unit-variance
/// Gaussian, for 1 through 8 bits.
pub const DISTORTION_TABLE: [f64; 8] = [
    0.3634, 0.1175, 0.03454, 0.009497, 0.002499, 0.0006642, 0.0001660, 0.00004151,
];

/// Converter resolution: a finite bit depth or an ideal (unquantized) path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolution {
    Bits(u32),
    Ideal,
}

impl Resolution {
    pub fn bits(self) -> Option<u32> {
        match self {
            Resolution::Bits(b) => Some(b),
            Resolution::Ideal => None,
        }
    }

    pub fn is_ideal(self) -> bool {
        matches!(self, Resolution::Ideal)
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Resolution::Bits(b) => write!(f, "{b}"),
            Resolution::Ideal => f.write_str("inf"),
        }
    }
}

impl FromStr for Resolution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "ideal" | "∞" => Ok(Resolution::Ideal),
            _ => match t.parse::<u32>() {
                Ok(0) => Err("resolution must be at least 1 bit".to_string()),
                Ok(b) => Ok(Resolution::Bits(b)),
                Err(_) => Err(format!("invalid resolution `{t}` (expected bits or `inf`)")),
            },
        }
    }
}

impl From<u32> for Resolution {
    fn from(b: u32) -> Self {
        Resolution::Bits(b)
    }
}

/// Distortion factor used by the closed-form analysis: tabulated for
/// 1..=8 bits, high-resolution approximation above, zero when ideal.
pub fn distortion_factor(res: Resolution) -> f64 {
    match res {
        Resolution::Ideal => 0.0,
        Resolution::Bits(b @ 1..=8) => DISTORTION_TABLE[b as usize - 1],
        Resolution::Bits(b) => distortion_factor_approx(b),
    }
}

/// High-resolution approximation `(π√3/2)·2^(−2b)`.
pub fn distortion_factor_approx(bits: u32) -> f64 {
    std::f64::consts::PI * 3f64.sqrt() / 2.0 * 2f64.powi(-2 * bits as i32)
}
