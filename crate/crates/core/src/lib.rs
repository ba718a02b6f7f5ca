//! Simulation and closed-form analysis of multiuser massive-MIMO downlinks
//! with finite-resolution DACs at the base station and finite-resolution
//! ADCs at the users.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] draws Rayleigh channels, symbols and noise from seeded,
//!   per-trial substreams.
//! * [`precoding`] builds the power-normalised zero-forcing precoder.
//! * [`quantization`] designs Lloyd-Max codebooks, applies them to complex
//!   streams, and provides the Bussgang linear models of both converters.
//! * [`analysis`] holds the large-system SIQNR and rate expressions, the
//!   rate-loss limits and the converter-resolution planners.
//! * [`montecarlo`] runs the end-to-end downlink and the per-term
//!   decomposition over many channel realizations.
//! * [`cli`] is the command-line front end (`rate-sweep`, `contour`,
//!   `plan`, `validate`).

pub mod analysis;
pub mod channel;
pub mod cli;
mod error;
pub mod montecarlo;
mod numfmt;
pub mod precoding;
pub mod quantization;

pub use error::{Error, Result};

pub use num_complex::Complex64;

/// Complex matrix type used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
