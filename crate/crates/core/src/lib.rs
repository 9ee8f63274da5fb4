//! Validated numerics for heteroclinic connections in the one-dimensional
//! Ohta-Kawasaki diblock-copolymer model.
//!
//! The crate builds unstable and stable isolating blocks with verified cone
//! conditions for the spectral (cosine-Fourier) form of the equation, and
//! rigorously integrates a face of the unstable block forward in time until
//! it is provably inside the stable block's basin of attraction. All
//! verified computation runs on directed-rounding interval arithmetic.

pub mod blocks;
pub mod config;
pub mod conv;
pub mod fft;
pub mod integrator;
pub mod interval;
pub mod jets;
pub mod linalg;
pub mod okvf;
pub mod pipeline;
pub mod profile;
pub mod scb;
pub mod transcend;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("projection length {n} exceeds explicit modes {m}")]
    Projection { n: usize, m: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("mode {0} is not dissipative; enlarge the explicit range")]
    Dissipativity(usize),
    #[error("rough enclosure failed to validate at step {step}: {why}")]
    RoughEnclosure { step: usize, why: String },
    #[error("cone condition fails at mode {index}: margin {margin}")]
    ConeCondition { index: usize, margin: f64 },
    #[error("isolation fails at mode {index} ({side} face)")]
    Isolation { index: usize, side: &'static str },
    #[error("fixed-point iteration did not converge (residual {residual})")]
    FixedPoint { residual: f64 },
    #[error("matrix is singular or too ill-conditioned")]
    Singular,
    #[error("{0}")]
    Other(String),
}
