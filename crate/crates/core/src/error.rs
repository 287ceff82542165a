//! Error taxonomy shared by the whole crate.
//!
//! Errors fall into two exit-relevant categories: *domain* errors (invalid
//! inputs, unsupported parameter combinations — CLI exit code 2) and
//! *precision* errors (a configurable-precision computation failed its
//! self-verification — CLI exit code 3). [`Error::is_precision`] exposes the
//! split.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All error conditions surfaced by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A spectrum was required to be nonempty.
    #[error("spectrum must contain at least one eigenvalue")]
    EmptySpectrum,

    /// Eigenvalues must be finite reals.
    #[error("spectrum contains a non-finite value: {0}")]
    NonFiniteValue(f64),

    /// Invalid measure parameters (weights, endpoints, radius, ...).
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    /// The spacing constant of the gap condition must be positive.
    #[error("spacing constant must be positive, got {0}")]
    NonPositiveSpacing(f64),

    /// Trim step outside `1..=N`.
    #[error("trim step {step} out of range for dimension {dim}")]
    TrimOutOfRange { step: usize, dim: usize },

    /// Two spectra that must share a dimension do not.
    #[error("dimension mismatch: left spectrum has {left}, right has {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// Hilbert transform requested at a point inside the support.
    #[error(
        "evaluation point {z} lies inside the support [{support_min}, {support_max}]; \
         principal values are not supported"
    )]
    InsideSupport {
        z: f64,
        support_min: f64,
        support_max: f64,
    },

    /// R-transform requested outside the band of attainable Hilbert values.
    #[error(
        "t = {t} is outside the open band ({h_min}, {h_max}) of Hilbert-transform \
         values; use the branch function v(t) for saturated arguments"
    )]
    OutOfBand { t: f64, h_min: f64, h_max: f64 },

    /// A determinant-formula evaluation hit (near-)repeated eigenvalues.
    #[error(
        "degenerate spectrum: relative eigenvalue gap {gap:.3e} is at or below \
         {threshold:.3e}; use the confluent evaluator"
    )]
    Degenerate { gap: f64, threshold: f64 },

    /// A configurable-precision computation failed its verification pass.
    #[error(
        "insufficient precision: {bits}-bit and {verify_bits}-bit evaluations \
         disagree by {residual:.3e} in the log value; retry with more precision bits"
    )]
    Precision {
        bits: u32,
        verify_bits: u32,
        residual: f64,
    },

    /// Symplectic (β = 4) sampling needs an even matrix dimension.
    #[error("symplectic sampling requires an even dimension, got {0}")]
    OddSymplecticDimension(usize),

    /// Exact evaluation is only available for β = 2.
    #[error("method '{method}' is unsupported for beta = {beta}")]
    UnsupportedMethod { method: String, beta: u8 },

    /// The rank of the small-rank matrix must be positive.
    #[error("rank must be positive (the perturbation matrix is identically zero)")]
    ZeroRank,

    /// Sandwich bounds require a nonnegative perturbation spectrum.
    #[error(
        "sandwich bounds require nonnegative eigenvalues in the perturbation \
         spectrum (found {0}); translate the spectrum first"
    )]
    NegativePerturbation(f64),

    /// Dilute-rank study asked for a rank below one eigenvalue.
    #[error("dilution a = {a} at dimension n = {n} yields rank below 1; increase a or n")]
    DiluteResolution { a: f64, n: usize },

    /// β must be one of 1, 2, 4.
    #[error("beta must be 1, 2 or 4, got {0}")]
    InvalidBeta(u8),

    /// Monte Carlo estimation needs at least two samples.
    #[error("Monte Carlo estimation needs at least 2 samples, got {0}")]
    TooFewSamples(usize),

    /// Generic precondition violation with context.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors that signal insufficient numeric precision rather
    /// than an invalid request. The CLI maps these to exit code 3 and all
    /// other errors to exit code 2.
    pub fn is_precision(&self) -> bool {
        matches!(self, Error::Precision { .. })
    }

    /// Short machine-readable kind tag used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptySpectrum => "empty_spectrum",
            Error::NonFiniteValue(_) => "non_finite_value",
            Error::InvalidMeasure(_) => "invalid_measure",
            Error::NonPositiveSpacing(_) => "non_positive_spacing",
            Error::TrimOutOfRange { .. } => "trim_out_of_range",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InsideSupport { .. } => "inside_support",
            Error::OutOfBand { .. } => "out_of_band",
            Error::Degenerate { .. } => "degenerate_spectrum",
            Error::Precision { .. } => "insufficient_precision",
            Error::OddSymplecticDimension(_) => "odd_symplectic_dimension",
            Error::UnsupportedMethod { .. } => "unsupported_method",
            Error::ZeroRank => "zero_rank",
            Error::NegativePerturbation(_) => "negative_perturbation",
            Error::DiluteResolution { .. } => "dilute_resolution",
            Error::InvalidBeta(_) => "invalid_beta",
            Error::TooFewSamples(_) => "too_few_samples",
            Error::InvalidArgument(_) => "invalid_argument",
        }
    }
}
