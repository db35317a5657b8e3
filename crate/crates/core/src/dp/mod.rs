//! ε-differentially private release of feature time series.
//!
//! Each (participant, feature) vector `p` of length at most `t_max` is released
//! through an exponential mechanism whose utility is the L1 distance to `p`.
//! With feature range `δ_i`, the L1 sensitivity is bounded by `t_max · δ_i`, so
//! the mechanism samples with weight `exp(-λ_i · Σ_j |p_j - r_j|)` where
//!
//! ```text
//! λ_i = ε_i / (2 · t_max · δ_i)
//! ```
//!
//! Sampling draws one scalar `y ~ Exp(rate λ_i)` and spreads `ln(y) / λ_i`
//! evenly over the vector: `r_j = p_j ± ln(y) / (λ_i · t_max)`, with an
//! independent uniform sign per element. Every element of a vector therefore
//! moves by the same magnitude. `ln(y)` is negative whenever `y < 1`; the value
//! is used as is.
//!
//! Features are sanitized independently, so releasing all of them costs
//! `Σ ε_i` by sequential composition. Subsampling each series to one value per
//! block of `w` windows before sanitizing shrinks `t_max`, and with it the
//! sensitivity, by a factor of `w`.

mod mechanism;
mod range;
mod receipt;
mod subsample;

pub use mechanism::{
    lambda, sanitize_dataset, sanitize_series, sanitize_series_with_draws, FixedNoise, NoiseDraw, NoiseSource,
    RngNoise, Sanitizer, SanitizerParams,
};
pub use range::{estimate_ranges, estimate_ranges_over, FeatureRange};
pub use receipt::{PrivacyReceipt, RangeSource};
pub use subsample::{subsample, subsample_column, subsampled_len};

#[derive(Debug, thiserror::Error)]
pub enum DpError {
    #[error("dataset has no series")]
    EmptyDataset,
    #[error("epsilon must be finite and > 0 (feature {feature}: {value})")]
    InvalidEpsilon { feature: usize, value: f64 },
    #[error("subsampling window must be at least 1")]
    InvalidWindow,
    #[error("t_max {t_max} is smaller than a series of length {len}")]
    TMaxTooSmall { t_max: usize, len: usize },
    #[error("expected {expected} features, got {actual}")]
    WidthMismatch { expected: usize, actual: usize },
    #[error("receipt line {line}: {message}")]
    Receipt { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
