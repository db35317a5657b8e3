//! Differentially private release of eye-movement feature time series and
//! evaluation of the resulting privacy/utility trade-off.
//!
//! The pipeline is: raw gaze CSV ([`ingest`]) → sliding-window features
//! ([`features`]) → per-feature exponential-mechanism sanitization ([`dp`]) →
//! SVM-based attack and utility tasks ([`learn`], [`experiments`]).
//! [`synth`] generates feature datasets with planted signals for testing.

pub mod cli;
pub mod dp;
pub mod experiments;
pub mod features;
pub mod ingest;
pub mod labels;
pub mod learn;
pub mod seed;
pub mod stats;
pub mod synth;
