//! Sliding-window feature extraction and the feature dataset model.

mod catalogue;
mod extract;
mod io;
mod wordbook;

pub use catalogue::{default_catalogue, Extractor, FeatureCatalogue, FeatureEntry, RangeHint};
pub use extract::{extract_features, window_count, DEFAULT_STEP, DEFAULT_WINDOW};
pub use io::{read_feature_csv, write_feature_csv};
pub use wordbook::{build_wordbook, DirectionAlphabet};

use ndarray::Array2;

use crate::labels::{Document, Gender};

#[derive(Debug, thiserror::Error)]
pub enum FeatureError {
    #[error("recording spans {duration} s, shorter than the {window} s window")]
    RecordingTooShort { duration: f64, window: f64 },
    #[error("invalid windowing: {0}")]
    InvalidWindowing(String),
    #[error("invalid catalogue: {0}")]
    InvalidCatalogue(String),
    #[error("feature `{0}` cannot be computed from eye-movement events")]
    NotExtractable(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("feature CSV line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Who produced a series and what they were reading.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeriesLabel {
    pub participant: String,
    pub gender: Gender,
    pub document: Document,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Windowing {
    /// Seconds.
    pub window: f64,
    /// Seconds.
    pub step: f64,
}

/// Feature vectors of one participant reading one document: row `j` holds
/// window `j`, columns follow the catalogue order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSeries {
    pub label: SeriesLabel,
    pub values: Array2<f64>,
    /// `None` when the series was not produced by [`extract_features`].
    pub windowing: Option<Windowing>,
}

impl FeatureSeries {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDataset {
    pub catalogue: FeatureCatalogue,
    pub series: Vec<FeatureSeries>,
}

impl FeatureDataset {
    /// Checks that every series matches the catalogue width, has at least one
    /// window, and holds only finite values.
    pub fn new(catalogue: FeatureCatalogue, series: Vec<FeatureSeries>) -> Result<Self, FeatureError> {
        let m = catalogue.len();
        for s in &series {
            let who = format!("{}/{}", s.label.participant, s.label.document);
            if s.values.ncols() != m {
                return Err(FeatureError::InvalidDataset(format!(
                    "series {who} has {} columns, catalogue has {m}",
                    s.values.ncols()
                )));
            }
            if s.values.nrows() == 0 {
                return Err(FeatureError::InvalidDataset(format!("series {who} has no windows")));
            }
            if s.values.iter().any(|v| !v.is_finite()) {
                return Err(FeatureError::InvalidDataset(format!("series {who} has non-finite values")));
            }
        }
        let mut keys: Vec<(&str, Document)> =
            series.iter().map(|s| (s.label.participant.as_str(), s.label.document)).collect();
        keys.sort();
        if keys.windows(2).any(|w| w[0] == w[1]) {
            return Err(FeatureError::InvalidDataset("duplicate (participant, document) series".into()));
        }
        for s in &series {
            let other = series.iter().find(|o| o.label.participant == s.label.participant).unwrap();
            if other.label.gender != s.label.gender {
                return Err(FeatureError::InvalidDataset(format!(
                    "participant {} has inconsistent gender labels",
                    s.label.participant
                )));
            }
        }
        Ok(Self { catalogue, series })
    }

    pub fn m(&self) -> usize {
        self.catalogue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    /// Distinct participant ids in order of first appearance.
    pub fn participants(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for s in &self.series {
            if !out.contains(&s.label.participant.as_str()) {
                out.push(&s.label.participant);
            }
        }
        out
    }
}
