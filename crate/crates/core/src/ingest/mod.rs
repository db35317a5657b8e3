//! Raw gaze recordings and eye-movement event detection.

mod detect;
mod parse;

pub use detect::{detect_events, Blink, DetectionConfig, EventSequence, Fixation, PupilPoint, Saccade};
pub use parse::{parse_gaze_csv, write_gaze_csv};

use crate::labels::{Document, Gender};

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("missing column `{column}` (row {row})")]
    MissingColumn { row: usize, column: String },
    #[error("timestamp decreases at row {row}")]
    NonMonotonicTimestamp { row: usize },
    #[error("non-finite value in column `{column}` at row {row}")]
    NonFiniteValue { row: usize, column: String },
    #[error("value out of range in column `{column}` at row {row}")]
    OutOfRange { row: usize, column: String },
    #[error("malformed row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("recording contains no samples")]
    EmptyRecording,
    #[error("missing metadata `# {0}=...`")]
    MissingMetadata(&'static str),
    #[error("invalid metadata: {0}")]
    InvalidMetadata(String),
    #[error("recording spans {duration} s, shorter than the minimum fixation duration")]
    DegenerateRecording { duration: f64 },
    #[error("invalid detection config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One eye-tracker sample. Positions are in normalized screen units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// Pupil diameter in pixels.
    pub pupil: f64,
    pub confidence: f64,
}

/// A single participant reading a single document.
#[derive(Debug, Clone, PartialEq)]
pub struct GazeRecording {
    pub participant_id: String,
    pub document: Document,
    pub gender: Gender,
    samples: Vec<GazeSample>,
}

impl GazeRecording {
    /// Validates sample invariants. Row numbers in errors are 1-based sample indices.
    pub fn new(
        participant_id: impl Into<String>,
        document: Document,
        gender: Gender,
        samples: Vec<GazeSample>,
    ) -> Result<Self, IngestError> {
        if samples.is_empty() {
            return Err(IngestError::EmptyRecording);
        }
        let mut prev = f64::NEG_INFINITY;
        for (i, s) in samples.iter().enumerate() {
            let row = i + 1;
            for (column, v) in [
                ("t", s.t),
                ("x", s.x),
                ("y", s.y),
                ("pupil", s.pupil),
                ("confidence", s.confidence),
            ] {
                if !v.is_finite() {
                    return Err(IngestError::NonFiniteValue { row, column: column.into() });
                }
            }
            if s.t < 0.0 {
                return Err(IngestError::OutOfRange { row, column: "t".into() });
            }
            if !(0.0..=1.0).contains(&s.confidence) {
                return Err(IngestError::OutOfRange { row, column: "confidence".into() });
            }
            if s.t < prev {
                return Err(IngestError::NonMonotonicTimestamp { row });
            }
            prev = s.t;
        }
        let duration = samples[samples.len() - 1].t - samples[0].t;
        if duration <= 0.0 {
            return Err(IngestError::DegenerateRecording { duration });
        }
        Ok(Self {
            participant_id: participant_id.into(),
            document,
            gender,
            samples,
        })
    }

    pub fn samples(&self) -> &[GazeSample] {
        &self.samples
    }

    pub fn start(&self) -> f64 {
        self.samples[0].t
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].t - self.samples[0].t
    }
}
