//! ε sweeps over the three evaluation tasks.
//!
//! * `gender`: binary SVM, leave-one-participant-out, one vote per held-out
//!   participant.
//! * `document`: 3-class SVM, leave-one-participant-out, one vote per
//!   held-out (participant, document) series.
//! * `reid`: one class per participant, trained on the clean first half of
//!   every series and tested on the sanitized second halves, one vote per
//!   (participant, document).
//!
//! Every grid cell draws its randomness from a seed derived from
//! `(task, ε, repeat, fold)`, so results do not depend on the thread count.

mod protocol;
mod results;
mod tasks;

use std::fmt;
use std::str::FromStr;

use crate::dp::DpError;
use crate::learn::{LearnError, SvmParams};

pub use protocol::{chance_level, half_split, loocv_folds, Fold};
pub use results::{mean_rows, read_results, write_results, ResultRow, RESULTS_HEADER};
pub use tasks::{reid_halves, run_document, run_gender, run_reid, run_task};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
    #[error("{task} needs {needed}, found {found}")]
    InsufficientParticipants { task: Task, needed: String, found: usize },
    #[error("series {participant}/{document} has {windows} windows, need at least 2")]
    InsufficientWindows { participant: String, document: String, windows: usize },
    #[error("participant {participant} has no {document} series")]
    MissingDocument { participant: String, document: String },
    #[error(transparent)]
    Dp(#[from] DpError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error("results file: {0}")]
    Results(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    Gender,
    Reid,
    Document,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Gender, Task::Reid, Task::Document];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::Gender => "gender",
            Task::Reid => "reid",
            Task::Document => "document",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown task `{s}` (expected gender, reid or document)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gamma {
    /// `1 / (m · mean feature variance)` of the standardized training rows.
    Scale,
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmSettings {
    pub c: f64,
    pub gamma: Gamma,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SvmSettings {
    fn default() -> Self {
        Self { c: 1.0, gamma: Gamma::Scale, tol: 1e-3, max_iter: 100_000 }
    }
}

impl SvmSettings {
    pub(crate) fn params(&self, gamma: f64) -> SvmParams {
        SvmParams { c: self.c, gamma, tol: self.tol, max_iter: self.max_iter }
    }
}

pub const DEFAULT_EPSILONS: [f64; 6] = [100.0, 50.0, 30.0, 20.0, 15.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub tasks: Vec<Task>,
    /// Train gender and document classifiers on sanitized data (true) or on
    /// clean data (false). Re-identification always trains on clean data.
    pub train_noised: bool,
    /// Per-feature ε_i values.
    pub epsilon_list: Vec<f64>,
    pub subsample_window: usize,
    pub repeats: usize,
    pub seed: u64,
    pub svm: SvmSettings,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            tasks: Task::ALL.to_vec(),
            train_noised: true,
            epsilon_list: DEFAULT_EPSILONS.to_vec(),
            subsample_window: 10,
            repeats: 5,
            seed: 0,
            svm: SvmSettings::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(ExperimentError::InvalidConfig(m.to_string()));
        if self.tasks.is_empty() {
            return bad("no tasks selected");
        }
        if self.epsilon_list.is_empty() {
            return bad("epsilon_list is empty");
        }
        if self.epsilon_list.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return bad("epsilon values must be finite and > 0");
        }
        let pairs = || self.epsilon_list.windows(2);
        if !(pairs().all(|w| w[0] > w[1]) || pairs().all(|w| w[0] < w[1])) {
            return bad("epsilon_list must be strictly ascending or strictly descending");
        }
        if self.repeats == 0 {
            return bad("repeats must be >= 1");
        }
        if self.subsample_window == 0 {
            return bad("subsample window must be >= 1");
        }
        if !(self.svm.c > 0.0 && self.svm.c.is_finite()) || !(self.svm.tol > 0.0) {
            return bad("SVM C and tolerance must be > 0");
        }
        if let Gamma::Value(g) = self.svm.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return bad("SVM gamma must be > 0");
            }
        }
        Ok(())
    }
}

/// Runs every configured task and returns the raw rows (task, ε, repeat
/// order) followed by one mean row per (task, ε).
pub fn sweep(ds: &crate::features::FeatureDataset, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut raw = Vec::new();
    for &task in &cfg.tasks {
        raw.extend(run_task(task, ds, cfg)?);
    }
    let means = mean_rows(&raw);
    raw.extend(means);
    Ok(raw)
}
