//! Classification stack used by all evaluation tasks.

mod balance;
mod kernel;
mod metrics;
mod multiclass;
mod standardize;
mod svm;

pub use balance::balance_classes;
pub use kernel::{gram_matrix, rbf, scale_gamma};
pub use metrics::{accuracy, majority_vote, vote_groups};
pub use multiclass::{train_multiclass, MulticlassModel};
pub use standardize::{fit_standardizer, StandardizationParams};
pub use svm::{solve_smo, train_svm, SmoSolution, SvmModel, SvmParams};

#[derive(Debug, thiserror::Error)]
pub enum LearnError {
    #[error("input matrix has no rows")]
    EmptyMatrix,
    #[error("class {0} has no samples")]
    MissingClass(usize),
    #[error("training data contains a single class")]
    SingleClassInput,
    #[error("SMO did not converge within {0} iterations")]
    IterationLimit(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("cannot vote on an empty group")]
    EmptyGroup,
    #[error("binary labels must be +1 or -1, found {0}")]
    InvalidLabel(f64),
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
}
