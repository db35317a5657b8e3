use ndarray::{Array1, Array2, ArrayView2, Axis};

use super::LearnError;

/// Per-column mean and population standard deviation of the training rows.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizationParams {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

pub fn fit_standardizer(x: ArrayView2<'_, f64>) -> Result<StandardizationParams, LearnError> {
    if x.nrows() == 0 {
        return Err(LearnError::EmptyMatrix);
    }
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    let std = x.std_axis(Axis(0), 0.0);
    Ok(StandardizationParams { mean, std })
}

impl StandardizationParams {
    /// `(x - mean) / std`; zero-variance columns map to 0.
    pub fn apply(&self, x: ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.rows_mut() {
            for ((v, &m), &s) in row.iter_mut().zip(&self.mean).zip(&self.std) {
                *v = if s > 0.0 { (*v - m) / s } else { 0.0 };
            }
        }
        out
    }
}
