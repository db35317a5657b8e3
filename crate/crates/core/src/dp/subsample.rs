use ndarray::{Array2, ArrayView1};
use rand::Rng;

use super::DpError;
use crate::features::FeatureSeries;

/// `ceil(len / w)`.
pub fn subsampled_len(len: usize, w: usize) -> usize {
    len.div_ceil(w)
}

/// One uniformly chosen element from each consecutive block of `w` values; a
/// trailing partial block contributes one draw from its remainder.
pub fn subsample_column<R: Rng + ?Sized>(column: ArrayView1<'_, f64>, w: usize, rng: &mut R) -> Vec<f64> {
    let n = column.len();
    (0..subsampled_len(n, w))
        .map(|b| {
            let lo = b * w;
            let hi = (lo + w).min(n);
            if hi - lo == 1 {
                column[lo]
            } else {
                column[rng.random_range(lo..hi)]
            }
        })
        .collect()
}

/// Subsamples every feature independently. `w = 1` returns the input unchanged.
pub fn subsample<R: Rng + ?Sized>(series: &FeatureSeries, w: usize, rng: &mut R) -> Result<FeatureSeries, DpError> {
    if w == 0 {
        return Err(DpError::InvalidWindow);
    }
    let rows = subsampled_len(series.len(), w);
    let mut values = Array2::zeros((rows, series.values.ncols()));
    for (i, col) in series.values.columns().into_iter().enumerate() {
        let picked = subsample_column(col, w, rng);
        values.column_mut(i).iter_mut().zip(picked).for_each(|(dst, v)| *dst = v);
    }
    Ok(FeatureSeries { label: series.label.clone(), values, windowing: series.windowing })
}
