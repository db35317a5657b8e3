use super::DpError;
use crate::features::{FeatureCatalogue, FeatureDataset, FeatureSeries};

/// Per-feature global minimum and maximum; `δ_i = max_i - min_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRange {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureRange {
    pub fn len(&self) -> usize {
        self.min.len()
    }

    pub fn is_empty(&self) -> bool {
        self.min.is_empty()
    }

    pub fn delta(&self, i: usize) -> f64 {
        self.max[i] - self.min[i]
    }

    pub fn deltas(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.delta(i)).collect()
    }
}

/// Ranges over every participant, document and window of the dataset.
pub fn estimate_ranges(ds: &FeatureDataset) -> Result<FeatureRange, DpError> {
    estimate_ranges_over(&ds.catalogue, ds.series.iter())
}

/// Ranges over a subset of series. A catalogue range hint widens the
/// empirical bound on either side where it is wider; it never narrows it.
pub fn estimate_ranges_over<'a>(
    catalogue: &FeatureCatalogue,
    series: impl IntoIterator<Item = &'a FeatureSeries>,
) -> Result<FeatureRange, DpError> {
    let m = catalogue.len();
    let mut min = vec![f64::INFINITY; m];
    let mut max = vec![f64::NEG_INFINITY; m];
    let mut any = false;
    for s in series {
        if s.values.ncols() != m {
            return Err(DpError::WidthMismatch { expected: m, actual: s.values.ncols() });
        }
        for row in s.values.rows() {
            any = true;
            for ((lo, hi), &v) in min.iter_mut().zip(max.iter_mut()).zip(row) {
                *lo = lo.min(v);
                *hi = hi.max(v);
            }
        }
    }
    if !any {
        return Err(DpError::EmptyDataset);
    }
    for (i, entry) in catalogue.entries().iter().enumerate() {
        if let Some(hint) = &entry.range {
            min[i] = min[i].min(hint.lo);
            max[i] = max[i].max(hint.hi);
        }
    }
    Ok(FeatureRange { min, max })
}
