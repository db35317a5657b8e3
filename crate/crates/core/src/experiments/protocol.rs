use std::ops::Range;

use crate::features::FeatureDataset;

/// One leave-one-participant-out split, as series indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub held_out: String,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// One fold per participant, in order of first appearance.
pub fn loocv_folds(ds: &FeatureDataset) -> Vec<Fold> {
    ds.participants()
        .into_iter()
        .map(|p| {
            let (test, train) = (0..ds.series.len()).partition(|&i| ds.series[i].label.participant == p);
            Fold { held_out: p.to_string(), train, test }
        })
        .collect()
}

/// Window ranges of the first (training) and second (test) half of a series
/// of `len` windows. The first half gets `⌊len/2⌋` windows.
pub fn half_split(len: usize) -> (Range<usize>, Range<usize>) {
    let h = len / 2;
    (0..h, h..len)
}

/// Accuracy of always guessing the most frequent unit label.
pub fn chance_level(unit_labels: &[usize]) -> f64 {
    if unit_labels.is_empty() {
        return 0.0;
    }
    let classes = unit_labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0usize; classes];
    for &l in unit_labels {
        counts[l] += 1;
    }
    *counts.iter().max().unwrap() as f64 / unit_labels.len() as f64
}
