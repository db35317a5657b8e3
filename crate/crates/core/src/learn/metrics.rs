use std::collections::BTreeMap;

use super::LearnError;

/// Most frequent label; ties go to the smallest label.
pub fn majority_vote<L: Ord + Clone>(predictions: &[L]) -> Result<L, LearnError> {
    let mut counts: BTreeMap<&L, usize> = BTreeMap::new();
    for p in predictions {
        *counts.entry(p).or_insert(0) += 1;
    }
    let mut best: Option<(&L, usize)> = None;
    for (label, n) in counts {
        if best.is_none_or(|(_, b)| n > b) {
            best = Some((label, n));
        }
    }
    best.map(|(l, _)| l.clone()).ok_or(LearnError::EmptyGroup)
}

/// One majority vote per group.
pub fn vote_groups<L: Ord + Clone>(groups: &[Vec<L>]) -> Result<Vec<L>, LearnError> {
    groups.iter().map(|g| majority_vote(g)).collect()
}

pub fn accuracy<L: PartialEq>(predicted: &[L], truth: &[L]) -> Result<f64, LearnError> {
    if predicted.len() != truth.len() {
        return Err(LearnError::LengthMismatch(predicted.len(), truth.len()));
    }
    if truth.is_empty() {
        return Err(LearnError::EmptyGroup);
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}
