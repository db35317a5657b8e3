use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;

use super::kernel::cross_kernel;
use super::svm::{train_svm, SvmParams};
use super::LearnError;

#[derive(Debug, Clone)]
struct PairMachine {
    /// Indices into `classes`; `pos < neg`.
    pos: usize,
    neg: usize,
    /// Rows of the shared support matrix.
    sv: Vec<usize>,
    coef: Vec<f64>,
    bias: f64,
}

/// One-vs-one RBF SVM over arbitrary `usize` labels.
#[derive(Debug, Clone)]
pub struct MulticlassModel {
    classes: Vec<usize>,
    support: Array2<f64>,
    gamma: f64,
    machines: Vec<PairMachine>,
}

pub fn train_multiclass(x: ArrayView2<'_, f64>, y: &[usize], params: &SvmParams) -> Result<MulticlassModel, LearnError> {
    if x.nrows() == 0 {
        return Err(LearnError::EmptyMatrix);
    }
    if x.nrows() != y.len() {
        return Err(LearnError::LengthMismatch(x.nrows(), y.len()));
    }
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(LearnError::SingleClassInput);
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); classes.len()];
    for (i, l) in y.iter().enumerate() {
        members[classes.binary_search(l).expect("collected above")].push(i);
    }
    let pairs: Vec<(usize, usize)> =
        (0..classes.len()).flat_map(|a| (a + 1..classes.len()).map(move |b| (a, b))).collect();

    let trained = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut rows = members[a].clone();
            rows.extend_from_slice(&members[b]);
            rows.sort_unstable();
            let labels: Vec<f64> = rows.iter().map(|&r| if y[r] == classes[a] { 1.0 } else { -1.0 }).collect();
            let sub = x.select(Axis(0), &rows);
            let m = train_svm(sub.view(), &labels, params)?;
            let global: Vec<usize> = m.support_indices.iter().map(|&k| rows[k]).collect();
            Ok((a, b, global, m.coef, m.bias))
        })
        .collect::<Result<Vec<_>, LearnError>>()?;

    let mut shared: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, _, global, _, _) in &trained {
        for &g in global {
            shared.entry(g).or_insert(0);
        }
    }
    for (slot, v) in shared.values_mut().enumerate() {
        *v = slot;
    }
    let rows: Vec<usize> = shared.keys().copied().collect();
    let machines = trained
        .into_iter()
        .map(|(pos, neg, global, coef, bias)| PairMachine {
            pos,
            neg,
            sv: global.iter().map(|g| shared[g]).collect(),
            coef,
            bias,
        })
        .collect();
    Ok(MulticlassModel { classes, support: x.select(Axis(0), &rows), gamma: params.gamma, machines })
}

impl MulticlassModel {
    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn support_count(&self) -> usize {
        self.support.nrows()
    }

    /// Pairwise vote per row. Ties go to the class with the larger summed
    /// decision value, then to the smaller label.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        let s = self.support.nrows();
        let k = cross_kernel(x, self.support.view(), self.gamma);
        let c = self.classes.len();
        (0..x.nrows())
            .map(|r| {
                let kr = &k[r * s..(r + 1) * s];
                let mut votes = vec![0usize; c];
                let mut score = vec![0.0; c];
                for m in &self.machines {
                    let f: f64 = m.sv.iter().zip(&m.coef).map(|(&i, a)| a * kr[i]).sum::<f64>() + m.bias;
                    if f >= 0.0 {
                        votes[m.pos] += 1;
                    } else {
                        votes[m.neg] += 1;
                    }
                    score[m.pos] += f;
                    score[m.neg] -= f;
                }
                let mut best = 0;
                for a in 1..c {
                    if votes[a] > votes[best] || (votes[a] == votes[best] && score[a] > score[best]) {
                        best = a;
                    }
                }
                self.classes[best]
            })
            .collect()
    }
}
