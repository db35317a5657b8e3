#![allow(dead_code)]

use eyedp::features::{FeatureCatalogue, FeatureDataset, FeatureSeries, SeriesLabel};
use eyedp::labels::{Document, Gender};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// Plain-loop RBF Gram matrix, independent of the library kernel code.
pub fn rbf_gram(x: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    x.iter()
        .map(|a| {
            x.iter()
                .map(|b| {
                    let d2: f64 = a.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum();
                    (-gamma * d2).exp()
                })
                .collect()
        })
        .collect()
}

pub fn dual_objective(k: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

/// Euclidean projection onto `{0 ≤ a ≤ c, yᵀa = 0}` by bisection on the
/// multiplier of the equality constraint.
fn project(v: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |tau: f64| -> Vec<f64> { v.iter().zip(y).map(|(vi, yi)| (vi - tau * yi).clamp(0.0, c)).collect() };
    let g = |tau: f64| -> f64 { at(tau).iter().zip(y).map(|(a, yi)| a * yi).sum() };
    let span = v.iter().map(|x| x.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-span, span);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

/// Accelerated projected gradient ascent on the SVM dual. Returns the
/// optimal dual objective and α.
pub fn qp_oracle(k: &[Vec<f64>], y: &[f64], c: f64) -> (f64, Vec<f64>) {
    let n = y.len();
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    // Lipschitz bound: largest row sum of |Q|
    let lip = (0..n).map(|i| (0..n).map(|j| q(i, j).abs()).sum::<f64>()).fold(0.0, f64::max).max(1e-12);
    let step = 1.0 / lip;
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0_f64;
    for _ in 0..20_000 {
        let grad: Vec<f64> = (0..n).map(|i| 1.0 - (0..n).map(|j| q(i, j) * z[j]).sum::<f64>()).collect();
        let moved: Vec<f64> = z.iter().zip(&grad).map(|(zi, gi)| zi + step * gi).collect();
        let next = project(&moved, y, c);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        z = next.iter().zip(&a).map(|(n1, a0)| n1 + (t - 1.0) / t_next * (n1 - a0)).collect();
        a = next;
        t = t_next;
    }
    (dual_objective(k, y, &a), a)
}

/// `|ln Y| / (λ t_max)` with `Y ~ Exp(λ)` drawn by inversion.
pub fn noise_magnitude_oracle(lambda: f64, t_max: usize, draws: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..draws)
        .map(|_| {
            let u: f64 = rng.random::<f64>();
            let y = -(1.0 - u).ln() / lambda;
            (y.ln() / (lambda * t_max as f64)).abs()
        })
        .collect()
}

pub fn series(participant: &str, gender: Gender, document: Document, values: Array2<f64>) -> FeatureSeries {
    FeatureSeries {
        label: SeriesLabel { participant: participant.to_string(), gender, document },
        values,
        windowing: None,
    }
}

pub fn names(m: usize) -> FeatureCatalogue {
    FeatureCatalogue::from_names(&(0..m).map(|i| format!("f{i}")).collect::<Vec<_>>()).unwrap()
}

/// `n` participants × 3 documents, `t` windows each, with cell value
/// `participant·1000 + document·100 + window` in every column.
pub fn indexed_dataset(n: usize, t: usize, m: usize) -> FeatureDataset {
    let mut out = Vec::new();
    for p in 0..n {
        let gender = if p % 2 == 0 { Gender::Female } else { Gender::Male };
        for d in Document::ALL {
            let values = Array2::from_shape_fn((t, m), |(w, _)| (p * 1000 + d.index() * 100 + w) as f64);
            out.push(series(&format!("p{p}"), gender, d, values));
        }
    }
    FeatureDataset::new(names(m), out).unwrap()
}
