//! Seeded synthetic feature datasets with planted gender, identity and
//! document signals.
//!
//! Cell value for participant `p`, document `d`, feature `i`:
//!
//! ```text
//! mean_i + std_i · (s_gender · g_i · sign(p) + s_identity · a_{p,i} + s_document · b_{d,i} + z)
//! ```
//!
//! with `z ~ N(0, 1)` i.i.d. per cell, `g_i ∈ {-1, +1}`, `a` and `b` standard
//! normal, `sign(p)` = +1 for male and -1 for female. Each signal touches its
//! own quarter of the features (disjoint whenever `m ≥ 3·⌈m/4⌉`); the
//! remaining coefficients are zero.

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::features::{FeatureCatalogue, FeatureDataset, FeatureSeries, SeriesLabel};
use crate::labels::{Document, Gender};
use crate::seed;

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub participants: usize,
    /// Windows per (participant, document) series.
    pub windows: usize,
    pub base_mean: Vec<f64>,
    pub base_std: Vec<f64>,
    /// Signal strengths in multiples of the base std.
    pub s_gender: f64,
    pub s_identity: f64,
    pub s_document: f64,
    pub seed: u64,
}

pub const DEFAULT_FEATURES: usize = 38;

impl Default for SynthSpec {
    fn default() -> Self {
        Self::with_features(DEFAULT_FEATURES)
    }
}

impl SynthSpec {
    /// Default participants, windows and signal strengths over `m` features
    /// with means `1 + i` and stds `1 + 0.5 · (i mod 3)`.
    pub fn with_features(m: usize) -> Self {
        Self {
            participants: 20,
            windows: 600,
            base_mean: (0..m).map(|i| 1.0 + i as f64).collect(),
            base_std: (0..m).map(|i| 1.0 + 0.5 * (i % 3) as f64).collect(),
            s_gender: 0.3,
            s_identity: 1.5,
            s_document: 1.5,
            seed: 0,
        }
    }

    pub fn m(&self) -> usize {
        self.base_mean.len()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::InvalidSpec(m));
        if self.participants < 2 {
            return bad(format!("need at least 2 participants, got {}", self.participants));
        }
        if self.windows < 2 {
            return bad(format!("need at least 2 windows per series, got {}", self.windows));
        }
        if self.base_mean.is_empty() || self.base_mean.len() != self.base_std.len() {
            return bad("base mean and std must be non-empty and of equal length".into());
        }
        if self.base_mean.iter().any(|v| !v.is_finite()) || self.base_std.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return bad("base means must be finite and stds finite and non-negative".into());
        }
        for (name, s) in [("gender", self.s_gender), ("identity", self.s_identity), ("document", self.s_document)] {
            if !(s.is_finite() && s >= 0.0) {
                return bad(format!("{name} strength must be finite and >= 0, got {s}"));
            }
        }
        Ok(())
    }
}

/// Participant ids `p00, p01, ...`; even indices are female.
pub fn participant_id(k: usize) -> String {
    format!("p{k:02}")
}

pub fn participant_gender(k: usize) -> Gender {
    if k % 2 == 0 {
        Gender::Female
    } else {
        Gender::Male
    }
}

pub fn generate(spec: &SynthSpec) -> Result<FeatureDataset, SynthError> {
    spec.validate()?;
    let m = spec.m();
    let n = spec.participants;
    let k = m.div_ceil(4);

    let mut rng = seed::rng(spec.seed, &[seed::tag("synth-layout")]);
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut rng);
    let subset = |j: usize| -> Vec<usize> { (0..k).map(|r| order[(j * k + r) % m]).collect() };
    let (gender_set, identity_set, document_set) = (subset(0), subset(1), subset(2));

    let mut g_dir = vec![0.0; m];
    for &i in &gender_set {
        g_dir[i] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let mut id_offset = vec![vec![0.0; m]; n];
    for row in id_offset.iter_mut() {
        for &i in &identity_set {
            row[i] = rng.sample(StandardNormal);
        }
    }
    let mut doc_offset = vec![vec![0.0; m]; Document::ALL.len()];
    for row in doc_offset.iter_mut() {
        for &i in &document_set {
            row[i] = rng.sample(StandardNormal);
        }
    }

    let mut series = Vec::with_capacity(n * Document::ALL.len());
    for p in 0..n {
        let gender = participant_gender(p);
        let sign = if gender == Gender::Male { 1.0 } else { -1.0 };
        for doc in Document::ALL {
            let mut noise = seed::rng(spec.seed, &[seed::tag("synth-cells"), p as u64, doc.index() as u64]);
            let shift: Vec<f64> = (0..m)
                .map(|i| {
                    spec.s_gender * g_dir[i] * sign
                        + spec.s_identity * id_offset[p][i]
                        + spec.s_document * doc_offset[doc.index()][i]
                })
                .collect();
            let values = Array2::from_shape_fn((spec.windows, m), |(_, i)| {
                let z: f64 = noise.sample(StandardNormal);
                spec.base_mean[i] + spec.base_std[i] * (shift[i] + z)
            });
            series.push(FeatureSeries {
                label: SeriesLabel { participant: participant_id(p), gender, document: doc },
                values,
                windowing: None,
            });
        }
    }
    let names: Vec<String> = (0..m).map(|i| format!("feat_{i:02}")).collect();
    let catalogue = FeatureCatalogue::from_names(&names).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    FeatureDataset::new(catalogue, series).map_err(|e| SynthError::InvalidSpec(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SynthSpec {
        SynthSpec { participants: 4, windows: 5, ..SynthSpec::with_features(8) }
    }

    #[test]
    fn label_marginals() {
        let ds = generate(&small()).unwrap();
        assert_eq!(ds.series.len(), 12);
        let female = ds.series.iter().filter(|s| s.label.gender == Gender::Female).count();
        assert_eq!(female, 6);
        assert!(ds.series.iter().all(|s| s.len() == 5 && s.values.ncols() == 8));
    }

    #[test]
    fn deterministic() {
        assert_eq!(generate(&small()).unwrap(), generate(&small()).unwrap());
        let other = SynthSpec { seed: 1, ..small() };
        assert_ne!(generate(&small()).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn invalid() {
        for spec in [
            SynthSpec { participants: 1, ..small() },
            SynthSpec { windows: 1, ..small() },
            SynthSpec { s_gender: f64::NAN, ..small() },
            SynthSpec { s_document: -1.0, ..small() },
        ] {
            assert!(matches!(generate(&spec), Err(SynthError::InvalidSpec(_))));
        }
    }
}
