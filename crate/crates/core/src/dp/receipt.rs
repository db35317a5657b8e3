//! Plain-text privacy receipt, one `key=value` per line:
//!
//! ```text
//! epsilon_per_feature=15.0
//! total_epsilon=570.0
//! w=10
//! t_max=180
//! seed=1
//! range_source=dataset
//! constant_features=
//! range.fixation_rate=0.0,4.1
//! ...
//! ```
//!
//! `epsilon_per_feature` is a single number when all features share a budget
//! and a comma-separated list in catalogue order otherwise.

use std::fmt;
use std::io::{BufRead, Write};

use super::{DpError, FeatureRange};

/// Which data the feature ranges were estimated on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeSource {
    /// The released dataset itself.
    Dataset,
    /// A disjoint training portion (clean-train evaluation).
    Training,
}

impl fmt::Display for RangeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RangeSource::Dataset => "dataset",
            RangeSource::Training => "training",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrivacyReceipt {
    pub feature_names: Vec<String>,
    pub epsilon: Vec<f64>,
    /// `Σ ε_i` over all features.
    pub total_epsilon: f64,
    pub subsample_window: usize,
    pub t_max: usize,
    pub ranges: FeatureRange,
    /// Indices of features with `δ_i = 0`, released unchanged.
    pub constant_features: Vec<usize>,
    pub range_source: RangeSource,
    pub seed: u64,
}

impl PrivacyReceipt {
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let uniform = self.epsilon.windows(2).all(|w| w[0] == w[1]);
        if uniform && !self.epsilon.is_empty() {
            writeln!(out, "epsilon_per_feature={:?}", self.epsilon[0])?;
        } else {
            let list: Vec<String> = self.epsilon.iter().map(|e| format!("{e:?}")).collect();
            writeln!(out, "epsilon_per_feature={}", list.join(","))?;
        }
        writeln!(out, "total_epsilon={:?}", self.total_epsilon)?;
        writeln!(out, "w={}", self.subsample_window)?;
        writeln!(out, "t_max={}", self.t_max)?;
        writeln!(out, "seed={}", self.seed)?;
        writeln!(out, "range_source={}", self.range_source)?;
        let constant: Vec<&str> = self.constant_features.iter().map(|&i| self.feature_names[i].as_str()).collect();
        writeln!(out, "constant_features={}", constant.join(","))?;
        for (i, name) in self.feature_names.iter().enumerate() {
            writeln!(out, "range.{name}={:?},{:?}", self.ranges.min[i], self.ranges.max[i])?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, DpError> {
        let mut epsilon_raw = None;
        let mut total = None;
        let mut w = None;
        let mut t_max = None;
        let mut seed = None;
        let mut range_source = None;
        let mut constant_raw = String::new();
        let mut names = Vec::new();
        let mut min = Vec::new();
        let mut max = Vec::new();

        for (n, line) in input.lines().enumerate() {
            let line = line?;
            let lineno = n + 1;
            let err = |message: String| DpError::Receipt { line: lineno, message };
            if line.trim().is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err("expected key=value".into()))?;
            let num = |v: &str| v.trim().parse::<f64>().map_err(|e| err(format!("{key}: {e}")));
            let int = |v: &str| v.trim().parse::<u64>().map_err(|e| err(format!("{key}: {e}")));
            match key {
                "epsilon_per_feature" => {
                    epsilon_raw = Some(value.split(',').map(num).collect::<Result<Vec<f64>, _>>()?)
                }
                "total_epsilon" => total = Some(num(value)?),
                "w" => w = Some(int(value)? as usize),
                "t_max" => t_max = Some(int(value)? as usize),
                "seed" => seed = Some(int(value)?),
                "range_source" => {
                    range_source = Some(match value {
                        "dataset" => RangeSource::Dataset,
                        "training" => RangeSource::Training,
                        other => return Err(err(format!("unknown range_source `{other}`"))),
                    })
                }
                "constant_features" => constant_raw = value.to_string(),
                _ => {
                    let name = key.strip_prefix("range.").ok_or_else(|| err(format!("unknown key `{key}`")))?;
                    let (lo, hi) = value.split_once(',').ok_or_else(|| err("expected min,max".into()))?;
                    names.push(name.to_string());
                    min.push(num(lo)?);
                    max.push(num(hi)?);
                }
            }
        }
        let missing = |k: &str| DpError::Receipt { line: 0, message: format!("missing `{k}`") };
        let epsilon_raw = epsilon_raw.ok_or_else(|| missing("epsilon_per_feature"))?;
        let epsilon = if epsilon_raw.len() == 1 { vec![epsilon_raw[0]; names.len()] } else { epsilon_raw };
        if epsilon.len() != names.len() {
            return Err(DpError::WidthMismatch { expected: names.len(), actual: epsilon.len() });
        }
        let constant_features = constant_raw
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|c| names.iter().position(|n| n == c).ok_or_else(|| missing(c)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            feature_names: names,
            epsilon,
            total_epsilon: total.ok_or_else(|| missing("total_epsilon"))?,
            subsample_window: w.ok_or_else(|| missing("w"))?,
            t_max: t_max.ok_or_else(|| missing("t_max"))?,
            ranges: FeatureRange { min, max },
            constant_features,
            range_source: range_source.unwrap_or(RangeSource::Dataset),
            seed: seed.ok_or_else(|| missing("seed"))?,
        })
    }
}
