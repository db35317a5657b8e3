use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;

use super::range::{estimate_ranges, FeatureRange};
use super::receipt::{PrivacyReceipt, RangeSource};
use super::subsample::subsample_column;
use super::DpError;
use crate::features::{FeatureDataset, FeatureSeries};
use crate::seed;

/// `λ_i = ε_i / (2 · t_max · δ_i)`.
pub fn lambda(epsilon: f64, t_max: usize, delta: f64) -> f64 {
    epsilon / (2.0 * t_max as f64 * delta)
}

/// Randomness consumed by the mechanism.
pub trait NoiseSource {
    /// A draw from the exponential distribution with the given rate (mean `1 / rate`).
    fn exponential(&mut self, rate: f64) -> f64;
    /// `+1.0` or `-1.0` with equal probability.
    fn sign(&mut self) -> f64;
}

pub struct RngNoise<R>(pub R);

impl<R: Rng> NoiseSource for RngNoise<R> {
    fn exponential(&mut self, rate: f64) -> f64 {
        let exp = Exp::new(rate).expect("rate is positive and finite");
        // y must be strictly positive for ln(y); a zero draw is a rounding artifact.
        loop {
            let y = exp.sample(&mut self.0);
            if y > 0.0 {
                return y;
            }
        }
    }

    fn sign(&mut self) -> f64 {
        if self.0.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }
}

/// Returns the same `y` and sign every time; for tests and audits.
#[derive(Debug, Clone, Copy)]
pub struct FixedNoise {
    pub y: f64,
    pub sign: f64,
}

impl NoiseSource for FixedNoise {
    fn exponential(&mut self, _rate: f64) -> f64 {
        self.y
    }

    fn sign(&mut self) -> f64 {
        self.sign
    }
}

/// Record of the noise applied to one (participant, feature) vector.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDraw {
    pub y: f64,
    pub lambda: f64,
    /// `ln(y) / (λ · t_max)`, in feature units.
    pub offset: f64,
    /// One entry of ±1 per released element.
    pub signs: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SanitizerParams {
    /// `ε_i` per feature.
    pub epsilon: Vec<f64>,
    pub subsample_window: usize,
    pub ranges: FeatureRange,
    /// Maximum vector length the sensitivity is computed for.
    pub t_max: usize,
}

fn validate_budget(epsilon: &[f64], m: usize) -> Result<(), DpError> {
    if epsilon.len() != m {
        return Err(DpError::WidthMismatch { expected: m, actual: epsilon.len() });
    }
    if let Some((feature, &value)) = epsilon.iter().enumerate().find(|(_, e)| !(e.is_finite() && **e > 0.0)) {
        return Err(DpError::InvalidEpsilon { feature, value });
    }
    Ok(())
}

impl SanitizerParams {
    fn validate(&self, m: usize) -> Result<(), DpError> {
        validate_budget(&self.epsilon, m)?;
        if self.ranges.len() != m {
            return Err(DpError::WidthMismatch { expected: m, actual: self.ranges.len() });
        }
        if self.subsample_window == 0 {
            return Err(DpError::InvalidWindow);
        }
        if self.t_max == 0 {
            return Err(DpError::TMaxTooSmall { t_max: 0, len: 1 });
        }
        Ok(())
    }
}

/// Draws `y`, then one sign per cell, and moves every cell by `±offset`.
fn perturb<'a, N: NoiseSource + ?Sized>(
    cells: impl Iterator<Item = &'a mut f64>,
    lambda: f64,
    t_max: usize,
    noise: &mut N,
) -> NoiseDraw {
    let y = noise.exponential(lambda);
    let offset = y.ln() / (lambda * t_max as f64);
    let mut signs = Vec::new();
    for v in cells {
        let s = noise.sign();
        *v += s * offset;
        signs.push(if s > 0.0 { 1 } else { -1 });
    }
    NoiseDraw { y, lambda, offset, signs }
}

/// Sanitizes an already subsampled series, treating each column as one
/// vector. Columns with `δ_i = 0` are returned unchanged.
pub fn sanitize_series<N: NoiseSource + ?Sized>(
    p: &FeatureSeries,
    params: &SanitizerParams,
    noise: &mut N,
) -> Result<FeatureSeries, DpError> {
    sanitize_series_with_draws(p, params, noise).map(|(s, _)| s)
}

/// Like [`sanitize_series`], also returning the draw for each feature (`None`
/// for constant features).
pub fn sanitize_series_with_draws<N: NoiseSource + ?Sized>(
    p: &FeatureSeries,
    params: &SanitizerParams,
    noise: &mut N,
) -> Result<(FeatureSeries, Vec<Option<NoiseDraw>>), DpError> {
    let m = p.values.ncols();
    params.validate(m)?;
    if p.len() > params.t_max {
        return Err(DpError::TMaxTooSmall { t_max: params.t_max, len: p.len() });
    }
    let mut out = p.clone();
    let draws = (0..m)
        .map(|i| {
            let delta = params.ranges.delta(i);
            (delta > 0.0).then(|| {
                let lambda = lambda(params.epsilon[i], params.t_max, delta);
                perturb(out.values.column_mut(i).into_iter(), lambda, params.t_max, noise)
            })
        })
        .collect();
    Ok((out, draws))
}

/// Dataset-level sanitizer: subsample, then release each (participant,
/// feature) vector, where a participant's vector is the concatenation of
/// their series in dataset order.
///
/// Randomness: the subsampling of series `s`, feature `i` uses stream
/// `(seed, "subsample", s, i)`; the noise of participant `k`, feature `i`
/// uses `(seed, "noise", k, i)`. Participants are indexed by first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Sanitizer {
    pub epsilon: Vec<f64>,
    pub subsample_window: usize,
    pub ranges: FeatureRange,
    pub range_source: RangeSource,
    /// Defaults to the longest participant vector after subsampling.
    pub t_max: Option<usize>,
}

impl Sanitizer {
    /// Same `ε_i` for all `m` features.
    pub fn uniform(epsilon_per_feature: f64, subsample_window: usize, ranges: FeatureRange) -> Self {
        Self {
            epsilon: vec![epsilon_per_feature; ranges.len()],
            subsample_window,
            ranges,
            range_source: RangeSource::Dataset,
            t_max: None,
        }
    }

    pub fn run(&self, ds: &FeatureDataset, seed: u64) -> Result<(FeatureDataset, PrivacyReceipt), DpError> {
        if ds.is_empty() {
            return Err(DpError::EmptyDataset);
        }
        let m = ds.m();
        let w = self.subsample_window;
        validate_budget(&self.epsilon, m)?;
        if self.ranges.len() != m {
            return Err(DpError::WidthMismatch { expected: m, actual: self.ranges.len() });
        }
        if w == 0 {
            return Err(DpError::InvalidWindow);
        }

        let subsampled: Vec<FeatureSeries> = ds
            .series
            .par_iter()
            .enumerate()
            .map(|(s_idx, s)| {
                let cols: Vec<Vec<f64>> = s
                    .values
                    .columns()
                    .into_iter()
                    .enumerate()
                    .map(|(i, col)| {
                        let mut rng = seed::rng(seed, &[seed::tag("subsample"), s_idx as u64, i as u64]);
                        subsample_column(col, w, &mut rng)
                    })
                    .collect();
                let rows = cols[0].len();
                FeatureSeries {
                    label: s.label.clone(),
                    values: Array2::from_shape_fn((rows, m), |(r, c)| cols[c][r]),
                    windowing: s.windowing,
                }
            })
            .collect();

        let participants = ds.participants();
        let mut groups: Vec<Vec<(usize, FeatureSeries)>> = vec![Vec::new(); participants.len()];
        for (idx, s) in subsampled.into_iter().enumerate() {
            let k = participants.iter().position(|p| *p == s.label.participant).unwrap();
            groups[k].push((idx, s));
        }
        let longest = groups.iter().map(|g| g.iter().map(|(_, s)| s.len()).sum::<usize>()).max().unwrap_or(0);
        let t_max = self.t_max.unwrap_or(longest);
        if t_max < longest || t_max == 0 {
            return Err(DpError::TMaxTooSmall { t_max, len: longest });
        }

        let constant: Vec<usize> = (0..m).filter(|&i| self.ranges.delta(i) <= 0.0).collect();
        groups.par_iter_mut().enumerate().for_each(|(k, group)| {
            for i in 0..m {
                let delta = self.ranges.delta(i);
                if delta <= 0.0 {
                    continue;
                }
                let lambda = lambda(self.epsilon[i], t_max, delta);
                let mut noise = RngNoise(seed::rng(seed, &[seed::tag("noise"), k as u64, i as u64]));
                let cells = group.iter_mut().flat_map(|(_, s)| s.values.column_mut(i).into_iter());
                perturb(cells, lambda, t_max, &mut noise);
            }
        });

        let mut series: Vec<(usize, FeatureSeries)> = groups.into_iter().flatten().collect();
        series.sort_by_key(|(idx, _)| *idx);
        let out = FeatureDataset {
            catalogue: ds.catalogue.clone(),
            series: series.into_iter().map(|(_, s)| s).collect(),
        };
        let receipt = PrivacyReceipt {
            feature_names: ds.catalogue.names().map(str::to_string).collect(),
            epsilon: self.epsilon.clone(),
            total_epsilon: self.epsilon.iter().sum(),
            subsample_window: w,
            t_max,
            ranges: self.ranges.clone(),
            constant_features: constant,
            range_source: self.range_source,
            seed,
        };
        Ok((out, receipt))
    }
}

/// Estimates ranges on `ds` itself and releases it with the same `ε_i` for
/// every feature.
pub fn sanitize_dataset(
    ds: &FeatureDataset,
    epsilon_per_feature: f64,
    subsample_window: usize,
    seed: u64,
) -> Result<(FeatureDataset, PrivacyReceipt), DpError> {
    let ranges = estimate_ranges(ds)?;
    Sanitizer::uniform(epsilon_per_feature, subsample_window, ranges).run(ds, seed)
}
