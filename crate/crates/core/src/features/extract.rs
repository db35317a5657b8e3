use ndarray::Array2;

use super::catalogue::{Extractor, FeatureCatalogue};
use super::wordbook::build_wordbook;
use super::{FeatureError, FeatureSeries, SeriesLabel, Windowing};
use crate::ingest::EventSequence;

pub const DEFAULT_WINDOW: f64 = 30.0;
pub const DEFAULT_STEP: f64 = 0.5;

const TIME_EPS: f64 = 1e-9;

/// `floor((duration - window) / step) + 1`, or `None` if the recording is
/// shorter than one window.
pub fn window_count(duration: f64, window: f64, step: f64) -> Option<usize> {
    if duration + TIME_EPS < window {
        return None;
    }
    let extra = ((duration - window).max(0.0) / step + TIME_EPS).floor();
    Some(extra as usize + 1)
}

/// Summary of a set of values; all zeros when the set is empty.
#[derive(Debug, Default, Clone, Copy)]
struct Summary {
    count: usize,
    mean: f64,
    var: f64,
    min: f64,
    max: f64,
}

impl Summary {
    fn of(values: impl Iterator<Item = f64> + Clone) -> Self {
        let count = values.clone().count();
        if count == 0 {
            return Self::default();
        }
        let n = count as f64;
        let mean = values.clone().sum::<f64>() / n;
        let var = values.clone().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let min = values.clone().fold(f64::INFINITY, f64::min);
        let max = values.fold(f64::NEG_INFINITY, f64::max);
        Self { count, mean, var, min, max }
    }
}

/// Index range of the time-sorted, non-overlapping events touching `[w0, w1)`.
fn overlapping<T>(events: &[T], span: impl Fn(&T) -> (f64, f64), w0: f64, w1: f64) -> std::ops::Range<usize> {
    let lo = events.partition_point(|e| {
        let (start, duration) = span(e);
        start < w0 && start + duration <= w0
    });
    let hi = events.partition_point(|e| span(e).0 < w1);
    lo..hi.max(lo)
}

/// Computes one row per sliding window over the event sequence. Each row uses
/// only the events overlapping that window; event attributes are taken whole.
pub fn extract_features(
    ev: &EventSequence,
    label: SeriesLabel,
    window: f64,
    step: f64,
    cat: &FeatureCatalogue,
) -> Result<FeatureSeries, FeatureError> {
    if !(window.is_finite() && window > 0.0 && step.is_finite() && step > 0.0) {
        return Err(FeatureError::InvalidWindowing(format!("window {window}, step {step}")));
    }
    if let Some(e) = cat.entries().iter().find(|e| e.extractor == Extractor::External) {
        return Err(FeatureError::NotExtractable(e.name.clone()));
    }
    let rows = window_count(ev.duration, window, step)
        .ok_or(FeatureError::RecordingTooShort { duration: ev.duration, window })?;
    let alphabet = cat.alphabet();
    let mut values = Array2::zeros((rows, cat.len()));
    let mut gram_lengths: Vec<usize> = cat
        .entries()
        .iter()
        .filter_map(|e| match e.extractor {
            Extractor::Wordbook { n, .. } | Extractor::WordbookDiversity { n } => Some(n),
            _ => None,
        })
        .collect();
    gram_lengths.sort_unstable();
    gram_lengths.dedup();

    for (j, mut row) in values.rows_mut().into_iter().enumerate() {
        let w0 = ev.start + j as f64 * step;
        let w1 = w0 + window;

        let fix = &ev.fixations[overlapping(&ev.fixations, |f| (f.start, f.duration), w0, w1)];
        let sac = &ev.saccades[overlapping(&ev.saccades, |s| (s.start, s.duration), w0, w1)];
        let blk = &ev.blinks[overlapping(&ev.blinks, |b| (b.start, b.duration), w0, w1)];
        let p_lo = ev.pupil_track.partition_point(|p| p.t < w0);
        let p_hi = ev.pupil_track.partition_point(|p| p.t < w1);
        let pupil = &ev.pupil_track[p_lo..p_hi.max(p_lo)];

        let fix_dur = Summary::of(fix.iter().map(|f| f.duration));
        let sac_dur = Summary::of(sac.iter().map(|s| s.duration));
        let sac_amp = Summary::of(sac.iter().map(|s| s.amplitude));
        let blink_dur = Summary::of(blk.iter().map(|b| b.duration));
        let pup = Summary::of(pupil.iter().map(|p| p.pupil));

        let directions: Vec<f64> = sac.iter().map(|s| s.direction).collect();
        let books: Vec<Vec<usize>> =
            gram_lengths.iter().map(|&n| build_wordbook(&directions, n, &alphabet)).collect();
        let wordbook = |n: usize| &books[gram_lengths.iter().position(|&k| k == n).unwrap()];

        for (cell, entry) in row.iter_mut().zip(cat.entries()) {
            *cell = match entry.extractor {
                Extractor::FixationRate => fix_dur.count as f64 / window,
                Extractor::FixationDurationMean => fix_dur.mean,
                Extractor::FixationDurationVar => fix_dur.var,
                Extractor::FixationDurationMax => fix_dur.max,
                Extractor::FixationDurationMin => fix_dur.min,
                Extractor::SaccadeRate => sac_dur.count as f64 / window,
                Extractor::SaccadeDurationMean => sac_dur.mean,
                Extractor::SaccadeDurationVar => sac_dur.var,
                Extractor::SaccadeAmplitudeMean => sac_amp.mean,
                Extractor::SaccadeAmplitudeVar => sac_amp.var,
                Extractor::SaccadeAmplitudeMax => sac_amp.max,
                Extractor::BlinkRate => blink_dur.count as f64 / window,
                Extractor::BlinkDurationMean => blink_dur.mean,
                Extractor::PupilMean => pup.mean,
                Extractor::PupilVar => pup.var,
                Extractor::PupilMin => pup.min,
                Extractor::PupilMax => pup.max,
                Extractor::Wordbook { n, gram } => wordbook(n)[gram] as f64,
                Extractor::WordbookDiversity { n } => wordbook(n).iter().filter(|&&c| c > 0).count() as f64,
                Extractor::External => unreachable!("rejected above"),
            };
        }
    }

    Ok(FeatureSeries { label, values, windowing: Some(Windowing { window, step }) })
}
