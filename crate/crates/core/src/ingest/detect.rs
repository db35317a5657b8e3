//! Dispersion-threshold (I-DT) event detection.
//!
//! Every sample ends up in exactly one event. Low-confidence runs lasting at
//! least `min_blink` become blinks and split the stream into segments; inside a
//! segment, fixations are found by I-DT and every maximal run of remaining
//! samples (including an empty run between two adjacent fixations) becomes a
//! saccade.
//!
//! An event covering samples `i..=j` spans `[t_i, t_{j+1})`, where `t_{j+1}` is
//! the next sample's timestamp, or `t_j` at the end of the stream.

use super::{GazeRecording, GazeSample, IngestError};

/// Slack applied to duration comparisons so that float timestamps sitting
/// exactly on a threshold are not rejected by rounding.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionConfig {
    /// Maximum `(max x - min x) + (max y - min y)` within a fixation.
    pub dispersion: f64,
    /// Seconds.
    pub min_fixation: f64,
    /// Samples with confidence below this are blink candidates.
    pub blink_confidence: f64,
    /// Seconds.
    pub min_blink: f64,
}

impl Default for DetectionConfig {
    fn default() -> Self {
        Self {
            dispersion: 0.05,
            min_fixation: 0.1,
            blink_confidence: 0.5,
            min_blink: 0.1,
        }
    }
}

impl DetectionConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.dispersion) {
            return Err(IngestError::InvalidConfig("dispersion must be > 0".into()));
        }
        if !ok(self.min_fixation) {
            return Err(IngestError::InvalidConfig("min_fixation must be > 0".into()));
        }
        if !ok(self.min_blink) {
            return Err(IngestError::InvalidConfig("min_blink must be > 0".into()));
        }
        if !(0.0..=1.0).contains(&self.blink_confidence) {
            return Err(IngestError::InvalidConfig("blink_confidence must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fixation {
    pub start: f64,
    pub duration: f64,
    pub x: f64,
    pub y: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saccade {
    pub start: f64,
    pub duration: f64,
    /// Normalized screen units.
    pub amplitude: f64,
    /// Radians, `atan2(dy, dx)`.
    pub direction: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Blink {
    pub start: f64,
    pub duration: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PupilPoint {
    pub t: f64,
    pub pupil: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct EventSequence {
    pub fixations: Vec<Fixation>,
    pub saccades: Vec<Saccade>,
    pub blinks: Vec<Blink>,
    pub pupil_track: Vec<PupilPoint>,
    /// Time of the first sample.
    pub start: f64,
    /// `t_last - t_first` of the source recording.
    pub duration: f64,
}

impl EventSequence {
    pub fn sample_count(&self) -> usize {
        self.fixations.iter().map(|f| f.samples).sum::<usize>()
            + self.saccades.iter().map(|s| s.samples).sum::<usize>()
            + self.blinks.iter().map(|b| b.samples).sum::<usize>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Label {
    Blink,
    /// Fixation id, so that abutting fixations stay distinct.
    Fixation(usize),
    Gap,
}

pub fn detect_events(rec: &GazeRecording, cfg: &DetectionConfig) -> Result<EventSequence, IngestError> {
    cfg.validate()?;
    let duration = rec.duration();
    if duration + TIME_EPS < cfg.min_fixation {
        return Err(IngestError::DegenerateRecording { duration });
    }
    let s = rec.samples();
    let n = s.len();
    let end_time = |j: usize| if j + 1 < n { s[j + 1].t } else { s[j].t };
    let valid: Vec<bool> = s.iter().map(|p| p.confidence >= cfg.blink_confidence).collect();

    let mut labels = vec![Label::Gap; n];
    let mut i = 0;
    while i < n {
        if valid[i] {
            i += 1;
            continue;
        }
        let mut j = i;
        while j + 1 < n && !valid[j + 1] {
            j += 1;
        }
        if end_time(j) - s[i].t + TIME_EPS >= cfg.min_blink {
            labels[i..=j].fill(Label::Blink);
        }
        i = j + 1;
    }

    // I-DT inside each blink-free segment.
    let mut next_id = 0;
    let mut seg_start = 0;
    while seg_start < n {
        if labels[seg_start] == Label::Blink {
            seg_start += 1;
            continue;
        }
        let mut seg_end = seg_start;
        while seg_end < n && labels[seg_end] != Label::Blink {
            seg_end += 1;
        }
        idt(s, &valid, seg_start, seg_end, cfg, &end_time, &mut labels, &mut next_id);
        seg_start = seg_end;
    }

    Ok(assemble(s, &valid, &labels, rec.start(), duration, &end_time))
}

#[allow(clippy::too_many_arguments)]
fn idt(
    s: &[GazeSample],
    valid: &[bool],
    from: usize,
    to: usize,
    cfg: &DetectionConfig,
    end_time: &dyn Fn(usize) -> f64,
    labels: &mut [Label],
    next_id: &mut usize,
) {
    let mut i = from;
    while i < to {
        if !valid[i] {
            i += 1;
            continue;
        }
        // Smallest all-valid window starting at i that covers min_fixation.
        let mut j = i;
        while j < to && valid[j] && end_time(j) - s[i].t + TIME_EPS < cfg.min_fixation {
            j += 1;
        }
        if j >= to || !valid[j] {
            i += 1;
            continue;
        }
        let mut bounds = Bounds::new(&s[i]);
        for p in &s[i + 1..=j] {
            bounds.add(p);
        }
        if bounds.dispersion() > cfg.dispersion {
            i += 1;
            continue;
        }
        while j + 1 < to && valid[j + 1] {
            let mut grown = bounds;
            grown.add(&s[j + 1]);
            if grown.dispersion() > cfg.dispersion {
                break;
            }
            bounds = grown;
            j += 1;
        }
        labels[i..=j].fill(Label::Fixation(*next_id));
        *next_id += 1;
        i = j + 1;
    }
}

#[derive(Debug, Clone, Copy)]
struct Bounds {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Bounds {
    fn new(p: &GazeSample) -> Self {
        Self { min_x: p.x, max_x: p.x, min_y: p.y, max_y: p.y }
    }

    fn add(&mut self, p: &GazeSample) {
        self.min_x = self.min_x.min(p.x);
        self.max_x = self.max_x.max(p.x);
        self.min_y = self.min_y.min(p.y);
        self.max_y = self.max_y.max(p.y);
    }

    fn dispersion(&self) -> f64 {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }
}

/// Run of equally labelled samples `first..=last`.
struct Run {
    label: Label,
    first: usize,
    last: usize,
}

fn assemble(
    s: &[GazeSample],
    valid: &[bool],
    labels: &[Label],
    start: f64,
    duration: f64,
    end_time: &dyn Fn(usize) -> f64,
) -> EventSequence {
    let mut runs: Vec<Run> = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        match runs.last_mut() {
            Some(run) if run.label == label => run.last = i,
            _ => runs.push(Run { label, first: i, last: i }),
        }
    }

    let centroid = |run: &Run| {
        let pts = &s[run.first..=run.last];
        let k = pts.len() as f64;
        (pts.iter().map(|p| p.x).sum::<f64>() / k, pts.iter().map(|p| p.y).sum::<f64>() / k)
    };

    let mut ev = EventSequence { start, duration, ..Default::default() };
    for (k, run) in runs.iter().enumerate() {
        let span = end_time(run.last) - s[run.first].t;
        let count = run.last - run.first + 1;
        match run.label {
            Label::Blink => ev.blinks.push(Blink { start: s[run.first].t, duration: span, samples: count }),
            Label::Fixation(_) => {
                let (x, y) = centroid(run);
                ev.fixations.push(Fixation { start: s[run.first].t, duration: span, x, y, samples: count });
                if let Some(next) = runs.get(k + 1) {
                    if matches!(next.label, Label::Fixation(_)) {
                        let to = centroid(next);
                        let (amplitude, direction) = displacement(Some((x, y)), Some(to));
                        ev.saccades.push(Saccade {
                            start: s[next.first].t,
                            duration: 0.0,
                            amplitude,
                            direction,
                            samples: 0,
                        });
                    }
                }
            }
            Label::Gap => {
                let mut gap = (run.first..=run.last).filter(|&i| valid[i]).map(|i| (s[i].x, s[i].y));
                let first_valid = gap.next();
                let last_valid = gap.last().or(first_valid);
                let from = match k.checked_sub(1).map(|p| &runs[p]) {
                    Some(prev) if matches!(prev.label, Label::Fixation(_)) => Some(centroid(prev)),
                    _ => first_valid,
                };
                let to = match runs.get(k + 1) {
                    Some(next) if matches!(next.label, Label::Fixation(_)) => Some(centroid(next)),
                    _ => last_valid,
                };
                let (amplitude, direction) = displacement(from, to);
                ev.saccades.push(Saccade { start: s[run.first].t, duration: span, amplitude, direction, samples: count });
            }
        }
    }
    ev.pupil_track = s
        .iter()
        .zip(labels)
        .filter(|(_, l)| **l != Label::Blink)
        .map(|(p, _)| PupilPoint { t: p.t, pupil: p.pupil })
        .collect();
    ev
}

fn displacement(from: Option<(f64, f64)>, to: Option<(f64, f64)>) -> (f64, f64) {
    match (from, to) {
        (Some((x0, y0)), Some((x1, y1))) => {
            let (dx, dy) = (x1 - x0, y1 - y0);
            let amplitude = dx.hypot(dy);
            let direction = if amplitude > 0.0 { dy.atan2(dx) } else { 0.0 };
            (amplitude, direction)
        }
        _ => (0.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::{Document, Gender};
    use proptest::prelude::*;

    fn sample(t: f64, x: f64, y: f64, confidence: f64) -> GazeSample {
        GazeSample { t, x, y, pupil: 40.0, confidence }
    }

    fn recording(samples: Vec<GazeSample>) -> GazeRecording {
        GazeRecording::new("p", Document::Comic, Gender::Male, samples).unwrap()
    }

    fn stationary(n: usize) -> Vec<GazeSample> {
        (0..n).map(|i| sample(i as f64 * 0.01, 0.5, 0.5, 1.0)).collect()
    }

    #[test]
    fn stationary_stream_is_one_fixation() {
        let ev = detect_events(&recording(stationary(201)), &DetectionConfig::default()).unwrap();
        assert_eq!(ev.fixations.len(), 1);
        assert!(ev.saccades.is_empty());
        assert!(ev.blinks.is_empty());
        assert!((ev.fixations[0].duration - 2.0).abs() < 1e-9);
        assert_eq!(ev.sample_count(), 201);
    }

    #[test]
    fn two_fixations_and_one_saccade() {
        let mut s: Vec<GazeSample> = (0..100).map(|i| sample(i as f64 * 0.01, 0.2, 0.5, 1.0)).collect();
        s.push(sample(1.0, 0.5, 0.5, 1.0));
        s.extend((101..=200).map(|i| sample(i as f64 * 0.01, 0.8, 0.5, 1.0)));
        let ev = detect_events(&recording(s), &DetectionConfig::default()).unwrap();
        assert_eq!(ev.fixations.len(), 2);
        assert_eq!(ev.saccades.len(), 1);
        assert!(ev.blinks.is_empty());
        let sac = ev.saccades[0];
        assert!((sac.amplitude - 0.6).abs() < 1e-9);
        assert!(sac.direction.abs() < 1e-9);
        assert_eq!(sac.samples, 1);
        assert_eq!(ev.sample_count(), 201);
    }

    #[test]
    fn blink_splits_fixation() {
        let s: Vec<GazeSample> = (0..200)
            .map(|i| {
                let t = i as f64 * 0.01;
                let c = if (80..110).contains(&i) { 0.0 } else { 1.0 };
                sample(t, 0.5, 0.5, c)
            })
            .collect();
        let ev = detect_events(&recording(s), &DetectionConfig::default()).unwrap();
        assert_eq!(ev.blinks.len(), 1);
        assert!((ev.blinks[0].duration - 0.3).abs() < 0.011);
        assert_eq!(ev.fixations.len(), 2);
        assert!(ev.saccades.is_empty());
        assert!(ev.fixations[0].start + ev.fixations[0].duration <= ev.blinks[0].start + 1e-12);
        assert_eq!(ev.pupil_track.len(), 170);
        assert_eq!(ev.sample_count(), 200);
    }

    #[test]
    fn short_dropout_is_not_a_blink() {
        let s: Vec<GazeSample> = (0..200)
            .map(|i| sample(i as f64 * 0.01, 0.5, 0.5, if (80..83).contains(&i) { 0.0 } else { 1.0 }))
            .collect();
        let ev = detect_events(&recording(s), &DetectionConfig::default()).unwrap();
        assert!(ev.blinks.is_empty());
        assert_eq!(ev.fixations.len(), 2);
        assert_eq!(ev.saccades.len(), 1);
        assert_eq!(ev.saccades[0].samples, 3);
        assert_eq!(ev.sample_count(), 200);
    }

    #[test]
    fn too_short_recording() {
        let err = detect_events(&recording(stationary(5)), &DetectionConfig::default()).unwrap_err();
        assert!(matches!(err, IngestError::DegenerateRecording { .. }));
    }

    fn arb_stream() -> impl Strategy<Value = Vec<GazeSample>> {
        prop::collection::vec((0.0..1.0f64, 0.0..1.0f64, prop::bool::weighted(0.9), 1..40usize), 1..30).prop_map(
            |segments| {
                let mut out = Vec::new();
                let mut i = 0usize;
                for (x, y, ok, len) in segments {
                    for k in 0..len {
                        let jitter = (k % 3) as f64 * 0.004;
                        out.push(sample(i as f64 / 128.0, x + jitter, y, if ok { 1.0 } else { 0.1 }));
                        i += 1;
                    }
                }
                // guarantee the minimum duration
                while out.len() < 16 {
                    out.push(sample(out.len() as f64 / 128.0, 0.5, 0.5, 1.0));
                }
                out
            },
        )
    }

    fn check_ordered(starts_durations: &[(f64, f64)]) {
        for w in starts_durations.windows(2) {
            assert!(w[0].0 + w[0].1 <= w[1].0 + 1e-9, "{w:?}");
        }
    }

    proptest! {
        #[test]
        fn every_sample_is_attributed(s in arb_stream()) {
            let n = s.len();
            let ev = detect_events(&recording(s), &DetectionConfig::default()).unwrap();
            prop_assert_eq!(ev.sample_count(), n);
            prop_assert!(ev.fixations.iter().all(|f| f.duration > 0.0));
            prop_assert!(ev.saccades.iter().all(|s| s.amplitude >= 0.0));
            check_ordered(&ev.fixations.iter().map(|f| (f.start, f.duration)).collect::<Vec<_>>());
            check_ordered(&ev.saccades.iter().map(|f| (f.start, f.duration)).collect::<Vec<_>>());
            check_ordered(&ev.blinks.iter().map(|f| (f.start, f.duration)).collect::<Vec<_>>());
        }

        #[test]
        fn time_shift_moves_events(s in arb_stream(), shift in 0u32..1000) {
            let shift = shift as f64;
            let shifted: Vec<GazeSample> = s.iter().map(|p| GazeSample { t: p.t + shift, ..*p }).collect();
            let cfg = DetectionConfig::default();
            let a = detect_events(&recording(s), &cfg).unwrap();
            let b = detect_events(&recording(shifted), &cfg).unwrap();
            prop_assert_eq!(a.fixations.len(), b.fixations.len());
            prop_assert_eq!(a.saccades.len(), b.saccades.len());
            prop_assert_eq!(a.blinks.len(), b.blinks.len());
            for (x, y) in a.fixations.iter().zip(&b.fixations) {
                prop_assert!((x.start + shift - y.start).abs() < 1e-9);
                prop_assert!((x.duration - y.duration).abs() < 1e-9);
                prop_assert_eq!((x.x, x.y, x.samples), (y.x, y.y, y.samples));
            }
            for (x, y) in a.saccades.iter().zip(&b.saccades) {
                prop_assert!((x.start + shift - y.start).abs() < 1e-9);
                prop_assert!((x.duration - y.duration).abs() < 1e-9);
                prop_assert_eq!((x.amplitude, x.direction, x.samples), (y.amplitude, y.direction, y.samples));
            }
            for (x, y) in a.blinks.iter().zip(&b.blinks) {
                prop_assert!((x.start + shift - y.start).abs() < 1e-9);
                prop_assert_eq!(x.samples, y.samples);
            }
        }

        #[test]
        fn wide_threshold_gives_single_fixation(
            pts in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 16..200)
        ) {
            let s: Vec<GazeSample> = pts.iter().enumerate()
                .map(|(i, &(x, y))| sample(i as f64 / 128.0, x, y, 1.0)).collect();
            let cfg = DetectionConfig { dispersion: 2.0, ..Default::default() };
            let ev = detect_events(&recording(s), &cfg).unwrap();
            prop_assert_eq!(ev.fixations.len(), 1);
            prop_assert!(ev.saccades.is_empty());
        }
    }
}
