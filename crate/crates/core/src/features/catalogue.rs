use std::collections::HashSet;

use super::wordbook::DirectionAlphabet;
use super::FeatureError;

/// How a feature column is computed from the events inside one window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extractor {
    FixationRate,
    FixationDurationMean,
    FixationDurationVar,
    FixationDurationMax,
    FixationDurationMin,
    SaccadeRate,
    SaccadeDurationMean,
    SaccadeDurationVar,
    SaccadeAmplitudeMean,
    SaccadeAmplitudeVar,
    SaccadeAmplitudeMax,
    BlinkRate,
    BlinkDurationMean,
    PupilMean,
    PupilVar,
    PupilMin,
    PupilMax,
    /// Count of the n-gram at lexicographic position `gram`.
    Wordbook { n: usize, gram: usize },
    /// Number of distinct n-grams observed.
    WordbookDiversity { n: usize },
    /// Values supplied from outside (synthetic data, an imported CSV with
    /// unknown columns); cannot be computed from events.
    External,
}

/// Theoretical or previously estimated range of a feature.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeHint {
    pub lo: f64,
    pub hi: f64,
    pub unit: &'static str,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureEntry {
    pub name: String,
    pub extractor: Extractor,
    pub range: Option<RangeHint>,
}

/// Ordered list of feature columns shared by every series of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCatalogue {
    entries: Vec<FeatureEntry>,
    alphabet: DirectionAlphabet,
}

const FIXATION_DURATION: (f64, f64) = (0.11, 2.75);
const PUPIL_DIAMETER: (f64, f64) = (21.9, 133.9);

impl FeatureCatalogue {
    pub fn new(entries: Vec<FeatureEntry>, alphabet: DirectionAlphabet) -> Result<Self, FeatureError> {
        if entries.is_empty() {
            return Err(FeatureError::InvalidCatalogue("catalogue has no features".into()));
        }
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.name.as_str()) {
                return Err(FeatureError::InvalidCatalogue(format!("duplicate feature `{}`", e.name)));
            }
            if e.name.is_empty() || e.name.contains([',', '\n', '"']) {
                return Err(FeatureError::InvalidCatalogue(format!("invalid feature name `{}`", e.name)));
            }
        }
        Ok(Self { entries, alphabet })
    }

    /// Columns of externally supplied values. Names found in the default
    /// catalogue keep their extractor and range hint.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, FeatureError> {
        let defaults = default_catalogue();
        let entries = names
            .iter()
            .map(|n| {
                let name = n.as_ref();
                defaults.entries.iter().find(|e| e.name == name).cloned().unwrap_or(FeatureEntry {
                    name: name.to_string(),
                    extractor: Extractor::External,
                    range: None,
                })
            })
            .collect();
        Self::new(entries, defaults.alphabet)
    }

    pub fn entries(&self) -> &[FeatureEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.name.as_str())
    }

    pub fn alphabet(&self) -> DirectionAlphabet {
        self.alphabet
    }
}

/// Per-window fixation, saccade, blink and pupil statistics followed by
/// saccade-direction wordbook counts over the cardinal alphabet: 17 scalar
/// features, 16 bigram counts, bigram diversity and 4 unigram counts (m = 38).
pub fn default_catalogue() -> FeatureCatalogue {
    use Extractor::*;
    let fix = Some(RangeHint { lo: FIXATION_DURATION.0, hi: FIXATION_DURATION.1, unit: "s" });
    let pupil = Some(RangeHint { lo: PUPIL_DIAMETER.0, hi: PUPIL_DIAMETER.1, unit: "px" });
    let scalar = [
        ("fixation_rate", FixationRate, None),
        ("fixation_duration_mean", FixationDurationMean, fix.clone()),
        ("fixation_duration_var", FixationDurationVar, None),
        ("fixation_duration_max", FixationDurationMax, fix.clone()),
        ("fixation_duration_min", FixationDurationMin, fix),
        ("saccade_rate", SaccadeRate, None),
        ("saccade_duration_mean", SaccadeDurationMean, None),
        ("saccade_duration_var", SaccadeDurationVar, None),
        ("saccade_amplitude_mean", SaccadeAmplitudeMean, None),
        ("saccade_amplitude_var", SaccadeAmplitudeVar, None),
        ("saccade_amplitude_max", SaccadeAmplitudeMax, None),
        ("blink_rate", BlinkRate, None),
        ("blink_duration_mean", BlinkDurationMean, None),
        ("pupil_mean", PupilMean, pupil.clone()),
        ("pupil_var", PupilVar, None),
        ("pupil_min", PupilMin, pupil.clone()),
        ("pupil_max", PupilMax, pupil),
    ];
    let alphabet = DirectionAlphabet::CARDINAL;
    let mut entries: Vec<FeatureEntry> = scalar
        .into_iter()
        .map(|(name, extractor, range)| FeatureEntry { name: name.to_string(), extractor, range })
        .collect();
    let bigrams = alphabet.len().pow(2);
    entries.extend((0..bigrams).map(|gram| FeatureEntry {
        name: format!("wordbook2_{}", alphabet.gram_name(2, gram)),
        extractor: Wordbook { n: 2, gram },
        range: None,
    }));
    entries.push(FeatureEntry {
        name: "wordbook2_diversity".into(),
        extractor: WordbookDiversity { n: 2 },
        range: None,
    });
    entries.extend((0..alphabet.len()).map(|gram| FeatureEntry {
        name: format!("wordbook1_{}", alphabet.gram_name(1, gram)),
        extractor: Wordbook { n: 1, gram },
        range: None,
    }));
    FeatureCatalogue::new(entries, alphabet).expect("default catalogue is well-formed")
}
