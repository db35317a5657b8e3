//! TOML run configuration. Every key is optional; command-line flags win
//! over the file, the file wins over built-in defaults.
//!
//! ```toml
//! seed = 1
//! jobs = 4
//!
//! [detection]
//! dispersion = 0.05
//! min_fixation = 0.1
//! blink_confidence = 0.5
//! min_blink = 0.1
//!
//! [features]
//! window = 30.0
//! step = 0.5
//!
//! [sanitizer]
//! epsilon = 15.0
//! w = 10
//! t_max = 200
//!
//! [svm]
//! c = 1.0
//! gamma = "scale"   # or a number
//! tol = 0.001
//! max_iter = 100000
//!
//! [experiment]
//! tasks = ["gender", "reid", "document"]
//! epsilon_list = [100.0, 50.0, 30.0, 20.0, 15.0, 10.0]
//! repeats = 5
//! w = 10
//! train_noised = true
//!
//! [synth]
//! participants = 20
//! windows = 600
//! features = 38
//! s_gender = 0.3
//! s_identity = 1.5
//! s_document = 1.5
//! ```

use serde::Deserialize;

#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    #[serde(default)]
    pub detection: DetectionSection,
    #[serde(default)]
    pub features: FeaturesSection,
    #[serde(default)]
    pub sanitizer: SanitizerSection,
    #[serde(default)]
    pub svm: SvmSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
    #[serde(default)]
    pub synth: SynthSection,
}

#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct DetectionSection {
    pub dispersion: Option<f64>,
    pub min_fixation: Option<f64>,
    pub blink_confidence: Option<f64>,
    pub min_blink: Option<f64>,
}

#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FeaturesSection {
    pub window: Option<f64>,
    pub step: Option<f64>,
}

#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SanitizerSection {
    pub epsilon: Option<f64>,
    pub w: Option<usize>,
    pub t_max: Option<usize>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum GammaSetting {
    Named(String),
    Value(f64),
}

#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SvmSection {
    pub c: Option<f64>,
    pub gamma: Option<GammaSetting>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub tasks: Option<Vec<String>>,
    pub epsilon_list: Option<Vec<f64>>,
    pub repeats: Option<usize>,
    pub w: Option<usize>,
    pub train_noised: Option<bool>,
}

#[derive(Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SynthSection {
    pub participants: Option<usize>,
    pub windows: Option<usize>,
    pub features: Option<usize>,
    pub s_gender: Option<f64>,
    pub s_identity: Option<f64>,
    pub s_document: Option<f64>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }
}
