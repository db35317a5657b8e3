//! `eyedp` command line: `extract`, `sanitize`, `synth`, `evaluate`.
//!
//! Exit codes: 0 success, 1 internal error, 2 usage or input error. Outputs
//! are written to a temporary file next to the target and renamed into place
//! only on success.

mod config;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{GammaSetting, RunConfig};

use crate::dp::{estimate_ranges, Sanitizer};
use crate::experiments::{self, ExperimentConfig, ExperimentError, Gamma, Task};
use crate::features::{self, default_catalogue, FeatureDataset, SeriesLabel};
use crate::ingest::{self, DetectionConfig};
use crate::learn::LearnError;
use crate::synth::{self, SynthSpec};

#[derive(Debug, Parser)]
#[command(name = "eyedp", version, about = "Differentially private eye-movement feature release and evaluation")]
pub struct Cli {
    /// TOML run configuration; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect gaze events and extract sliding-window features.
    Extract(ExtractArgs),
    /// Subsample and perturb a feature CSV, writing a privacy receipt.
    Sanitize(SanitizeArgs),
    /// Generate a synthetic feature CSV with planted signals.
    Synth(SynthArgs),
    /// Run the privacy/utility ε sweep and write results.csv.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Gaze CSV files, one recording each.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Window length in seconds.
    #[arg(long)]
    pub window: Option<f64>,
    /// Window step in seconds.
    #[arg(long)]
    pub step: Option<f64>,
    #[arg(long)]
    pub dispersion: Option<f64>,
    #[arg(long)]
    pub min_fixation: Option<f64>,
    #[arg(long)]
    pub blink_confidence: Option<f64>,
    #[arg(long)]
    pub min_blink: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SanitizeArgs {
    /// Feature CSV to release.
    pub input: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    /// Receipt path; defaults to the output path with extension `.receipt`.
    #[arg(long)]
    pub receipt: Option<PathBuf>,
    /// Per-feature budget ε_i (> 0).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Subsampling window.
    #[arg(long)]
    pub w: Option<usize>,
    /// Override for t_max (must cover the longest participant vector).
    #[arg(long)]
    pub t_max: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, short)]
    pub out: PathBuf,
    #[arg(long)]
    pub participants: Option<usize>,
    /// Windows per (participant, document) series.
    #[arg(long)]
    pub windows: Option<usize>,
    #[arg(long)]
    pub features: Option<usize>,
    #[arg(long)]
    pub s_gender: Option<f64>,
    #[arg(long)]
    pub s_identity: Option<f64>,
    #[arg(long)]
    pub s_document: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Feature CSV to evaluate on.
    pub input: PathBuf,
    #[arg(long, short, default_value = "results.csv")]
    pub out: PathBuf,
    /// Comma-separated subset of gender, reid, document.
    #[arg(long, value_delimiter = ',')]
    pub tasks: Option<Vec<Task>>,
    /// Comma-separated per-feature ε_i values.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Option<Vec<f64>>,
    #[arg(long)]
    pub repeats: Option<usize>,
    #[arg(long)]
    pub w: Option<usize>,
    /// Train gender and document classifiers on sanitized data.
    #[arg(long, conflicts_with = "train_clean")]
    pub train_noised: bool,
    /// Train gender and document classifiers on clean data.
    #[arg(long)]
    pub train_clean: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Internal(_) => 1,
            CliError::Usage(_) | CliError::Input(_) => 2,
        }
    }
}

fn input_err(path: &Path) -> impl Fn(String) -> CliError + '_ {
    move |m| CliError::Input(format!("{}: {m}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn check_output(path: &Path) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::Input(format!("output directory {} does not exist", parent.display())));
    }
    Ok(())
}

/// Writes through a temporary sibling file that is renamed over `path` only
/// after `fill` succeeds.
fn write_atomic<F>(path: &Path, fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<&mut tempfile::NamedTempFile>) -> Result<(), CliError>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let internal = |e: std::io::Error| CliError::Internal(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(internal)?;
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file().set_permissions(std::fs::Permissions::from_mode(0o644)).map_err(internal)?;
    }
    {
        let mut w = BufWriter::new(&mut tmp);
        fill(&mut w)?;
        w.flush().map_err(internal)?;
    }
    tmp.persist(path).map_err(|e| internal(e.error))?;
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("{name} must be > 0, got {v}")))
    }
}

fn load_config(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let Some(path) = path else { return Ok(RunConfig::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    RunConfig::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn experiment_error(e: ExperimentError) -> CliError {
    match e {
        ExperimentError::Learn(LearnError::IterationLimit(_)) | ExperimentError::Io(_) => CliError::Internal(e.to_string()),
        ExperimentError::InvalidConfig(_) => CliError::Usage(e.to_string()),
        _ => CliError::Input(e.to_string()),
    }
}

fn cmd_extract(args: &ExtractArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let defaults = DetectionConfig::default();
    let detection = DetectionConfig {
        dispersion: args.dispersion.or(cfg.detection.dispersion).unwrap_or(defaults.dispersion),
        min_fixation: args.min_fixation.or(cfg.detection.min_fixation).unwrap_or(defaults.min_fixation),
        blink_confidence: args.blink_confidence.or(cfg.detection.blink_confidence).unwrap_or(defaults.blink_confidence),
        min_blink: args.min_blink.or(cfg.detection.min_blink).unwrap_or(defaults.min_blink),
    };
    detection.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let window = positive("window", args.window.or(cfg.features.window).unwrap_or(features::DEFAULT_WINDOW))?;
    let step = positive("step", args.step.or(cfg.features.step).unwrap_or(features::DEFAULT_STEP))?;
    for p in &args.inputs {
        if !p.is_file() {
            return Err(CliError::Input(format!("{}: no such file", p.display())));
        }
    }
    check_output(&args.out)?;

    let catalogue = default_catalogue();
    let mut series = Vec::with_capacity(args.inputs.len());
    for path in &args.inputs {
        let err = input_err(path);
        let rec = ingest::parse_gaze_csv(open(path)?).map_err(|e| err(e.to_string()))?;
        let events = ingest::detect_events(&rec, &detection).map_err(|e| err(e.to_string()))?;
        let label = SeriesLabel { participant: rec.participant_id.clone(), gender: rec.gender, document: rec.document };
        let s = features::extract_features(&events, label, window, step, &catalogue).map_err(|e| err(e.to_string()))?;
        println!("{}: {} windows", path.display(), s.len());
        series.push(s);
    }
    let ds = FeatureDataset::new(catalogue, series).map_err(|e| CliError::Input(e.to_string()))?;
    println!("m={}", ds.m());
    write_atomic(&args.out, |w| features::write_feature_csv(&ds, w).map_err(|e| CliError::Internal(e.to_string())))
}

fn read_dataset(path: &Path) -> Result<FeatureDataset, CliError> {
    features::read_feature_csv(open(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cmd_sanitize(args: &SanitizeArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let epsilon = positive("epsilon", args.epsilon.or(cfg.sanitizer.epsilon).unwrap_or(15.0))?;
    let w = args.w.or(cfg.sanitizer.w).unwrap_or(10);
    if w == 0 {
        return Err(CliError::Usage("w must be >= 1".into()));
    }
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let receipt_path = args.receipt.clone().unwrap_or_else(|| args.out.with_extension("receipt"));
    check_output(&args.out)?;
    check_output(&receipt_path)?;

    let ds = read_dataset(&args.input)?;
    let ranges = estimate_ranges(&ds).map_err(|e| CliError::Input(e.to_string()))?;
    let sanitizer = Sanitizer { t_max: args.t_max.or(cfg.sanitizer.t_max), ..Sanitizer::uniform(epsilon, w, ranges) };
    let (released, receipt) = sanitizer.run(&ds, seed).map_err(|e| CliError::Input(e.to_string()))?;
    write_atomic(&args.out, |out| features::write_feature_csv(&released, out).map_err(|e| CliError::Internal(e.to_string())))?;
    write_atomic(&receipt_path, |out| receipt.write(out).map_err(|e| CliError::Internal(e.to_string())))?;
    println!("epsilon_per_feature={epsilon} total_epsilon={} t_max={}", receipt.total_epsilon, receipt.t_max);
    Ok(())
}

fn cmd_synth(args: &SynthArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let c = &cfg.synth;
    let m = args.features.or(c.features).unwrap_or(synth::DEFAULT_FEATURES);
    let base = SynthSpec::with_features(m);
    let spec = SynthSpec {
        participants: args.participants.or(c.participants).unwrap_or(base.participants),
        windows: args.windows.or(c.windows).unwrap_or(base.windows),
        s_gender: args.s_gender.or(c.s_gender).unwrap_or(base.s_gender),
        s_identity: args.s_identity.or(c.s_identity).unwrap_or(base.s_identity),
        s_document: args.s_document.or(c.s_document).unwrap_or(base.s_document),
        seed: args.seed.or(cfg.seed).unwrap_or(0),
        ..base
    };
    check_output(&args.out)?;
    let ds = synth::generate(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    write_atomic(&args.out, |w| features::write_feature_csv(&ds, w).map_err(|e| CliError::Internal(e.to_string())))?;
    println!("participants={} series={} m={}", spec.participants, ds.series.len(), ds.m());
    Ok(())
}

fn experiment_config(args: &EvaluateArgs, cfg: &RunConfig) -> Result<ExperimentConfig, CliError> {
    let defaults = ExperimentConfig::default();
    let e = &cfg.experiment;
    let tasks = match (&args.tasks, &e.tasks) {
        (Some(t), _) => t.clone(),
        (None, Some(names)) => names.iter().map(|n| n.parse::<Task>()).collect::<Result<_, _>>().map_err(CliError::Usage)?,
        (None, None) => defaults.tasks,
    };
    let gamma = match &cfg.svm.gamma {
        None => Gamma::Scale,
        Some(GammaSetting::Named(n)) if n == "scale" => Gamma::Scale,
        Some(GammaSetting::Named(n)) => return Err(CliError::Usage(format!("unknown gamma `{n}`"))),
        Some(GammaSetting::Value(g)) => Gamma::Value(*g),
    };
    let train_noised = if args.train_noised {
        true
    } else if args.train_clean {
        false
    } else {
        e.train_noised.unwrap_or(defaults.train_noised)
    };
    let epsilon_list = args.epsilon.clone().or_else(|| e.epsilon_list.clone()).unwrap_or(defaults.epsilon_list);
    for &eps in &epsilon_list {
        positive("epsilon", eps)?;
    }
    let out = ExperimentConfig {
        tasks,
        train_noised,
        epsilon_list,
        subsample_window: args.w.or(e.w).or(cfg.sanitizer.w).unwrap_or(defaults.subsample_window),
        repeats: args.repeats.or(e.repeats).unwrap_or(defaults.repeats),
        seed: args.seed.or(cfg.seed).unwrap_or(defaults.seed),
        svm: experiments::SvmSettings {
            c: cfg.svm.c.unwrap_or(defaults.svm.c),
            gamma,
            tol: cfg.svm.tol.unwrap_or(defaults.svm.tol),
            max_iter: cfg.svm.max_iter.unwrap_or(defaults.svm.max_iter),
        },
    };
    out.validate().map_err(experiment_error)?;
    Ok(out)
}

fn cmd_evaluate(args: &EvaluateArgs, cfg: &RunConfig) -> Result<(), CliError> {
    let exp = experiment_config(args, cfg)?;
    let jobs = args.jobs.or(cfg.jobs).unwrap_or(0);
    if !args.input.is_file() {
        return Err(CliError::Input(format!("{}: no such file", args.input.display())));
    }
    check_output(&args.out)?;
    let ds = read_dataset(&args.input)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let rows = pool.install(|| experiments::sweep(&ds, &exp)).map_err(experiment_error)?;
    write_atomic(&args.out, |w| experiments::write_results(&rows, w).map_err(|e| CliError::Internal(e.to_string())))?;
    for task in &exp.tasks {
        if let Some(r) = rows.iter().find(|r| r.task == *task) {
            println!("chance[{task}]={}", r.chance);
        }
    }
    println!("rows={} written to {}", rows.len(), args.out.display());
    Ok(())
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli.config.as_deref())?;
    match &cli.command {
        Command::Extract(a) => cmd_extract(a, &cfg),
        Command::Sanitize(a) => cmd_sanitize(a, &cfg),
        Command::Synth(a) => cmd_synth(a, &cfg),
        Command::Evaluate(a) => cmd_evaluate(a, &cfg),
    }
}

/// Parses `std::env::args`, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
