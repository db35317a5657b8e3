use ndarray::{concatenate, s, Array2, ArrayView2, Axis};
use rayon::prelude::*;

use super::protocol::{chance_level, half_split, loocv_folds, Fold};
use super::{ExperimentConfig, ExperimentError, Gamma, Result, ResultRow, SvmSettings, Task};
use crate::dp::{
    estimate_ranges_over, sanitize_dataset, subsample, subsampled_len, FeatureRange, RangeSource, Sanitizer,
};
use crate::features::{FeatureDataset, FeatureSeries};
use crate::labels::{Document, Gender};
use crate::learn::{balance_classes, fit_standardizer, scale_gamma, train_multiclass, MulticlassModel, StandardizationParams};
use crate::seed::{derive, rng, tag};

struct Classifier {
    scaler: StandardizationParams,
    model: MulticlassModel,
}

impl Classifier {
    /// Balance, standardize on the kept rows, then train.
    fn fit(x: &Array2<f64>, y: &[usize], n_classes: usize, svm: &SvmSettings, seed: u64) -> Result<Self> {
        let keep = balance_classes(y, n_classes, &mut rng(seed, &[tag("balance")]))?;
        let xb = x.select(Axis(0), &keep);
        let yb: Vec<usize> = keep.iter().map(|&i| y[i]).collect();
        let scaler = fit_standardizer(xb.view())?;
        let xs = scaler.apply(xb.view());
        let gamma = match svm.gamma {
            Gamma::Scale => scale_gamma(xs.view()),
            Gamma::Value(g) => g,
        };
        let model = train_multiclass(xs.view(), &yb, &svm.params(gamma))?;
        Ok(Self { scaler, model })
    }

    fn predict(&self, x: ArrayView2<'_, f64>) -> Vec<usize> {
        self.model.predict(self.scaler.apply(x).view())
    }
}

/// One voting unit: its true label and the per-window predictions.
struct Unit {
    truth: usize,
    preds: Vec<usize>,
}

fn row(task: Task, eps: f64, m: usize, repeat: usize, units: &[&Unit]) -> Result<ResultRow> {
    let mut hits = 0;
    let mut windows = 0;
    let mut voted = 0;
    for u in units {
        hits += u.preds.iter().filter(|&&p| p == u.truth).count();
        windows += u.preds.len();
        if crate::learn::majority_vote(&u.preds)? == u.truth {
            voted += 1;
        }
    }
    let truths: Vec<usize> = units.iter().map(|u| u.truth).collect();
    Ok(ResultRow {
        task,
        epsilon_per_feature: eps,
        total_epsilon: vec![eps; m].iter().sum(),
        repeat: Some(repeat),
        voted_accuracy: voted as f64 / units.len() as f64,
        window_accuracy: hits as f64 / windows as f64,
        chance: chance_level(&truths),
    })
}

fn stack<'a>(parts: impl IntoIterator<Item = ArrayView2<'a, f64>>) -> Array2<f64> {
    let views: Vec<ArrayView2<'a, f64>> = parts.into_iter().collect();
    concatenate(Axis(0), &views).expect("series share the catalogue width")
}

fn subsample_all(series: &[&FeatureSeries], w: usize, seed: u64) -> Result<Vec<FeatureSeries>> {
    series
        .iter()
        .enumerate()
        .map(|(j, s)| Ok(subsample(s, w, &mut rng(seed, &[j as u64]))?))
        .collect()
}

fn loocv_label(task: Task, s: &FeatureSeries) -> usize {
    match task {
        Task::Gender => s.label.gender.index(),
        _ => s.label.document.index(),
    }
}

fn n_classes(task: Task) -> usize {
    match task {
        Task::Gender => Gender::ALL.len(),
        Task::Document => Document::ALL.len(),
        Task::Reid => unreachable!("not a leave-one-out task"),
    }
}

/// Gender votes once over all windows of the held-out participant; document
/// votes once per held-out series.
fn loocv_units(task: Task, clf: &Classifier, test: &[&FeatureSeries]) -> Vec<Unit> {
    match task {
        Task::Gender => {
            let x = stack(test.iter().map(|s| s.values.view()));
            vec![Unit { truth: loocv_label(task, test[0]), preds: clf.predict(x.view()) }]
        }
        _ => test.iter().map(|s| Unit { truth: loocv_label(task, s), preds: clf.predict(s.values.view()) }).collect(),
    }
}

fn fit_on(task: Task, train: &[&FeatureSeries], svm: &SvmSettings, seed: u64) -> Result<Classifier> {
    let x = stack(train.iter().map(|s| s.values.view()));
    let y: Vec<usize> = train.iter().flat_map(|s| std::iter::repeat_n(loocv_label(task, s), s.len())).collect();
    Classifier::fit(&x, &y, n_classes(task), svm, seed)
}

fn check_loocv(task: Task, ds: &FeatureDataset) -> Result<()> {
    let participants = ds.participants();
    match task {
        Task::Gender => {
            let per_gender = Gender::ALL.map(|g| {
                participants
                    .iter()
                    .filter(|p| ds.series.iter().any(|s| s.label.participant == **p && s.label.gender == g))
                    .count()
            });
            let fewest = per_gender.into_iter().min().unwrap_or(0);
            if fewest < 2 {
                return Err(ExperimentError::InsufficientParticipants {
                    task,
                    needed: "at least 2 participants per gender".into(),
                    found: fewest,
                });
            }
        }
        _ => {
            if participants.len() < 2 {
                return Err(ExperimentError::InsufficientParticipants {
                    task,
                    needed: "at least 2 participants".into(),
                    found: participants.len(),
                });
            }
            for p in &participants {
                for d in Document::ALL {
                    if !ds.series.iter().any(|s| s.label.participant == *p && s.label.document == d) {
                        return Err(ExperimentError::MissingDocument {
                            participant: p.to_string(),
                            document: d.to_string(),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

fn picks<'a>(ds: &'a FeatureDataset, idx: &[usize]) -> Vec<&'a FeatureSeries> {
    idx.iter().map(|&i| &ds.series[i]).collect()
}

/// Sanitize the whole dataset per (ε, repeat), then cross-validate on it.
fn loocv_noised(task: Task, ds: &FeatureDataset, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let folds = loocv_folds(ds);
    let grid: Vec<(usize, usize)> =
        (0..cfg.epsilon_list.len()).flat_map(|e| (0..cfg.repeats).map(move |r| (e, r))).collect();
    let cell_seed = |e: usize, r: usize| derive(cfg.seed, &[tag(task.as_str()), cfg.epsilon_list[e].to_bits(), r as u64]);

    let released: Vec<FeatureDataset> = grid
        .par_iter()
        .map(|&(e, r)| {
            let seed = derive(cell_seed(e, r), &[tag("sanitize")]);
            Ok(sanitize_dataset(ds, cfg.epsilon_list[e], cfg.subsample_window, seed)?.0)
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize)> = (0..grid.len()).flat_map(|g| (0..folds.len()).map(move |f| (g, f))).collect();
    let units: Vec<Vec<Unit>> = cells
        .par_iter()
        .map(|&(g, f)| {
            let (e, r) = grid[g];
            let data = &released[g];
            let clf = fit_on(task, &picks(data, &folds[f].train), &cfg.svm, derive(cell_seed(e, r), &[f as u64]))?;
            Ok(loocv_units(task, &clf, &picks(data, &folds[f].test)))
        })
        .collect::<Result<_>>()?;

    let per_grid = units.chunks(folds.len());
    grid.iter()
        .zip(per_grid)
        .map(|(&(e, r), chunk)| row(task, cfg.epsilon_list[e], ds.m(), r, &chunk.iter().flatten().collect::<Vec<_>>()))
        .collect()
}

/// Longest participant vector after subsampling, over the whole dataset.
fn dataset_t_max(ds: &FeatureDataset, w: usize) -> usize {
    ds.participants()
        .iter()
        .map(|p| ds.series.iter().filter(|s| s.label.participant == *p).map(|s| subsampled_len(s.len(), w)).sum())
        .max()
        .unwrap_or(0)
}

fn sanitizer(eps: f64, cfg: &ExperimentConfig, ranges: &FeatureRange, t_max: Option<usize>) -> Sanitizer {
    Sanitizer {
        range_source: RangeSource::Training,
        t_max,
        ..Sanitizer::uniform(eps, cfg.subsample_window, ranges.clone())
    }
}

/// Train once per (repeat, fold) on clean subsampled data; ranges come from
/// the clean training portion.
fn loocv_clean(task: Task, ds: &FeatureDataset, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let folds = loocv_folds(ds);
    let t_max = dataset_t_max(ds, cfg.subsample_window);
    let cells: Vec<(usize, usize)> = (0..cfg.repeats).flat_map(|r| (0..folds.len()).map(move |f| (r, f))).collect();
    let per_cell: Vec<Vec<Vec<Unit>>> = cells
        .par_iter()
        .map(|&(r, f)| {
            let fold: &Fold = &folds[f];
            let train = picks(ds, &fold.train);
            let fit_seed = derive(cfg.seed, &[tag(task.as_str()), tag("train"), r as u64, f as u64]);
            let reduced = subsample_all(&train, cfg.subsample_window, derive(fit_seed, &[tag("subsample")]))?;
            let clf = fit_on(task, &reduced.iter().collect::<Vec<_>>(), &cfg.svm, fit_seed)?;
            let ranges = estimate_ranges_over(&ds.catalogue, train.iter().copied())?;
            let test = FeatureDataset {
                catalogue: ds.catalogue.clone(),
                series: picks(ds, &fold.test).into_iter().cloned().collect(),
            };
            cfg.epsilon_list
                .iter()
                .map(|&eps| {
                    let seed = derive(cfg.seed, &[tag(task.as_str()), eps.to_bits(), r as u64, f as u64]);
                    let (released, _) = sanitizer(eps, cfg, &ranges, Some(t_max)).run(&test, seed)?;
                    Ok(loocv_units(task, &clf, &released.series.iter().collect::<Vec<_>>()))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    for (e, &eps) in cfg.epsilon_list.iter().enumerate() {
        for r in 0..cfg.repeats {
            let cell: Vec<&Unit> = (0..folds.len()).flat_map(|f| &per_cell[r * folds.len() + f][e]).collect();
            out.push(row(task, eps, ds.m(), r, &cell)?);
        }
    }
    Ok(out)
}

pub fn run_gender(ds: &FeatureDataset, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    check_loocv(Task::Gender, ds)?;
    if cfg.train_noised {
        loocv_noised(Task::Gender, ds, cfg)
    } else {
        loocv_clean(Task::Gender, ds, cfg)
    }
}

pub fn run_document(ds: &FeatureDataset, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    check_loocv(Task::Document, ds)?;
    if cfg.train_noised {
        loocv_noised(Task::Document, ds, cfg)
    } else {
        loocv_clean(Task::Document, ds, cfg)
    }
}

fn rows_slice(s: &FeatureSeries, range: std::ops::Range<usize>) -> FeatureSeries {
    FeatureSeries { label: s.label.clone(), values: s.values.slice(s![range, ..]).to_owned(), windowing: s.windowing }
}

/// First and second halves of every series, see [`half_split`].
pub fn reid_halves(ds: &FeatureDataset) -> (FeatureDataset, FeatureDataset) {
    let (first, second) = ds
        .series
        .iter()
        .map(|s| {
            let (a, b) = half_split(s.len());
            (rows_slice(s, a), rows_slice(s, b))
        })
        .unzip();
    let with = |series| FeatureDataset { catalogue: ds.catalogue.clone(), series };
    (with(first), with(second))
}

/// Clean first halves train a one-class-per-participant model; sanitized
/// second halves are voted per (participant, document).
pub fn run_reid(ds: &FeatureDataset, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let participants = ds.participants();
    if participants.len() < 2 {
        return Err(ExperimentError::InsufficientParticipants {
            task: Task::Reid,
            needed: "at least 2 participants".into(),
            found: participants.len(),
        });
    }
    if let Some(s) = ds.series.iter().find(|s| s.len() < 2) {
        return Err(ExperimentError::InsufficientWindows {
            participant: s.label.participant.clone(),
            document: s.label.document.to_string(),
            windows: s.len(),
        });
    }
    let identity: Vec<usize> = ds
        .series
        .iter()
        .map(|s| participants.iter().position(|p| *p == s.label.participant).unwrap())
        .collect();
    let (train, test) = reid_halves(ds);
    let first = train.series;
    let ranges = estimate_ranges_over(&ds.catalogue, first.iter())?;
    let n = participants.len();

    let models: Vec<Classifier> = (0..cfg.repeats)
        .into_par_iter()
        .map(|r| {
            let fit_seed = derive(cfg.seed, &[tag(Task::Reid.as_str()), tag("train"), r as u64]);
            let reduced = subsample_all(&first.iter().collect::<Vec<_>>(), cfg.subsample_window, derive(fit_seed, &[tag("subsample")]))?;
            let x = stack(reduced.iter().map(|s| s.values.view()));
            let y: Vec<usize> =
                reduced.iter().zip(&identity).flat_map(|(s, &k)| std::iter::repeat_n(k, s.len())).collect();
            Classifier::fit(&x, &y, n, &cfg.svm, fit_seed)
        })
        .collect::<Result<_>>()?;

    let grid: Vec<(usize, usize)> =
        (0..cfg.epsilon_list.len()).flat_map(|e| (0..cfg.repeats).map(move |r| (e, r))).collect();
    grid.par_iter()
        .map(|&(e, r)| {
            let eps = cfg.epsilon_list[e];
            let seed = derive(cfg.seed, &[tag(Task::Reid.as_str()), eps.to_bits(), r as u64]);
            let (released, _) = sanitizer(eps, cfg, &ranges, None).run(&test, seed)?;
            let units: Vec<Unit> = released
                .series
                .iter()
                .zip(&identity)
                .map(|(s, &k)| Unit { truth: k, preds: models[r].predict(s.values.view()) })
                .collect();
            row(Task::Reid, eps, ds.m(), r, &units.iter().collect::<Vec<_>>())
        })
        .collect()
}

pub fn run_task(task: Task, ds: &FeatureDataset, cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    match task {
        Task::Gender => run_gender(ds, cfg),
        Task::Reid => run_reid(ds, cfg),
        Task::Document => run_document(ds, cfg),
    }
}
