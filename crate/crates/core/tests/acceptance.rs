//! End-to-end acceptance checks, one line per criterion. Runs sequentially
//! (no test harness) so the timing limits are measured without other tests
//! competing for cores.

mod common;

use std::collections::BTreeMap;
use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use common::{dual_objective, indexed_dataset, noise_magnitude_oracle, qp_oracle, rbf_gram, series};
use eyedp::dp::{
    estimate_ranges, lambda, sanitize_series, sanitize_series_with_draws, subsample, FeatureRange, FixedNoise,
    RngNoise, Sanitizer, SanitizerParams,
};
use eyedp::experiments::{loocv_folds, reid_halves, sweep, ExperimentConfig, ResultRow, Task};
use eyedp::labels::{Document, Gender};
use eyedp::learn::{balance_classes, majority_vote, solve_smo, train_svm, SvmParams};
use eyedp::stats::{ks_statistic, spearman};
use eyedp::synth::{generate, SynthSpec};
use ndarray::{array, Array2};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(start: Instant, limit: Duration) -> Result<String, String> {
    let took = start.elapsed();
    ensure(took < limit, format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(format!("{took:.2?}"))
}

fn unit_params(m: usize, eps: f64, t_max: usize, delta: f64) -> SanitizerParams {
    SanitizerParams {
        epsilon: vec![eps; m],
        subsample_window: 1,
        ranges: FeatureRange { min: vec![0.0; m], max: vec![delta; m] },
        t_max,
    }
}

fn one_series_magnitudes(eps: f64, t_max: usize, delta: f64, n: usize, seed: u64) -> Vec<f64> {
    let s = series("a", Gender::Male, Document::Comic, Array2::zeros((1, 1)));
    let p = unit_params(1, eps, t_max, delta);
    let mut noise = RngNoise(ChaCha20Rng::seed_from_u64(seed));
    (0..n).map(|_| sanitize_series_with_draws(&s, &p, &mut noise).unwrap().1[0].as_ref().unwrap().offset.abs()).collect()
}

fn median_band(mut v: Vec<f64>) -> (f64, f64) {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let half = (1.5 * (n as f64).sqrt()).ceil() as usize;
    (v[n / 2 - half], v[n / 2 + half])
}

fn identity_limit() -> Outcome {
    let start = Instant::now();
    let ds = generate(&SynthSpec::default()).unwrap();
    let ranges = estimate_ranges(&ds).unwrap();
    let deltas = ranges.deltas();
    let t = ds.series.iter().map(|s| s.len()).max().unwrap();
    let p = SanitizerParams { epsilon: vec![1.0; ds.m()], subsample_window: 1, ranges: ranges.clone(), t_max: t };
    for s in &ds.series {
        let out = sanitize_series(s, &p, &mut FixedNoise { y: 1.0, sign: 1.0 }).unwrap();
        ensure(out == *s, "forced y = 1 changed the data")?;
    }
    let mut worst = 0.0_f64;
    for seed in 0..2 {
        let (out, _) = Sanitizer::uniform(1e6, 1, ranges.clone()).run(&ds, seed).unwrap();
        for (a, b) in ds.series.iter().zip(&out.series) {
            for ((r, i), x) in a.values.indexed_iter() {
                worst = worst.max((b.values[[r, i]] - x).abs() / deltas[i]);
            }
        }
    }
    ensure(worst < 1e-3, format!("eps 1e6: max |r - p| = {worst:.2e} delta"))?;
    Ok(format!("max |r-p|/delta at eps 1e6 = {worst:.2e} over 1520 vectors; {}", within(start, Duration::from_secs(1))?))
}

fn noise_law() -> Outcome {
    let start = Instant::now();
    let (eps, t, delta) = (1.0, 4, 1.0);
    let s = series("a", Gender::Male, Document::Comic, Array2::from_shape_fn((t, 1), |(j, _)| j as f64 * 0.25));
    let p = unit_params(1, eps, t, delta);
    let mut noise = RngNoise(ChaCha20Rng::seed_from_u64(1));
    let mut mags = Vec::new();
    let (mut pos, mut total) = (0usize, 0usize);
    for _ in 0..10_000 {
        let (out, draws) = sanitize_series_with_draws(&s, &p, &mut noise).unwrap();
        let d = draws[0].as_ref().unwrap();
        for (j, &sign) in d.signs.iter().enumerate() {
            ensure(out.values[[j, 0]] == s.values[[j, 0]] + f64::from(sign) * d.offset, "offset not shared by the vector")?;
            pos += usize::from(sign > 0);
            total += 1;
        }
        mags.push(d.offset.abs());
    }
    // dataset level: one magnitude per (participant, feature)
    let ds = indexed_dataset(6, 20, 3);
    let (out, _) = Sanitizer::uniform(eps, 1, estimate_ranges(&ds).unwrap()).run(&ds, 2).unwrap();
    for pid in ds.participants() {
        for f in 0..3 {
            let diffs: Vec<f64> = ds
                .series
                .iter()
                .zip(&out.series)
                .filter(|(a, _)| a.label.participant == pid)
                .flat_map(|(a, b)| (0..20).map(move |r| (b.values[[r, f]] - a.values[[r, f]]).abs()))
                .collect();
            let spread = diffs.iter().cloned().fold(f64::MIN, f64::max) - diffs.iter().cloned().fold(f64::MAX, f64::min);
            ensure(spread <= 1e-9 * diffs[0].max(1.0), format!("{pid}/{f}: magnitudes differ by {spread}"))?;
        }
    }
    let oracle = noise_magnitude_oracle(lambda(eps, t, delta), t, 10_000, 99);
    let ks = ks_statistic(&mags, &oracle);
    let balance = pos as f64 / total as f64;
    ensure(ks < 0.05, format!("KS {ks:.4}"))?;
    ensure((0.48..=0.52).contains(&balance), format!("sign balance {balance:.4}"))?;
    Ok(format!("KS={ks:.4} (n=10^4), positive signs={balance:.4} of {total}; {}", within(start, Duration::from_secs(30))?))
}

fn composition() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for trial in 0..50 {
        let m = rng.random_range(1..=52);
        let ds = indexed_dataset(2, 3, m);
        let budget: Vec<f64> = (0..m).map(|_| rng.random_range(1e-3..1e3)).collect();
        let mut s = Sanitizer::uniform(1.0, 1, estimate_ranges(&ds).unwrap());
        s.epsilon = budget.clone();
        let (_, receipt) = s.run(&ds, trial).unwrap();
        let mut sum = 0.0;
        for e in &budget {
            sum += e;
        }
        ensure(receipt.total_epsilon == sum, format!("trial {trial}: {} != {sum}", receipt.total_epsilon))?;
    }
    let ds = indexed_dataset(2, 3, 38);
    let (_, receipt) = Sanitizer::uniform(15.0, 10, estimate_ranges(&ds).unwrap()).run(&ds, 0).unwrap();
    ensure(receipt.total_epsilon == 570.0, format!("38 x 15 gave {}", receipt.total_epsilon))?;
    Ok("50 random budget vectors exact; 38 x 15 = 570".into())
}

fn subsampling() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    for t in [1, 5, 10, 19, 600] {
        let s = series("a", Gender::Female, Document::Newspaper, Array2::from_shape_fn((t, 2), |(i, j)| (i * 2 + j) as f64));
        ensure(subsample(&s, 1, &mut rng).unwrap() == s, "w = 1 not identity")?;
        for w in [2, 7, 10, 1000] {
            let n = subsample(&s, w, &mut rng).unwrap().len();
            ensure(n == t.div_ceil(w), format!("T={t} w={w}: length {n}"))?;
        }
    }
    let (eps, delta, t, w) = (1.0, 1.0, 600, 10);
    let (full_lo, _) = median_band(one_series_magnitudes(eps, t, delta, 10_000, 5));
    let (_, sub_hi) = median_band(one_series_magnitudes(eps, t.div_ceil(w), delta, 10_000, 6));
    ensure(sub_hi < full_lo, format!("median |o|: subsampled upper band {sub_hi:.3} vs full lower band {full_lo:.3}"))?;
    Ok(format!("median |o| t_max=60 <= {sub_hi:.3} < {full_lo:.3} at t_max=600; {}", within(start, Duration::from_secs(30))?))
}

fn kkt_violation(k: &[Vec<f64>], y: &[f64], alpha: &[f64], c: f64) -> f64 {
    let n = y.len();
    let grad: Vec<f64> = (0..n).map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j] * alpha[j]).sum::<f64>() - 1.0).collect();
    let (mut up, mut low) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let v = -y[i] * grad[i];
        if (y[i] > 0.0 && alpha[i] < c - 1e-12) || (y[i] < 0.0 && alpha[i] > 1e-12) {
            up = up.max(v);
        }
        if (y[i] > 0.0 && alpha[i] > 1e-12) || (y[i] < 0.0 && alpha[i] < c - 1e-12) {
            low = low.min(v);
        }
    }
    (up - low).max(0.0)
}

fn svm_correctness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let (mut worst_obj, mut worst_kkt) = (0.0_f64, 0.0_f64);
    for case in 0..24 {
        let n = rng.random_range(6..=30);
        let d = rng.random_range(1..=4);
        let y: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let x: Vec<Vec<f64>> =
            y.iter().map(|&l| (0..d).map(|_| 0.5 * l + rng.sample::<f64, _>(StandardNormal)).collect()).collect();
        let gamma = rng.random_range(0.1..2.0);
        let c = [0.5, 1.0, 5.0][case % 3];
        let k = rbf_gram(&x, gamma);
        let flat: Vec<f64> = k.iter().flatten().copied().collect();
        let sol = solve_smo(&flat, &y, c, 1e-3, 100_000).map_err(|e| e.to_string())?;
        let (best, _) = qp_oracle(&k, &y, c);
        let gap = (dual_objective(&k, &y, &sol.alpha) - best).abs();
        let kkt = kkt_violation(&k, &y, &sol.alpha, c);
        worst_obj = worst_obj.max(gap);
        worst_kkt = worst_kkt.max(kkt);
        ensure(gap < 1e-4, format!("case {case}: objective off by {gap:.2e}"))?;
        ensure(kkt < 1e-3, format!("case {case}: KKT residual {kkt:.2e}"))?;
        let eq: f64 = sol.alpha.iter().zip(&y).map(|(a, b)| a * b).sum();
        ensure(eq.abs() < 1e-6 && sol.alpha.iter().all(|a| (0.0..=c).contains(a)), format!("case {case}: infeasible"))?;
    }
    let x = array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
    let y = [-1.0, -1.0, 1.0, 1.0];
    let model = train_svm(x.view(), &y, &SvmParams::new(1.0)).map_err(|e| e.to_string())?;
    ensure(model.predict(x.view()) == y, "XOR not separated")?;
    Ok(format!(
        "24 instances: max objective gap {worst_obj:.1e}, max KKT {worst_kkt:.1e}; XOR 4/4; {}",
        within(start, Duration::from_secs(120))?
    ))
}

fn protocol_integrity() -> Outcome {
    let ds = indexed_dataset(7, 9, 2);
    let folds = loocv_folds(&ds);
    let mut held: Vec<&str> = folds.iter().map(|f| f.held_out.as_str()).collect();
    held.sort_unstable();
    let mut want = ds.participants();
    want.sort_unstable();
    ensure(held == want, "not one fold per participant")?;
    for f in &folds {
        let mut all: Vec<usize> = f.train.iter().chain(&f.test).copied().collect();
        all.sort_unstable();
        ensure(all == (0..ds.series.len()).collect::<Vec<_>>(), "fold does not cover every series once")?;
        ensure(f.train.iter().all(|&i| ds.series[i].label.participant != f.held_out), "held-out participant in training")?;
    }
    let (train, test) = reid_halves(&ds);
    for (a, b) in train.series.iter().zip(&test.series) {
        let last_train = a.values.column(0).iter().map(|&v| v as usize % 100).max().unwrap();
        let first_test = b.values.column(0).iter().map(|&v| v as usize % 100).min().unwrap();
        ensure(last_train < first_test && a.len() + b.len() == 9, "re-id halves overlap")?;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    for _ in 0..100 {
        let k = rng.random_range(2..=5);
        let labels: Vec<usize> = (0..rng.random_range(k..200)).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
        let keep = balance_classes(&labels, k, &mut rng).map_err(|e| e.to_string())?;
        let mut counts = vec![0; k];
        for &i in &keep {
            counts[labels[i]] += 1;
        }
        ensure(counts.iter().all(|&c| c == counts[0]), format!("unbalanced {counts:?}"))?;
    }
    let mut tie = vec![3, 1, 3, 1, 2];
    for _ in 0..20 {
        tie.shuffle(&mut rng);
        ensure(majority_vote(&tie).unwrap() == 1, "tie not resolved to the smallest label")?;
    }
    Ok("LOOCV partition, disjoint halves, equal class counts, tie -> smallest label".into())
}

fn means(rows: &[ResultRow], task: Task) -> Vec<(f64, f64, f64)> {
    rows.iter()
        .filter(|r| r.task == task && r.repeat.is_none())
        .map(|r| (r.epsilon_per_feature, r.voted_accuracy, r.chance))
        .collect()
}

fn fmt_curve(c: &[(f64, f64, f64)]) -> String {
    c.iter().map(|(e, a, _)| format!("{e}:{a:.3}")).collect::<Vec<_>>().join(" ")
}

fn trend_reproduction() -> Outcome {
    let start = Instant::now();
    let ds = generate(&SynthSpec::default()).unwrap();
    let rows = sweep(&ds, &ExperimentConfig::default()).map_err(|e| e.to_string())?;
    let took = start.elapsed();
    let raw = rows.iter().filter(|r| r.repeat.is_some()).count();
    ensure(raw == 90 && rows.len() == 108, format!("{raw} raw rows, {} total", rows.len()))?;
    let gender = means(&rows, Task::Gender);
    let reid = means(&rows, Task::Reid);
    let document = means(&rows, Task::Document);
    let detail = format!("gender [{}] reid [{}] document [{}]", fmt_curve(&gender), fmt_curve(&reid), fmt_curve(&document));

    for (name, curve) in [("gender", &gender), ("reid", &reid)] {
        let e: Vec<f64> = curve.iter().map(|c| c.0).collect();
        let a: Vec<f64> = curve.iter().map(|c| c.1).collect();
        let rho = spearman(&e, &a).unwrap_or(f64::NAN);
        ensure(e.len() >= 6 && rho >= 0.7, format!("(a) {name} Spearman {rho:.3}; {detail}"))?;
    }
    let private_useful = gender.iter().zip(&document).find(|(g, d)| (g.1 - g.2).abs() <= 0.10 && d.1 >= d.2 + 0.15);
    let (eps_b, _) = private_useful.ok_or(format!("(b) no eps with gender at chance and document useful; {detail}"))?;
    let n = ds.participants().len() as f64;
    let below_half = reid.iter().filter(|r| r.1 < 0.5).map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let near_chance = reid.iter().find(|r| r.0 < below_half && (r.1 - 1.0 / n).abs() <= 0.05);
    ensure(below_half.is_finite() && near_chance.is_some(), format!("(c) reid never falls to chance; {detail}"))?;
    ensure(took < Duration::from_secs(600), format!("sweep took {took:.1?}; {detail}"))?;
    Ok(format!(
        "(b) at eps={} ; (c) reid < 0.5 at eps={below_half}, ~1/{n} at eps={}; sweep {took:.1?}; {detail}",
        eps_b.0,
        near_chance.unwrap().0
    ))
}

fn null_soundness() -> Outcome {
    let spec = SynthSpec { s_gender: 0.0, s_identity: 0.0, s_document: 0.0, ..SynthSpec::default() };
    let ds = generate(&spec).unwrap();
    let cfg = ExperimentConfig { epsilon_list: vec![1e6, 15.0], ..ExperimentConfig::default() };
    let rows = sweep(&ds, &cfg).map_err(|e| e.to_string())?;
    let n = spec.participants as f64;
    let units: BTreeMap<Task, f64> = [(Task::Gender, n), (Task::Reid, 3.0 * n), (Task::Document, 3.0 * n)].into();
    let mut parts = Vec::new();
    for task in Task::ALL {
        for (eps, acc, chance) in means(&rows, task) {
            let sigma = (chance * (1.0 - chance) / units[&task]).sqrt();
            let z = (acc - chance) / sigma;
            parts.push(format!("{task}@{eps}: {acc:.3} vs {chance:.3} (z={z:+.2})"));
            ensure(z.abs() <= 3.0, parts.join(", "))?;
        }
    }
    Ok(parts.join(", "))
}

fn determinism() -> Outcome {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_eyedp");
    let data = dir.path().join("syn.csv");
    let run = |args: &[&str]| -> Result<(), String> {
        let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        ensure(out.status.success(), String::from_utf8_lossy(&out.stderr).to_string())
    };
    let d = data.to_str().unwrap();
    run(&["synth", "--out", d, "--participants", "6", "--windows", "80", "--features", "10", "--seed", "7"])?;
    let mut files = Vec::new();
    for jobs in ["1", "2", "4"] {
        let out = dir.path().join(format!("r{jobs}.csv"));
        let o = out.to_str().unwrap();
        run(&["evaluate", d, "--out", o, "--epsilon", "30,10", "--repeats", "2", "--seed", "11", "--jobs", jobs])?;
        files.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(files.iter().all(|f| *f == files[0]), "results.csv differs across --jobs")?;
    Ok(format!("--jobs 1/2/4 byte-identical ({} bytes)", files[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("mechanism identity limit", identity_limit),
        ("noise law", noise_law),
        ("composition accounting", composition),
        ("subsampling", subsampling),
        ("SVM correctness", svm_correctness),
        ("protocol integrity", protocol_integrity),
        ("trend reproduction", trend_reproduction),
        ("null soundness", null_soundness),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
