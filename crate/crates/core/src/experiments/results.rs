use std::io::{Read, Write};

use super::{ExperimentError, Result, Task};

pub const RESULTS_HEADER: &str = "task,epsilon_per_feature,total_epsilon,repeat,voted_accuracy,window_accuracy,chance";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub task: Task,
    pub epsilon_per_feature: f64,
    pub total_epsilon: f64,
    /// `None` for a mean-over-repeats row.
    pub repeat: Option<usize>,
    pub voted_accuracy: f64,
    pub window_accuracy: f64,
    pub chance: f64,
}

/// One mean row per (task, ε) in order of first appearance; the repeat rows
/// are averaged in their given order.
pub fn mean_rows(rows: &[ResultRow]) -> Vec<ResultRow> {
    let mut keys: Vec<(Task, u64)> = Vec::new();
    for r in rows.iter().filter(|r| r.repeat.is_some()) {
        let k = (r.task, r.epsilon_per_feature.to_bits());
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(task, bits)| {
            let group: Vec<&ResultRow> = rows
                .iter()
                .filter(|r| r.repeat.is_some() && r.task == task && r.epsilon_per_feature.to_bits() == bits)
                .collect();
            let n = group.len() as f64;
            let avg = |f: fn(&ResultRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            ResultRow {
                task,
                epsilon_per_feature: f64::from_bits(bits),
                total_epsilon: group[0].total_epsilon,
                repeat: None,
                voted_accuracy: avg(|r| r.voted_accuracy),
                window_accuracy: avg(|r| r.window_accuracy),
                chance: avg(|r| r.chance),
            }
        })
        .collect()
}

pub fn write_results<W: Write>(rows: &[ResultRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{RESULTS_HEADER}")?;
    for r in rows {
        let repeat = r.repeat.map_or_else(|| "mean".to_string(), |k| k.to_string());
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.task, r.epsilon_per_feature, r.total_epsilon, repeat, r.voted_accuracy, r.window_accuracy, r.chance
        )?;
    }
    Ok(())
}

pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut reader = csv::ReaderBuilder::new().from_reader(input);
    let header = reader.headers().map_err(|e| ExperimentError::Results(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>().join(",") != RESULTS_HEADER {
        return Err(ExperimentError::Results(format!("unexpected header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut rows = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let line = n + 2;
        let rec = rec.map_err(|e| ExperimentError::Results(format!("line {line}: {e}")))?;
        let err = |m: String| ExperimentError::Results(format!("line {line}: {m}"));
        let num = |k: usize| rec[k].parse::<f64>().map_err(|e| err(format!("column {k}: {e}")));
        rows.push(ResultRow {
            task: rec[0].parse().map_err(err)?,
            epsilon_per_feature: num(1)?,
            total_epsilon: num(2)?,
            repeat: match &rec[3] {
                "mean" => None,
                k => Some(k.parse().map_err(|e| err(format!("repeat: {e}")))?),
            },
            voted_accuracy: num(4)?,
            window_accuracy: num(5)?,
            chance: num(6)?,
        });
    }
    Ok(rows)
}
