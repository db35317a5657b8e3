//! Feature CSV: `participant,document,gender,window_index,<feature names…>`,
//! one row per window, series in dataset order.

use std::io::{Read, Write};

use ndarray::Array2;

use super::{FeatureCatalogue, FeatureDataset, FeatureError, FeatureSeries, SeriesLabel};

const KEY_COLUMNS: [&str; 4] = ["participant", "document", "gender", "window_index"];

pub fn write_feature_csv<W: Write>(ds: &FeatureDataset, out: W) -> Result<(), FeatureError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let header: Vec<&str> = KEY_COLUMNS.iter().copied().chain(ds.catalogue.names()).collect();
    w.write_record(&header).map_err(csv_err)?;
    let mut record: Vec<String> = Vec::with_capacity(header.len());
    for s in &ds.series {
        for (j, row) in s.values.rows().into_iter().enumerate() {
            record.clear();
            record.push(s.label.participant.clone());
            record.push(s.label.document.to_string());
            record.push(s.label.gender.to_string());
            record.push(j.to_string());
            record.extend(row.iter().map(|v| format!("{v:?}")));
            w.write_record(&record).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> FeatureError {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => FeatureError::Io(io),
        kind => FeatureError::Csv { line, message: format!("{kind:?}") },
    }
}

pub fn read_feature_csv<R: Read>(input: R) -> Result<FeatureDataset, FeatureError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers().map_err(csv_err)?.clone();
    for (i, key) in KEY_COLUMNS.iter().enumerate() {
        if header.get(i) != Some(key) {
            return Err(FeatureError::Csv { line: 1, message: format!("expected column `{key}` at position {i}") });
        }
    }
    let names: Vec<&str> = header.iter().skip(KEY_COLUMNS.len()).collect();
    let catalogue = FeatureCatalogue::from_names(&names)?;
    let m = catalogue.len();

    let mut series: Vec<(SeriesLabel, Vec<f64>, usize)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let bad = |message: String| FeatureError::Csv { line, message };
        let label = SeriesLabel {
            participant: record[0].to_string(),
            document: record[1].parse().map_err(bad)?,
            gender: record[2].parse().map_err(bad)?,
        };
        let index: usize = record[3].parse().map_err(|e| bad(format!("window_index: {e}")))?;
        let current = match series.last_mut() {
            Some(s) if s.0.participant == label.participant && s.0.document == label.document => s,
            _ => {
                series.push((label.clone(), Vec::new(), 0));
                series.last_mut().unwrap()
            }
        };
        if current.0.gender != label.gender {
            return Err(bad("gender changes within a series".into()));
        }
        if index != current.2 {
            return Err(bad(format!("expected window_index {}, found {index}", current.2)));
        }
        current.2 += 1;
        for (c, field) in record.iter().skip(KEY_COLUMNS.len()).enumerate() {
            let v: f64 = field.parse().map_err(|e| bad(format!("column `{}`: {e}", names[c])))?;
            current.1.push(v);
        }
    }

    let series = series
        .into_iter()
        .map(|(label, data, rows)| FeatureSeries {
            label,
            values: Array2::from_shape_vec((rows, m), data).expect("row width checked by csv reader"),
            windowing: None,
        })
        .collect();
    FeatureDataset::new(catalogue, series)
}
