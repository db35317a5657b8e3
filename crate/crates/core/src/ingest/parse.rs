use std::io::{Read, Write};

use super::{GazeRecording, GazeSample, IngestError};
use crate::labels::{Document, Gender};

const COLUMNS: [&str; 5] = ["t", "x", "y", "pupil", "confidence"];

/// Parses a gaze CSV: a `# key=value` metadata block (participant, document,
/// gender) followed by the header `t,x,y,pupil,confidence` and one sample per row.
///
/// Row numbers in errors count data rows from 1.
pub fn parse_gaze_csv<R: Read>(mut source: R) -> Result<GazeRecording, IngestError> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;

    let mut participant = None;
    let mut document = None;
    let mut gender = None;
    let mut body_start = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim();
        if let Some(meta) = trimmed.strip_prefix('#') {
            let (key, value) = meta
                .trim()
                .split_once('=')
                .ok_or_else(|| IngestError::InvalidMetadata(trimmed.to_string()))?;
            let value = value.trim();
            match key.trim() {
                "participant" => participant = Some(value.to_string()),
                "document" => {
                    document = Some(value.parse::<Document>().map_err(IngestError::InvalidMetadata)?)
                }
                "gender" => gender = Some(value.parse::<Gender>().map_err(IngestError::InvalidMetadata)?),
                other => return Err(IngestError::InvalidMetadata(format!("unknown key `{other}`"))),
            }
            body_start += line.len();
        } else if trimmed.is_empty() {
            body_start += line.len();
        } else {
            break;
        }
    }
    let participant = participant.ok_or(IngestError::MissingMetadata("participant"))?;
    let document = document.ok_or(IngestError::MissingMetadata("document"))?;
    let gender = gender.ok_or(IngestError::MissingMetadata("gender"))?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text[body_start..].as_bytes());

    let header = reader
        .headers()
        .map_err(|e| IngestError::Malformed { row: 0, message: e.to_string() })?
        .clone();
    for (i, column) in COLUMNS.iter().enumerate() {
        if header.get(i) != Some(column) {
            return Err(IngestError::MissingColumn { row: 0, column: column.to_string() });
        }
    }
    if header.len() != COLUMNS.len() {
        return Err(IngestError::Malformed {
            row: 0,
            message: format!("expected {} columns, found {}", COLUMNS.len(), header.len()),
        });
    }

    let mut samples = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| IngestError::Malformed { row, message: e.to_string() })?;
        let mut values = [0.0; 5];
        for (idx, (slot, column)) in values.iter_mut().zip(COLUMNS).enumerate() {
            let field = record
                .get(idx)
                .ok_or_else(|| IngestError::MissingColumn { row, column: column.to_string() })?;
            *slot = field.parse::<f64>().map_err(|e| IngestError::Malformed {
                row,
                message: format!("column `{column}`: {e}"),
            })?;
        }
        if record.len() > COLUMNS.len() {
            return Err(IngestError::Malformed { row, message: "too many fields".into() });
        }
        samples.push(GazeSample {
            t: values[0],
            x: values[1],
            y: values[2],
            pupil: values[3],
            confidence: values[4],
        });
    }
    GazeRecording::new(participant, document, gender, samples)
}

/// Writes a recording in the format read by [`parse_gaze_csv`].
pub fn write_gaze_csv<W: Write>(rec: &GazeRecording, mut out: W) -> std::io::Result<()> {
    writeln!(out, "# participant={}", rec.participant_id)?;
    writeln!(out, "# document={}", rec.document)?;
    writeln!(out, "# gender={}", rec.gender)?;
    writeln!(out, "{}", COLUMNS.join(","))?;
    for s in rec.samples() {
        writeln!(out, "{},{},{},{},{}", s.t, s.x, s.y, s.pupil, s.confidence)?;
    }
    Ok(())
}
