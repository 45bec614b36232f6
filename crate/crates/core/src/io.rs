//! Delimited-text input and output.

use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::Prediction;

fn reader(path: &Path, delim: u8) -> Result<csv::Reader<std::fs::File>> {
    Ok(csv::ReaderBuilder::new()
        .delimiter(delim)
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?)
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    let v: f64 = cell.parse().map_err(|_| Error::Input {
        row,
        column: column.to_string(),
        message: format!("`{cell}` is not a number"),
    })?;
    if !v.is_finite() {
        return Err(Error::Input {
            row,
            column: column.to_string(),
            message: "non-finite value".into(),
        });
    }
    Ok(v)
}

/// Reads `predictors` (all non-response columns when `None`) and the
/// response. Row numbers in errors count the header as row 1.
fn read_table(path: &Path, delim: u8, response: Option<&str>, predictors: Option<&[String]>) -> Result<Dataset> {
    let mut rdr = reader(path, delim)?;
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let find = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Schema(format!("column `{name}` not found in {}", path.display())))
    };
    let resp_idx = response.map(find).transpose()?;
    let pred_idx: Vec<usize> = match predictors {
        Some(names) => names.iter().map(|n| find(n)).collect::<Result<_>>()?,
        None => (0..header.len()).filter(|&c| Some(c) != resp_idx).collect(),
    };
    let mut columns = vec![Vec::new(); pred_idx.len()];
    let mut y = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = r + 2;
        for (col, &c) in columns.iter_mut().zip(&pred_idx) {
            let cell = rec.get(c).ok_or_else(|| Error::Input {
                row,
                column: header[c].clone(),
                message: "missing cell".into(),
            })?;
            col.push(parse_cell(cell, row, &header[c])?);
        }
        match resp_idx {
            Some(c) => {
                let cell = rec.get(c).ok_or_else(|| Error::Input {
                    row,
                    column: header[c].clone(),
                    message: "missing cell".into(),
                })?;
                y.push(parse_cell(cell, row, &header[c])?);
            }
            None => y.push(0.0),
        }
    }
    let names = pred_idx.iter().map(|&c| header[c].clone()).collect();
    Dataset::new(columns, y, names)
}

/// Training data: `response` plus every other column as a predictor.
pub fn read_dataset(path: &Path, response: &str, delim: u8) -> Result<Dataset> {
    read_table(path, delim, Some(response), None)
}

/// Prediction input: exactly the named predictor columns (others ignored).
/// The response is set to zero.
pub fn read_predictors(path: &Path, predictors: &[String], delim: u8) -> Result<Dataset> {
    read_table(path, delim, None, Some(predictors))
}

pub fn predictions_to_delimited(preds: &[Prediction], delim: u8) -> String {
    let d = char::from(delim);
    let classification = preds.first().is_some_and(|p| p.probability.is_some());
    let mut s = if classification {
        format!("region{d}linear_predictor{d}probability{d}label\n")
    } else {
        format!("region{d}prediction\n")
    };
    for p in preds {
        match (p.probability, p.label) {
            (Some(prob), Some(label)) => s.push_str(&format!("{}{d}{:?}{d}{:?}{d}{}\n", p.region, p.value, prob, label)),
            _ => s.push_str(&format!("{}{d}{:?}\n", p.region, p.value)),
        }
    }
    s
}
