use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use super::{Label, LabeledDataset};
use crate::error::{Error, Result};

/// Class totals of the canonical UCI skin segmentation file.
pub const SKIN_POSITIVES: usize = 50859;
pub const SKIN_NEGATIVES: usize = 194198;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LabelColumn {
    #[default]
    Last,
    Index(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsvOptions {
    pub label_column: LabelColumn,
    /// Label cell value (after trimming) that marks the positive class.
    pub positive_value: String,
    pub has_header: bool,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions {
            label_column: LabelColumn::Last,
            positive_value: "1".into(),
            has_header: true,
        }
    }
}

/// Comma-separated numeric features plus one label column.
pub fn load_csv(path: impl AsRef<Path>, opts: &CsvOptions) -> Result<LabeledDataset> {
    let rows = read_rows(path.as_ref(), opts.has_header, Some(opts))?;
    LabeledDataset::new(rows.dim, rows.features, rows.labels)
}

/// Comma-separated numeric features with no label column; returns the
/// dimension and the flat row-major points.
pub fn load_points(path: impl AsRef<Path>, has_header: bool) -> Result<(usize, Vec<f64>)> {
    let rows = read_rows(path.as_ref(), has_header, None)?;
    Ok((rows.dim, rows.features))
}

struct Rows {
    dim: usize,
    features: Vec<f64>,
    labels: Vec<Label>,
}

fn read_rows(path: &Path, has_header: bool, labelled: Option<&CsvOptions>) -> Result<Rows> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));

    let min_width = if labelled.is_some() { 2 } else { 1 };
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| Error::Parse {
            row: e.position().map_or(row, |p| p.record() as usize + 1),
            message: e.to_string(),
        })?;
        let n = record.len();
        if n < min_width {
            return Err(Error::Parse {
                row,
                message: if labelled.is_some() {
                    "need at least one feature and a label".into()
                } else {
                    "need at least one feature".into()
                },
            });
        }
        if *width.get_or_insert(n) != n {
            return Err(Error::Parse {
                row,
                message: format!("{n} columns, expected {}", width.unwrap()),
            });
        }
        let label_idx = match labelled.map(|o| o.label_column) {
            None => None,
            Some(LabelColumn::Last) => Some(n - 1),
            Some(LabelColumn::Index(k)) if k < n => Some(k),
            Some(LabelColumn::Index(k)) => {
                return Err(Error::Parse {
                    row,
                    message: format!("label column {k} out of range for {n} columns"),
                })
            }
        };
        for (c, cell) in record.iter().enumerate() {
            if Some(c) == label_idx {
                let positive = labelled.is_some_and(|o| cell == o.positive_value);
                labels.push(Label::from_bool(positive));
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| Error::Parse {
                row,
                message: format!("column {c}: '{cell}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    message: format!("column {c}: non-finite value"),
                });
            }
            features.push(v);
        }
    }
    let Some(width) = width else {
        return Err(Error::EmptyInput);
    };
    Ok(Rows {
        dim: width - labelled.map_or(0, |_| 1),
        features,
        labels,
    })
}

/// UCI skin segmentation file: whitespace-separated `B G R label` integers,
/// label 1 = skin (positive), 2 = non-skin (negative).
pub fn load_skin(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let row = i + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split_whitespace().collect();
        if cells.len() != 4 {
            return Err(Error::Parse {
                row,
                message: format!("expected 4 fields, found {}", cells.len()),
            });
        }
        for cell in &cells[..3] {
            let v: u16 = cell.parse().map_err(|_| Error::Parse {
                row,
                message: format!("'{cell}' is not a colour value"),
            })?;
            if v > 255 {
                return Err(Error::Parse {
                    row,
                    message: format!("colour value {v} exceeds 255"),
                });
            }
            features.push(v as f64);
        }
        labels.push(match cells[3] {
            "1" => Label::Positive,
            "2" => Label::Negative,
            other => {
                return Err(Error::Parse {
                    row,
                    message: format!("label '{other}' is neither 1 nor 2"),
                })
            }
        });
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let data = LabeledDataset::new(3, features, labels)?;
    if (data.p_count(), data.n_count()) != (SKIN_POSITIVES, SKIN_NEGATIVES) {
        log::warn!(
            "skin data has {} skin / {} non-skin samples; the canonical file has {SKIN_POSITIVES} / {SKIN_NEGATIVES}",
            data.p_count(),
            data.n_count()
        );
    }
    Ok(data)
}
