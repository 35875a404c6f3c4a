//! `label,feature1,…,featureD` per line, no header.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::DatasetPair;
use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// Parses one labeled CSV document. Rows and columns in errors are 1-based.
pub fn parse_labeled_csv(text: &str, source_name: &str) -> Result<DataMatrix> {
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());

    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record =
            record.map_err(|e| Error::InvalidData(format!("{source_name}: row {row}: {e}")))?;
        let cells = record.len();
        let expected = *width.get_or_insert(cells);
        if cells != expected {
            return Err(Error::RaggedRow {
                source_name: source_name.to_owned(),
                row,
                expected,
                found: cells,
            });
        }
        if cells < 2 {
            return Err(Error::RaggedRow {
                source_name: source_name.to_owned(),
                row,
                expected: 2,
                found: cells,
            });
        }
        let non_numeric = |column: usize, value: &str| Error::NonNumeric {
            source_name: source_name.to_owned(),
            row,
            column,
            value: value.to_owned(),
        };
        let raw_label = record[0].trim();
        let label: usize = raw_label.parse().map_err(|_| non_numeric(1, raw_label))?;
        labels.push(label);
        for (c, cell) in record.iter().enumerate().skip(1) {
            let cell = cell.trim();
            let v: f64 = cell.parse().map_err(|_| non_numeric(c + 1, cell))?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    source_name: source_name.to_owned(),
                    row,
                    column: c + 1,
                });
            }
            values.push(v);
        }
    }
    let Some(width) = width else {
        return Err(Error::EmptyInput("CSV file has no rows"));
    };
    let matrix = Array2::from_shape_vec((labels.len(), width - 1), values)
        .expect("row widths checked above");
    DataMatrix::new(matrix, Some(labels))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_csv(train_path: impl AsRef<Path>, test_path: impl AsRef<Path>) -> Result<DatasetPair> {
    let (train_path, test_path) = (train_path.as_ref(), test_path.as_ref());
    let train = parse_labeled_csv(&read_text(train_path)?, &train_path.display().to_string())?;
    let test = parse_labeled_csv(&read_text(test_path)?, &test_path.display().to_string())?;
    DatasetPair::new(
        train,
        test,
        format!("csv:{},{}", train_path.display(), test_path.display()),
    )
}

/// Serializes with 17 significant digits so a reload is bit-identical.
pub fn to_csv_string(data: &DataMatrix) -> Result<String> {
    let labels = data
        .labels()
        .ok_or_else(|| Error::InvalidData("cannot write unlabeled rows as labeled CSV".into()))?;
    let mut out = String::new();
    for (row, label) in data.values().rows().into_iter().zip(labels) {
        write!(out, "{label}").expect("writing to a String");
        for v in row {
            write!(out, ",{v:.16e}").expect("writing to a String");
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_csv(data: &DataMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_csv_string(data)?).map_err(|e| Error::io(path, e))
}
