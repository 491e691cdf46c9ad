//! CSV files with one sample per row.
//!
//! Labeled files have a header row, numeric feature columns and a final
//! `label` column holding any non-empty string. Class ids are assigned in
//! order of first appearance. Line numbers in errors are 1-based and count
//! the header.

use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use std::io::Read;
use std::path::Path;

const LABEL_COLUMN: &str = "label";

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Csv {
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn reader<R: Read>(input: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input)
}

fn parse_number(cell: &str, line: u64, column: &str) -> Result<f64> {
    match cell.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Csv {
            line,
            message: format!("column '{column}': '{cell}' is not a finite number"),
        }),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map_or(0, |p| p.line())
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LabeledDataset> {
    read_labeled(std::fs::File::open(path)?)
}

pub(crate) fn read_labeled<R: Read>(input: R) -> Result<LabeledDataset> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    if headers.len() < 2 || &headers[headers.len() - 1] != LABEL_COLUMN {
        return Err(Error::Csv {
            line: 1,
            message: format!(
                "header must list feature columns followed by a final '{LABEL_COLUMN}' column"
            ),
        });
    }
    let d = headers.len() - 1;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        if record.len() != headers.len() {
            return Err(Error::Csv {
                line,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (cell, column) in record.iter().zip(headers.iter()).take(d) {
            values.push(parse_number(cell, line, column)?);
        }
        let label = &record[d];
        if label.is_empty() {
            return Err(Error::Csv {
                line,
                message: "empty label".into(),
            });
        }
        let id = match names.iter().position(|n| n == label) {
            Some(id) => id,
            None => {
                names.push(label.to_string());
                names.len() - 1
            }
        };
        labels.push(id);
    }
    if labels.is_empty() {
        return Err(Error::Empty("csv file has no samples".into()));
    }
    let features = Matrix::from_col_major(d, labels.len(), values)?;
    LabeledDataset::new(features, labels, Some(names))
}

/// Writes `ds` in the labeled format. Numbers use the shortest
/// representation that parses back to the same value.
pub fn write_csv(ds: &LabeledDataset, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_labeled(ds, file)
}

pub(crate) fn write_labeled<W: std::io::Write>(ds: &LabeledDataset, output: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(output);
    let mut header: Vec<String> = (0..ds.dim()).map(|i| format!("f{i}")).collect();
    header.push(LABEL_COLUMN.into());
    w.write_record(&header).map_err(csv_error)?;
    for i in 0..ds.n_samples() {
        let mut row: Vec<String> = ds.sample(i).iter().map(|v| v.to_string()).collect();
        row.push(ds.class_names()[ds.labels()[i]].clone());
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Rows of numbers under a header. A column named `label` is skipped.
fn read_numeric_rows<R: Read>(input: R) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut rdr = reader(input);
    let headers = rdr.headers().map_err(csv_error)?.clone();
    let keep: Vec<usize> = (0..headers.len())
        .filter(|&i| &headers[i] != LABEL_COLUMN)
        .collect();
    if keep.is_empty() {
        return Err(Error::Csv {
            line: 1,
            message: "no numeric columns in header".into(),
        });
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record_line(&record);
        if record.len() != headers.len() {
            return Err(Error::Csv {
                line,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        let row = keep
            .iter()
            .map(|&i| parse_number(&record[i], line, &headers[i]))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((keep.len(), rows))
}

/// Dictionary file: one atom per row. Returns the atoms as columns.
pub fn load_atoms_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    read_atoms(std::fs::File::open(path)?)
}

pub(crate) fn read_atoms<R: Read>(input: R) -> Result<Matrix> {
    let (d, rows) = read_numeric_rows(input)?;
    if rows.is_empty() {
        return Err(Error::Empty("dictionary file has no atoms".into()));
    }
    let data = rows.into_iter().flatten().collect::<Vec<_>>();
    let n = data.len() / d;
    Matrix::from_col_major(d, n, data)
}

/// Signal file: exactly one data row.
pub fn load_signal_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    read_signal(std::fs::File::open(path)?)
}

pub(crate) fn read_signal<R: Read>(input: R) -> Result<Vec<f64>> {
    let (_, mut rows) = read_numeric_rows(input)?;
    if rows.len() != 1 {
        return Err(Error::Csv {
            line: 2,
            message: format!("signal file must hold exactly one row, found {}", rows.len()),
        });
    }
    Ok(rows.pop().expect("one row"))
}
