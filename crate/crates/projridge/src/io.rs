//! Numeric CSV and JSON file formats.
//!
//! Matrices are headerless comma-separated rows. Numbers are written with 17
//! significant digits so that a write/read cycle is exact.

use std::fs;
use std::io::Write;
use std::path::Path;

use projridge_core::{DesignMatrix, Matrix};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{HarnessError, Result};

/// Formats `v` with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Parses CSV text into a rectangular matrix. `path` only labels errors.
pub fn parse_matrix_csv(text: &str, path: &Path) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut cols = None;
    let mut rows = 0usize;
    let mut data = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_err(path, line, e.to_string())
        })?;
        let line = rec.position().map_or(rows as u64 + 1, |p| p.line());
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        match cols {
            None => cols = Some(rec.len()),
            Some(c) if c != rec.len() => {
                return Err(parse_err(
                    path,
                    line,
                    format!("expected {c} fields, found {}", rec.len()),
                ))
            }
            _ => {}
        }
        for (k, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(path, line, format!("field {} is not a number: {cell:?}", k + 1)))?;
            data.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| parse_err(path, 1, "empty file".into()))?;
    Ok(Matrix::new(rows, cols, data)?)
}

fn parse_err(path: &Path, line: u64, message: String) -> HarnessError {
    HarnessError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    }
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_matrix_csv(&text, path)
}

pub fn load_design_csv(path: &Path) -> Result<DesignMatrix> {
    Ok(DesignMatrix::new(read_matrix_csv(path)?)?)
}

/// A vector stored as one column or one row.
pub fn read_vector_csv(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix_csv(path)?;
    if m.ncols() == 1 || m.nrows() == 1 {
        Ok(m.as_slice().to_vec())
    } else {
        Err(parse_err(
            path,
            1,
            format!("expected a single row or column, found {}×{}", m.nrows(), m.ncols()),
        ))
    }
}

pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt_num(v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn vector_to_csv(v: &[f64]) -> String {
    v.iter().map(|&x| fmt_num(x) + "\n").collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| HarnessError::io(path, e))
}

pub fn write_matrix_csv(path: &Path, m: &Matrix) -> Result<()> {
    write_text(path, &matrix_to_csv(m))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| HarnessError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, v: &T) -> Result<()> {
    write_text(path, &to_json(v))
}
