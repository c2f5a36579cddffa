//! File formats: CSV data matrices (one row per variable, one column per
//! observation), Matrix Market arrays for dense symmetric matrices, and JSON
//! records for solver results and compact approximations.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DataMatrix, Matrix, SymmetricMatrix};
use crate::pipeline::{Algorithm, CompactForm, CovarianceApproximation};

/// Version tag written into every result record.
pub const SCHEMA_VERSION: u32 = 1;

/// Exponent form with 17 significant digits, enough to round-trip.
pub fn format_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_real(field: &str, row: usize, col: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| {
        Error::Parse(format!(
            "row {}, column {}: '{}' is not a number",
            row + 1,
            col + 1,
            field.trim()
        ))
    })
}

/// Reads a headerless numeric CSV into a matrix with one row per line.
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<Matrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse(e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, f)| parse_real(f, i, j))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse("empty CSV".into()));
    }
    Matrix::from_rows(&rows)
}

pub fn write_matrix_csv<W: Write>(writer: W, m: &Matrix) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|&v| format_real(v)))
            .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

pub(crate) fn csv_io(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("{other:?}")),
    }
}

/// A p×n data matrix from CSV: rows are variables, columns observations.
pub fn read_data_csv(path: &Path) -> Result<DataMatrix> {
    DataMatrix::new(read_matrix_csv(File::open(path)?)?)
}

pub fn write_data_csv(path: &Path, x: &DataMatrix) -> Result<()> {
    write_matrix_csv(BufWriter::new(File::create(path)?), x.as_matrix())
}

/// Parses a Matrix Market `array` file holding a real square matrix, either
/// `symmetric` (lower triangle by columns) or `general` (all entries by columns).
pub fn read_matrix_market<R: Read>(reader: R) -> Result<SymmetricMatrix> {
    let mut lines = BufReader::new(reader).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(Error::Parse(format!("bad Matrix Market header '{header}'")));
    }
    if tokens[2] != "array" {
        return Err(Error::Parse(format!(
            "only the array format is supported, got '{}'",
            tokens[2]
        )));
    }
    if tokens[3] != "real" && tokens[3] != "integer" && tokens[3] != "double" {
        return Err(Error::Parse(format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(Error::Parse(format!("unsupported symmetry '{other}'"))),
    };

    let mut numbers = Vec::new();
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        numbers.extend(line.split_whitespace().map(str::to_owned));
    }
    let dims = |i: usize| -> Result<usize> {
        numbers
            .get(i)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse("missing or malformed size line".into()))
    };
    let (rows, cols) = (dims(0)?, dims(1)?);
    if rows != cols || rows == 0 {
        return Err(Error::Shape(format!(
            "expected a nonempty square matrix, got {rows}×{cols}"
        )));
    }
    let p = rows;
    let expected = if symmetric { p * (p + 1) / 2 } else { p * p };
    let values = numbers
        .iter()
        .skip(2)
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("'{t}' is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::Parse(format!(
            "expected {expected} entries, found {}",
            values.len()
        )));
    }
    if symmetric {
        let mut m = Matrix::zeros(p, p);
        let mut it = values.into_iter();
        for j in 0..p {
            for i in j..p {
                let v = it.next().unwrap_or_default();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymmetricMatrix::new(m)
    } else {
        SymmetricMatrix::new(Matrix::from_col_major(p, p, values)?)
    }
}

pub fn write_matrix_market<W: Write>(writer: W, s: &SymmetricMatrix) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let p = s.dim();
    writeln!(w, "%%MatrixMarket matrix array real symmetric")?;
    writeln!(w, "{p} {p}")?;
    for j in 0..p {
        for i in j..p {
            writeln!(w, "{}", format_real(s[(i, j)]))?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_market_file(path: &Path) -> Result<SymmetricMatrix> {
    read_matrix_market(File::open(path)?)
}

pub fn write_matrix_market_file(path: &Path, s: &SymmetricMatrix) -> Result<()> {
    write_matrix_market(File::create(path)?, s)
}

/// Summary of one solve, written as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ResultRecord {
    pub schema_version: u32,
    pub algorithm: Algorithm,
    pub p: usize,
    /// Observations; absent for a covariance input.
    pub n: Option<usize>,
    /// `0` when the input already met the bound.
    pub alpha: usize,
    /// `p + 1` when the input already met the bound.
    pub beta: usize,
    pub mu: f64,
    pub nu: f64,
    pub kappa: f64,
    pub kappa_achieved: f64,
    pub objective: f64,
    pub wall_time_ms: f64,
    pub feasible_short_circuit: bool,
}

impl ResultRecord {
    pub fn new(approx: &CovarianceApproximation, n: Option<usize>, wall_time_ms: f64) -> Self {
        let sol = &approx.solution;
        let p = approx.dim();
        ResultRecord {
            schema_version: SCHEMA_VERSION,
            algorithm: approx.algorithm,
            p,
            n,
            alpha: sol.truncation.map_or(0, |t| t.alpha),
            beta: sol.truncation.map_or(p + 1, |t| t.beta),
            mu: sol.mu,
            nu: sol.nu,
            kappa: sol.kappa,
            kappa_achieved: approx.kappa_achieved(),
            objective: approx.objective(),
            wall_time_ms,
            feasible_short_circuit: sol.is_feasible_input(),
        }
    }
}

/// JSON shape of [`CompactForm`]; `columns[j]` is the j-th eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompactRecord {
    pub mu_star: f64,
    pub deltas: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

impl From<&CompactForm> for CompactRecord {
    fn from(c: &CompactForm) -> Self {
        CompactRecord {
            mu_star: c.mu_star,
            deltas: c.deltas.clone(),
            columns: (0..c.rank()).map(|j| c.columns.col(j).to_vec()).collect(),
        }
    }
}

impl CompactRecord {
    /// Rebuilds the compact form; `p` is needed when there are no columns.
    pub fn into_compact(self, p: usize) -> Result<CompactForm> {
        if self.columns.len() != self.deltas.len() {
            return Err(Error::Shape(format!(
                "{} columns but {} deltas",
                self.columns.len(),
                self.deltas.len()
            )));
        }
        if let Some(c) = self.columns.iter().find(|c| c.len() != p) {
            return Err(Error::Shape(format!("column of length {} in dimension {p}", c.len())));
        }
        let k = self.columns.len();
        let columns = Matrix::from_col_major(p, k, self.columns.into_iter().flatten().collect())?;
        Ok(CompactForm {
            mu_star: self.mu_star,
            columns,
            deltas: self.deltas,
        })
    }
}

pub fn write_json<W: Write, T: Serialize>(writer: W, value: &T) -> Result<()> {
    let mut w = BufWriter::new(writer);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Parse(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Eigenvalues from a whitespace- or comma-separated list.
pub fn read_spectrum<R: Read>(mut reader: R) -> Result<Vec<f64>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    let values = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse(format!("'{t}' is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(Error::Parse("no eigenvalues found".into()));
    }
    Ok(values)
}
