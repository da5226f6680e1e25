use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::write_atomic;
use crate::error::{Error, Result};

pub const SNAPSHOT_MAGIC: &[u8; 4] = b"GPM1";
const VERSION: u32 = 1;
const HEADER: usize = 16;

/// Layout: magic, version, rows, cols (u32 little-endian), then `rows * cols`
/// little-endian f64 values in column-major order.
pub fn encode_snapshot(m: &DMatrix<f64>) -> Result<Vec<u8>> {
    let rows = u32::try_from(m.nrows()).map_err(|_| Error::Format("too many rows".into()))?;
    let cols = u32::try_from(m.ncols()).map_err(|_| Error::Format("too many columns".into()))?;
    let mut out = Vec::with_capacity(HEADER + 8 * m.len());
    out.extend_from_slice(SNAPSHOT_MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for v in m.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<DMatrix<f64>> {
    if bytes.len() < HEADER || &bytes[..4] != SNAPSHOT_MAGIC {
        return Err(Error::Format("not a GPM1 snapshot file".into()));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().expect("4 bytes"));
    let version = word(4);
    if version != VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {version}")));
    }
    let (rows, cols) = (word(8) as usize, word(12) as usize);
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(8))
        .and_then(|n| n.checked_add(HEADER));
    if expected != Some(bytes.len()) {
        return Err(Error::Format(format!(
            "header declares {rows}x{cols} but payload has {} bytes",
            bytes.len() - HEADER
        )));
    }
    let values: Vec<f64> = bytes[HEADER..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("snapshot file"));
    }
    Ok(DMatrix::from_vec(rows, cols, values))
}

pub fn write_snapshot_file(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    write_atomic(path, &encode_snapshot(m)?)
}

pub fn read_snapshot_file(path: &Path) -> Result<DMatrix<f64>> {
    decode_snapshot(&fs::read(path)?)
}

/// Reads a headerless numeric CSV; each record is one matrix row.
pub fn read_csv_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Format(format!("row {}: '{f}' is not a number", i + 1)))
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Format(format!(
                    "row {} has {} columns, expected {}",
                    i + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Format("empty CSV matrix".into()));
    }
    let m = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("CSV matrix"));
    }
    Ok(m)
}

/// Values are written with Rust's shortest round-trip formatting.
pub fn write_csv_matrix(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}
