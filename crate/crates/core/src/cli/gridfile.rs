//! Grid files: the binary `G2S1` layout and plain numeric CSV.
//!
//! Binary layout, all little-endian:
//!
//! ```text
//! b"G2S1" | u32 rows | u32 cols | f64 hx | f64 hy | rows·cols f64, row-major
//! ```
//!
//! CSV files carry no spacing; callers supply it. The format is picked from
//! the file extension (`.csv`, any case, means CSV).

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::Matrix;

pub const MAGIC: &[u8; 4] = b"G2S1";
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8;

/// A value grid with its node spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub hx: f64,
    pub hy: f64,
    pub values: Matrix,
}

impl Grid {
    pub fn new(values: Matrix, hx: f64, hy: f64) -> Self {
        Grid { hx, hy, values }
    }
}

pub fn is_csv(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Reads a grid. `spacing` is used for CSV input and ignored for binary.
pub fn read_grid(path: &Path, spacing: (f64, f64)) -> Result<Grid> {
    let bytes = std::fs::read(path).map_err(|e| io_context(e, path))?;
    let grid = if is_csv(path) {
        decode_csv(&bytes, spacing)
    } else {
        decode_binary(&bytes)
    };
    grid.map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Writes a grid through a temporary file in the target directory, renamed
/// into place only once complete.
pub fn write_grid(path: &Path, grid: &Grid) -> Result<()> {
    let bytes = if is_csv(path) {
        encode_csv(&grid.values)
    } else {
        encode_binary(grid)?
    };
    write_atomic(path, &bytes)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_context(e, path))?;
    tmp.write_all(bytes).map_err(|e| io_context(e, path))?;
    tmp.as_file().sync_all().map_err(|e| io_context(e, path))?;
    tmp.persist(path).map_err(|e| io_context(e.error, path))?;
    Ok(())
}

fn io_context(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

pub fn encode_binary(grid: &Grid) -> Result<Vec<u8>> {
    let (m, n) = grid.values.shape();
    let (mu, nu) = (u32::try_from(m), u32::try_from(n));
    let (Ok(mu), Ok(nu)) = (mu, nu) else {
        return Err(Error::Format(format!(
            "grid {m}×{n} exceeds the u32 header range"
        )));
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * m * n);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&mu.to_le_bytes());
    out.extend_from_slice(&nu.to_le_bytes());
    out.extend_from_slice(&grid.hx.to_le_bytes());
    out.extend_from_slice(&grid.hy.to_le_bytes());
    for i in 0..m {
        for j in 0..n {
            out.extend_from_slice(&grid.values[(i, j)].to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_binary(bytes: &[u8]) -> Result<Grid> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected G2S1".into()));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "truncated header: {} of {HEADER_LEN} bytes",
            bytes.len()
        )));
    }
    let u32_at = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap()) as usize;
    let f64_at = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    let (m, n) = (u32_at(4), u32_at(8));
    let (hx, hy) = (f64_at(12), f64_at(20));
    if m == 0 || n == 0 {
        return Err(Error::Format(format!("empty grid {m}×{n}")));
    }
    let payload = m
        .checked_mul(n)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::Format(format!("dimensions {m}×{n} overflow")))?;
    let body = &bytes[HEADER_LEN..];
    if body.len() < payload {
        return Err(Error::Format(format!(
            "truncated payload: header says {m}×{n} ({} values) but {} present",
            m * n,
            body.len() / 8
        )));
    }
    if body.len() > payload {
        return Err(Error::Format(format!(
            "{} trailing bytes after {m}×{n} payload",
            body.len() - payload
        )));
    }
    if !(hx.is_finite() && hx > 0.0 && hy.is_finite() && hy > 0.0) {
        return Err(Error::Format(format!("invalid spacings hx={hx}, hy={hy}")));
    }
    let mut values = Matrix::zeros(m, n);
    for (k, chunk) in body.chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::Format(format!(
                "non-finite value at row {}, column {}",
                k / n + 1,
                k % n + 1
            )));
        }
        values[(k / n, k % n)] = v;
    }
    Ok(Grid { hx, hy, values })
}

pub fn encode_csv(values: &Matrix) -> Vec<u8> {
    let mut out = String::new();
    for row in values.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn decode_csv(bytes: &[u8], (hx, hy): (f64, f64)) -> Result<Grid> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Format(format!("row {}: {e}", r + 1)))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, field)| {
                let v: f64 = field.parse().map_err(|_| {
                    Error::Format(format!(
                        "row {}, column {}: '{field}' is not a number",
                        r + 1,
                        c + 1
                    ))
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Format(format!(
                        "row {}, column {}: non-finite value",
                        r + 1,
                        c + 1
                    )))
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::Format(format!(
                    "ragged row {}: {} values, expected {}",
                    r + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Format("empty CSV grid".into()));
    }
    let (m, n) = (rows.len(), rows[0].len());
    Ok(Grid {
        hx,
        hy,
        values: Matrix::from_fn(m, n, |i, j| rows[i][j]),
    })
}
