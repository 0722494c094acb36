//! File formats: dense matrix CSV, sparse perturbation/oracle triples.
//!
//! Matrices are n lines of n comma-separated floats printed with 17
//! significant digits so write-then-read is bit-identical; symmetry must
//! be exact in the file. Perturbation and oracle files carry an
//! `i,j,value` header and 1-indexed upper-triangle triples; oracle files
//! list only the marked pairs, with value 1.

use std::fs;
use std::io::Write;
use std::path::Path;

use metric_repair::{DistanceMatrix, OracleMask, Perturbation};
use thiserror::Error;

/// A malformed input file; maps to exit code 2.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{path}:{line}: {message}")]
    Line {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    File { path: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix(path: &Path, d: &DistanceMatrix) -> std::io::Result<()> {
    let mut out = String::new();
    for row in d.to_rows() {
        let line: Vec<String> = row.iter().map(|&v| fmt_value(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)
}

pub fn read_matrix(path: &Path) -> Result<DistanceMatrix, ParseError> {
    let text = fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for field in line.split(',') {
            let v: f64 = field.trim().parse().map_err(|_| ParseError::Line {
                path: path.display().to_string(),
                line: idx + 1,
                message: format!("not a number: {:?}", field.trim()),
            })?;
            row.push(v);
        }
        rows.push(row);
    }
    DistanceMatrix::from_rows(&rows).map_err(|e| ParseError::File {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn write_perturbation(path: &Path, p: &Perturbation) -> std::io::Result<()> {
    let mut out = String::from("i,j,value\n");
    for (i, j, v) in p.iter() {
        out.push_str(&format!("{},{},{}\n", i + 1, j + 1, fmt_value(v)));
    }
    fs::write(path, out)
}

pub fn read_perturbation(path: &Path, n: usize) -> Result<Perturbation, ParseError> {
    let mut p = Perturbation::new(n);
    for (line, i, j, v) in read_triples(path)? {
        if i == j || i > n || j > n || i == 0 || j == 0 {
            return Err(ParseError::Line {
                path: path.display().to_string(),
                line,
                message: format!("pair ({i},{j}) out of range for n={n}"),
            });
        }
        p.set(i - 1, j - 1, v);
    }
    Ok(p)
}

pub fn write_oracle(path: &Path, q: &OracleMask) -> std::io::Result<()> {
    let mut out = String::from("i,j,value\n");
    for (i, j) in q.pairs() {
        out.push_str(&format!("{},{},1\n", i + 1, j + 1));
    }
    fs::write(path, out)
}

pub fn read_oracle(path: &Path, n: usize) -> Result<OracleMask, ParseError> {
    let mut q = OracleMask::new(n);
    for (line, i, j, v) in read_triples(path)? {
        let bad = |message: String| ParseError::Line {
            path: path.display().to_string(),
            line,
            message,
        };
        if v != 1.0 && v != 0.0 {
            return Err(bad(format!("oracle value must be 0 or 1, got {v}")));
        }
        if i == j || i > n || j > n || i == 0 || j == 0 {
            return Err(bad(format!("pair ({i},{j}) out of range for n={n}")));
        }
        if v == 1.0 {
            q.mark(i - 1, j - 1);
        }
    }
    Ok(q)
}

/// Parse `i,j,value` lines (1-indexed), skipping the header.
fn read_triples(path: &Path) -> Result<Vec<(usize, usize, usize, f64)>, ParseError> {
    let text = fs::read_to_string(path).map_err(|source| ParseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || (idx == 0 && trimmed.starts_with('i')) {
            continue;
        }
        let bad = |message: String| ParseError::Line {
            path: path.display().to_string(),
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 3 {
            return Err(bad(format!("expected i,j,value, got {trimmed:?}")));
        }
        let i: usize = fields[0].trim().parse().map_err(|_| bad(format!("bad index {:?}", fields[0])))?;
        let j: usize = fields[1].trim().parse().map_err(|_| bad(format!("bad index {:?}", fields[1])))?;
        let v: f64 = fields[2].trim().parse().map_err(|_| bad(format!("bad value {:?}", fields[2])))?;
        out.push((idx + 1, i, j, v));
    }
    Ok(out)
}

/// Write a file atomically enough for tests: straight write, no temp dance.
pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())
}
