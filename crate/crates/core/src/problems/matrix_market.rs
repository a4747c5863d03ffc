//! Matrix Market coordinate files: real, integer or pattern fields; general or symmetric storage.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Result, SvdAmgError};
use crate::sparskit::SparseMat;

fn mm_err(path: &Path, detail: impl Into<String>) -> SvdAmgError {
    SvdAmgError::MatrixMarket {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Field {
    Real,
    Pattern,
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMat> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SvdAmgError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse(&text, path)
}

fn parse(text: &str, path: &Path) -> Result<SparseMat> {
    let mut lines = text.lines().enumerate();
    let (_, banner) = lines.next().ok_or_else(|| mm_err(path, "empty file"))?;
    let words: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(mm_err(path, format!("malformed header line {banner:?}")));
    }
    if words[2] != "coordinate" {
        return Err(mm_err(path, format!("unsupported format {:?} (only coordinate)", words[2])));
    }
    let field = match words[3].as_str() {
        "real" | "integer" | "double" => Field::Real,
        "pattern" => Field::Pattern,
        other => return Err(mm_err(path, format!("unsupported field qualifier {other:?}"))),
    };
    let symmetric = match words[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(mm_err(path, format!("unsupported symmetry qualifier {other:?}"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (lno, size_line) = data.next().ok_or_else(|| mm_err(path, "missing size line"))?;
    let dims: Vec<usize> = size_line
        .split_whitespace()
        .map(|w| w.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| mm_err(path, format!("line {}: malformed size line {size_line:?}", lno + 1)))?;
    if dims.len() != 3 {
        return Err(mm_err(path, format!("line {}: size line needs 3 integers", lno + 1)));
    }
    let (m, n, nnz) = (dims[0], dims[1], dims[2]);
    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut count = 0;
    for (lno, line) in data {
        let w: Vec<&str> = line.split_whitespace().collect();
        let want = if field == Field::Pattern { 2 } else { 3 };
        if w.len() != want {
            return Err(mm_err(path, format!("line {}: expected {want} fields, found {}", lno + 1, w.len())));
        }
        let bad = || mm_err(path, format!("line {}: malformed entry {line:?}", lno + 1));
        let i: usize = w[0].parse().map_err(|_| bad())?;
        let j: usize = w[1].parse().map_err(|_| bad())?;
        let v: f64 = if field == Field::Pattern { 1.0 } else { w[2].parse().map_err(|_| bad())? };
        if i == 0 || j == 0 || i > m || j > n {
            return Err(mm_err(path, format!("line {}: index ({i}, {j}) out of range for {m}×{n}", lno + 1)));
        }
        if !v.is_finite() {
            return Err(mm_err(path, format!("line {}: non-finite value", lno + 1)));
        }
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
        count += 1;
    }
    if count != nnz {
        return Err(mm_err(path, format!("header announces {nnz} entries, found {count}")));
    }
    SparseMat::from_triplets(m, n, &triplets).map_err(|e| mm_err(path, e.to_string()))
}

/// Writes "coordinate real general" with 1-based indices and 17 significant digits.
pub fn write_matrix_market(path: impl AsRef<Path>, a: &SparseMat) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| SvdAmgError::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = Vec::with_capacity(32 * a.nnz() + 64);
    writeln!(out, "%%MatrixMarket matrix coordinate real general").map_err(io_err)?;
    writeln!(out, "{} {} {}", a.nrows(), a.ncols(), a.nnz()).map_err(io_err)?;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v).map_err(io_err)?;
        }
    }
    fs::write(path, out).map_err(io_err)
}
