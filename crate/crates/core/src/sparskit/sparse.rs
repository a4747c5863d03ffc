//! Compressed-row sparse matrices and the kernels the multigrid cycles run on.

use crate::error::{Result, SvdAmgError};
use crate::sparskit::dense::DenseMat;

/// Entries of assembled products below this fraction of the largest magnitude are pruned.
pub const DROP_TOL: f64 = 1e-14;

/// Immutable real sparse matrix in compressed row layout.
///
/// Column indices are strictly increasing within a row and no explicit zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMat {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMat {
    /// Builds a matrix from raw CSR arrays, validating every structural invariant.
    pub fn new(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(SvdAmgError::InvalidStructure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 || row_offsets[nrows] != values.len() {
            return Err(SvdAmgError::InvalidStructure(
                "row_offsets must start at 0 and end at the number of stored values".into(),
            ));
        }
        if col_indices.len() != values.len() {
            return Err(SvdAmgError::InvalidStructure(
                "col_indices and values differ in length".into(),
            ));
        }
        for i in 0..nrows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(SvdAmgError::InvalidStructure(format!(
                    "row_offsets decrease at row {i}"
                )));
            }
            let cols = &col_indices[lo..hi];
            if cols.iter().any(|&j| j >= ncols) {
                return Err(SvdAmgError::InvalidStructure(format!(
                    "column index out of range in row {i}"
                )));
            }
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(SvdAmgError::InvalidStructure(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SvdAmgError::NonFinite("sparse matrix values"));
        }
        let mut m = SparseMat {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        };
        m.prune(0.0);
        Ok(m)
    }

    /// Assembles from (row, col, value) triplets; duplicates are summed and exact zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len());
        for &(i, j, v) in triplets {
            if i >= nrows || j >= ncols {
                return Err(SvdAmgError::InvalidStructure(format!(
                    "entry ({i}, {j}) outside {nrows}x{ncols}"
                )));
            }
            if !v.is_finite() {
                return Err(SvdAmgError::NonFinite("triplet value"));
            }
            sorted.push((i, j, v));
        }
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_offsets = vec![0usize; nrows + 1];
        let mut col_indices = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_indices.push(j);
                values.push(v);
                row_offsets[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_offsets[i + 1] += row_offsets[i];
        }
        let mut m = SparseMat {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        };
        m.prune(0.0);
        Ok(m)
    }

    /// Dense row-major input, zeros skipped. Mostly useful in tests.
    pub fn from_dense(nrows: usize, ncols: usize, row_major: &[f64]) -> Result<Self> {
        if row_major.len() != nrows * ncols {
            return Err(SvdAmgError::dims("from_dense", "data length != nrows*ncols"));
        }
        let mut t = Vec::new();
        for i in 0..nrows {
            for j in 0..ncols {
                let v = row_major[i * ncols + j];
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &t)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = SparseMat {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: d.to_vec(),
        };
        m.prune(0.0);
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    /// Largest |a_ij - a_ji| over all stored entries.
    pub fn asymmetry(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// (M + Mᵗ)/2, exactly symmetric in floating point.
    pub fn symmetrized(&self) -> Result<SparseMat> {
        if !self.is_square() {
            return Err(SvdAmgError::dims("symmetrized", "matrix not square"));
        }
        self.add_scaled(1.0, &self.transpose())
            .map(|s| s.scaled(0.5))
    }

    pub fn scaled(&self, alpha: f64) -> SparseMat {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= alpha);
        m.prune(0.0);
        m
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &SparseMat) -> Result<SparseMat> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(SvdAmgError::dims(
                "add_scaled",
                format!(
                    "{}x{} vs {}x{}",
                    self.nrows, self.ncols, other.nrows, other.ncols
                ),
            ));
        }
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut values = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let (j, v) = if q >= cb.len() || (p < ca.len() && ca[p] < cb[q]) {
                    p += 1;
                    (ca[p - 1], va[p - 1])
                } else if p >= ca.len() || cb[q] < ca[p] {
                    q += 1;
                    (cb[q - 1], alpha * vb[q - 1])
                } else {
                    p += 1;
                    q += 1;
                    (ca[p - 1], va[p - 1] + alpha * vb[q - 1])
                };
                col_indices.push(j);
                values.push(v);
            }
            row_offsets.push(values.len());
        }
        let mut m = SparseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets,
            col_indices,
            values,
        };
        m.prune(0.0);
        Ok(m)
    }

    /// Removes entries with |v| <= rel * max|v| (and exact zeros).
    fn prune(&mut self, rel: f64) {
        let cut = rel * self.max_abs();
        if self.values.iter().all(|v| v.abs() > cut) {
            return;
        }
        let mut w = 0;
        let mut start = 0;
        for i in 0..self.nrows {
            let end = self.row_offsets[i + 1];
            for k in start..end {
                if self.values[k].abs() > cut {
                    self.col_indices[w] = self.col_indices[k];
                    self.values[w] = self.values[k];
                    w += 1;
                }
            }
            start = end;
            self.row_offsets[i + 1] = w;
        }
        self.col_indices.truncate(w);
        self.values.truncate(w);
    }

    /// y = A x without dimension checks beyond debug assertions.
    #[inline]
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        self.apply_into(x, &mut y);
        y
    }

    #[inline]
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            *yi = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
        }
    }

    /// y = Aᵗ x.
    pub fn apply_t(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * xi;
            }
        }
        y
    }

    pub fn transpose(&self) -> SparseMat {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut col_indices = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                let k = next[j];
                col_indices[k] = i;
                values[k] = v;
                next[j] += 1;
            }
        }
        SparseMat {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices,
            values,
        }
    }

    /// Product `self * other` with relative pruning at [`DROP_TOL`].
    pub fn matmul(&self, other: &SparseMat) -> Result<SparseMat> {
        if self.ncols != other.nrows {
            return Err(SvdAmgError::dims(
                "sparse_matmul",
                format!(
                    "{}x{} times {}x{}",
                    self.nrows, self.ncols, other.nrows, other.ncols
                ),
            ));
        }
        let n = other.ncols;
        let mut acc = vec![0.0; n];
        let mut marker = vec![usize::MAX; n];
        let mut touched: Vec<usize> = Vec::new();
        let mut row_offsets = Vec::with_capacity(self.nrows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            let (ca, va) = self.row(i);
            for (&k, &a) in ca.iter().zip(va) {
                let (cb, vb) = other.row(k);
                for (&j, &b) in cb.iter().zip(vb) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_indices.push(j);
                values.push(acc[j]);
            }
            row_offsets.push(values.len());
        }
        let mut m = SparseMat {
            nrows: self.nrows,
            ncols: n,
            row_offsets,
            col_indices,
            values,
        };
        m.prune(DROP_TOL);
        Ok(m)
    }

    pub fn to_dense(&self) -> DenseMat {
        let mut d = DenseMat::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                d[(i, j)] = v;
            }
        }
        d
    }
}

/// y = A x, or Aᵗ x when `transpose` is set.
pub fn spmv(a: &SparseMat, x: &[f64], transpose: bool) -> Result<Vec<f64>> {
    let expected = if transpose { a.nrows } else { a.ncols };
    if x.len() != expected {
        return Err(SvdAmgError::dims(
            "spmv",
            format!("vector of length {} for {}x{} (transpose={transpose})", x.len(), a.nrows, a.ncols),
        ));
    }
    Ok(if transpose { a.apply_t(x) } else { a.apply(x) })
}

pub fn transpose(a: &SparseMat) -> SparseMat {
    a.transpose()
}

pub fn sparse_matmul(a: &SparseMat, b: &SparseMat) -> Result<SparseMat> {
    a.matmul(b)
}

/// Galerkin product Pᵗ·A·Q.
pub fn triple_product(p: &SparseMat, a: &SparseMat, q: &SparseMat) -> Result<SparseMat> {
    if p.nrows != a.nrows || q.nrows != a.ncols {
        return Err(SvdAmgError::dims(
            "triple_product",
            format!(
                "P {}x{}, A {}x{}, Q {}x{}",
                p.nrows, p.ncols, a.nrows, a.ncols, q.nrows, q.ncols
            ),
        ));
    }
    p.transpose().matmul(&a.matmul(q)?)
}

fn inverse_diagonal(m: &SparseMat, op: &'static str) -> Result<Vec<f64>> {
    m.diag()
        .into_iter()
        .enumerate()
        .map(|(row, d)| {
            if d == 0.0 {
                Err(SvdAmgError::ZeroDiagonal { op, row })
            } else {
                Ok(1.0 / d)
            }
        })
        .collect()
}

/// `steps` sweeps of x ← x − ω·D⁻¹·(M·x − rhs).
pub fn weighted_jacobi(m: &SparseMat, rhs: &[f64], x0: &[f64], omega: f64, steps: usize) -> Result<Vec<f64>> {
    if !m.is_square() || rhs.len() != m.nrows || x0.len() != m.ncols {
        return Err(SvdAmgError::dims("weighted_jacobi", "operator must be square and match vectors"));
    }
    let dinv = inverse_diagonal(m, "weighted_jacobi")?;
    let mut x = x0.to_vec();
    jacobi_in_place(m, &dinv, rhs, &mut x, omega, steps);
    Ok(x)
}

/// Jacobi sweeps with a precomputed inverse diagonal.
pub(crate) fn jacobi_in_place(m: &SparseMat, dinv: &[f64], rhs: &[f64], x: &mut [f64], omega: f64, steps: usize) {
    let mut mx = vec![0.0; x.len()];
    for _ in 0..steps {
        m.apply_into(x, &mut mx);
        for i in 0..x.len() {
            x[i] -= omega * dinv[i] * (mx[i] - rhs[i]);
        }
    }
}

/// `steps` full Kaczmarz sweeps over the rows of M in ascending order.
pub fn kaczmarz_sweep(m: &SparseMat, rhs: &[f64], x0: &[f64], steps: usize) -> Result<Vec<f64>> {
    if rhs.len() != m.nrows || x0.len() != m.ncols {
        return Err(SvdAmgError::dims("kaczmarz_sweep", "vectors do not match operator"));
    }
    let norms = row_norms_sq(m, "kaczmarz_sweep")?;
    let mut x = x0.to_vec();
    kaczmarz_in_place(m, &norms, rhs, &mut x, steps);
    Ok(x)
}

/// Squared Euclidean row norms; an empty row is an error since Kaczmarz projects onto it.
pub(crate) fn row_norms_sq(m: &SparseMat, op: &'static str) -> Result<Vec<f64>> {
    (0..m.nrows)
        .map(|i| {
            let s: f64 = m.row(i).1.iter().map(|v| v * v).sum();
            if s == 0.0 {
                Err(SvdAmgError::ZeroRow { op, row: i })
            } else {
                Ok(s)
            }
        })
        .collect()
}

pub(crate) fn kaczmarz_in_place(m: &SparseMat, norms_sq: &[f64], rhs: &[f64], x: &mut [f64], steps: usize) {
    for _ in 0..steps {
        for i in 0..m.nrows {
            if norms_sq[i] == 0.0 {
                continue;
            }
            let (cols, vals) = m.row(i);
            let dot: f64 = cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum();
            let t = (rhs[i] - dot) / norms_sq[i];
            for (&j, &v) in cols.iter().zip(vals) {
                x[j] += t * v;
            }
        }
    }
}
