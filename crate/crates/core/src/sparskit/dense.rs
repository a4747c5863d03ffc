//! Dense kernels for coarsest-level and Ritz-sized problems.
//!
//! Everything here is O(n³) and meant for matrices of at most a few hundred rows: the coarsest
//! level of a hierarchy, the 2·n_b Ritz problem and the per-point least-squares fits.

use std::ops::{Index, IndexMut};

use crate::error::{Result, SvdAmgError};
use crate::sparskit::sparse::SparseMat;

/// Off-diagonal Frobenius norm target for the Jacobi eigensolver, relative to ‖A‖_F.
const JACOBI_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 30;
/// Singular values below this fraction of the largest are reported as exactly zero.
const SVD_ZERO_TOL: f64 = 1e-13;
/// A column whose B-norm after projection falls below this fraction of its original norm is dropped.
const ORTHO_DROP_TOL: f64 = 1e-13;

/// Column-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat {
    nrows: usize,
    ncols: usize,
    values: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        DenseMat {
            nrows,
            ncols,
            values: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_col_major(nrows: usize, ncols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != nrows * ncols {
            return Err(SvdAmgError::dims("DenseMat", "value count != nrows*ncols"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SvdAmgError::NonFinite("dense matrix"));
        }
        Ok(DenseMat { nrows, ncols, values })
    }

    /// Builds from a slice of rows (row-major literal), convenient in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(SvdAmgError::dims("DenseMat::from_rows", "ragged rows"));
        }
        let mut values = vec![0.0; nrows * ncols];
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                values[j * nrows + i] = v;
            }
        }
        Self::from_col_major(nrows, ncols, values)
    }

    pub fn from_columns(nrows: usize, columns: &[Vec<f64>]) -> Result<Self> {
        if columns.iter().any(|c| c.len() != nrows) {
            return Err(SvdAmgError::dims("DenseMat::from_columns", "column length mismatch"));
        }
        let values = columns.iter().flat_map(|c| c.iter().copied()).collect();
        Self::from_col_major(nrows, columns.len(), values)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.values[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.values[j * self.nrows..(j + 1) * self.nrows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.ncols).map(move |j| self.col(j))
    }

    pub fn set_col(&mut self, j: usize, v: &[f64]) {
        self.col_mut(j).copy_from_slice(v);
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> DenseMat {
        let mut out = DenseMat::zeros(self.nrows, idx.len());
        for (k, &j) in idx.iter().enumerate() {
            out.set_col(k, self.col(j));
        }
        out
    }

    /// Horizontal concatenation [self, other].
    pub fn hcat(&self, other: &DenseMat) -> DenseMat {
        assert_eq!(self.nrows, other.nrows);
        let mut values = self.values.clone();
        values.extend_from_slice(&other.values);
        DenseMat {
            nrows: self.nrows,
            ncols: self.ncols + other.ncols,
            values,
        }
    }

    pub fn transpose(&self) -> DenseMat {
        let mut t = DenseMat::zeros(self.ncols, self.nrows);
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &DenseMat) -> DenseMat {
        assert_eq!(self.ncols, other.nrows, "dense matmul dimension mismatch");
        let mut out = DenseMat::zeros(self.nrows, other.ncols);
        for j in 0..other.ncols {
            let oc = other.col(j);
            let dst = &mut out.values[j * self.nrows..(j + 1) * self.nrows];
            for (k, &b) in oc.iter().enumerate() {
                if b == 0.0 {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.col(k)) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            for (yi, &a) in y.iter_mut().zip(self.col(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    pub fn mul_t_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        self.columns().map(|c| dot(c, x)).collect()
    }

    pub fn sub(&self, other: &DenseMat) -> DenseMat {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        DenseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scaled(&self, alpha: f64) -> DenseMat {
        DenseMat {
            nrows: self.nrows,
            ncols: self.ncols,
            values: self.values.iter().map(|v| v * alpha).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn asymmetry(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for j in 0..self.ncols {
            for i in 0..j {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    /// Sparse view, dropping exact zeros.
    pub fn to_sparse(&self) -> SparseMat {
        let mut t = Vec::new();
        for j in 0..self.ncols {
            for i in 0..self.nrows {
                let v = self[(i, j)];
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        SparseMat::from_triplets(self.nrows, self.ncols, &t).expect("finite dense entries")
    }
}

impl Index<(usize, usize)> for DenseMat {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.values[j * self.nrows + i]
    }
}

impl IndexMut<(usize, usize)> for DenseMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.values[j * self.nrows + i]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// y += alpha * x
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Lower-triangular Cholesky factor of an SPD matrix.
pub fn cholesky(y: &DenseMat) -> Result<DenseMat> {
    let n = y.nrows();
    if y.ncols() != n {
        return Err(SvdAmgError::dims("cholesky", "matrix not square"));
    }
    let mut l = DenseMat::zeros(n, n);
    for j in 0..n {
        let mut d = y[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > 0.0) {
            return Err(SvdAmgError::NotSpd { pivot: j, value: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let mut s = y[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solves L x = b in place.
fn forward_solve(l: &DenseMat, b: &mut [f64]) {
    let n = l.nrows();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Solves Lᵗ x = b in place.
fn backward_solve_t(l: &DenseMat, b: &mut [f64]) {
    let n = l.nrows();
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Solves the SPD system G x = rhs by Cholesky.
pub fn cholesky_solve(g: &DenseMat, rhs: &[f64]) -> Result<Vec<f64>> {
    let l = cholesky(g)?;
    let mut x = rhs.to_vec();
    forward_solve(&l, &mut x);
    backward_solve_t(&l, &mut x);
    Ok(x)
}

/// Cyclic Jacobi eigensolver for a symmetric matrix.
///
/// Returns eigenvalues in ascending order with matching orthonormal eigenvector columns.
pub fn sym_eig(x: &DenseMat) -> Result<(Vec<f64>, DenseMat)> {
    let n = x.nrows();
    if x.ncols() != n {
        return Err(SvdAmgError::dims("sym_eig", "matrix not square"));
    }
    let scale = x.frobenius_norm();
    let asym = x.asymmetry();
    if asym > 1e-12 * scale {
        return Err(SvdAmgError::NotSymmetric { asymmetry: asym });
    }
    // row-major working copy of the symmetric part
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (x[(i, j)] + x[(j, i)]);
        }
    }
    // eigenvectors stored row-major as rows = vectors, so rotations touch contiguous memory
    let mut vt = vec![0.0; n * n];
    for i in 0..n {
        vt[i * n + i] = 1.0;
    }
    let target = JACOBI_TOL * scale;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if (2.0 * off).sqrt() <= target || scale == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // rows p and q
                for k in 0..n {
                    let akp = a[p * n + k];
                    let akq = a[q * n + k];
                    a[p * n + k] = c * akp - s * akq;
                    a[q * n + k] = s * akp + c * akq;
                }
                // columns p and q
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vp = vt[p * n + k];
                    let vq = vt[q * n + k];
                    vt[p * n + k] = c * vp - s * vq;
                    vt[q * n + k] = s * vp + c * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = DenseMat::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vecs.set_col(k, &vt[i * n..(i + 1) * n]);
    }
    Ok((values, vecs))
}

/// Solves (X − σY) z = 0 for symmetric X and SPD Y.
///
/// Eigenvalues ascend; eigenvectors are Y-orthonormal (ZᵗYZ = I).
pub fn dense_sym_generalized_eig(x: &DenseMat, y: &DenseMat) -> Result<(Vec<f64>, DenseMat)> {
    let n = x.nrows();
    if x.ncols() != n || y.nrows() != n || y.ncols() != n {
        return Err(SvdAmgError::dims("dense_sym_generalized_eig", "X and Y must be square and equal-sized"));
    }
    let asym = x.asymmetry();
    if asym > 1e-12 * x.frobenius_norm() {
        return Err(SvdAmgError::NotSymmetric { asymmetry: asym });
    }
    let l = cholesky(y)?;
    // W = L⁻¹ X, then C = L⁻¹ Wᵗ = L⁻¹ X L⁻ᵗ
    let mut w = x.clone();
    for j in 0..n {
        forward_solve(&l, w.col_mut(j));
    }
    let mut c = w.transpose();
    for j in 0..n {
        forward_solve(&l, c.col_mut(j));
    }
    for j in 0..n {
        for i in 0..j {
            let s = 0.5 * (c[(i, j)] + c[(j, i)]);
            c[(i, j)] = s;
            c[(j, i)] = s;
        }
    }
    let (values, mut z) = sym_eig(&c)?;
    for j in 0..n {
        backward_solve_t(&l, z.col_mut(j));
    }
    Ok((values, z))
}

/// Thin singular value decomposition D = U·diag(S)·Vᵗ with S descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMat,
    pub s: Vec<f64>,
    pub v: DenseMat,
}

/// Thin SVD built on [`sym_eig`].
///
/// Comparable shapes go through the augmented matrix [[0, D], [Dᵗ, 0]]; strongly rectangular
/// ones through the smaller Gram matrix with the other factor recovered as D·v/σ.
pub fn dense_svd(d: &DenseMat) -> Result<Svd> {
    let (m, n) = (d.nrows(), d.ncols());
    let l = m.min(n);
    if l == 0 {
        return Ok(Svd {
            u: DenseMat::zeros(m, 0),
            s: vec![],
            v: DenseMat::zeros(n, 0),
        });
    }
    let (mut us, mut s, mut vs): (Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>) = (vec![], vec![], vec![]);
    if m.max(n) <= 2 * l {
        let mut x = DenseMat::zeros(m + n, m + n);
        for j in 0..n {
            for i in 0..m {
                x[(i, m + j)] = d[(i, j)];
                x[(m + j, i)] = d[(i, j)];
            }
        }
        let (vals, vecs) = sym_eig(&x)?;
        let top = vals.last().copied().unwrap_or(0.0).max(0.0);
        for k in (0..m + n).rev() {
            if s.len() == l || vals[k] <= SVD_ZERO_TOL * top {
                break;
            }
            let z = vecs.col(k);
            let mut u = z[..m].to_vec();
            let mut v = z[m..].to_vec();
            let (nu, nv) = (norm2(&u), norm2(&v));
            u.iter_mut().for_each(|e| *e /= nu);
            v.iter_mut().for_each(|e| *e /= nv);
            us.push(u);
            vs.push(v);
            s.push(vals[k]);
        }
    } else if m >= n {
        let g = d.transpose().matmul(d);
        let (vals, vecs) = sym_eig(&g)?;
        let top = vals.last().copied().unwrap_or(0.0).max(0.0).sqrt();
        for k in (0..n).rev() {
            let sigma = vals[k].max(0.0).sqrt();
            if sigma <= SVD_ZERO_TOL * top || sigma == 0.0 {
                break;
            }
            let v = vecs.col(k).to_vec();
            let u: Vec<f64> = d.mul_vec(&v).into_iter().map(|e| e / sigma).collect();
            us.push(u);
            vs.push(v);
            s.push(sigma);
        }
    } else {
        let g = d.matmul(&d.transpose());
        let (vals, vecs) = sym_eig(&g)?;
        let top = vals.last().copied().unwrap_or(0.0).max(0.0).sqrt();
        for k in (0..m).rev() {
            let sigma = vals[k].max(0.0).sqrt();
            if sigma <= SVD_ZERO_TOL * top || sigma == 0.0 {
                break;
            }
            let u = vecs.col(k).to_vec();
            let v: Vec<f64> = d.mul_t_vec(&u).into_iter().map(|e| e / sigma).collect();
            us.push(u);
            vs.push(v);
            s.push(sigma);
        }
    }
    complete_orthonormal(&mut us, m, l);
    complete_orthonormal(&mut vs, n, l);
    s.resize(l, 0.0);
    Ok(Svd {
        u: DenseMat::from_columns(m, &us)?,
        s,
        v: DenseMat::from_columns(n, &vs)?,
    })
}

/// Extends an orthonormal set to `target` columns using canonical basis candidates.
fn complete_orthonormal(cols: &mut Vec<Vec<f64>>, dim: usize, target: usize) {
    let mut e = 0;
    while cols.len() < target && e < dim {
        let mut w = vec![0.0; dim];
        w[e] = 1.0;
        e += 1;
        for _ in 0..2 {
            for c in cols.iter() {
                let h = dot(c, &w);
                axpy(-h, c, &mut w);
            }
        }
        let nw = norm2(&w);
        if nw > 1e-8 {
            w.iter_mut().for_each(|x| *x /= nw);
            cols.push(w);
        }
    }
}

/// x = V·diag(1/sᵢ)·Uᵗ·rhs with the smallest singular value's component dropped.
///
/// Among equal smallest singular values the one ordered last is dropped. Zero singular values
/// never contribute.
pub fn pseudo_solve_drop_smallest(m: &DenseMat, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = m.nrows();
    if m.ncols() != n || rhs.len() != n {
        return Err(SvdAmgError::dims("pseudo_solve_drop_smallest", "matrix must be square and match rhs"));
    }
    let svd = dense_svd(m)?;
    let mut x = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        if svd.s[k] == 0.0 {
            continue;
        }
        let c = dot(svd.u.col(k), rhs) / svd.s[k];
        axpy(c, svd.v.col(k), &mut x);
    }
    Ok(x)
}

/// Symmetric fast path of [`pseudo_solve_drop_smallest`]: the singular values of a symmetric
/// matrix are |λ|, with identical singular subspaces, so one eigendecomposition suffices.
pub fn pseudo_solve_sym_drop_smallest(m: &DenseMat, rhs: &[f64]) -> Result<Vec<f64>> {
    pseudo_solve_sym_drop(m, rhs, 1)
}

/// Symmetric pseudo-solve leaving out the `ndrop` components of smallest |λ|.
pub fn pseudo_solve_sym_drop(m: &DenseMat, rhs: &[f64], ndrop: usize) -> Result<Vec<f64>> {
    let n = m.nrows();
    if m.ncols() != n || rhs.len() != n {
        return Err(SvdAmgError::dims("pseudo_solve_sym_drop", "matrix must be square and match rhs"));
    }
    let (vals, vecs) = sym_eig(m)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[b].abs().total_cmp(&vals[a].abs()));
    let top = order.first().map_or(0.0, |&k| vals[k].abs());
    let mut x = vec![0.0; n];
    for &k in order.iter().take(n.saturating_sub(ndrop)) {
        if vals[k].abs() <= SVD_ZERO_TOL * top {
            continue;
        }
        let c = dot(vecs.col(k), rhs) / vals[k];
        axpy(c, vecs.col(k), &mut x);
    }
    Ok(x)
}

/// Result of [`b_orthonormalize`]: the basis plus the input columns that were dropped.
#[derive(Debug, Clone)]
pub struct BOrthonormal {
    pub basis: DenseMat,
    pub dropped: Vec<usize>,
}

impl BOrthonormal {
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }
}

/// Modified Gram–Schmidt in the B inner product with one reorthogonalization pass.
pub fn b_orthonormalize(u: &DenseMat, b: &SparseMat) -> Result<BOrthonormal> {
    if b.nrows() != u.nrows() || b.ncols() != u.nrows() {
        return Err(SvdAmgError::dims("b_orthonormalize", "B must be square and match U"));
    }
    let mut qs: Vec<Vec<f64>> = Vec::with_capacity(u.ncols());
    let mut bqs: Vec<Vec<f64>> = Vec::with_capacity(u.ncols());
    let mut dropped = Vec::new();
    for j in 0..u.ncols() {
        let mut w = u.col(j).to_vec();
        let orig = dot(&w, &b.apply(&w)).max(0.0).sqrt();
        for _pass in 0..2 {
            for (q, bq) in qs.iter().zip(&bqs) {
                let h = dot(bq, &w);
                axpy(-h, q, &mut w);
            }
        }
        let bw = b.apply(&w);
        let nrm = dot(&w, &bw).max(0.0).sqrt();
        if orig == 0.0 || nrm <= ORTHO_DROP_TOL * orig {
            dropped.push(j);
            continue;
        }
        w.iter_mut().for_each(|e| *e /= nrm);
        qs.push(w);
        bqs.push(bw.into_iter().map(|e| e / nrm).collect());
    }
    Ok(BOrthonormal {
        basis: DenseMat::from_columns(u.nrows(), &qs)?,
        dropped,
    })
}
