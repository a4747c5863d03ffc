//! Least-squares interpolation weights fitted to test and boot vectors.

use crate::coarsen::{Pattern, Splitting};
use crate::cycles::Mode;
use crate::error::{Result, SvdAmgError};
use crate::sparskit::sparse::jacobi_in_place;
use crate::sparskit::{cholesky_solve, DenseMat, SparseMat};

/// Rayleigh quotients below this fraction of the largest one are clamped before weighting.
const RAYLEIGH_FLOOR: f64 = 1e-12;
/// Ridge added to each normal-equation matrix, relative to its mean diagonal.
const RIDGE: f64 = 1e-12;

/// Inputs of one interpolation fit (one side of one level).
#[derive(Debug, Clone, Copy)]
pub struct FitRequest<'a> {
    pub pattern: &'a Pattern,
    pub split: &'a Splitting,
    /// n_fine × n_f: test vectors followed by boot vectors.
    pub fit_vectors: &'a DenseMat,
    /// n_coarse × n_f: the fit vectors injected at C-points.
    pub coarse_values: &'a DenseMat,
    pub weights: &'a [f64],
    /// Level index, reported in diagnostics.
    pub level: usize,
}

/// Injects every column of `vectors` at the C-points of `split`.
pub fn inject_columns(split: &Splitting, vectors: &DenseMat) -> DenseMat {
    let mut out = DenseMat::zeros(split.n_coarse(), vectors.ncols());
    for k in 0..vectors.ncols() {
        out.set_col(k, &split.inject(vectors.col(k)));
    }
    out
}

/// Per-equation LS weights: σ (dominant) or 1/σ (minimal), divided by `downweight` where masked.
pub fn ls_weights(sigmas: &[f64], mode: Mode, converged_mask: Option<&[bool]>, downweight: f64) -> Vec<f64> {
    let top = sigmas.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    let floor = if top > 0.0 { RAYLEIGH_FLOOR * top } else { f64::MIN_POSITIVE };
    sigmas
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let s = s.abs().max(floor);
            let w = match mode {
                Mode::Dominant => s,
                Mode::Minimal => 1.0 / s,
            };
            match converged_mask {
                Some(mask) if mask[k] => w / downweight,
                _ => w,
            }
        })
        .collect()
}

/// Solves the weighted normal equations of every F-point row and assembles P.
pub fn fit_interpolation(req: &FitRequest<'_>) -> Result<SparseMat> {
    let n_fine = req.pattern.n_fine;
    let n_f = req.fit_vectors.ncols();
    if req.fit_vectors.nrows() != n_fine
        || req.coarse_values.nrows() != req.pattern.n_coarse
        || req.coarse_values.ncols() != n_f
        || req.weights.len() != n_f
    {
        return Err(SvdAmgError::dims("fit_interpolation", "fit vectors, coarse values and weights disagree"));
    }
    // row-major copies: fit values per fine point, coarse values per coarse point
    let mut coarse = vec![0.0; req.pattern.n_coarse * n_f];
    for k in 0..n_f {
        for (a, &v) in req.coarse_values.col(k).iter().enumerate() {
            coarse[a * n_f + k] = v;
        }
    }
    let mut row_offsets = Vec::with_capacity(n_fine + 1);
    row_offsets.push(0);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();
    for i in 0..n_fine {
        let cols = &req.pattern.rows[i];
        if req.split.is_c(i) {
            col_indices.push(cols[0]);
            values.push(1.0);
        } else {
            let w = fit_row(req, i, cols, &coarse, n_f)?;
            col_indices.extend_from_slice(cols);
            values.extend(w);
        }
        row_offsets.push(values.len());
    }
    SparseMat::new(n_fine, req.pattern.n_coarse, row_offsets, col_indices, values)
}

fn fit_row(req: &FitRequest<'_>, i: usize, cols: &[usize], coarse: &[f64], n_f: usize) -> Result<Vec<f64>> {
    let nc = cols.len();
    let singular = SvdAmgError::SingularFit {
        level: req.level,
        point: i,
    };
    if nc == 0 {
        return Err(singular);
    }
    let mut g = DenseMat::zeros(nc, nc);
    let mut rhs = vec![0.0; nc];
    for k in 0..n_f {
        let wk = req.weights[k];
        let fine = req.fit_vectors[(i, k)];
        for (a, &ca) in cols.iter().enumerate() {
            let xa = coarse[ca * n_f + k];
            rhs[a] += wk * fine * xa;
            for (b, &cb) in cols.iter().enumerate().take(a + 1) {
                g[(a, b)] += wk * xa * coarse[cb * n_f + k];
            }
        }
    }
    let mut trace = 0.0;
    for a in 0..nc {
        trace += g[(a, a)];
        for b in 0..a {
            g[(b, a)] = g[(a, b)];
        }
    }
    if !(trace > 0.0) {
        return Err(singular);
    }
    let ridge = RIDGE * trace / nc as f64;
    for a in 0..nc {
        g[(a, a)] += ridge;
    }
    cholesky_solve(&g, &rhs).map_err(|_| singular)
}

/// One weighted-Jacobi sweep on N·x = 0 applied to the F-point entries of every fit vector.
pub fn ibamg_fpoint_smooth(fit_vectors: &DenseMat, n_op: &SparseMat, fpoints: &[usize], omega: f64) -> Result<DenseMat> {
    if !n_op.is_square() || n_op.nrows() != fit_vectors.nrows() {
        return Err(SvdAmgError::dims("ibamg_fpoint_smooth", "operator must be square and match the vectors"));
    }
    let dinv: Vec<f64> = n_op
        .diag()
        .into_iter()
        .enumerate()
        .map(|(row, d)| {
            if d == 0.0 {
                Err(SvdAmgError::ZeroDiagonal {
                    op: "ibamg_fpoint_smooth",
                    row,
                })
            } else {
                Ok(1.0 / d)
            }
        })
        .collect::<Result<_>>()?;
    let zero = vec![0.0; n_op.nrows()];
    let mut out = fit_vectors.clone();
    for k in 0..fit_vectors.ncols() {
        let mut relaxed = fit_vectors.col(k).to_vec();
        jacobi_in_place(n_op, &dinv, &zero, &mut relaxed, omega, 1);
        let col = out.col_mut(k);
        for &i in fpoints {
            col[i] = relaxed[i];
        }
    }
    Ok(out)
}
