//! The generalized SVD A = B·U·Σ·Vᵗ·C with SPD B and C: coarsest-level solves, Rayleigh
//! quotients and the Ritz projection on the span of the current triplets.
//!
//! Two-sided problems go through the augmented symmetric pencil
//! ([[0, A], [Aᵗ, 0]], [[B, 0], [0, C]]), whose spectrum holds ±σ for every generalized singular
//! value plus |m − n| zero modes with one vanishing block. Symmetric problems (u ≡ v, C = B)
//! reduce to the pencil (A, B) directly.

use crate::cycles::Mode;
use crate::error::{Result, SvdAmgError};
use crate::sparskit::dense::{axpy, dot, norm2};
use crate::sparskit::{b_orthonormalize, dense_sym_generalized_eig, DenseMat, SparseMat};

/// Block Y-norm below which a zero mode counts as spurious (genuine blocks have norm 1/√2).
const SPURIOUS_BLOCK_NORM: f64 = 0.1;
/// Eigenvalues with |σ| at most this fraction of the spectral radius form the zero band.
const ZERO_BAND: f64 = 1e-10;

/// n_b approximate singular triplets, ordered for the solver mode.
#[derive(Debug, Clone, PartialEq)]
pub struct TripletSet {
    pub sigmas: Vec<f64>,
    /// m × n_b left vectors.
    pub u: DenseMat,
    /// n × n_b right vectors (equal to `u` for symmetric problems).
    pub v: DenseMat,
}

impl TripletSet {
    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    /// Reorders triplets: descending σ for dominant, ascending for minimal.
    pub fn sort_for(&mut self, mode: Mode) {
        let mut order: Vec<usize> = (0..self.len()).collect();
        match mode {
            Mode::Dominant => order.sort_by(|&a, &b| self.sigmas[b].total_cmp(&self.sigmas[a])),
            Mode::Minimal => order.sort_by(|&a, &b| self.sigmas[a].total_cmp(&self.sigmas[b])),
        }
        self.sigmas = order.iter().map(|&k| self.sigmas[k]).collect();
        self.u = self.u.select_columns(&order);
        self.v = self.v.select_columns(&order);
    }
}

/// σ = uᵗAv / ((uᵗBu)^½ (vᵗCv)^½).
pub fn rayleigh_quotient(a: &SparseMat, b: &SparseMat, c: &SparseMat, u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != a.nrows() || v.len() != a.ncols() || b.nrows() != u.len() || c.nrows() != v.len() {
        return Err(SvdAmgError::dims("rayleigh_quotient", "vectors do not match operators"));
    }
    let ubu = dot(u, &b.apply(u));
    let vcv = dot(v, &c.apply(v));
    if !(ubu > 0.0) || !(vcv > 0.0) {
        return Err(SvdAmgError::RankDeficient {
            op: "rayleigh_quotient",
            column: 0,
        });
    }
    Ok(dot(u, &a.apply(v)) / (ubu.sqrt() * vcv.sqrt()))
}

/// (‖A·v − σ·B·u‖, ‖Aᵗ·u − σ·C·v‖).
pub fn triplet_residuals(a: &SparseMat, b: &SparseMat, c: &SparseMat, sigma: f64, u: &[f64], v: &[f64]) -> (f64, f64) {
    let mut r = a.apply(v);
    axpy(-sigma, &b.apply(u), &mut r);
    let mut s = a.apply_t(u);
    axpy(-sigma, &c.apply(v), &mut s);
    (norm2(&r), norm2(&s))
}

/// Flips (u, v) together so that u's largest-magnitude entry is positive.
pub(crate) fn canonical_sign(u: &mut [f64], v: &mut [f64]) {
    let mut best = 0usize;
    for (i, x) in u.iter().enumerate() {
        if x.abs() > u[best].abs() {
            best = i;
        }
    }
    if u.get(best).is_some_and(|&x| x < 0.0) {
        u.iter_mut().for_each(|x| *x = -*x);
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn block_diag(b: &DenseMat, c: &DenseMat) -> DenseMat {
    let (m, n) = (b.nrows(), c.nrows());
    let mut y = DenseMat::zeros(m + n, m + n);
    for j in 0..m {
        for i in 0..m {
            y[(i, j)] = b[(i, j)];
        }
    }
    for j in 0..n {
        for i in 0..n {
            y[(m + i, m + j)] = c[(i, j)];
        }
    }
    y
}

fn augmented(a: &DenseMat) -> DenseMat {
    let (m, n) = (a.nrows(), a.ncols());
    let mut x = DenseMat::zeros(m + n, m + n);
    for j in 0..n {
        for i in 0..m {
            x[(i, m + j)] = a[(i, j)];
            x[(m + j, i)] = a[(i, j)];
        }
    }
    x
}

fn symmetric_dense(s: &SparseMat) -> DenseMat {
    let d = s.to_dense();
    let mut out = d.clone();
    for j in 0..d.ncols() {
        for i in 0..j {
            let avg = 0.5 * (d[(i, j)] + d[(j, i)]);
            out[(i, j)] = avg;
            out[(j, i)] = avg;
        }
    }
    out
}

fn quad_norm(g: &DenseMat, x: &[f64]) -> f64 {
    dot(x, &g.mul_vec(x)).max(0.0).sqrt()
}

/// Gram–Schmidt in the G inner product with an absolute drop threshold.
fn g_orthonormal_basis(vectors: Vec<Vec<f64>>, g: &DenseMat) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut w in vectors {
        for _ in 0..2 {
            for q in &basis {
                let h = dot(&g.mul_vec(q), &w);
                axpy(-h, q, &mut w);
            }
        }
        let nw = quad_norm(g, &w);
        if nw > 1e-6 {
            w.iter_mut().for_each(|x| *x /= nw);
            basis.push(w);
        }
    }
    basis
}

/// (σ, u, v) before assembly into a [`TripletSet`].
type RawTriplet = (f64, Vec<f64>, Vec<f64>);

/// Nonnegative generalized singular triplets of the augmented pencil, descending.
///
/// Positive eigenvalues give one triplet each with blocks rescaled to unit B/C norm. In the zero
/// band, u-blocks and v-blocks are orthonormalized separately and paired, which discards the
/// spurious modes whose other block vanishes.
fn extract_triplets(a: &DenseMat, b: &DenseMat, c: &DenseMat) -> Result<Vec<RawTriplet>> {
    let (m, n) = (a.nrows(), a.ncols());
    let (vals, vecs) = dense_sym_generalized_eig(&augmented(a), &block_diag(b, c))?;
    let radius = vals.iter().fold(0.0f64, |r, v| r.max(v.abs()));
    let band = ZERO_BAND * radius;
    let mut out = Vec::new();
    let mut zero_u = Vec::new();
    let mut zero_v = Vec::new();
    for k in (0..m + n).rev() {
        let z = vecs.col(k);
        let (u, v) = (z[..m].to_vec(), z[m..].to_vec());
        if vals[k] > band {
            let (nu, nv) = (quad_norm(b, &u), quad_norm(c, &v));
            if nu < SPURIOUS_BLOCK_NORM || nv < SPURIOUS_BLOCK_NORM {
                continue;
            }
            let u: Vec<f64> = u.iter().map(|x| x / nu).collect();
            let v: Vec<f64> = v.iter().map(|x| x / nv).collect();
            out.push((vals[k], u, v));
        } else if vals[k] >= -band {
            zero_u.push(u);
            zero_v.push(v);
        }
    }
    let l = m.min(n);
    let bu = g_orthonormal_basis(zero_u, b);
    let bv = g_orthonormal_basis(zero_v, c);
    for (u, v) in bu.into_iter().zip(bv) {
        if out.len() >= l {
            break;
        }
        out.push((0.0, u, v));
    }
    Ok(out)
}

fn finish(mut picked: Vec<RawTriplet>, m: usize, n: usize) -> Result<TripletSet> {
    for (_, u, v) in picked.iter_mut() {
        canonical_sign(u, v);
    }
    let sigmas = picked.iter().map(|t| t.0).collect();
    let us: Vec<Vec<f64>> = picked.iter().map(|t| t.1.clone()).collect();
    let vs: Vec<Vec<f64>> = picked.into_iter().map(|t| t.2).collect();
    Ok(TripletSet {
        sigmas,
        u: DenseMat::from_columns(m, &us)?,
        v: DenseMat::from_columns(n, &vs)?,
    })
}

/// Direct generalized SVD of a (small) two-sided level: the n_b largest or smallest triplets.
pub fn coarsest_gsvd(a: &SparseMat, b: &SparseMat, c: &SparseMat, n_b: usize, mode: Mode) -> Result<TripletSet> {
    let (m, n) = (a.nrows(), a.ncols());
    if b.nrows() != m || b.ncols() != m || c.nrows() != n || c.ncols() != n {
        return Err(SvdAmgError::dims("coarsest_gsvd", "B must be m×m and C n×n"));
    }
    let mut all = extract_triplets(&a.to_dense(), &symmetric_dense(b), &symmetric_dense(c))?;
    if all.len() < n_b {
        return Err(SvdAmgError::TooFewTriplets {
            rows: m,
            cols: n,
            found: all.len(),
            wanted: n_b,
        });
    }
    let picked: Vec<_> = match mode {
        Mode::Dominant => all.drain(..n_b).collect(),
        Mode::Minimal => all.drain(..).rev().take(n_b).collect(),
    };
    finish(picked, m, n)
}

/// Direct solve of the symmetric pencil (A, B): the n_b algebraically largest or smallest pairs.
pub fn coarsest_eig(a: &SparseMat, b: &SparseMat, n_b: usize, mode: Mode) -> Result<TripletSet> {
    let m = a.nrows();
    if !a.is_square() || b.nrows() != m || b.ncols() != m {
        return Err(SvdAmgError::dims("coarsest_eig", "A and B must be square and equal-sized"));
    }
    if n_b > m {
        return Err(SvdAmgError::TooFewTriplets {
            rows: m,
            cols: m,
            found: m,
            wanted: n_b,
        });
    }
    let (vals, vecs) = dense_sym_generalized_eig(&symmetric_dense(a), &symmetric_dense(b))?;
    let idx: Vec<usize> = match mode {
        Mode::Dominant => (m - n_b..m).rev().collect(),
        Mode::Minimal => (0..n_b).collect(),
    };
    let picked = idx
        .into_iter()
        .map(|k| (vals[k], vecs.col(k).to_vec(), vecs.col(k).to_vec()))
        .collect();
    finish(picked, m, m)
}

/// ‖A − B·U·Σ·Vᵗ·C‖_F / ‖A‖_F for a full decomposition.
pub fn gsvd_reconstruct_check(a: &SparseMat, b: &SparseMat, c: &SparseMat, full: &TripletSet) -> Result<f64> {
    let (m, n) = (a.nrows(), a.ncols());
    let l = full.len();
    if full.u.nrows() != m || full.v.nrows() != n || full.v.ncols() != l || full.u.ncols() != l {
        return Err(SvdAmgError::dims("gsvd_reconstruct_check", "triplet blocks do not match A"));
    }
    let bd = b.to_dense();
    let cd = c.to_dense();
    let mut us = full.u.clone();
    for j in 0..l {
        us.col_mut(j).iter_mut().for_each(|x| *x *= full.sigmas[j]);
    }
    let rec = bd.matmul(&us).matmul(&full.v.transpose()).matmul(&cd);
    let ad = a.to_dense();
    let norm = ad.frobenius_norm();
    Ok(ad.sub(&rec).frobenius_norm() / if norm > 0.0 { norm } else { 1.0 })
}

fn orthonormal_or_fail(x: &DenseMat, g: &SparseMat, side: &'static str) -> Result<DenseMat> {
    let q = b_orthonormalize(x, g)?;
    match q.dropped.first() {
        Some(&column) => Err(SvdAmgError::RankDeficient { op: side, column }),
        None => Ok(q.basis),
    }
}

/// Projected matrix Xᵗ·M·Y for sparse M and dense blocks.
fn project(x: &DenseMat, m: &SparseMat, y: &DenseMat) -> DenseMat {
    let my: Vec<Vec<f64>> = y.columns().map(|c| m.apply(c)).collect();
    let mut out = DenseMat::zeros(x.ncols(), y.ncols());
    for (j, col) in my.iter().enumerate() {
        for i in 0..x.ncols() {
            out[(i, j)] = dot(x.col(i), col);
        }
    }
    out
}

/// Collective Ritz step on span(U) × span(V) for a two-sided problem.
pub fn ritz_projection(a: &SparseMat, b: &SparseMat, c: &SparseMat, trip: &TripletSet, mode: Mode) -> Result<TripletSet> {
    let nb = trip.len();
    let uh = orthonormal_or_fail(&trip.u, b, "ritz_projection (U)")?;
    let vh = orthonormal_or_fail(&trip.v, c, "ritz_projection (V)")?;
    let small = project(&uh, a, &vh);
    let gu = project(&uh, b, &uh);
    let gv = project(&vh, c, &vh);
    let mut all = extract_triplets(&small, &symmetrize(&gu), &symmetrize(&gv))?;
    if all.len() < nb {
        return Err(SvdAmgError::TooFewTriplets {
            rows: nb,
            cols: nb,
            found: all.len(),
            wanted: nb,
        });
    }
    all.truncate(nb);
    let lifted = all
        .into_iter()
        .map(|(s, y, z)| (s, uh.mul_vec(&y), vh.mul_vec(&z)))
        .collect();
    let mut out = finish(lifted, a.nrows(), a.ncols())?;
    out.sort_for(mode);
    Ok(out)
}

/// Rayleigh–Ritz on span(X) for the symmetric pencil (A, B).
pub fn ritz_projection_sym(a: &SparseMat, b: &SparseMat, trip: &TripletSet, mode: Mode) -> Result<TripletSet> {
    let xh = orthonormal_or_fail(&trip.u, b, "ritz_projection (X)")?;
    let h = symmetrize(&project(&xh, a, &xh));
    let g = symmetrize(&project(&xh, b, &xh));
    let (vals, vecs) = dense_sym_generalized_eig(&h, &g)?;
    let lifted = (0..vals.len())
        .map(|k| {
            let x = xh.mul_vec(vecs.col(k));
            (vals[k], x.clone(), x)
        })
        .collect();
    let mut out = finish(lifted, a.nrows(), a.nrows())?;
    out.sort_for(mode);
    Ok(out)
}

fn symmetrize(g: &DenseMat) -> DenseMat {
    let mut out = g.clone();
    for j in 0..g.ncols() {
        for i in 0..j {
            let s = 0.5 * (g[(i, j)] + g[(j, i)]);
            out[(i, j)] = s;
            out[(j, i)] = s;
        }
    }
    out
}
