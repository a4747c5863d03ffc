use std::f64::consts::PI;

use crate::cycles::Mode;
use crate::error::{Result, SvdAmgError};
use crate::sparskit::SparseMat;

/// Unscaled 5-point Dirichlet Laplacian on a k×k interior grid (diagonal 4, neighbours −1).
/// Unknown (x, y) has index x + k·y.
pub fn fd_laplacian(k: usize) -> Result<SparseMat> {
    if k == 0 {
        return Err(SvdAmgError::InvalidConfig("fd_laplacian needs k ≥ 1".into()));
    }
    let idx = |x: usize, y: usize| x + k * y;
    let mut t = Vec::with_capacity(5 * k * k);
    for y in 0..k {
        for x in 0..k {
            let i = idx(x, y);
            t.push((i, i, 4.0));
            if x > 0 {
                t.push((i, idx(x - 1, y), -1.0));
            }
            if x + 1 < k {
                t.push((i, idx(x + 1, y), -1.0));
            }
            if y > 0 {
                t.push((i, idx(x, y - 1), -1.0));
            }
            if y + 1 < k {
                t.push((i, idx(x, y + 1), -1.0));
            }
        }
    }
    SparseMat::from_triplets(k * k, k * k, &t)
}

fn extremal(mut all: Vec<f64>, n_b: usize, mode: Mode) -> Vec<f64> {
    all.sort_by(f64::total_cmp);
    match mode {
        Mode::Minimal => all.into_iter().take(n_b).collect(),
        Mode::Dominant => all.into_iter().rev().take(n_b).collect(),
    }
}

/// The n_b extremal eigenvalues 4 − 2cos(pπ/(k+1)) − 2cos(qπ/(k+1)) of [`fd_laplacian`], in mode order.
pub fn fd_eigenvalues(k: usize, n_b: usize, mode: Mode) -> Vec<f64> {
    let h = PI / (k as f64 + 1.0);
    let all = (1..=k)
        .flat_map(|p| (1..=k).map(move |q| 4.0 - 2.0 * (p as f64 * h).cos() - 2.0 * (q as f64 * h).cos()))
        .collect();
    extremal(all, n_b, mode)
}

/// Oriented edge-node incidence matrix of the k×k grid graph, 2k(k−1) × k². Horizontal edges come
/// first; each row holds +1 at the lower-indexed node and −1 at the other.
pub fn grid_incidence(k: usize) -> Result<SparseMat> {
    if k < 2 {
        return Err(SvdAmgError::InvalidConfig("grid_incidence needs k ≥ 2".into()));
    }
    let idx = |x: usize, y: usize| x + k * y;
    let mut t = Vec::with_capacity(4 * k * (k - 1));
    let mut row = 0;
    for y in 0..k {
        for x in 0..k - 1 {
            t.push((row, idx(x, y), 1.0));
            t.push((row, idx(x + 1, y), -1.0));
            row += 1;
        }
    }
    for y in 0..k - 1 {
        for x in 0..k {
            t.push((row, idx(x, y), 1.0));
            t.push((row, idx(x, y + 1), -1.0));
            row += 1;
        }
    }
    SparseMat::from_triplets(row, k * k, &t)
}

/// Graph Laplacian of the k×k grid (degree on the diagonal, −1 per edge).
pub fn grid_graph_laplacian(k: usize) -> Result<SparseMat> {
    let a = grid_incidence(k)?;
    a.transpose().matmul(&a)
}

/// The n_b extremal singular values of [`grid_incidence`], √((2 − 2cos(pπ/k)) + (2 − 2cos(qπ/k)))
/// for p, q in 0..k, in mode order.
pub fn grid_incidence_singular_values(k: usize, n_b: usize, mode: Mode) -> Vec<f64> {
    let h = PI / k as f64;
    let all = (0..k)
        .flat_map(|p| (0..k).map(move |q| (4.0 - 2.0 * (p as f64 * h).cos() - 2.0 * (q as f64 * h).cos()).max(0.0).sqrt()))
        .collect();
    extremal(all, n_b, mode)
}
