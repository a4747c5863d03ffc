//! Strength of connection, one-pass Ruge–Stueben C/F splitting and interpolation sparsity patterns.

use std::cmp::Reverse;
use std::collections::BTreeSet;

use crate::cycles::MatrixKind;
use crate::error::{Result, SvdAmgError};
use crate::sparskit::SparseMat;

/// Directed strong-influence graph of a square operator.
#[derive(Debug, Clone, PartialEq)]
pub struct StrengthGraph {
    pub n: usize,
    /// `influenced_by[i]`: points j that strongly influence i.
    pub influenced_by: Vec<Vec<usize>>,
    /// `influences[j]`: points i strongly influenced by j.
    pub influences: Vec<Vec<usize>>,
}

/// C/F partition of one side of a level.
#[derive(Debug, Clone, PartialEq)]
pub struct Splitting {
    /// C-points in ascending fine index order; position = coarse index.
    pub cpoints: Vec<usize>,
    pub fpoints: Vec<usize>,
    /// Fine index → coarse index for C-points.
    pub coarse_index: Vec<Option<usize>>,
    /// Per fine point, the C-points (fine indices, ascending) it interpolates from; empty for C-points.
    pub interp_sets: Vec<Vec<usize>>,
}

impl Splitting {
    fn from_flags(is_c: &[bool]) -> Self {
        let mut cpoints = Vec::new();
        let mut fpoints = Vec::new();
        let mut coarse_index = vec![None; is_c.len()];
        for (i, &c) in is_c.iter().enumerate() {
            if c {
                coarse_index[i] = Some(cpoints.len());
                cpoints.push(i);
            } else {
                fpoints.push(i);
            }
        }
        Splitting {
            cpoints,
            fpoints,
            coarse_index,
            interp_sets: vec![Vec::new(); is_c.len()],
        }
    }

    pub fn n_fine(&self) -> usize {
        self.coarse_index.len()
    }

    pub fn n_coarse(&self) -> usize {
        self.cpoints.len()
    }

    pub fn is_c(&self, i: usize) -> bool {
        self.coarse_index[i].is_some()
    }

    /// Values at C-points, in coarse order.
    pub fn inject(&self, fine: &[f64]) -> Vec<f64> {
        self.cpoints.iter().map(|&i| fine[i]).collect()
    }
}

/// Sparsity pattern of an interpolation operator (fine rows, coarse columns).
#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub n_fine: usize,
    pub n_coarse: usize,
    /// Coarse column indices per fine row, ascending.
    pub rows: Vec<Vec<usize>>,
}

impl Pattern {
    pub fn from_splitting(split: &Splitting) -> Self {
        let rows = (0..split.n_fine())
            .map(|i| match split.coarse_index[i] {
                Some(a) => vec![a],
                None => split.interp_sets[i]
                    .iter()
                    .map(|&j| split.coarse_index[j].expect("interpolatory set holds C-points"))
                    .collect(),
            })
            .collect();
        Pattern {
            n_fine: split.n_fine(),
            n_coarse: split.n_coarse(),
            rows,
        }
    }

    pub fn max_row_len(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// Output of [`build_patterns`] for one level.
#[derive(Debug, Clone)]
pub struct Coarsening {
    pub split_u: Splitting,
    pub split_v: Splitting,
    pub pattern_p: Pattern,
    pub pattern_q: Pattern,
    /// Operators the strength graphs were computed from (A·Aᵗ / Aᵗ·A, or A itself).
    pub strength_u: SparseMat,
    pub strength_v: SparseMat,
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(SvdAmgError::InvalidConfig(format!(
            "strength parameter theta = {theta} must lie in (0, 1)"
        )))
    }
}

/// Point i is strongly influenced by j ≠ i when |n_ij| ≥ θ·Σ_k |n_ik| (sum includes the diagonal).
pub fn strength_graph(n_op: &SparseMat, theta: f64) -> Result<StrengthGraph> {
    if !n_op.is_square() {
        return Err(SvdAmgError::dims("strength_graph", "operator must be square"));
    }
    check_theta(theta)?;
    let n = n_op.nrows();
    let mut influenced_by = vec![Vec::new(); n];
    let mut influences = vec![Vec::new(); n];
    for (i, by) in influenced_by.iter_mut().enumerate() {
        let (cols, vals) = n_op.row(i);
        let threshold = theta * vals.iter().map(|v| v.abs()).sum::<f64>();
        for (&j, &v) in cols.iter().zip(vals) {
            if j != i && v.abs() >= threshold {
                by.push(j);
                influences[j].push(i);
            }
        }
    }
    Ok(StrengthGraph {
        n,
        influenced_by,
        influences,
    })
}

/// One-pass Ruge–Stueben splitting. Ties in the measure go to the smallest index.
pub fn rs_one_pass(s: &StrengthGraph) -> Splitting {
    #[derive(Clone, Copy, PartialEq)]
    enum State {
        Undecided,
        C,
        F,
    }
    let n = s.n;
    let mut lambda: Vec<usize> = s.influences.iter().map(Vec::len).collect();
    let mut state = vec![State::Undecided; n];
    let mut queue: BTreeSet<(Reverse<usize>, usize)> = (0..n).map(|i| (Reverse(lambda[i]), i)).collect();
    while let Some((_, i)) = queue.pop_first() {
        state[i] = State::C;
        for &j in &s.influences[i] {
            if state[j] != State::Undecided {
                continue;
            }
            state[j] = State::F;
            queue.remove(&(Reverse(lambda[j]), j));
            for &k in &s.influenced_by[j] {
                if state[k] == State::Undecided {
                    queue.remove(&(Reverse(lambda[k]), k));
                    lambda[k] += 1;
                    queue.insert((Reverse(lambda[k]), k));
                }
            }
        }
    }
    let flags: Vec<bool> = state.iter().map(|&st| st == State::C).collect();
    Splitting::from_flags(&flags)
}

/// Fills the coarse interpolatory sets; F-points without a strongly influencing C-point become C.
pub fn interpolatory_sets(s: &StrengthGraph, split: &Splitting) -> Splitting {
    let mut is_c: Vec<bool> = (0..split.n_fine()).map(|i| split.is_c(i)).collect();
    let orphans: Vec<usize> = split
        .fpoints
        .iter()
        .copied()
        .filter(|&i| !s.influenced_by[i].iter().any(|&j| is_c[j]))
        .collect();
    for i in orphans {
        is_c[i] = true;
    }
    let mut out = Splitting::from_flags(&is_c);
    for &i in &out.fpoints {
        let mut set: Vec<usize> = s.influenced_by[i].iter().copied().filter(|&j| is_c[j]).collect();
        set.sort_unstable();
        out.interp_sets[i] = set;
    }
    out
}

fn split_from(n_op: &SparseMat, theta: f64) -> Result<Splitting> {
    let graph = strength_graph(n_op, theta)?;
    let split = rs_one_pass(&graph);
    Ok(interpolatory_sets(&graph, &split))
}

/// Coarsens both sides of A and derives the sparsity patterns of P and Q.
///
/// Rectangular: u-side from A·Aᵗ, v-side from Aᵗ·A. Square and symmetric: one splitting of A
/// shared by both sides, which keeps every coarse A square.
pub fn build_patterns(a: &SparseMat, theta: f64, kind: MatrixKind) -> Result<Coarsening> {
    check_theta(theta)?;
    match kind {
        MatrixKind::Rectangular => {
            let at = a.transpose();
            let n_u = a.matmul(&at)?;
            let n_v = at.matmul(a)?;
            let split_u = split_from(&n_u, theta)?;
            let split_v = split_from(&n_v, theta)?;
            Ok(Coarsening {
                pattern_p: Pattern::from_splitting(&split_u),
                pattern_q: Pattern::from_splitting(&split_v),
                split_u,
                split_v,
                strength_u: n_u,
                strength_v: n_v,
            })
        }
        MatrixKind::Square | MatrixKind::Symmetric => {
            if !a.is_square() {
                return Err(SvdAmgError::dims("build_patterns", "square/symmetric kind needs a square matrix"));
            }
            let split = split_from(a, theta)?;
            let pattern = Pattern::from_splitting(&split);
            Ok(Coarsening {
                pattern_p: pattern.clone(),
                pattern_q: pattern,
                split_u: split.clone(),
                split_v: split,
                strength_u: a.clone(),
                strength_v: a.clone(),
            })
        }
    }
}
