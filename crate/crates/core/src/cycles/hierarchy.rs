use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{MatrixKind, Mode};
use crate::coarsen::Splitting;
use crate::error::{Result, SvdAmgError};
use crate::sparskit::dense::dot;
use crate::sparskit::{DenseMat, SparseMat};

/// One level of the hierarchy: operators, and (except on the coarsest) the transfers to the
/// next coarser level.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    /// m_ℓ × n_ℓ.
    pub a: SparseMat,
    /// m_ℓ × m_ℓ SPD.
    pub b: SparseMat,
    /// n_ℓ × n_ℓ SPD.
    pub c: SparseMat,
    /// Interpolation from the next coarser u-space.
    pub p: Option<SparseMat>,
    /// Interpolation from the next coarser v-space.
    pub q: Option<SparseMat>,
    pub split_u: Option<Splitting>,
    pub split_v: Option<Splitting>,
    pub depth: usize,
    pub(crate) at: SparseMat,
    pub(crate) dinv_b: Vec<f64>,
    pub(crate) dinv_c: Vec<f64>,
}

fn inverse_diagonal(m: &SparseMat, op: &'static str) -> Result<Vec<f64>> {
    m.diag()
        .into_iter()
        .enumerate()
        .map(|(row, d)| if d > 0.0 { Ok(1.0 / d) } else { Err(SvdAmgError::ZeroDiagonal { op, row }) })
        .collect()
}

impl Level {
    pub fn new(a: SparseMat, b: SparseMat, c: SparseMat, depth: usize) -> Result<Level> {
        let (m, n) = (a.nrows(), a.ncols());
        if b.nrows() != m || b.ncols() != m || c.nrows() != n || c.ncols() != n {
            return Err(SvdAmgError::dims("Level::new", format!("A is {m}×{n}, B must be {m}×{m} and C {n}×{n}")));
        }
        let dinv_b = inverse_diagonal(&b, "level mass matrix B")?;
        let dinv_c = inverse_diagonal(&c, "level mass matrix C")?;
        Ok(Level {
            at: a.transpose(),
            a,
            b,
            c,
            p: None,
            q: None,
            split_u: None,
            split_v: None,
            depth,
            dinv_b,
            dinv_c,
        })
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    /// Aᵗ, stored explicitly for row-oriented relaxation.
    pub fn a_transpose(&self) -> &SparseMat {
        &self.at
    }

    pub(crate) fn clear_transfers(&mut self) {
        self.p = None;
        self.q = None;
        self.split_u = None;
        self.split_v = None;
    }
}

/// Dense copies of the coarsest operators used by the additive coarse solve.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CoarseDense {
    /// Symmetric kind: A_c. Otherwise the augmented [[0, A_c], [A_cᵗ, 0]].
    pub x: DenseMat,
    /// Symmetric kind: B_c. Otherwise diag(B_c, C_c).
    pub y: DenseMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hierarchy {
    /// Level 0 is the finest.
    pub levels: Vec<Level>,
    pub mode: Mode,
    pub kind: MatrixKind,
    pub(crate) coarse: Option<CoarseDense>,
}

impl Hierarchy {
    /// Single-level hierarchy with B = I and C = I on the finest level.
    pub fn new(a: SparseMat, mode: Mode, kind: MatrixKind) -> Result<Hierarchy> {
        let (m, n) = (a.nrows(), a.ncols());
        if kind != MatrixKind::Rectangular && m != n {
            return Err(SvdAmgError::dims("Hierarchy::new", format!("{kind:?} kind needs a square matrix, got {m}×{n}")));
        }
        let level = Level::new(a, SparseMat::identity(m), SparseMat::identity(n), 0)?;
        let mut h = Hierarchy {
            levels: vec![level],
            mode,
            kind,
            coarse: None,
        };
        h.refresh_coarse();
        Ok(h)
    }

    pub fn finest(&self) -> &Level {
        &self.levels[0]
    }

    pub fn coarsest(&self) -> &Level {
        self.levels.last().expect("hierarchy has at least one level")
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.kind == MatrixKind::Symmetric
    }

    /// (rows, cols, nnz(A)) per level, finest first.
    pub fn summary(&self) -> Vec<(usize, usize, usize)> {
        self.levels.iter().map(|l| (l.nrows(), l.ncols(), l.a.nnz())).collect()
    }

    pub(crate) fn refresh_coarse(&mut self) {
        let last = self.coarsest();
        let dense = if self.kind == MatrixKind::Symmetric {
            CoarseDense {
                x: last.a.to_dense(),
                y: last.b.to_dense(),
            }
        } else {
            let (m, n) = (last.nrows(), last.ncols());
            let mut x = DenseMat::zeros(m + n, m + n);
            let mut y = DenseMat::zeros(m + n, m + n);
            for i in 0..m {
                let (cols, vals) = last.a.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    x[(i, m + j)] = v;
                    x[(m + j, i)] = v;
                }
                let (cols, vals) = last.b.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    y[(i, j)] = v;
                }
            }
            for i in 0..n {
                let (cols, vals) = last.c.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    y[(m + i, m + j)] = v;
                }
            }
            CoarseDense { x, y }
        };
        self.coarse = Some(dense);
    }
}

/// Test vectors of one level. For symmetric problems `v` mirrors `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    /// m_ℓ × n_t.
    pub u: DenseMat,
    /// n_ℓ × n_t.
    pub v: DenseMat,
}

pub(crate) fn random_unit(g: &SparseMat, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let mut x: Vec<f64> = (0..g.nrows()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let nrm = dot(&x, &g.apply(&x)).sqrt();
        if nrm > 0.0 && nrm.is_finite() {
            x.iter_mut().for_each(|e| *e /= nrm);
            return x;
        }
    }
}

/// Rescales x to unit G-norm; a vanishing or non-finite x is redrawn.
pub(crate) fn normalize_or_redraw(g: &SparseMat, x: &mut [f64], rng: &mut ChaCha8Rng) {
    let nrm = dot(x, &g.apply(x)).sqrt();
    if nrm > f64::MIN_POSITIVE && nrm.is_finite() {
        x.iter_mut().for_each(|e| *e /= nrm);
    } else {
        x.copy_from_slice(&random_unit(g, rng));
    }
}

impl TestSet {
    /// n_t columns drawn uniformly from (−1, 1) and normalized; u-columns are drawn before v-columns.
    pub fn random(level: &Level, kind: MatrixKind, n_t: usize, rng: &mut ChaCha8Rng) -> Result<TestSet> {
        let us: Vec<Vec<f64>> = (0..n_t).map(|_| random_unit(&level.b, rng)).collect();
        let u = DenseMat::from_columns(level.nrows(), &us)?;
        let v = if kind == MatrixKind::Symmetric {
            u.clone()
        } else {
            let vs: Vec<Vec<f64>> = (0..n_t).map(|_| random_unit(&level.c, rng)).collect();
            DenseMat::from_columns(level.ncols(), &vs)?
        };
        Ok(TestSet { u, v })
    }

    pub fn len(&self) -> usize {
        self.u.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.u.ncols() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn finest_level_has_identity_mass() {
        let a = SparseMat::from_dense(2, 3, &[1.0, 0.0, 2.0, 0.0, 3.0, 0.0]).unwrap();
        let h = Hierarchy::new(a, Mode::Dominant, MatrixKind::Rectangular).unwrap();
        assert_eq!(h.finest().b, SparseMat::identity(2));
        assert_eq!(h.finest().c, SparseMat::identity(3));
        assert_eq!(h.summary(), vec![(2, 3, 3)]);
        let coarse = h.coarse.as_ref().unwrap();
        assert_eq!(coarse.x[(0, 4)], 2.0);
        assert_eq!(coarse.x[(4, 0)], 2.0);
        assert_eq!(coarse.y, DenseMat::identity(5));
    }

    #[test]
    fn symmetric_kind_rejects_rectangular() {
        let a = SparseMat::from_dense(1, 2, &[1.0, 1.0]).unwrap();
        assert!(Hierarchy::new(a, Mode::Minimal, MatrixKind::Symmetric).is_err());
    }

    #[test]
    fn random_test_set_is_normalized_and_seeded() {
        let level = Level::new(SparseMat::identity(4), SparseMat::diagonal(&[1.0, 2.0, 3.0, 4.0]), SparseMat::identity(4), 0).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(9);
        let mut r2 = ChaCha8Rng::seed_from_u64(9);
        let t1 = TestSet::random(&level, MatrixKind::Square, 3, &mut r1).unwrap();
        let t2 = TestSet::random(&level, MatrixKind::Square, 3, &mut r2).unwrap();
        assert_eq!(t1, t2);
        for k in 0..3 {
            let u = t1.u.col(k);
            assert!((dot(u, &level.b.apply(u)) - 1.0).abs() < 1e-14);
            assert!(u.iter().all(|x| x.abs() < 1.0));
        }
        let mut zero = vec![0.0; 4];
        normalize_or_redraw(&level.b, &mut zero, &mut r1);
        assert!((dot(&zero, &level.b.apply(&zero)) - 1.0).abs() < 1e-14);
    }
}
