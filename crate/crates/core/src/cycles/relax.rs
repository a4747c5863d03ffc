//! Relaxation of test vectors and boot triplets on one level.
//!
//! Dominant mode uses inexact power steps (weighted Jacobi on the B and C blocks). Minimal mode
//! uses Kaczmarz sweeps: on A·v = σ·B·u + κ for v and on Aᵗ·u = σ·C·v + τ for u, or directly on
//! (A − σ·B)·x = κ for symmetric problems.

use rand_chacha::ChaCha8Rng;

use super::hierarchy::normalize_or_redraw;
use super::{Level, MatrixKind, Mode, SolverConfig, TestSet};
use crate::error::{Result, SvdAmgError};
use crate::gsvd::{rayleigh_quotient, TripletSet};
use crate::sparskit::dense::{axpy, dot};
use crate::sparskit::sparse::{jacobi_in_place, kaczmarz_in_place, row_norms_sq};
use crate::sparskit::{DenseMat, SparseMat};

/// μ_t outer sweeps on every test-vector column, normalizing after each half-step.
pub fn relax_test_vectors(level: &Level, ts: &mut TestSet, cfg: &SolverConfig, rng: &mut ChaCha8Rng) -> Result<()> {
    if cfg.mu_t == 0 {
        return Ok(());
    }
    let sym = cfg.kind == MatrixKind::Symmetric;
    let (norms_a, norms_at) = match cfg.mode {
        Mode::Minimal => (
            Some(row_norms_sq(&level.a, "test-vector Kaczmarz on A")?),
            if sym { None } else { Some(row_norms_sq(&level.at, "test-vector Kaczmarz on Aᵗ")?) },
        ),
        Mode::Dominant => (None, None),
    };
    let zero_m = vec![0.0; level.nrows()];
    let zero_n = vec![0.0; level.ncols()];
    for k in 0..ts.len() {
        let mut u = ts.u.col(k).to_vec();
        let mut v = ts.v.col(k).to_vec();
        for _ in 0..cfg.mu_t {
            match (cfg.mode, sym) {
                (Mode::Dominant, true) => {
                    let rhs = level.a.apply(&u);
                    jacobi_in_place(&level.b, &level.dinv_b, &rhs, &mut u, cfg.omega_j, cfg.mu_tj);
                    normalize_or_redraw(&level.b, &mut u, rng);
                }
                (Mode::Dominant, false) => {
                    let rhs = level.at.apply(&u);
                    jacobi_in_place(&level.c, &level.dinv_c, &rhs, &mut v, cfg.omega_j, cfg.mu_tj);
                    normalize_or_redraw(&level.c, &mut v, rng);
                    let rhs = level.a.apply(&v);
                    jacobi_in_place(&level.b, &level.dinv_b, &rhs, &mut u, cfg.omega_j, cfg.mu_tj);
                    normalize_or_redraw(&level.b, &mut u, rng);
                }
                (Mode::Minimal, true) => {
                    kaczmarz_in_place(&level.a, norms_a.as_deref().unwrap(), &zero_m, &mut u, 1);
                    normalize_or_redraw(&level.b, &mut u, rng);
                }
                (Mode::Minimal, false) => {
                    kaczmarz_in_place(&level.a, norms_a.as_deref().unwrap(), &zero_m, &mut v, 1);
                    normalize_or_redraw(&level.c, &mut v, rng);
                    kaczmarz_in_place(&level.at, norms_at.as_deref().unwrap(), &zero_n, &mut u, 1);
                    normalize_or_redraw(&level.b, &mut u, rng);
                }
            }
        }
        ts.u.set_col(k, &u);
        if sym {
            ts.v.set_col(k, &u);
        } else {
            ts.v.set_col(k, &v);
        }
    }
    Ok(())
}

/// Right-hand sides of one triplet's equations A·v − σ·B·u = κ, Aᵗ·u − σ·C·v = τ.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Forcing<'a> {
    pub kappa: Option<&'a [f64]>,
    pub tau: Option<&'a [f64]>,
}

/// Symmetric Rayleigh quotient xᵗAx / xᵗBx.
pub(crate) fn sym_rayleigh(a: &SparseMat, b: &SparseMat, x: &[f64]) -> Result<f64> {
    let xbx = dot(x, &b.apply(x));
    if !(xbx > 0.0) {
        return Err(SvdAmgError::RankDeficient {
            op: "rayleigh_quotient",
            column: 0,
        });
    }
    Ok(dot(x, &a.apply(x)) / xbx)
}

/// `sweeps` outer block Gauss–Seidel sweeps on one triplet. With `update_sigma`, σ is replaced by
/// the Rayleigh quotient after every sweep (and, in minimal mode, v is negated if it turns
/// negative). For symmetric problems only `u` is relaxed and `v` is overwritten with it.
#[allow(clippy::too_many_arguments)]
pub(crate) fn relax_pair(
    level: &Level,
    cfg: &SolverConfig,
    sigma: &mut f64,
    u: &mut [f64],
    v: &mut [f64],
    forcing: Forcing<'_>,
    update_sigma: bool,
    sweeps: usize,
) -> Result<()> {
    if sweeps == 0 {
        return Ok(());
    }
    let sym = cfg.kind == MatrixKind::Symmetric;
    let (m, n) = (level.nrows(), level.ncols());
    let norms = match (cfg.mode, sym) {
        (Mode::Minimal, false) => Some((
            row_norms_sq(&level.a, "boot Kaczmarz on A")?,
            row_norms_sq(&level.at, "boot Kaczmarz on Aᵗ")?,
        )),
        _ => None,
    };
    let mut shifted: Option<(f64, SparseMat, Vec<f64>)> = None;
    for _ in 0..sweeps {
        match (cfg.mode, sym) {
            (Mode::Dominant, _) => {
                if *sigma == 0.0 {
                    return Err(SvdAmgError::InvalidStructure(format!(
                        "dominant relaxation on level {} needs a nonzero singular value estimate",
                        level.depth
                    )));
                }
                let src: &[f64] = if sym { u } else { v };
                let mut rhs = level.a.apply(src);
                if let Some(k) = forcing.kappa {
                    axpy(-1.0, k, &mut rhs);
                }
                rhs.iter_mut().for_each(|x| *x /= *sigma);
                jacobi_in_place(&level.b, &level.dinv_b, &rhs, u, cfg.omega_j, cfg.mu_bj);
                if !sym {
                    let mut rhs = level.at.apply(u);
                    if let Some(t) = forcing.tau {
                        axpy(-1.0, t, &mut rhs);
                    }
                    rhs.iter_mut().for_each(|x| *x /= *sigma);
                    jacobi_in_place(&level.c, &level.dinv_c, &rhs, v, cfg.omega_j, cfg.mu_bj);
                }
            }
            (Mode::Minimal, true) => {
                if shifted.as_ref().is_none_or(|(s, _, _)| *s != *sigma) {
                    let op = level.a.add_scaled(-*sigma, &level.b)?;
                    // σ may hit a diagonal entry exactly and empty a row; such rows are skipped
                    let nrm = (0..m).map(|i| op.row(i).1.iter().map(|v| v * v).sum()).collect();
                    shifted = Some((*sigma, op, nrm));
                }
                let (_, op, nrm) = shifted.as_ref().unwrap();
                let zero;
                let rhs = match forcing.kappa {
                    Some(k) => k,
                    None => {
                        zero = vec![0.0; m];
                        &zero
                    }
                };
                kaczmarz_in_place(op, nrm, rhs, u, 1);
            }
            (Mode::Minimal, false) => {
                let (na, nat) = norms.as_ref().unwrap();
                let mut rhs = level.b.apply(u);
                rhs.iter_mut().for_each(|x| *x *= *sigma);
                if let Some(k) = forcing.kappa {
                    axpy(1.0, k, &mut rhs);
                }
                kaczmarz_in_place(&level.a, na, &rhs, v, 1);
                let mut rhs = level.c.apply(v);
                rhs.iter_mut().for_each(|x| *x *= *sigma);
                if let Some(t) = forcing.tau {
                    axpy(1.0, t, &mut rhs);
                }
                debug_assert_eq!(rhs.len(), n);
                kaczmarz_in_place(&level.at, nat, &rhs, u, 1);
            }
        }
        if update_sigma {
            if sym {
                *sigma = sym_rayleigh(&level.a, &level.b, u)?;
            } else {
                *sigma = rayleigh_quotient(&level.a, &level.b, &level.c, u, v)?;
                if cfg.mode == Mode::Minimal && *sigma < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                    *sigma = -*sigma;
                }
            }
        }
    }
    if sym {
        v.copy_from_slice(u);
    }
    Ok(())
}

/// μ_b outer sweeps on every boot triplet with optional forcing columns κ and τ.
///
/// Without forcing (the multiplicative phase) σ is updated by Rayleigh quotients after every
/// sweep; with forcing σ stays fixed.
pub fn relax_boot_triplets(
    level: &Level,
    trip: &mut TripletSet,
    forcing: Option<(&DenseMat, &DenseMat)>,
    cfg: &SolverConfig,
) -> Result<()> {
    for j in 0..trip.len() {
        let mut u = trip.u.col(j).to_vec();
        let mut v = trip.v.col(j).to_vec();
        let f = match forcing {
            Some((k, t)) => Forcing {
                kappa: Some(k.col(j)),
                tau: Some(t.col(j)),
            },
            None => Forcing::default(),
        };
        relax_pair(level, cfg, &mut trip.sigmas[j], &mut u, &mut v, f, forcing.is_none(), cfg.mu_b)
            .map_err(|e| e.context(format!("relaxing triplet {j} on level {}", level.depth)))?;
        trip.u.set_col(j, &u);
        trip.v.set_col(j, &v);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn level(a: SparseMat, b: SparseMat, c: SparseMat) -> Level {
        Level::new(a, b, c, 0).unwrap()
    }

    fn cfg(mode: Mode, kind: MatrixKind) -> SolverConfig {
        SolverConfig {
            mode,
            kind,
            ..SolverConfig::default()
        }
    }

    #[test]
    fn power_half_step_example() {
        let l = level(SparseMat::diagonal(&[2.0, 1.0]), SparseMat::identity(2), SparseMat::identity(2));
        let mut ts = TestSet {
            u: DenseMat::from_rows(&[&[1.0], &[0.0]]).unwrap(),
            v: DenseMat::from_rows(&[&[1.0], &[0.0]]).unwrap(),
        };
        let c = SolverConfig { mu_t: 1, ..cfg(Mode::Dominant, MatrixKind::Square) };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        relax_test_vectors(&l, &mut ts, &c, &mut rng).unwrap();
        assert!((ts.v[(0, 0)] - 1.0).abs() < 1e-15 && ts.v[(1, 0)] == 0.0);
        assert!((ts.u[(0, 0)] - 1.0).abs() < 1e-15 && ts.u[(1, 0)] == 0.0);
    }

    #[test]
    fn zero_test_sweeps_is_identity() {
        let l = level(SparseMat::diagonal(&[2.0, 1.0]), SparseMat::identity(2), SparseMat::identity(2));
        let ts0 = TestSet {
            u: DenseMat::from_rows(&[&[0.3], &[0.4]]).unwrap(),
            v: DenseMat::from_rows(&[&[0.6], &[0.8]]).unwrap(),
        };
        let mut ts = ts0.clone();
        let c = SolverConfig { mu_t: 0, ..cfg(Mode::Dominant, MatrixKind::Square) };
        relax_test_vectors(&l, &mut ts, &c, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert_eq!(ts, ts0);
    }

    #[test]
    fn exact_dominant_pair_is_fixed_point() {
        let l = level(SparseMat::diagonal(&[3.0, 1.0]), SparseMat::identity(2), SparseMat::identity(2));
        let mut ts = TestSet {
            u: DenseMat::from_rows(&[&[1.0], &[0.0]]).unwrap(),
            v: DenseMat::from_rows(&[&[1.0], &[0.0]]).unwrap(),
        };
        relax_test_vectors(&l, &mut ts, &cfg(Mode::Dominant, MatrixKind::Square), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!((ts.u[(0, 0)] - 1.0).abs() < 1e-15 && ts.u[(1, 0)] == 0.0);
    }

    #[test]
    fn jacobi_boot_step_example() {
        let l = level(SparseMat::diagonal(&[2.0]), SparseMat::diagonal(&[4.0]), SparseMat::diagonal(&[1.0]));
        let c = SolverConfig {
            omega_j: 1.0,
            ..cfg(Mode::Dominant, MatrixKind::Square)
        };
        let (mut s, mut u, mut v) = (1.0, vec![0.4], vec![1.0]);
        let zero = [0.0];
        // only the u-block of one sweep: stop after the first half by inspecting u
        let mut u_half = u.clone();
        let rhs = [(2.0 * v[0] - 0.0) / s];
        jacobi_in_place(&l.b, &l.dinv_b, &rhs, &mut u_half, 1.0, 1);
        assert!((u_half[0] - 0.5).abs() < 1e-15);
        let f = Forcing {
            kappa: Some(&zero),
            tau: Some(&zero),
        };
        relax_pair(&l, &c, &mut s, &mut u, &mut v, f, false, 1).unwrap();
        assert!((u[0] - 0.5).abs() < 1e-15);
        assert!((v[0] - 1.0).abs() < 1e-15);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn exact_triplets_are_fixed_points() {
        let a = SparseMat::diagonal(&[3.0, 1.0]);
        for mode in [Mode::Dominant, Mode::Minimal] {
            for kind in [MatrixKind::Square, MatrixKind::Symmetric] {
                let l = level(a.clone(), SparseMat::identity(2), SparseMat::identity(2));
                let mut trip = TripletSet {
                    sigmas: vec![3.0, 1.0],
                    u: DenseMat::identity(2),
                    v: DenseMat::identity(2),
                };
                let before = trip.clone();
                relax_boot_triplets(&l, &mut trip, None, &cfg(mode, kind)).unwrap();
                for j in 0..2 {
                    assert!((trip.sigmas[j] - before.sigmas[j]).abs() < 1e-14, "{mode:?} {kind:?}");
                    for i in 0..2 {
                        assert!((trip.u[(i, j)] - before.u[(i, j)]).abs() < 1e-14);
                        assert!((trip.v[(i, j)] - before.v[(i, j)]).abs() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn zero_boot_sweeps_is_identity() {
        let l = level(SparseMat::diagonal(&[3.0, 1.0]), SparseMat::identity(2), SparseMat::identity(2));
        let mut trip = TripletSet {
            sigmas: vec![2.0],
            u: DenseMat::from_rows(&[&[0.6], &[0.8]]).unwrap(),
            v: DenseMat::from_rows(&[&[0.8], &[0.6]]).unwrap(),
        };
        let before = trip.clone();
        let c = SolverConfig { mu_b: 0, ..cfg(Mode::Dominant, MatrixKind::Square) };
        relax_boot_triplets(&l, &mut trip, None, &c).unwrap();
        assert_eq!(trip, before);
    }

    #[test]
    fn minimal_sign_fix_keeps_sigma_nonnegative() {
        let l = level(SparseMat::diagonal(&[3.0, 1.0]), SparseMat::identity(2), SparseMat::identity(2));
        let mut trip = TripletSet {
            sigmas: vec![1.0],
            u: DenseMat::from_rows(&[&[0.1], &[1.0]]).unwrap(),
            v: DenseMat::from_rows(&[&[0.0], &[-1.0]]).unwrap(),
        };
        relax_boot_triplets(&l, &mut trip, None, &cfg(Mode::Minimal, MatrixKind::Square)).unwrap();
        assert!(trip.sigmas[0] >= 0.0);
    }

    #[test]
    fn kaczmarz_needs_nonzero_rows() {
        let a = SparseMat::from_dense(2, 2, &[1.0, 0.0, 0.0, 0.0]).unwrap();
        let l = level(a, SparseMat::identity(2), SparseMat::identity(2));
        let mut ts = TestSet {
            u: DenseMat::identity(2),
            v: DenseMat::identity(2),
        };
        let err = relax_test_vectors(&l, &mut ts, &cfg(Mode::Minimal, MatrixKind::Square), &mut ChaCha8Rng::seed_from_u64(0));
        assert!(matches!(err, Err(SvdAmgError::ZeroRow { row: 1, .. })));
    }
}
