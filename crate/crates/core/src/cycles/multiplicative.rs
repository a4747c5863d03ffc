//! Multiplicative bootstrap V-cycles: relax, coarsen, fit P and Q, solve on the coarsest level,
//! and interpolate the triplets back up.

use rand_chacha::ChaCha8Rng;

use super::additive::ritz_step;
use super::relax::sym_rayleigh;
use super::{relax_boot_triplets, relax_test_vectors, Hierarchy, Level, MatrixKind, Mode, SolverConfig, TestSet};
use crate::coarsen::{build_patterns, Coarsening};
use crate::error::{Result, SvdAmgError};
use crate::gsvd::{coarsest_eig, coarsest_gsvd, rayleigh_quotient, TripletSet};
use crate::interp::{fit_interpolation, ibamg_fpoint_smooth, inject_columns, ls_weights, FitRequest};
use crate::sparskit::dense::norm2;
use crate::sparskit::{triple_product, DenseMat, SparseMat};

/// A coarse level must shrink to at most this fraction of the finer one, else coarsening stops.
const STALL_RATIO: f64 = 0.8;
/// Largest m + n accepted for the dense coarsest solve when coarsening stalls early.
const DENSE_LIMIT: usize = 3000;

/// Rayleigh quotients of the test-vector pairs, used as their LS weights.
fn test_sigmas(level: &Level, ts: &TestSet, sym: bool) -> Result<Vec<f64>> {
    (0..ts.len())
        .map(|k| {
            if sym {
                sym_rayleigh(&level.a, &level.b, ts.u.col(k))
            } else {
                rayleigh_quotient(&level.a, &level.b, &level.c, ts.u.col(k), ts.v.col(k))
            }
        })
        .collect()
}

fn check_stencils(cz: &Coarsening, available: usize, level: usize) -> Result<()> {
    for pattern in [&cz.pattern_p, &cz.pattern_q] {
        if let Some((point, row)) = pattern.rows.iter().enumerate().find(|(_, r)| r.len() > available) {
            return Err(SvdAmgError::TooFewTestVectors {
                level,
                point,
                stencil: row.len(),
                available,
            });
        }
    }
    Ok(())
}

fn fit_side(
    fit: &DenseMat,
    split: &crate::coarsen::Splitting,
    pattern: &crate::coarsen::Pattern,
    strength: &SparseMat,
    weights: &[f64],
    level: usize,
    cfg: &SolverConfig,
) -> Result<SparseMat> {
    let coarse = inject_columns(split, fit);
    let smoothed;
    let fit_vectors = if cfg.mode == Mode::Minimal {
        smoothed = ibamg_fpoint_smooth(fit, strength, &split.fpoints, cfg.omega_j)?;
        &smoothed
    } else {
        fit
    };
    fit_interpolation(&FitRequest {
        pattern,
        split,
        fit_vectors,
        coarse_values: &coarse,
        weights,
        level,
    })
}

fn inject_triplets(split_u: &crate::coarsen::Splitting, split_v: &crate::coarsen::Splitting, t: &TripletSet) -> TripletSet {
    TripletSet {
        sigmas: t.sigmas.clone(),
        u: inject_columns(split_u, &t.u),
        v: inject_columns(split_v, &t.v),
    }
}

/// Column masks for a refit: every test vector and the converged boot vectors are down-weighted.
pub(crate) struct RefitMask<'a> {
    pub converged: &'a [bool],
}

/// One downward sweep that rebuilds every level below the finest. Returns the finest-level test
/// vectors after relaxation. Boot triplets are relaxed on copies.
fn downward_sweep(
    h: &mut Hierarchy,
    tests: &TestSet,
    boot: Option<&TripletSet>,
    cfg: &SolverConfig,
    rng: &mut ChaCha8Rng,
    refit: Option<RefitMask<'_>>,
) -> Result<TestSet> {
    let sym = h.kind == MatrixKind::Symmetric;
    h.levels.truncate(1);
    h.levels[0].clear_transfers();
    let mut t = tests.clone();
    let mut b = boot.cloned();
    let mut finest_tests = None;
    let mut depth = 0;
    loop {
        let level = &h.levels[depth];
        relax_test_vectors(level, &mut t, cfg, rng).map_err(|e| e.context(format!("test vectors on level {depth}")))?;
        if depth == 0 {
            finest_tests = Some(t.clone());
        }
        if let Some(bt) = b.as_mut() {
            relax_boot_triplets(level, bt, None, cfg)?;
        }
        let (m, n) = (level.nrows(), level.ncols());
        let size = m.max(n);
        if size <= cfg.coarsest_max {
            break;
        }
        let cz = build_patterns(&level.a, cfg.theta, h.kind)?;
        let (mc, nc) = (cz.split_u.n_coarse(), cz.split_v.n_coarse());
        if mc.max(nc) as f64 > STALL_RATIO * size as f64 || mc.min(nc) < cfg.n_b {
            if m + n > DENSE_LIMIT {
                return Err(SvdAmgError::InvalidStructure(format!(
                    "coarsening stalled on level {depth} at {m}×{n} (coarse {mc}×{nc}); too large for the dense coarsest solve"
                )));
            }
            break;
        }
        check_stencils(&cz, cfg.n_t + cfg.n_b, depth)?;

        let mut sig = test_sigmas(level, &t, sym)?;
        let (fit_u, fit_v) = match &b {
            Some(bt) => {
                sig.extend_from_slice(&bt.sigmas);
                (t.u.hcat(&bt.u), t.v.hcat(&bt.v))
            }
            None => (t.u.clone(), t.v.clone()),
        };
        let mask: Option<Vec<bool>> = refit.as_ref().map(|r| {
            let mut mk = vec![true; t.len()];
            if b.is_some() {
                mk.extend_from_slice(r.converged);
            }
            mk
        });
        let weights = ls_weights(&sig, cfg.mode, mask.as_deref(), cfg.downweight);
        let p = fit_side(&fit_u, &cz.split_u, &cz.pattern_p, &cz.strength_u, &weights, depth, cfg)?;
        let q = if sym {
            p.clone()
        } else {
            fit_side(&fit_v, &cz.split_v, &cz.pattern_q, &cz.strength_v, &weights, depth, cfg)?
        };
        let mut a_c = triple_product(&p, &level.a, &q)?;
        if sym {
            a_c = a_c.symmetrized()?;
        }
        let b_c = triple_product(&p, &level.b, &p)?.symmetrized()?;
        let c_c = if sym { b_c.clone() } else { triple_product(&q, &level.c, &q)?.symmetrized()? };
        let coarse = Level::new(a_c, b_c, c_c, depth + 1).map_err(|e| e.context(format!("Galerkin operators of level {}", depth + 1)))?;

        t = TestSet {
            u: inject_columns(&cz.split_u, &t.u),
            v: inject_columns(&cz.split_v, &t.v),
        };
        b = b.map(|bt| inject_triplets(&cz.split_u, &cz.split_v, &bt));
        let lv = &mut h.levels[depth];
        lv.p = Some(p);
        lv.q = Some(q);
        lv.split_u = Some(cz.split_u);
        lv.split_v = Some(cz.split_v);
        h.levels.push(coarse);
        depth += 1;
    }
    h.refresh_coarse();
    Ok(finest_tests.expect("the finest level is always visited"))
}

/// Direct solve on the coarsest level.
fn coarsest_solve(h: &Hierarchy, cfg: &SolverConfig) -> Result<TripletSet> {
    let last = h.coarsest();
    let res = if h.kind == MatrixKind::Symmetric {
        coarsest_eig(&last.a, &last.b, cfg.n_b, cfg.mode)
    } else {
        coarsest_gsvd(&last.a, &last.b, &last.c, cfg.n_b, cfg.mode)
    };
    res.map_err(|e| e.context(format!("coarsest level {} ({}×{})", last.depth, last.nrows(), last.ncols())))
}

/// Multiplicative update u = P·u_c, v = Q·v_c from the next coarser level.
pub fn interpolate_up(level: &Level, coarse: &TripletSet) -> Result<TripletSet> {
    let (p, q) = match (&level.p, &level.q) {
        (Some(p), Some(q)) => (p, q),
        _ => return Err(SvdAmgError::InvalidStructure(format!("level {} has no interpolation", level.depth))),
    };
    if coarse.u.nrows() != p.ncols() || coarse.v.nrows() != q.ncols() {
        return Err(SvdAmgError::dims("interpolate_up", "coarse triplets do not match P and Q"));
    }
    let us: Vec<Vec<f64>> = coarse.u.columns().map(|c| p.apply(c)).collect();
    let vs: Vec<Vec<f64>> = coarse.v.columns().map(|c| q.apply(c)).collect();
    Ok(TripletSet {
        sigmas: coarse.sigmas.clone(),
        u: DenseMat::from_columns(p.nrows(), &us)?,
        v: DenseMat::from_columns(q.nrows(), &vs)?,
    })
}

fn normalize_columns(m: &mut DenseMat) {
    for j in 0..m.ncols() {
        let n = norm2(m.col(j));
        if n > 0.0 {
            m.col_mut(j).iter_mut().for_each(|x| *x /= n);
        }
    }
}

/// One multiplicative V-cycle. `trip` is absent on the first cycle. The finest test vectors are
/// relaxed in place and persist across cycles.
pub fn multiplicative_cycle(
    h: &mut Hierarchy,
    ts: &mut TestSet,
    trip: Option<&TripletSet>,
    cfg: &SolverConfig,
    rng: &mut ChaCha8Rng,
) -> Result<TripletSet> {
    *ts = downward_sweep(h, ts, trip, cfg, rng, None)?;
    let mut t = coarsest_solve(h, cfg)?;
    for depth in (0..h.num_levels() - 1).rev() {
        let level = &h.levels[depth];
        t = interpolate_up(level, &t)?;
        relax_boot_triplets(level, &mut t, None, cfg)?;
    }
    if cfg.ritz_each_mult_cycle {
        t = ritz_step(h, &t, cfg)?;
    } else {
        normalize_columns(&mut t.u);
        normalize_columns(&mut t.v);
        t.sort_for(cfg.mode);
    }
    Ok(t)
}

/// Rebuilds P, Q and the coarse operators with one downward sweep in which the test vectors and
/// the converged triplets are down-weighted. A mask without converged entries is a no-op.
pub fn refit_lagging(
    h: &mut Hierarchy,
    trip: &TripletSet,
    ts: &TestSet,
    cfg: &SolverConfig,
    converged: &[bool],
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    if converged.len() != trip.len() {
        return Err(SvdAmgError::dims("refit_lagging", "mask length must equal the number of triplets"));
    }
    if !converged.iter().any(|&c| c) {
        return Ok(());
    }
    downward_sweep(h, ts, Some(trip), cfg, rng, Some(RefitMask { converged }))
        .map(|_| ())
        .map_err(|e| e.context("refit"))
}
