//! Additive correction V-cycles on a frozen hierarchy, one per triplet with σ held fixed, followed
//! by a Ritz projection on the finest level.

use std::thread;

use super::relax::{relax_pair, Forcing};
use super::{Hierarchy, MatrixKind, SolverConfig};
use crate::error::{Result, SvdAmgError};
use crate::gsvd::{ritz_projection, ritz_projection_sym, TripletSet};
use crate::sparskit::dense::axpy;
use crate::sparskit::{pseudo_solve_sym_drop, DenseMat};

/// Ritz projection on the finest level, dispatching on the matrix kind.
pub(crate) fn ritz_step(h: &Hierarchy, t: &TripletSet, cfg: &SolverConfig) -> Result<TripletSet> {
    let f = h.finest();
    let res = if h.kind == MatrixKind::Symmetric {
        ritz_projection_sym(&f.a, &f.b, t, cfg.mode)
    } else {
        ritz_projection(&f.a, &f.b, &f.c, t, cfg.mode)
    };
    res.map_err(|e| e.context("finest-level Ritz projection"))
}

/// Triplets whose values agree to this relative tolerance count as one degenerate cluster.
const CLUSTER_TOL: f64 = 1e-3;

/// Exact correction on the coarsest level with the pseudo-inverse of X − σ·Y, leaving out the
/// `drop` components of smallest singular value.
#[allow(clippy::too_many_arguments)]
fn coarse_correct(
    h: &Hierarchy,
    sigma: f64,
    u: &mut [f64],
    v: &mut [f64],
    kappa: Option<&[f64]>,
    tau: Option<&[f64]>,
    drop: usize,
) -> Result<()> {
    let cd = h.coarse.as_ref().ok_or_else(|| SvdAmgError::InvalidStructure("hierarchy has no coarsest-level operators".into()))?;
    let sym = h.kind == MatrixKind::Symmetric;
    let mut op = cd.x.clone();
    let n = op.nrows();
    for j in 0..n {
        for i in 0..n {
            op[(i, j)] -= sigma * cd.y[(i, j)];
        }
    }
    let m = u.len();
    let mut z: Vec<f64> = if sym { u.to_vec() } else { u.iter().chain(v.iter()).copied().collect() };
    let mut res: Vec<f64> = match (kappa, tau, sym) {
        (Some(k), _, true) => k.to_vec(),
        (Some(k), Some(t), false) => k.iter().chain(t.iter()).copied().collect(),
        _ => vec![0.0; n],
    };
    axpy(-1.0, &op.mul_vec(&z), &mut res);
    let e = pseudo_solve_sym_drop(&op, &res, drop)?;
    axpy(1.0, &e, &mut z);
    if sym {
        u.copy_from_slice(&z);
        v.copy_from_slice(&z);
    } else {
        u.copy_from_slice(&z[..m]);
        v.copy_from_slice(&z[m..]);
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn vcycle(
    h: &Hierarchy,
    depth: usize,
    sigma: f64,
    u: &mut [f64],
    v: &mut [f64],
    kappa: Option<&[f64]>,
    tau: Option<&[f64]>,
    drop: usize,
    cfg: &SolverConfig,
) -> Result<()> {
    if depth + 1 == h.num_levels() {
        return coarse_correct(h, sigma, u, v, kappa, tau, drop);
    }
    let sym = h.kind == MatrixKind::Symmetric;
    let level = &h.levels[depth];
    let forcing = Forcing { kappa, tau };
    let mut s = sigma;
    relax_pair(level, cfg, &mut s, u, v, forcing, false, cfg.mu_b)?;

    // r = κ − (A·v − σ·B·u), s = τ − (Aᵗ·u − σ·C·v)
    let mut r = level.a.apply(if sym { &*u } else { &*v });
    axpy(-sigma, &level.b.apply(u), &mut r);
    r.iter_mut().for_each(|x| *x = -*x);
    if let Some(k) = kappa {
        axpy(1.0, k, &mut r);
    }
    let p = level.p.as_ref().expect("non-coarsest levels carry P");
    let q = level.q.as_ref().expect("non-coarsest levels carry Q");
    let kappa_c = p.apply_t(&r);
    let tau_c = if sym {
        kappa_c.clone()
    } else {
        let mut s = level.at.apply(u);
        axpy(-sigma, &level.c.apply(v), &mut s);
        s.iter_mut().for_each(|x| *x = -*x);
        if let Some(t) = tau {
            axpy(1.0, t, &mut s);
        }
        q.apply_t(&s)
    };

    let mut uc = vec![0.0; p.ncols()];
    let mut vc = vec![0.0; q.ncols()];
    vcycle(h, depth + 1, sigma, &mut uc, &mut vc, Some(&kappa_c), Some(&tau_c), drop, cfg)?;
    axpy(1.0, &p.apply(&uc), u);
    if sym {
        v.copy_from_slice(u);
    } else {
        axpy(1.0, &q.apply(&vc), v);
    }

    relax_pair(level, cfg, &mut s, u, v, forcing, false, cfg.mu_b)
}

/// One additive V-cycle for a single triplet with σ fixed throughout. The coarsest solve leaves out
/// the single component of smallest singular value.
pub fn additive_vcycle(h: &Hierarchy, sigma: f64, u: &[f64], v: &[f64], cfg: &SolverConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    additive_vcycle_dropping(h, sigma, u, v, 1, cfg)
}

/// [`additive_vcycle`] leaving out `drop` components in the coarsest solve, one per member of a
/// degenerate cluster: each partner has its own near-null coarse direction.
pub fn additive_vcycle_dropping(
    h: &Hierarchy,
    sigma: f64,
    u: &[f64],
    v: &[f64],
    drop: usize,
    cfg: &SolverConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let f = h.finest();
    if u.len() != f.nrows() || v.len() != f.ncols() {
        return Err(SvdAmgError::dims("additive_vcycle", "vectors do not match the finest level"));
    }
    let mut u = u.to_vec();
    let mut v = v.to_vec();
    vcycle(h, 0, sigma, &mut u, &mut v, None, None, drop.max(1), cfg)?;
    Ok((u, v))
}

/// Number of current values (including σⱼ itself) within [`CLUSTER_TOL`] of σⱼ.
fn cluster_size(sigmas: &[f64], j: usize) -> usize {
    let s = sigmas[j];
    sigmas.iter().filter(|&&t| (t - s).abs() <= CLUSTER_TOL * s.abs()).count()
}

/// Triplet index with its corrected (u, v).
type Corrected = (usize, Result<(Vec<f64>, Vec<f64>)>);

fn cycle_range(h: &Hierarchy, trip: &TripletSet, cfg: &SolverConfig, range: std::ops::Range<usize>) -> Vec<Corrected> {
    range
        .map(|j| {
            let res = additive_vcycle_dropping(h, trip.sigmas[j], trip.u.col(j), trip.v.col(j), cluster_size(&trip.sigmas, j), cfg)
                .map_err(|e| e.context(format!("additive V-cycle for triplet {j}")));
            (j, res)
        })
        .collect()
}

/// One V-cycle per triplet (concurrently when `cfg.threads > 1`), then a Ritz projection.
pub fn additive_iteration(h: &Hierarchy, trip: &TripletSet, cfg: &SolverConfig) -> Result<TripletSet> {
    let n_b = trip.len();
    let workers = cfg.threads.clamp(1, n_b.max(1));
    let results = if workers == 1 {
        cycle_range(h, trip, cfg, 0..n_b)
    } else {
        let chunk = n_b.div_ceil(workers);
        thread::scope(|scope| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let range = (w * chunk).min(n_b)..((w + 1) * chunk).min(n_b);
                    scope.spawn(move || cycle_range(h, trip, cfg, range))
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|hd| hd.join().expect("additive worker panicked"))
                .collect()
        })
    };
    let mut u = DenseMat::zeros(trip.u.nrows(), n_b);
    let mut v = DenseMat::zeros(trip.v.nrows(), n_b);
    for (j, res) in results {
        let (uj, vj) = res?;
        u.set_col(j, &uj);
        v.set_col(j, &vj);
    }
    let updated = TripletSet {
        sigmas: trip.sigmas.clone(),
        u,
        v,
    };
    ritz_step(h, &updated, cfg)
}
