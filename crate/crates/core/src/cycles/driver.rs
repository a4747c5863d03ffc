use std::io::{self, Write};
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{additive_iteration, multiplicative_cycle, refit_lagging, Hierarchy, MatrixKind, Phase, SolverConfig, TestSet};
use crate::error::{Result, SvdAmgError};
use crate::gsvd::{triplet_residuals, TripletSet};
use crate::sparskit::SparseMat;

/// Relative error below which a triplet counts as converged for refits when a reference is given.
const REFERENCE_CONVERGED: f64 = 1e-14;
/// Relative asymmetry tolerated for the symmetric kind.
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LogEntry {
    /// 1-based, counted across both phases.
    pub cycle: usize,
    pub phase: Phase,
    pub triplet: usize,
    pub sigma: f64,
    /// ‖A·v − σ·B·u‖₂ on the finest level.
    pub resid_u: f64,
    /// ‖Aᵗ·u − σ·C·v‖₂ on the finest level.
    pub resid_v: f64,
    /// |σ − σ_ref| / |σ_ref| when a reference is known.
    pub rel_error: Option<f64>,
}

/// Append-only record of every triplet after every cycle.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceLog {
    entries: Vec<LogEntry>,
}

pub const CSV_HEADER: &str = "cycle,phase,triplet,sigma,resid_u,resid_v,rel_error";

impl ConvergenceLog {
    pub fn push(&mut self, entry: LogEntry) {
        self.entries.push(entry);
    }

    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries of one cycle.
    pub fn cycle(&self, cycle: usize) -> impl Iterator<Item = &LogEntry> {
        self.entries.iter().filter(move |e| e.cycle == cycle)
    }

    /// Last cycle number logged in `phase`.
    pub fn last_cycle(&self, phase: Phase) -> Option<usize> {
        self.entries.iter().filter(|e| e.phase == phase).map(|e| e.cycle).max()
    }

    /// Largest relative error in a cycle, if errors were recorded.
    pub fn worst_error(&self, cycle: usize) -> Option<f64> {
        self.cycle(cycle).filter_map(|e| e.rel_error).reduce(f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for e in &self.entries {
            let err = e.rel_error.map(|x| format!("{x:.17e}")).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{:.17e},{:.17e},{:.17e},{}",
                e.cycle,
                e.phase.as_str(),
                e.triplet,
                e.sigma,
                e.resid_u,
                e.resid_v,
                err
            )?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhaseTimings {
    pub mult: Duration,
    pub add: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveOutput {
    /// Final triplets in mode order (eigenpairs with v = u for the symmetric kind).
    pub triplets: TripletSet,
    pub log: ConvergenceLog,
    /// The hierarchy used in the last additive iteration.
    pub hierarchy: Hierarchy,
    pub timings: PhaseTimings,
    /// The operator actually solved (after the shift).
    pub operator: SparseMat,
}

fn prepare(a: &SparseMat, cfg: &SolverConfig) -> Result<SparseMat> {
    if a.nnz() == 0 {
        return Err(SvdAmgError::InvalidStructure("matrix has no nonzero entries".into()));
    }
    let mut a = a.clone();
    if cfg.shift != 0.0 {
        if !a.is_square() {
            return Err(SvdAmgError::InvalidConfig("a shift needs a square matrix".into()));
        }
        a = a.add_scaled(cfg.shift, &SparseMat::identity(a.nrows()))?;
    }
    if cfg.kind == MatrixKind::Symmetric {
        if !a.is_square() {
            return Err(SvdAmgError::dims("solve", "symmetric kind needs a square matrix"));
        }
        let asym = a.asymmetry();
        if asym > SYMMETRY_TOL * a.max_abs() {
            return Err(SvdAmgError::NotSymmetric { asymmetry: asym });
        }
    }
    Ok(a)
}

struct Logger<'a> {
    a: &'a SparseMat,
    reference: Option<&'a [f64]>,
    log: ConvergenceLog,
}

impl Logger<'_> {
    /// Records every triplet and returns the per-triplet (residual sum, relative error).
    fn record(&mut self, cycle: usize, phase: Phase, t: &TripletSet) -> Vec<(f64, Option<f64>)> {
        let id_m = SparseMat::identity(self.a.nrows());
        let id_n = SparseMat::identity(self.a.ncols());
        (0..t.len())
            .map(|j| {
                let (ru, rv) = triplet_residuals(self.a, &id_m, &id_n, t.sigmas[j], t.u.col(j), t.v.col(j));
                let rel_error = self.reference.map(|r| (t.sigmas[j] - r[j]).abs() / r[j].abs());
                self.log.push(LogEntry {
                    cycle,
                    phase,
                    triplet: j,
                    sigma: t.sigmas[j],
                    resid_u: ru,
                    resid_v: rv,
                    rel_error,
                });
                (ru + rv, rel_error)
            })
            .collect()
    }
}

/// Full solve: `n_mult` multiplicative cycles, then `n_add` additive iterations with optional
/// refits. `reference` (mode-ordered values) enables relative errors in the log.
pub fn solve(a: &SparseMat, cfg: &SolverConfig, reference: Option<&[f64]>) -> Result<SolveOutput> {
    cfg.validate()?;
    let a = prepare(a, cfg)?;
    if let Some(r) = reference {
        if r.len() < cfg.n_b {
            return Err(SvdAmgError::InvalidConfig(format!("reference has {} values, {} needed", r.len(), cfg.n_b)));
        }
    }
    let norm_a = a.frobenius_norm();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut h = Hierarchy::new(a.clone(), cfg.mode, cfg.kind)?;
    let mut ts = TestSet::random(h.finest(), cfg.kind, cfg.n_t, &mut rng)?;
    let mut logger = Logger {
        a: &a,
        reference,
        log: ConvergenceLog::default(),
    };
    let mut timings = PhaseTimings::default();

    let start = Instant::now();
    let mut trip: Option<TripletSet> = None;
    for cycle in 1..=cfg.n_mult {
        if cycle > 1 && cfg.rerandomize_tests {
            ts = TestSet::random(h.finest(), cfg.kind, cfg.n_t, &mut rng)?;
        }
        let t = multiplicative_cycle(&mut h, &mut ts, trip.as_ref(), cfg, &mut rng)
            .map_err(|e| e.context(format!("multiplicative cycle {cycle}")))?;
        logger.record(cycle, Phase::Mult, &t);
        trip = Some(t);
    }
    timings.mult = start.elapsed();

    let start = Instant::now();
    let mut trip = trip.expect("at least one multiplicative cycle ran");
    let mut refit_done = vec![false; trip.len()];
    for k in 1..=cfg.n_add {
        let cycle = cfg.n_mult + k;
        trip = additive_iteration(&h, &trip, cfg).map_err(|e| e.context(format!("additive iteration {k}")))?;
        let stats = logger.record(cycle, Phase::Add, &trip);
        if cfg.refit_tol > 0.0 && k < cfg.n_add {
            let converged: Vec<bool> = stats
                .iter()
                .map(|&(res, err)| match err {
                    Some(e) => e <= REFERENCE_CONVERGED,
                    None => res <= cfg.refit_tol * norm_a,
                })
                .collect();
            let grew = converged.iter().zip(&refit_done).any(|(&c, &d)| c && !d);
            if grew && !converged.iter().all(|&c| c) {
                refit_lagging(&mut h, &trip, &ts, cfg, &converged, &mut rng)?;
                refit_done = converged;
            }
        }
    }
    timings.add = start.elapsed();

    Ok(SolveOutput {
        triplets: trip,
        log: logger.log,
        hierarchy: h,
        timings,
        operator: a,
    })
}
