//! Multiplicative bootstrap cycles (setup), additive correction cycles (solve) and the driver.

mod additive;
mod driver;
mod hierarchy;
mod multiplicative;
mod relax;

pub use additive::{additive_iteration, additive_vcycle, additive_vcycle_dropping};
pub use driver::{solve, ConvergenceLog, LogEntry, PhaseTimings, SolveOutput, CSV_HEADER};
pub use hierarchy::{Hierarchy, Level, TestSet};
pub use multiplicative::{interpolate_up, multiplicative_cycle, refit_lagging};
pub use relax::{relax_boot_triplets, relax_test_vectors};

use crate::error::{Result, SvdAmgError};

/// Which end of the spectrum is sought.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Dominant,
    Minimal,
}

/// Structure exploited by the hierarchy.
///
/// `Rectangular` coarsens rows from A·Aᵗ and columns from Aᵗ·A. `Square` uses one splitting of A
/// for both sides. `Symmetric` additionally ties Q = P and v = u, giving eigenpairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixKind {
    Rectangular,
    Square,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Mult,
    Add,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Mult => "mult",
            Phase::Add => "add",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Strength-of-connection threshold.
    pub theta: f64,
    /// Number of triplets sought.
    pub n_b: usize,
    /// Number of random test vectors.
    pub n_t: usize,
    /// Outer relaxation sweeps on test vectors.
    pub mu_t: usize,
    /// Outer relaxation sweeps on boot triplets.
    pub mu_b: usize,
    /// Inner Jacobi steps per half-sweep (test vectors).
    pub mu_tj: usize,
    /// Inner Jacobi steps per half-sweep (boot triplets).
    pub mu_bj: usize,
    pub omega_j: f64,
    pub n_mult: usize,
    pub n_add: usize,
    pub mode: Mode,
    pub kind: MatrixKind,
    /// Coarsening stops once max(m, n) is at most this.
    pub coarsest_max: usize,
    pub seed: u64,
    pub ritz_each_mult_cycle: bool,
    /// Residual tolerance (relative to ‖A‖_F) that triggers a refit; 0 disables refits.
    pub refit_tol: f64,
    /// Weight divisor for converged triplets and test vectors during a refit.
    pub downweight: f64,
    /// Added to the diagonal of a square A before solving.
    pub shift: f64,
    /// Worker threads for the per-triplet additive V-cycles.
    pub threads: usize,
    /// Redraw the test vectors at the start of every multiplicative cycle.
    pub rerandomize_tests: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            theta: 0.05,
            n_b: 8,
            n_t: 5,
            mu_t: 4,
            mu_b: 4,
            mu_tj: 1,
            mu_bj: 1,
            omega_j: 0.7,
            n_mult: 10,
            n_add: 30,
            mode: Mode::Dominant,
            kind: MatrixKind::Rectangular,
            coarsest_max: 100,
            seed: 1,
            ritz_each_mult_cycle: true,
            refit_tol: 0.0,
            downweight: 1000.0,
            shift: 0.0,
            threads: 1,
            rerandomize_tests: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(SvdAmgError::InvalidConfig(msg));
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return bad(format!("theta = {} must lie in (0, 1)", self.theta));
        }
        if !(self.omega_j > 0.0 && self.omega_j <= 1.0) {
            return bad(format!("omega_j = {} must lie in (0, 1]", self.omega_j));
        }
        if self.n_b == 0 || self.n_t == 0 {
            return bad("n_b and n_t must be at least 1".into());
        }
        if self.n_mult == 0 {
            return bad("at least one multiplicative cycle is needed to build the hierarchy".into());
        }
        if self.coarsest_max == 0 {
            return bad("coarsest_max must be at least 1".into());
        }
        if !(self.refit_tol >= 0.0) || !self.refit_tol.is_finite() {
            return bad(format!("refit_tol = {} must be a finite nonnegative number", self.refit_tol));
        }
        if !(self.downweight >= 1.0) || !self.downweight.is_finite() {
            return bad(format!("downweight = {} must be finite and at least 1", self.downweight));
        }
        if !self.shift.is_finite() {
            return bad("shift must be finite".into());
        }
        if self.threads == 0 {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }
}
