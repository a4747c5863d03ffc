//! Self-learning algebraic multigrid for a few dominant or minimal singular triplets of a sparse
//! matrix, and for extremal eigenpairs of symmetric matrices.
//!
//! A solve runs in two phases. Multiplicative bootstrap V-cycles relax random test vectors,
//! coarsen, fit interpolation by weighted least squares and solve a generalized SVD on the
//! coarsest level; the resulting triplets are interpolated back up with multiplicative updates.
//! Additive V-cycles then correct each triplet on the frozen hierarchy, followed by a Ritz
//! projection on the finest level.

// `!(x > 0.0)` style checks are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coarsen;
pub mod cycles;
pub mod error;
pub mod gsvd;
pub mod interp;
pub mod problems;
pub mod sparskit;

pub use cycles::{solve, ConvergenceLog, Hierarchy, LogEntry, MatrixKind, Mode, Phase, SolverConfig, SolveOutput};
pub use error::{Result, SvdAmgError};
pub use gsvd::TripletSet;
pub use sparskit::{DenseMat, SparseMat};
