//! Test matrices with known spectra, a Delaunay graph Laplacian, and Matrix Market exchange.

mod delaunay;
mod generators;
mod matrix_market;

use std::path::PathBuf;

pub use delaunay::{delaunay_edges, delaunay_graph_laplacian, random_points};
pub use generators::{fd_eigenvalues, fd_laplacian, grid_graph_laplacian, grid_incidence, grid_incidence_singular_values};
pub use matrix_market::{read_matrix_market, write_matrix_market};

use crate::cycles::{MatrixKind, Mode};
use crate::error::Result;
use crate::sparskit::SparseMat;

/// A test problem the CLI can build.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSpec {
    /// 5-point Laplacian on a k×k interior grid.
    FdLaplacian { k: usize },
    /// Graph Laplacian of the Delaunay triangulation of n seeded random points.
    GraphLaplacian { n: usize, seed: u64 },
    /// Edge-node incidence matrix of the k×k grid graph.
    GridIncidence { k: usize },
    MatrixMarket { path: PathBuf },
}

impl ProblemSpec {
    pub fn build(&self) -> Result<SparseMat> {
        match self {
            ProblemSpec::FdLaplacian { k } => fd_laplacian(*k),
            ProblemSpec::GraphLaplacian { n, seed } => delaunay_graph_laplacian(*n, *seed, 0.0),
            ProblemSpec::GridIncidence { k } => grid_incidence(*k),
            ProblemSpec::MatrixMarket { path } => read_matrix_market(path),
        }
    }

    pub fn default_kind(&self) -> MatrixKind {
        match self {
            ProblemSpec::FdLaplacian { .. } | ProblemSpec::GraphLaplacian { .. } => MatrixKind::Symmetric,
            ProblemSpec::GridIncidence { .. } | ProblemSpec::MatrixMarket { .. } => MatrixKind::Rectangular,
        }
    }

    /// Closed-form extremal values in mode order (after adding `shift`), where one exists.
    pub fn analytic_reference(&self, n_b: usize, mode: Mode, shift: f64) -> Option<Vec<f64>> {
        match self {
            ProblemSpec::FdLaplacian { k } => Some(fd_eigenvalues(*k, n_b, mode).into_iter().map(|x| x + shift).collect()),
            ProblemSpec::GridIncidence { k } => Some(grid_incidence_singular_values(*k, n_b, mode)),
            _ => None,
        }
    }
}
