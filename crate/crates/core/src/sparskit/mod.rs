//! Sparse and dense linear-algebra kernels shared by every other module.

pub mod dense;
pub mod sparse;

pub use dense::{
    b_orthonormalize, cholesky, cholesky_solve, dense_svd, dense_sym_generalized_eig, pseudo_solve_drop_smallest,
    pseudo_solve_sym_drop, pseudo_solve_sym_drop_smallest, sym_eig, BOrthonormal, DenseMat, Svd,
};
pub use sparse::{kaczmarz_sweep, sparse_matmul, spmv, transpose, triple_product, weighted_jacobi, SparseMat, DROP_TOL};
