//! Dense matrix/vector kernels, the row-correlation matrix `H` with
//! `h[i][j] = <a_i, a_j> / ||a_j||^2`, a minimum-norm least-squares solver,
//! nullspace projection, and dominant-singular-value estimation.
//!
//! Inner products are sequential left-to-right sums; parallelism only ever
//! splits independent output elements.

mod matrix;
mod solve;

pub(crate) use matrix::dot_slices;
pub use matrix::{row_norms_squared, DenseMatrix, RowCorrelation, Vector};
pub use solve::{
    default_max_iter, dominant_singular_value, min_norm_lsq, min_norm_lsq_default,
    project_nullspace, MinNormSolution, NullspaceProjection, DEFAULT_TOL,
};

/// Squared-norm threshold below which a row counts as zero. This is an
/// exact-zero detector, not a rank filter.
pub const ZERO_ROW_THRESHOLD: f64 = 1e-300;
