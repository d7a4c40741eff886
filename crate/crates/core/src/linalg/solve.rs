use crate::error::{Error, Result};

use super::matrix::{DenseMatrix, Vector};

/// Default relative tolerance for the iterative solvers.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Default iteration budget: `10 * (m + n)`. Desk-scale problems are tiny, so
/// tightness costs nothing.
pub fn default_max_iter(a: &DenseMatrix) -> usize {
    10 * (a.rows() + a.cols())
}

/// Result of the minimum-norm least-squares solve. When the iteration budget
/// runs out the best iterate is returned with `converged == false` rather than
/// being discarded.
#[derive(Debug, Clone)]
pub struct MinNormSolution {
    pub x: Vector,
    pub converged: bool,
    pub iterations: usize,
}

/// Minimum-norm least-squares solution `x = A^+ b` by conjugate gradients on
/// the normal equations, started from zero so every iterate stays in `R(A^T)`
/// and the limit is the minimum-norm solution.
///
/// Stops when `||A^T (b - A x)|| <= tol * ||A^T b||`.
pub fn min_norm_lsq(
    a: &DenseMatrix,
    b: &Vector,
    tol: f64,
    max_iter: usize,
) -> Result<MinNormSolution> {
    if b.len() != a.rows() {
        return Err(Error::ShapeMismatch {
            expected: format!("rhs of length {}", a.rows()),
            got: format!("length {}", b.len()),
        });
    }
    assert!(tol > 0.0, "min_norm_lsq: tol must be positive");

    let n = a.cols();
    let mut x = Vector::zeros(n);
    // r = A^T b - A^T A x = A^T b at x = 0
    let mut r = a.matvec_transpose(b);
    let target = tol * r.norm();
    if r.norm() <= target || r.norm() == 0.0 {
        return Ok(MinNormSolution {
            x,
            converged: true,
            iterations: 0,
        });
    }
    let mut p = r.clone();
    let mut r_dot = r.dot(&r);

    for it in 0..max_iter {
        let ap = a.matvec(&p);
        let atap = a.matvec_transpose(&ap);
        let denom = p.dot(&atap);
        if denom <= 0.0 || !denom.is_finite() {
            // p is numerically in the nullspace of A; nothing left to gain.
            return Ok(MinNormSolution {
                x,
                converged: r.norm() <= target,
                iterations: it,
            });
        }
        let alpha = r_dot / denom;
        x.add_scaled(alpha, &p);
        r.add_scaled(-alpha, &atap);
        let r_dot_new = r.dot(&r);
        if r.norm() <= target {
            return Ok(MinNormSolution {
                x,
                converged: true,
                iterations: it + 1,
            });
        }
        let beta = r_dot_new / r_dot;
        r_dot = r_dot_new;
        let mut p_new = r.clone();
        p_new.add_scaled(beta, &p);
        p = p_new;
    }
    Ok(MinNormSolution {
        x,
        converged: false,
        iterations: max_iter,
    })
}

/// `min_norm_lsq` with the default tolerance and iteration budget.
pub fn min_norm_lsq_default(a: &DenseMatrix, b: &Vector) -> Result<MinNormSolution> {
    min_norm_lsq(a, b, DEFAULT_TOL, default_max_iter(a))
}

/// Orthogonal split of a vector into nullspace and rowspace parts.
#[derive(Debug, Clone)]
pub struct NullspaceProjection {
    /// `P_{N(A)} x0`, orthogonal to every row of `A`.
    pub projection: Vector,
    /// The complementary part in `R(A^T)`: the minimum-norm solution of `A z = A x0`.
    pub rowspace_part: Vector,
    pub converged: bool,
}

/// Computes `P_{N(A)} x0 = x0 - r` where `r` is the minimum-norm solution of
/// `A z = A x0`.
pub fn project_nullspace(a: &DenseMatrix, x0: &Vector, tol: f64) -> Result<NullspaceProjection> {
    let ax0 = a.matvec(x0);
    let sol = min_norm_lsq(a, &ax0, tol, default_max_iter(a))?;
    let projection = x0.sub(&sol.x);
    Ok(NullspaceProjection {
        projection,
        rowspace_part: sol.x,
        converged: sol.converged,
    })
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

fn deterministic_unit_start(dim: usize) -> Vector {
    let mut state = 0x6b61637a_u64; // fixed seed, stable across releases
    let mut v = Vec::with_capacity(dim);
    for _ in 0..dim {
        let bits = splitmix64(&mut state);
        // uniform in [-1, 1)
        v.push((bits >> 11) as f64 / (1u64 << 52) as f64 - 1.0);
    }
    Vector::from_vec(v)
}

/// Dominant singular value of an operator restricted to `R(A^T)`.
///
/// `apply` must be the symmetric positive semidefinite composite of the
/// operator with its adjoint (for a sweep operator `Q`, pass `x -> Q^T(Q x)`).
/// Power iteration runs on `apply`, re-projecting each iterate onto the
/// rowspace of `restrict_to_rowspace_of`, and returns the square root of the
/// dominant eigenvalue of the restriction.
///
/// Errors with `NoConvergence` if the Rayleigh quotient has not settled to
/// relative tolerance `tol` within `max_iter` steps.
pub fn dominant_singular_value<F>(
    apply: F,
    dim: usize,
    restrict_to_rowspace_of: &DenseMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: Fn(&Vector) -> Vector,
{
    assert!(dim > 0, "dominant_singular_value: dim must be positive");
    assert!(tol > 0.0, "dominant_singular_value: tol must be positive");

    let reproject = |v: &Vector| -> Result<Vector> {
        Ok(project_nullspace(restrict_to_rowspace_of, v, DEFAULT_TOL)?.rowspace_part)
    };

    let mut v = reproject(&deterministic_unit_start(dim))?;
    let nv = v.norm();
    if nv < 1e-300 {
        // rowspace is numerically empty
        return Ok(0.0);
    }
    v.scale(1.0 / nv);

    let mut lambda_prev = f64::NAN;
    for _ in 0..max_iter {
        let mut w = reproject(&apply(&v))?;
        let nw = w.norm();
        if nw < 1e-300 {
            // the operator annihilates the rowspace
            return Ok(0.0);
        }
        let lambda = v.dot(&w);
        w.scale(1.0 / nw);
        v = w;
        if lambda_prev.is_finite() && (lambda - lambda_prev).abs() <= tol * lambda.abs().max(1e-300)
        {
            return Ok(lambda.max(0.0).sqrt());
        }
        lambda_prev = lambda;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
    })
}
