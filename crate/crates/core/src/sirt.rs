//! SIRT baselines `x <- x + lambda T A^T M (b - A x)` for the five classic
//! diagonal `T`/`M` pairs, plus CGMN (conjugate-gradient acceleration of the
//! symmetric double-sweep Kaczmarz operator).

use crate::error::{Error, Result};
use crate::linalg::{row_norms_squared, DenseMatrix, Vector, ZERO_ROW_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SirtKind {
    Landweber,
    Cimmino,
    Cav,
    Drop,
    Sart,
}

/// Row/column weight convention for SART.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SartWeighting {
    /// Sums of absolute values (the reference-toolkit convention; always
    /// well defined when no row is zero).
    Absolute,
    /// Plain signed sums; errors with `DegenerateWeight` when a sum vanishes.
    Signed,
}

/// A SIRT iteration with frozen diagonal scalings.
#[derive(Debug, Clone)]
pub struct SirtVariant {
    pub kind: SirtKind,
    /// Column scaling `T` (length n).
    pub t_diag: Vector,
    /// Row scaling `M` (length m).
    pub m_diag: Vector,
    pub lambda: f64,
}

fn validated_norms(a: &DenseMatrix) -> Result<Vector> {
    let norms2 = row_norms_squared(a);
    for i in 0..a.rows() {
        if norms2[i] < ZERO_ROW_THRESHOLD {
            return Err(Error::ZeroRow(i));
        }
    }
    Ok(norms2)
}

fn nonzeros_per_column(a: &DenseMatrix) -> Vec<usize> {
    let mut nz = vec![0usize; a.cols()];
    for i in 0..a.rows() {
        for (j, &v) in a.row(i).iter().enumerate() {
            if v != 0.0 {
                nz[j] += 1;
            }
        }
    }
    nz
}

/// Builds the `T`/`M` pair of a SIRT variant:
///
/// * Landweber: `T = I`, `M = I`
/// * Cimmino: `T = I`, `M_i = 1 / (m ||a_i||^2)`
/// * CAV: `T = I`, `M_i = 1 / sum_j nz_j a_ij^2`
/// * DROP: `T_j = 1 / nz_j` (0 when the column is empty), `M_i = 1 / ||a_i||^2`
/// * SART: absolute-value row/column sums (see [`build_sart`])
pub fn build_sirt(a: &DenseMatrix, kind: SirtKind) -> Result<SirtVariant> {
    let m = a.rows();
    let n = a.cols();
    let norms2 = validated_norms(a)?;
    let (t_diag, m_diag) = match kind {
        SirtKind::Landweber => (vec![1.0; n], vec![1.0; m]),
        SirtKind::Cimmino => (
            vec![1.0; n],
            norms2.iter().map(|&v| 1.0 / (m as f64 * v)).collect(),
        ),
        SirtKind::Cav => {
            let nz = nonzeros_per_column(a);
            let m_diag = (0..m)
                .map(|i| {
                    let mut s = 0.0;
                    for (j, &v) in a.row(i).iter().enumerate() {
                        s += nz[j] as f64 * v * v;
                    }
                    1.0 / s
                })
                .collect();
            (vec![1.0; n], m_diag)
        }
        SirtKind::Drop => {
            let nz = nonzeros_per_column(a);
            // untouched component: freeze it rather than divide by zero
            let t_diag = nz
                .iter()
                .map(|&c| if c == 0 { 0.0 } else { 1.0 / c as f64 })
                .collect();
            (t_diag, norms2.iter().map(|&v| 1.0 / v).collect())
        }
        SirtKind::Sart => return build_sart(a, SartWeighting::Absolute),
    };
    Ok(SirtVariant {
        kind,
        t_diag: Vector::from_vec(t_diag),
        m_diag: Vector::from_vec(m_diag),
        lambda: 1.0,
    })
}

/// SART with an explicit weighting convention.
pub fn build_sart(a: &DenseMatrix, weighting: SartWeighting) -> Result<SirtVariant> {
    validated_norms(a)?;
    let m = a.rows();
    let n = a.cols();
    let mut row_sums = vec![0.0; m];
    let mut col_sums = vec![0.0; n];
    for (i, row_sum) in row_sums.iter_mut().enumerate() {
        for (j, &v) in a.row(i).iter().enumerate() {
            let w = match weighting {
                SartWeighting::Absolute => v.abs(),
                SartWeighting::Signed => v,
            };
            *row_sum += w;
            col_sums[j] += w;
        }
    }
    let mut m_diag = vec![0.0; m];
    for (i, &s) in row_sums.iter().enumerate() {
        if s.abs() < ZERO_ROW_THRESHOLD {
            return Err(Error::DegenerateWeight(i));
        }
        m_diag[i] = 1.0 / s;
    }
    let mut t_diag = vec![0.0; n];
    for (j, &s) in col_sums.iter().enumerate() {
        if s.abs() < ZERO_ROW_THRESHOLD {
            match weighting {
                // empty column: freeze the component
                SartWeighting::Absolute => t_diag[j] = 0.0,
                SartWeighting::Signed => return Err(Error::DegenerateWeight(j)),
            }
        } else {
            t_diag[j] = 1.0 / s;
        }
    }
    Ok(SirtVariant {
        kind: SirtKind::Sart,
        t_diag: Vector::from_vec(t_diag),
        m_diag: Vector::from_vec(m_diag),
        lambda: 1.0,
    })
}

impl SirtVariant {
    /// Scalar relaxation override; the defaults keep `lambda = 1`.
    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    /// One iteration `x + lambda * T (A^T (M (b - A x)))`.
    pub fn step(&self, a: &DenseMatrix, b: &Vector, x: &Vector) -> Vector {
        assert_eq!(b.len(), a.rows(), "sirt step: rhs length mismatch");
        assert_eq!(x.len(), a.cols(), "sirt step: iterate length mismatch");
        let mut r = b.clone();
        r.add_scaled(-1.0, &a.matvec(x));
        for (ri, mi) in r.as_mut_slice().iter_mut().zip(self.m_diag.iter()) {
            *ri *= mi;
        }
        let mut u = a.matvec_transpose(&r);
        for (uj, tj) in u.as_mut_slice().iter_mut().zip(self.t_diag.iter()) {
            *uj *= tj;
        }
        let mut out = x.clone();
        out.add_scaled(self.lambda, &u);
        out
    }
}

/// Outcome of a CGMN solve. `breakdown` carries the step at which the CG
/// denominator collapsed (the descent direction became a numerical
/// null vector of the operator); the best iterate seen so far is returned
/// rather than aborting.
#[derive(Debug, Clone)]
pub struct CgmnOutcome {
    pub x: Vector,
    pub iterations: usize,
    pub converged: bool,
    pub breakdown: Option<usize>,
    pub residual_history: Vec<f64>,
}

/// CGMN: conjugate gradients on `(I - Qds) x = c`, where `Qds` is the
/// homogeneous symmetric double sweep (projections onto rows `0..m` then
/// `m-1..0`, i.e. `Q^T Q`) and `c` is one affine double sweep applied to the
/// zero vector. The operator is symmetric positive semidefinite and the
/// iterates stay in `R(A^T)` when `x0 = 0`.
pub fn cgmn_solve(
    a: &DenseMatrix,
    b: &Vector,
    x0: &Vector,
    max_iter: usize,
    tol: f64,
) -> Result<CgmnOutcome> {
    cgmn_solve_observed(a, b, x0, max_iter, tol, |_, _| {})
}

/// CGMN with a per-iteration observer `(k, iterate)`, used by the experiment
/// runner to record error curves.
pub fn cgmn_solve_observed<F>(
    a: &DenseMatrix,
    b: &Vector,
    x0: &Vector,
    max_iter: usize,
    tol: f64,
    mut observe: F,
) -> Result<CgmnOutcome>
where
    F: FnMut(usize, &Vector),
{
    assert_eq!(b.len(), a.rows(), "cgmn: rhs length mismatch");
    assert_eq!(x0.len(), a.cols(), "cgmn: start length mismatch");
    let norms2 = validated_norms(a)?;

    let m = a.rows();
    let double_sweep = |b: Option<&Vector>, x: &Vector| -> Vector {
        let mut out = x.clone();
        for i in (0..m).chain((0..m).rev()) {
            let row = a.row(i);
            let mut dot = 0.0;
            for (r, v) in row.iter().zip(out.iter()) {
                dot += r * v;
            }
            let bi = b.map_or(0.0, |b| b[i]);
            let c = (bi - dot) / norms2[i];
            for (xv, r) in out.as_mut_slice().iter_mut().zip(row.iter()) {
                *xv += c * r;
            }
        }
        out
    };
    // (I - Qds) x
    let apply = |x: &Vector| -> Vector {
        let mut out = x.clone();
        out.add_scaled(-1.0, &double_sweep(None, x));
        out
    };

    let c = double_sweep(Some(b), &Vector::zeros(a.cols()));
    let target = tol * c.norm();

    let mut x = x0.clone();
    let mut r = c.clone();
    r.add_scaled(-1.0, &apply(&x));
    let mut best = x.clone();
    let mut best_res = r.norm();
    let mut history = vec![best_res];
    if best_res <= target {
        return Ok(CgmnOutcome {
            x,
            iterations: 0,
            converged: true,
            breakdown: None,
            residual_history: history,
        });
    }

    let mut p = r.clone();
    let mut r_dot = r.dot(&r);
    for k in 0..max_iter {
        let ap = apply(&p);
        let denom = p.dot(&ap);
        if denom.is_nan() || denom <= 1e-300 {
            return Ok(CgmnOutcome {
                x: best,
                iterations: k,
                converged: false,
                breakdown: Some(k),
                residual_history: history,
            });
        }
        let alpha = r_dot / denom;
        x.add_scaled(alpha, &p);
        r.add_scaled(-alpha, &ap);
        observe(k + 1, &x);
        let res = r.norm();
        history.push(res);
        if res < best_res {
            best_res = res;
            best = x.clone();
        }
        if res <= target {
            return Ok(CgmnOutcome {
                x,
                iterations: k + 1,
                converged: true,
                breakdown: None,
                residual_history: history,
            });
        }
        let r_dot_new = r.dot(&r);
        let beta = r_dot_new / r_dot;
        r_dot = r_dot_new;
        let mut p_new = r.clone();
        p_new.add_scaled(beta, &p);
        p = p_new;
    }
    Ok(CgmnOutcome {
        x: best,
        iterations: max_iter,
        converged: false,
        breakdown: None,
        residual_history: history,
    })
}
