//! Compatible-matrix construction for the Kaczmarz-Tanabe and symmetric
//! Kaczmarz-Tanabe methods, plus the precomputed standard-form iteration
//! `y <- y + A^T C^T M (b - A y)`.
//!
//! `C` expresses one forward sweep: the sequentially projected rows
//! `a_i^T Q_i^T` stacked as `A_S` satisfy `A_S = C A` with `C` unit upper
//! triangular. `C-hat` plays the same role for the return half of a symmetric
//! period (rows 1 and m and column 1 are zero), and
//! `C-bar = C-hat + C - C A A^T M C-hat` drives the full symmetric period.
//!
//! Each builder exists twice: as the triple-loop accumulation and as a product
//! of elimination factors applied as in-place column updates. The two are
//! independent routes to the same matrix and are cross-checked in tests, along
//! with an exponential-cost index-set brute force for single entries.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::linalg::{row_norms_squared, DenseMatrix, RowCorrelation, Vector, ZERO_ROW_THRESHOLD};

static C_BUILDS: AtomicU64 = AtomicU64::new(0);
static CHAT_BUILDS: AtomicU64 = AtomicU64::new(0);

/// Instrumentation counters `(C builds, C-hat builds)`, for asserting that
/// experiment runs precompute once rather than per iteration.
pub fn build_counts() -> (u64, u64) {
    (
        C_BUILDS.load(Ordering::Relaxed),
        CHAT_BUILDS.load(Ordering::Relaxed),
    )
}

fn validate_rows(a: &DenseMatrix) -> Result<Vector> {
    let norms2 = row_norms_squared(a);
    for i in 0..a.rows() {
        if norms2[i] < ZERO_ROW_THRESHOLD {
            return Err(Error::ZeroRow(i));
        }
    }
    Ok(norms2)
}

/// Builds the unit upper triangular compatible matrix `C` with `A_S = C A` by
/// the triple-loop accumulation, consuming precomputed row correlations so
/// each dot product is formed once.
pub fn build_c(a: &DenseMatrix) -> Result<DenseMatrix> {
    let norms2 = validate_rows(a)?;
    let h = RowCorrelation::from_matrix(a)?;
    C_BUILDS.fetch_add(1, Ordering::Relaxed);
    Ok(accumulate_c(&h, Some(norms2.as_slice())))
}

/// Triple-loop accumulation of `C` from the row correlations alone.
pub fn build_c_from_correlation(h: &RowCorrelation) -> DenseMatrix {
    C_BUILDS.fetch_add(1, Ordering::Relaxed);
    accumulate_c(h, None)
}

fn accumulate_c(h: &RowCorrelation, norms2: Option<&[f64]>) -> DenseMatrix {
    let m = h.order();
    let mut c = DenseMatrix::identity(m);
    // k, then rows above k, then columns k..m, all descending; row k is final
    // before any row below reads it.
    for k in (1..m).rev() {
        // vestigial zero-row guard: inputs are validated, so this never fires
        if let Some(n2) = norms2 {
            if n2[k] == 0.0 {
                continue;
            }
        }
        for r in (0..k).rev() {
            let factor = -h.get(r, k);
            for j in (k..m).rev() {
                let update = factor * c[(k, j)];
                c[(r, j)] += update;
            }
        }
    }
    c
}

/// Builds `C` as the accumulated product of elimination factors
/// `E(j, i(-h_{j,i}))`, applied as in-place column updates without ever
/// materializing an `m x m` factor. Equals `build_c` output.
pub fn build_c_by_factorization(h: &RowCorrelation) -> DenseMatrix {
    let m = h.order();
    let mut c = DenseMatrix::identity(m);
    for i in 1..m {
        // all factors of this group write column i and read columns j < i
        for j in 0..i {
            let f = -h.get(j, i);
            if f != 0.0 {
                for r in 0..m {
                    let update = f * c[(r, j)];
                    c[(r, i)] += update;
                }
            }
        }
    }
    c
}

/// Builds the compatible matrix `C-hat` of the return pass (`Abar_S = C-hat A`):
/// rows 0 and m-1 and column 0 are zero, the interior is unit lower triangular.
///
/// The accumulation walks k upward (k = 2..m-1, 1-based) so that row k is
/// final before rows below it consume it; a descending k would read rows that
/// have not been filled yet and collapse the output to its first-order terms.
pub fn build_c_hat(a: &DenseMatrix) -> Result<DenseMatrix> {
    let norms2 = validate_rows(a)?;
    let h = RowCorrelation::from_matrix(a)?;
    CHAT_BUILDS.fetch_add(1, Ordering::Relaxed);
    Ok(accumulate_c_hat(&h, Some(norms2.as_slice())))
}

/// Triple-loop accumulation of `C-hat` from the row correlations alone.
pub fn build_c_hat_from_correlation(h: &RowCorrelation) -> DenseMatrix {
    CHAT_BUILDS.fetch_add(1, Ordering::Relaxed);
    accumulate_c_hat(h, None)
}

fn accumulate_c_hat(h: &RowCorrelation, norms2: Option<&[f64]>) -> DenseMatrix {
    let m = h.order();
    let mut c = DenseMatrix::identity(m);
    if m >= 2 {
        for k in 1..m - 1 {
            if let Some(n2) = norms2 {
                if n2[k] == 0.0 {
                    continue;
                }
            }
            for i in (k + 1..m - 1).rev() {
                let factor = -h.get(i, k);
                for j in (1..=k).rev() {
                    let update = factor * c[(k, j)];
                    c[(i, j)] += update;
                }
            }
        }
        c[(0, 0)] = 0.0;
        c[(m - 1, m - 1)] = 0.0;
    } else {
        c[(0, 0)] = 0.0;
    }
    c
}

/// Builds `C-hat` as the product of modified elimination factors whose first
/// and last rows and `(0,0)`, `(m-1,m-1)` entries are zeroed, applied as
/// in-place column updates. Equals `build_c_hat` output.
pub fn build_c_hat_by_factorization(h: &RowCorrelation) -> DenseMatrix {
    let m = h.order();
    let mut c = DenseMatrix::zeros(m, m);
    if m < 2 {
        return c;
    }
    for i in 1..m - 1 {
        c[(i, i)] = 1.0;
    }
    if m < 4 {
        return c;
    }
    for i in (1..=m - 2).rev() {
        for j in i + 1..=m - 2 {
            let f = -h.get(j, i);
            if f != 0.0 {
                for r in 0..m {
                    let update = f * c[(r, j)];
                    c[(r, i)] += update;
                }
            }
        }
    }
    c
}

/// `C-bar = C-hat + C - C A A^T M C-hat`, evaluated left to right with `M`
/// applied as a diagonal column scaling.
pub fn compose_c_bar(
    c: &DenseMatrix,
    c_hat: &DenseMatrix,
    a: &DenseMatrix,
    m_diag: &Vector,
) -> DenseMatrix {
    let ca = c.matmul(a);
    let caat = ca.matmul(&a.transpose());
    let caatm = caat.scale_cols(m_diag.as_slice());
    let correction = caatm.matmul(c_hat);
    c_hat.add(c).sub(&correction)
}

/// Single compatible-matrix entry by brute-force enumeration of ordered index
/// arrays between `i` and `j` (0-based, `i != j`): ascending arrays give the
/// entries of `C`, descending arrays those of `C-hat`. Exponential cost;
/// test oracle only, capped at spans covering m <= 12.
pub fn d_entry_bruteforce(h: &RowCorrelation, i: usize, j: usize) -> f64 {
    assert_ne!(i, j, "d_entry_bruteforce: need i != j");
    let span = i.abs_diff(j);
    assert!(
        span <= 11,
        "d_entry_bruteforce: index-set enumeration is exponential; capped at m <= 12"
    );
    let interior = span - 1;
    let ascending = j > i;
    let mut sum = 0.0;
    for mask in 0u32..(1u32 << interior) {
        let mut path = Vec::with_capacity(span + 1);
        path.push(i);
        for t in 0..interior {
            if mask & (1 << t) != 0 {
                let step = t + 1;
                path.push(if ascending { i + step } else { i - step });
            }
        }
        path.push(j);
        let v = path.len();
        let mut term = 1.0;
        for s in 0..v - 1 {
            term *= h.get(path[s], path[s + 1]);
        }
        // sign (-1)^(v-1)
        if v % 2 == 0 {
            sum -= term;
        } else {
            sum += term;
        }
    }
    sum
}

/// Frozen gain matrix `G = A^T C^T M` (and optionally `G A`) of a
/// standard-form iteration `y <- y + G (b - A y)`.
#[derive(Debug, Clone)]
pub struct PrecomputedIteration {
    gain: DenseMatrix,
    gain_a: Option<DenseMatrix>,
}

impl PrecomputedIteration {
    /// Builds `G = A^T C^T M` from any compatible matrix (`C`, `C-hat`, or
    /// `C-bar`), with `M = diag(1 / ||a_i||^2)`.
    pub fn from_compatible(a: &DenseMatrix, c_like: &DenseMatrix) -> Result<Self> {
        let norms2 = validate_rows(a)?;
        let m_diag: Vec<f64> = norms2.iter().map(|&v| 1.0 / v).collect();
        // G = A^T C^T M = (M C A)^T
        let mca = c_like.scale_rows(&m_diag).matmul(a);
        Ok(PrecomputedIteration {
            gain: mca.transpose(),
            gain_a: None,
        })
    }

    /// One-sweep-per-step Kaczmarz-Tanabe iteration (gain built from `C`).
    pub fn kaczmarz_tanabe(a: &DenseMatrix) -> Result<Self> {
        let c = build_c(a)?;
        Self::from_compatible(a, &c)
    }

    /// One-period-per-step symmetric Kaczmarz-Tanabe iteration (gain built
    /// from `C-bar`).
    pub fn symmetric(a: &DenseMatrix) -> Result<Self> {
        let norms2 = validate_rows(a)?;
        let h = RowCorrelation::from_matrix(a)?;
        C_BUILDS.fetch_add(1, Ordering::Relaxed);
        let c = accumulate_c(&h, Some(norms2.as_slice()));
        CHAT_BUILDS.fetch_add(1, Ordering::Relaxed);
        let c_hat = accumulate_c_hat(&h, Some(norms2.as_slice()));
        let m_diag = Vector::from_vec(norms2.iter().map(|&v| 1.0 / v).collect());
        let c_bar = compose_c_bar(&c, &c_hat, a, &m_diag);
        Self::from_compatible(a, &c_bar)
    }

    /// Additionally precompute `G A` so steps can run as
    /// `y <- (I - G A) y + G b`. Opt-in: the product path rounds differently
    /// from the residual path.
    pub fn with_product(mut self, a: &DenseMatrix) -> Self {
        self.gain_a = Some(self.gain.matmul(a));
        self
    }

    pub fn gain(&self) -> &DenseMatrix {
        &self.gain
    }

    pub fn gain_a(&self) -> Option<&DenseMatrix> {
        self.gain_a.as_ref()
    }

    /// One standard-form step `y + G (b - A y)`.
    pub fn step(&self, a: &DenseMatrix, b: &Vector, x: &Vector) -> Vector {
        match &self.gain_a {
            None => {
                let mut r = b.clone();
                r.add_scaled(-1.0, &a.matvec(x));
                let u = self.gain.matvec(&r);
                x.add(&u)
            }
            Some(ga) => {
                let mut out = x.clone();
                out.add_scaled(-1.0, &ga.matvec(x));
                out.add_scaled(1.0, &self.gain.matvec(b));
                out
            }
        }
    }
}
