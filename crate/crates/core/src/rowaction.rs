//! Orthogonal row projections, Kaczmarz and symmetric Kaczmarz sweeps, and the
//! composite homogeneous sweep operators. These chained projections are the
//! ground truth the precomputed standard-form iterations are verified against.
//!
//! Row indices are 0-based throughout.

use crate::error::{Error, Result};
use crate::linalg::{row_norms_squared, DenseMatrix, Vector, ZERO_ROW_THRESHOLD};

/// Row visiting order of one outer iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// Rows `0, 1, ..., m-1`.
    Forward,
    /// The symmetric period `0, ..., m-1, m-2, ..., 1` of length `2m - 2`.
    SymmetricPeriod,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepSchedule {
    pub kind: ScheduleKind,
    pub m: usize,
}

impl SweepSchedule {
    pub fn forward(m: usize) -> Self {
        SweepSchedule {
            kind: ScheduleKind::Forward,
            m,
        }
    }

    pub fn symmetric(m: usize) -> Self {
        SweepSchedule {
            kind: ScheduleKind::SymmetricPeriod,
            m,
        }
    }

    /// Projections per period. The symmetric period degenerates to the forward
    /// one for m <= 2 (for m = 2 the period is rows 0, 1; for m = 1 a single
    /// projection).
    pub fn period_len(&self) -> usize {
        match self.kind {
            ScheduleKind::Forward => self.m,
            ScheduleKind::SymmetricPeriod => {
                if self.m <= 2 {
                    self.m
                } else {
                    2 * self.m - 2
                }
            }
        }
    }

    /// Row indices of one period.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        let m = self.m;
        let forward = 0..m;
        let tail_len = match self.kind {
            ScheduleKind::Forward => 0,
            ScheduleKind::SymmetricPeriod => m.saturating_sub(2),
        };
        // tail: m-2, m-3, ..., 1
        let tail = (1..=tail_len).map(move |t| m - 1 - t);
        forward.chain(tail)
    }
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

fn project_row_in_place(a: &DenseMatrix, i: usize, bi: f64, norm2: f64, x: &mut Vector) {
    let row = a.row(i);
    let mut dot = 0.0;
    for (r, v) in row.iter().zip(x.iter()) {
        dot += r * v;
    }
    let c = (bi - dot) / norm2;
    for (xv, r) in x.as_mut_slice().iter_mut().zip(row.iter()) {
        *xv += c * r;
    }
}

/// One Kaczmarz projection onto the hyperplane `<a_i, x> = b_i`:
/// `x + (b_i - <a_i, x>) / ||a_i||^2 * a_i`.
pub fn project_row(a: &DenseMatrix, i: usize, b: &Vector, x: &Vector) -> Result<Vector> {
    assert!(i < a.rows(), "project_row: row index out of range");
    let norm2 = crate::linalg::dot_slices(a.row(i), a.row(i));
    if norm2 < ZERO_ROW_THRESHOLD {
        return Err(Error::ZeroRow(i));
    }
    let mut out = x.clone();
    project_row_in_place(a, i, b[i], norm2, &mut out);
    Ok(out)
}

/// The homogeneous counterpart `P_i x = x - <a_i, x> / ||a_i||^2 * a_i`.
pub fn apply_row_projector(a: &DenseMatrix, i: usize, x: &Vector) -> Result<Vector> {
    assert!(i < a.rows(), "apply_row_projector: row index out of range");
    let norm2 = crate::linalg::dot_slices(a.row(i), a.row(i));
    if norm2 < ZERO_ROW_THRESHOLD {
        return Err(Error::ZeroRow(i));
    }
    let mut out = x.clone();
    project_row_in_place(a, i, 0.0, norm2, &mut out);
    Ok(out)
}

fn run_schedule(
    a: &DenseMatrix,
    b: Option<&Vector>,
    x: &Vector,
    schedule: &SweepSchedule,
) -> Result<Vector> {
    if let Some(b) = b {
        assert_eq!(b.len(), a.rows(), "sweep: rhs length mismatch");
    }
    assert_eq!(x.len(), a.cols(), "sweep: iterate length mismatch");
    let norms2 = validated_norms(a)?;
    let mut out = x.clone();
    for i in schedule.indices() {
        let bi = b.map_or(0.0, |b| b[i]);
        project_row_in_place(a, i, bi, norms2[i], &mut out);
    }
    Ok(out)
}

/// One full forward sweep: projections onto rows `0..m` in order. Equals one
/// Kaczmarz-Tanabe outer iteration.
pub fn kaczmarz_sweep(a: &DenseMatrix, b: &Vector, x: &Vector) -> Result<Vector> {
    run_schedule(a, Some(b), x, &SweepSchedule::forward(a.rows()))
}

/// Forward pass plus the mid-period iterate, so the two-phase split of the
/// symmetric period is observable.
#[derive(Debug, Clone)]
pub struct SymmetricSweep {
    /// Iterate after the forward pass (`x_{k(2m-2)+m}` in period terms).
    pub mid: Vector,
    /// Iterate after the full period.
    pub end: Vector,
}

/// One symmetric period: rows `0..m` then `m-2, ..., 1` (`2m - 2` projections).
/// Equals one symmetric Kaczmarz-Tanabe outer iteration. For m = 1 this
/// degenerates to a plain Kaczmarz sweep.
pub fn symmetric_sweep(a: &DenseMatrix, b: &Vector, x: &Vector) -> Result<Vector> {
    Ok(symmetric_sweep_with_mid(a, b, x)?.end)
}

/// Symmetric period with the mid-period iterate exposed.
pub fn symmetric_sweep_with_mid(a: &DenseMatrix, b: &Vector, x: &Vector) -> Result<SymmetricSweep> {
    assert_eq!(b.len(), a.rows(), "sweep: rhs length mismatch");
    assert_eq!(x.len(), a.cols(), "sweep: iterate length mismatch");
    let m = a.rows();
    let norms2 = validated_norms(a)?;
    let mut out = x.clone();
    for i in 0..m {
        project_row_in_place(a, i, b[i], norms2[i], &mut out);
    }
    let mid = out.clone();
    if m > 2 {
        for i in (1..=m - 2).rev() {
            project_row_in_place(a, i, b[i], norms2[i], &mut out);
        }
    }
    Ok(SymmetricSweep { mid, end: out })
}

/// The homogeneous forward-sweep operator `Q = P_m ... P_1` (projectors
/// applied in row order `0..m`).
pub fn apply_sweep_projector(a: &DenseMatrix, x: &Vector) -> Result<Vector> {
    run_schedule(a, None, x, &SweepSchedule::forward(a.rows()))
}

/// The transpose `Q^T = P_1 ... P_m` (projectors applied in reverse row order).
pub fn apply_sweep_projector_transpose(a: &DenseMatrix, x: &Vector) -> Result<Vector> {
    assert_eq!(x.len(), a.cols(), "sweep: iterate length mismatch");
    let norms2 = validated_norms(a)?;
    let mut out = x.clone();
    for i in (0..a.rows()).rev() {
        project_row_in_place(a, i, 0.0, norms2[i], &mut out);
    }
    Ok(out)
}

/// The homogeneous return operator `Qbar = P_2 ... P_{m-1}` (projectors
/// applied in row order `m-2, ..., 1`, the tail of a symmetric period).
/// Identity for m <= 2.
pub fn apply_return_projector(a: &DenseMatrix, x: &Vector) -> Result<Vector> {
    assert_eq!(x.len(), a.cols(), "sweep: iterate length mismatch");
    let m = a.rows();
    let norms2 = validated_norms(a)?;
    let mut out = x.clone();
    if m > 2 {
        for i in (1..=m - 2).rev() {
            project_row_in_place(a, i, 0.0, norms2[i], &mut out);
        }
    }
    Ok(out)
}
