use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::exec;

/// Dense real vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector { data: vec![0.0; n] }
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        Vector { data }
    }

    /// Construct from I/O, rejecting NaN and infinities.
    pub fn checked_from_vec(data: Vec<f64>, location: &str) -> Result<Self> {
        for &v in &data {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    location: location.to_string(),
                });
            }
        }
        Ok(Vector { data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.data.iter()
    }

    /// Sequential left-to-right inner product.
    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: length mismatch");
        dot_slices(&self.data, &other.data)
    }

    /// Euclidean norm, computed as a scaled two-pass sum so that vectors with
    /// entries up to ~1e300 still produce a finite norm.
    pub fn norm(&self) -> f64 {
        let mut max = 0.0f64;
        for &v in &self.data {
            let a = v.abs();
            if a > max {
                max = a;
            }
        }
        if max == 0.0 || !max.is_finite() {
            return max;
        }
        let mut sum = 0.0;
        for &v in &self.data {
            let s = v / max;
            sum += s * s;
        }
        max * sum.sqrt()
    }

    /// `self += c * other`.
    pub fn add_scaled(&mut self, c: f64, other: &Vector) {
        assert_eq!(self.len(), other.len(), "add_scaled: length mismatch");
        for (s, &o) in self.data.iter_mut().zip(other.data.iter()) {
            *s += c * o;
        }
    }

    pub fn scale(&mut self, c: f64) {
        for s in &mut self.data {
            *s *= c;
        }
    }

    pub fn add(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "add: length mismatch");
        Vector::from_vec(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "sub: length mismatch");
        Vector::from_vec(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.data[i]
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Vector { data }
    }
}

pub(crate) fn dot_slices(a: &[f64], b: &[f64]) -> f64 {
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        sum += x * y;
    }
    sum
}

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch {
                expected: format!("{} entries ({rows}x{cols})", rows * cols),
                got: format!("{} entries", data.len()),
            });
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Construct from I/O, rejecting NaN and infinities.
    pub fn checked_from_vec(
        rows: usize,
        cols: usize,
        data: Vec<f64>,
        location: &str,
    ) -> Result<Self> {
        for &v in &data {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    value: v,
                    location: location.to_string(),
                });
            }
        }
        Self::from_vec(rows, cols, data)
    }

    /// Convenience constructor for literal matrices in tests and generators.
    /// Panics on ragged input.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "from_rows: ragged input");
            data.extend_from_slice(row);
        }
        DenseMatrix {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// `A x`, one sequential dot per output row.
    pub fn matvec(&self, x: &Vector) -> Vector {
        assert_eq!(self.cols, x.len(), "matvec: shape mismatch");
        Vector::from_vec(exec::map_indices(self.rows, |i| {
            dot_slices(self.row(i), x.as_slice())
        }))
    }

    /// Single-threaded `A x`.
    pub fn matvec_seq(&self, x: &Vector) -> Vector {
        assert_eq!(self.cols, x.len(), "matvec: shape mismatch");
        Vector::from_vec(exec::map_indices_seq(self.rows, |i| {
            dot_slices(self.row(i), x.as_slice())
        }))
    }

    /// `A^T y`, one sequential sum over rows per output column.
    pub fn matvec_transpose(&self, y: &Vector) -> Vector {
        assert_eq!(self.rows, y.len(), "matvec_transpose: shape mismatch");
        Vector::from_vec(exec::map_indices(self.cols, |j| self.column_dot(j, y)))
    }

    /// Single-threaded `A^T y`.
    pub fn matvec_transpose_seq(&self, y: &Vector) -> Vector {
        assert_eq!(self.rows, y.len(), "matvec_transpose: shape mismatch");
        Vector::from_vec(exec::map_indices_seq(self.cols, |j| self.column_dot(j, y)))
    }

    fn column_dot(&self, j: usize, y: &Vector) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.rows {
            sum += self.data[i * self.cols + j] * y[i];
        }
        sum
    }

    /// `A B`, rows of the product computed independently.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "matmul: shape mismatch");
        let cols = other.cols;
        let rows_out = exec::map_indices(self.rows, |i| {
            let mut row = vec![0.0; cols];
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik != 0.0 {
                    let brow = other.row(k);
                    for (r, &b) in row.iter_mut().zip(brow.iter()) {
                        *r += aik * b;
                    }
                }
            }
            row
        });
        let mut data = Vec::with_capacity(self.rows * cols);
        for row in rows_out {
            data.extend_from_slice(&row);
        }
        DenseMatrix {
            rows: self.rows,
            cols,
            data,
        }
    }

    /// Returns `diag(d) * A` (row i scaled by `d[i]`).
    pub fn scale_rows(&self, d: &[f64]) -> DenseMatrix {
        assert_eq!(self.rows, d.len(), "scale_rows: shape mismatch");
        let mut out = self.clone();
        for (i, &s) in d.iter().enumerate() {
            for v in out.row_mut(i) {
                *v *= s;
            }
        }
        out
    }

    /// Returns `A * diag(d)` (column j scaled by `d[j]`).
    pub fn scale_cols(&self, d: &[f64]) -> DenseMatrix {
        assert_eq!(self.cols, d.len(), "scale_cols: shape mismatch");
        let mut out = self.clone();
        for i in 0..self.rows {
            for (v, &s) in out.row_mut(i).iter_mut().zip(d.iter()) {
                *v *= s;
            }
        }
        out
    }

    /// Entrywise `A + B`.
    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "add: shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a + b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Entrywise `A - B`.
    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "sub: shape mismatch"
        );
        let data = self
            .data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Frobenius norm with the same overflow-safe scaling as `Vector::norm`.
    pub fn frobenius_norm(&self) -> f64 {
        let mut max = 0.0f64;
        for &v in &self.data {
            let a = v.abs();
            if a > max {
                max = a;
            }
        }
        if max == 0.0 || !max.is_finite() {
            return max;
        }
        let mut sum = 0.0;
        for &v in &self.data {
            let s = v / max;
            sum += s * s;
        }
        max * sum.sqrt()
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{:.6}", self[(i, j)])?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Returns `(||a_1||^2, ..., ||a_m||^2)`. Zero rows are reported as zeros,
/// not errors; consumers decide.
pub fn row_norms_squared(a: &DenseMatrix) -> Vector {
    Vector::from_vec(exec::map_indices(a.rows(), |i| {
        dot_slices(a.row(i), a.row(i))
    }))
}

/// Row-correlation matrix `H` with `h[i][j] = <a_i, a_j> / ||a_j||^2`.
///
/// The diagonal is exactly 1: each diagonal entry is the quotient of the
/// identical sequential dot product used for the row norm.
#[derive(Debug, Clone)]
pub struct RowCorrelation {
    h: DenseMatrix,
}

impl RowCorrelation {
    /// Errors with `ZeroRow(i)` if `||a_i||^2` is below the zero-row threshold.
    pub fn from_matrix(a: &DenseMatrix) -> Result<Self> {
        Self::build(a, false)
    }

    /// Single-threaded variant.
    pub fn from_matrix_seq(a: &DenseMatrix) -> Result<Self> {
        Self::build(a, true)
    }

    fn build(a: &DenseMatrix, sequential: bool) -> Result<Self> {
        let m = a.rows();
        let norms2 = row_norms_squared(a);
        for i in 0..m {
            if norms2[i] < super::ZERO_ROW_THRESHOLD {
                return Err(Error::ZeroRow(i));
            }
        }
        let row_of = |i: usize| -> Vec<f64> {
            (0..m)
                .map(|j| dot_slices(a.row(i), a.row(j)) / norms2[j])
                .collect()
        };
        let rows = if sequential {
            exec::map_indices_seq(m, row_of)
        } else {
            exec::map_indices(m, row_of)
        };
        let mut data = Vec::with_capacity(m * m);
        for r in rows {
            data.extend_from_slice(&r);
        }
        Ok(RowCorrelation {
            h: DenseMatrix::from_vec(m, m, data)?,
        })
    }

    pub fn order(&self) -> usize {
        self.h.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.h[(i, j)]
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.h
    }
}
