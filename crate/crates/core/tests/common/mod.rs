//! Shared oracles for the integration suites. Everything here is an
//! independent route to the quantities under test: projections are chained
//! through `rowaction`, eigenvalues come from a plain Jacobi sweep, chord
//! lengths from Liang-Barsky clipping.

#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kacz::linalg::{row_norms_squared, DenseMatrix, Vector};
use kacz::rowaction;
use kacz::tanabe;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random matrix with entries uniform in [-1, 1]; zero rows are resampled.
pub fn random_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(m, n);
    for i in 0..m {
        loop {
            for j in 0..n {
                a[(i, j)] = rng.gen_range(-1.0..1.0);
            }
            let norm2: f64 = a.row(i).iter().map(|v| v * v).sum();
            if norm2 > 1e-6 {
                break;
            }
        }
    }
    a
}

pub fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_vec((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
}

/// `A_S`: row i is `Q_i a_i`, built by chaining row projectors i+1..m.
pub fn sequential_projection_rows(a: &DenseMatrix) -> DenseMatrix {
    let m = a.rows();
    let mut out = DenseMatrix::zeros(m, a.cols());
    for i in 0..m {
        let mut x = Vector::from_vec(a.row(i).to_vec());
        for j in i + 1..m {
            x = rowaction::apply_row_projector(a, j, &x).unwrap();
        }
        out.row_mut(i).copy_from_slice(x.as_slice());
    }
    out
}

/// `Abar_S`: rows 0 and m-1 are zero, row 1 is `a_1`, interior row i is
/// `Qbar_i a_i` (projectors i-1 down to 1).
pub fn return_projection_rows(a: &DenseMatrix) -> DenseMatrix {
    let m = a.rows();
    let mut out = DenseMatrix::zeros(m, a.cols());
    for i in 1..m.saturating_sub(1) {
        let mut x = Vector::from_vec(a.row(i).to_vec());
        for j in (1..i).rev() {
            x = rowaction::apply_row_projector(a, j, &x).unwrap();
        }
        out.row_mut(i).copy_from_slice(x.as_slice());
    }
    out
}

/// `C-bar` assembled from the public builders.
pub fn cbar_for(a: &DenseMatrix) -> DenseMatrix {
    let c = tanabe::build_c(a).unwrap();
    let chat = tanabe::build_c_hat(a).unwrap();
    let norms2 = row_norms_squared(a);
    let m_diag = Vector::from_vec(norms2.iter().map(|v| 1.0 / v).collect());
    tanabe::compose_c_bar(&c, &chat, a, &m_diag)
}

/// Orthonormal basis of `R(A^T)` by modified Gram-Schmidt over the rows.
pub fn rowspace_basis(a: &DenseMatrix) -> Vec<Vector> {
    let mut basis: Vec<Vector> = Vec::new();
    for i in 0..a.rows() {
        let mut v = Vector::from_vec(a.row(i).to_vec());
        let scale = v.norm();
        if scale == 0.0 {
            continue;
        }
        for b in &basis {
            let c = v.dot(b);
            v.add_scaled(-c, b);
        }
        let n = v.norm();
        if n > 1e-10 * scale {
            v.scale(1.0 / n);
            basis.push(v);
        }
    }
    basis
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: DenseMatrix) -> Vec<f64> {
    let n = a.rows();
    assert_eq!(n, a.cols());
    let scale = a.frobenius_norm().max(1e-300);
    for _ in 0..200 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

/// Dominant singular value of the forward sweep operator restricted to
/// `R(A^T)`: the Gram matrix of `Q` over an orthonormal rowspace basis is
/// diagonalized by Jacobi rotations. Independent of the power-iteration path.
pub fn sigma_restricted_oracle(a: &DenseMatrix) -> f64 {
    let basis = rowspace_basis(a);
    let r = basis.len();
    if r == 0 {
        return 0.0;
    }
    let images: Vec<Vector> = basis
        .iter()
        .map(|b| rowaction::apply_sweep_projector(a, b).unwrap())
        .collect();
    let mut gram = DenseMatrix::zeros(r, r);
    for k in 0..r {
        for l in 0..r {
            gram[(k, l)] = images[k].dot(&images[l]);
        }
    }
    let eigs = jacobi_eigenvalues(gram);
    eigs.into_iter().fold(0.0f64, f64::max).max(0.0).sqrt()
}

/// Chord length of the ray with direction angle `theta` and signed offset
/// `off` inside the centered `grid x grid` square (Liang-Barsky clipping).
pub fn square_chord(grid: usize, theta: f64, off: f64) -> f64 {
    let half = grid as f64 / 2.0;
    let d = [theta.cos(), theta.sin()];
    let o = [-off * theta.sin(), off * theta.cos()];
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for dim in 0..2 {
        if d[dim].abs() < 1e-14 {
            if o[dim].abs() > half {
                return 0.0;
            }
        } else {
            let s1 = (-half - o[dim]) / d[dim];
            let s2 = (half - o[dim]) / d[dim];
            lo = lo.max(s1.min(s2));
            hi = hi.min(s1.max(s2));
        }
    }
    (hi - lo).max(0.0)
}
