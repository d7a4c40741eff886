//! Row-action solvers for consistent linear systems `Ax = b`, built around the
//! Kaczmarz and symmetric Kaczmarz sweeps and their precomputed "standard form"
//! iterations `y <- y + A^T C^T M (b - A y)`, where the compatible matrix `C`
//! (resp. `C-hat`, `C-bar`) expresses one full sweep as a single SIRT-shaped
//! matrix-vector update.
//!
//! The crate also ships the classic SIRT baselines (Landweber, Cimmino, CAV,
//! DROP, SART), a CGMN solver, problem generators (the 6x4 Tanabe system and a
//! parallel-beam tomography setup with a Shepp-Logan head phantom), and an
//! experiment runner that emits error-curve CSVs, Matrix Market files, and PGM
//! reconstructions.
//!
//! # Parallelism
//!
//! With the default `parallel` feature, data-parallel kernels (mat-vec products,
//! row correlations, projection-matrix assembly, multi-method comparison runs)
//! fan out over rayon. Every per-element reduction stays sequential
//! left-to-right, so results are bit-identical with and without the feature and
//! across thread counts. Disable default features for a fully sequential build.

pub mod error;
mod exec;
pub mod experiment;
pub mod linalg;
pub mod mm;
pub mod problems;
pub mod rowaction;
pub mod sirt;
pub mod tanabe;

pub use error::{Error, Result};
pub use linalg::{DenseMatrix, RowCorrelation, Vector};
