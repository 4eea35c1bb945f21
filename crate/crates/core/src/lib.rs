//! Row-sampling sketches for approximate matrix products, low-rank
//! reconstruction, least squares and spectral-norm estimation, together with
//! the tail bounds that size them and an exact-oracle verification harness.
//!
//! Numeric kernels are generic over [`Scalar`] (`f32`, `f64`); the aliases
//! below fix the common `f64` instantiation.

pub mod algorithms;
pub mod bounds;
pub mod error;
pub mod generate;
pub mod io;
pub mod matrix_core;
pub mod rng;
pub mod sampling;
pub mod scalar;
pub mod verify;

pub use error::{Error, Result};
pub use matrix_core::{DenseMatrix, Svd};
pub use scalar::Scalar;

pub type Matrix = DenseMatrix<f64>;
pub type Matrix32 = DenseMatrix<f32>;
pub type SvdFactors = Svd<f64>;
