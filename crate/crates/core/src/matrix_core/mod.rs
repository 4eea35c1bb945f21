//! Dense arithmetic and the exact factorizations every randomized result is
//! measured against.

mod dense;
mod ops;
mod svd;

pub use dense::{dot, norm2, DenseMatrix};
pub use ops::{
    best_rank_k, condition_number, norms, orthonormal_basis, orthonormality_defect, pseudoinverse, NormSummary,
};
pub(crate) use ops::{norms_from_svd, pseudoinverse_from_svd, require_orthonormal};
pub use svd::{rank_threshold, singular_values, spectral_norm, svd, Svd, MAX_SWEEPS};
