use serde::{Deserialize, Serialize};

use super::dense::DenseMatrix;
use super::svd::{rank_threshold, svd, Svd};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Spectral norm, Frobenius norm and stable rank `‖A‖_F² / ‖A‖²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSummary<T> {
    pub spectral: T,
    pub frobenius: T,
    pub stable_rank: T,
}

pub fn norms<T: Scalar>(a: &DenseMatrix<T>) -> Result<NormSummary<T>> {
    let f = svd(a)?;
    norms_from_svd(a, &f)
}

pub(crate) fn norms_from_svd<T: Scalar>(a: &DenseMatrix<T>, f: &Svd<T>) -> Result<NormSummary<T>> {
    let spectral = f.s[0];
    if spectral == T::zero() {
        return Err(Error::ZeroMatrix);
    }
    let frobenius = a.frobenius_norm();
    Ok(NormSummary { spectral, frobenius, stable_rank: (frobenius * frobenius) / (spectral * spectral) })
}

/// Moore-Penrose pseudoinverse `V diag(S⁺) Uᵀ`.
pub fn pseudoinverse<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    Ok(pseudoinverse_from_svd(&svd(a)?))
}

pub(crate) fn pseudoinverse_from_svd<T: Scalar>(f: &Svd<T>) -> DenseMatrix<T> {
    let tol = f.threshold();
    let inv: Vec<T> = f.s.iter().map(|&s| if s > tol { T::one() / s } else { T::zero() }).collect();
    f.v.scale_columns(&inv).expect("shapes").matmul(&f.u.transpose()).expect("shapes")
}

/// Best rank-`k` approximation `U_k S_k V_kᵀ`.
pub fn best_rank_k<T: Scalar>(a: &DenseMatrix<T>, k: usize) -> Result<DenseMatrix<T>> {
    let max = a.rows().min(a.cols());
    if k == 0 || k > max {
        return Err(Error::BadRank { k, max });
    }
    Ok(svd(a)?.truncated(k))
}

/// `max(S) / min(S)`; rejects spectra containing values at or below the
/// rank threshold relative to the largest value.
pub fn condition_number<T: Scalar>(s: &[T]) -> Result<T> {
    if s.is_empty() {
        return Err(Error::BadParams("empty spectrum".into()));
    }
    let hi = s.iter().copied().fold(T::zero(), T::max);
    let lo = s.iter().copied().fold(T::infinity(), T::min);
    let tol = rank_threshold(s.len(), s.len(), hi);
    if hi <= T::zero() || lo <= tol {
        return Err(Error::Singular { value: lo.as_f64() });
    }
    Ok(hi / lo)
}

/// `‖QᵀQ − I‖_F` for a matrix with (supposedly) orthonormal columns.
pub fn orthonormality_defect<T: Scalar>(q: &DenseMatrix<T>) -> T {
    q.gram().sub(&DenseMatrix::identity(q.cols())).expect("square").frobenius_norm()
}

pub(crate) fn require_orthonormal<T: Scalar>(q: &DenseMatrix<T>) -> Result<()> {
    let dev = q
        .gram()
        .sub(&DenseMatrix::identity(q.cols()))
        .expect("square");
    let fro = dev.frobenius_norm();
    let tol = T::lit(1e-8).max(T::epsilon().sqrt() * T::lit(10.0));
    if fro <= tol {
        return Ok(());
    }
    let spec = svd(&dev)?.s[0];
    if spec <= tol {
        Ok(())
    } else {
        Err(Error::NotOrthonormal { deviation: spec.as_f64() })
    }
}

/// Thin Q factor of a Householder QR (`m ≥ d`), with `R` having a
/// non-negative diagonal.
pub fn orthonormal_basis<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    let (m, d) = a.shape();
    if m < d {
        return Err(Error::DimensionMismatch(format!("QR needs rows >= cols, got {m}x{d}")));
    }
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<T>> = Vec::with_capacity(d);
    let mut signs = vec![T::one(); d];
    for j in 0..d {
        let mut v: Vec<T> = (j..m).map(|i| r[(i, j)]).collect();
        let alpha = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        if alpha == T::zero() {
            reflectors.push(vec![T::zero(); m - j]);
            continue;
        }
        let s = if v[0] >= T::zero() { T::one() } else { -T::one() };
        // H x = -s·alpha·e1; R_jj = -s·alpha, so flip column j of Q when s > 0.
        signs[j] = -s;
        v[0] += s * alpha;
        let vn = v.iter().map(|&x| x * x).sum::<T>().sqrt();
        for x in v.iter_mut() {
            *x /= vn;
        }
        for c in j..d {
            let proj: T = (j..m).map(|i| v[i - j] * r[(i, c)]).sum();
            for i in j..m {
                r[(i, c)] -= T::lit(2.0) * v[i - j] * proj;
            }
        }
        reflectors.push(v);
    }
    let mut q = DenseMatrix::zeros(m, d);
    for j in 0..d {
        q[(j, j)] = T::one();
    }
    for j in (0..d).rev() {
        let v = &reflectors[j];
        for c in 0..d {
            let proj: T = (j..m).map(|i| v[i - j] * q[(i, c)]).sum();
            if proj != T::zero() {
                for i in j..m {
                    q[(i, c)] -= T::lit(2.0) * v[i - j] * proj;
                }
            }
        }
    }
    for (j, &sg) in signs.iter().enumerate() {
        if sg < T::zero() {
            for i in 0..m {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn pinv_examples() {
        let p = pseudoinverse(&DenseMatrix::diag(2, 2, &[2.0, 4.0])).unwrap();
        assert!(p.sub(&DenseMatrix::diag(2, 2, &[0.5, 0.25])).unwrap().max_abs() < 1e-15);

        let z = pseudoinverse(&DenseMatrix::<f64>::zeros(3, 2)).unwrap();
        assert_eq!(z, DenseMatrix::zeros(2, 3));

        let p = pseudoinverse(&m(&[&[1.0, 0.0], &[0.0, 2.0], &[0.0, 0.0]])).unwrap();
        assert!(p.sub(&m(&[&[1.0, 0.0, 0.0], &[0.0, 0.5, 0.0]])).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn norm_examples() {
        let n = norms(&DenseMatrix::diag(2, 2, &[3.0f64, 4.0])).unwrap();
        assert_eq!((n.spectral, n.frobenius), (4.0, 5.0));
        assert!((n.stable_rank - 1.5625).abs() < 1e-15);

        let n = norms(&DenseMatrix::<f64>::identity(3)).unwrap();
        assert!((n.spectral - 1.0).abs() < 1e-15);
        assert!((n.frobenius - 3f64.sqrt()).abs() < 1e-15);
        assert!((n.stable_rank - 3.0).abs() < 1e-14);

        let u = [0.6, 0.8];
        let v = [1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0];
        let outer = DenseMatrix::from_fn(2, 3, |i, j| u[i] * v[j]).unwrap();
        assert!((norms(&outer).unwrap().stable_rank - 1.0).abs() < 1e-12);

        assert!(matches!(norms(&DenseMatrix::<f64>::zeros(2, 2)), Err(Error::ZeroMatrix)));
    }

    #[test]
    fn rank_k_examples() {
        let a = DenseMatrix::diag(2, 2, &[4.0, 1.0]);
        let a1 = best_rank_k(&a, 1).unwrap();
        assert!(a1.sub(&DenseMatrix::diag(2, 2, &[4.0, 0.0])).unwrap().max_abs() < 1e-15);
        assert!(matches!(best_rank_k(&a, 0), Err(Error::BadRank { .. })));
        assert!(matches!(best_rank_k(&a, 3), Err(Error::BadRank { .. })));
    }

    #[test]
    fn condition_examples() {
        assert_eq!(condition_number(&[4.0, 2.0, 1.0]).unwrap(), 4.0);
        assert_eq!(condition_number(&[1.0, 1.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(condition_number(&[10.0, 0.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn qr_basis_is_orthonormal_and_spans() {
        let a = m(&[&[1.0, 2.0], &[3.0, -1.0], &[0.5, 0.5], &[-2.0, 1.0]]);
        let q = orthonormal_basis(&a).unwrap();
        assert!(orthonormality_defect(&q) < 1e-14);
        // a = Q Qᵀ a
        let proj = q.matmul(&q.t_matmul(&a).unwrap()).unwrap();
        assert!(proj.sub(&a).unwrap().max_abs() < 1e-13);
        // R = Qᵀ A upper triangular with non-negative diagonal
        let r = q.t_matmul(&a).unwrap();
        assert!(r[(1, 0)].abs() < 1e-13 && r[(0, 0)] > 0.0 && r[(1, 1)] > 0.0);
    }
}
