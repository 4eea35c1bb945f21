use serde::{Deserialize, Serialize};

use super::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Sweep budget for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 60;

/// Thin SVD `A = U diag(S) Vᵀ` with `k = min(m, d)` columns in `U` and `V`.
///
/// Singular values are sorted descending. In every column of `V` the
/// largest-magnitude entry (lowest index on ties) is non-negative.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Svd<T> {
    pub u: DenseMatrix<T>,
    pub s: Vec<T>,
    pub v: DenseMatrix<T>,
}

/// Singular values at or below this are treated as zero.
pub fn rank_threshold<T: Scalar>(rows: usize, cols: usize, sigma_max: T) -> T {
    T::lit(rows.max(cols) as f64) * T::epsilon() * sigma_max
}

impl<T: Scalar> Svd<T> {
    pub fn rows(&self) -> usize {
        self.u.rows()
    }

    pub fn cols(&self) -> usize {
        self.v.rows()
    }

    pub fn sigma_max(&self) -> T {
        self.s[0]
    }

    pub fn threshold(&self) -> T {
        rank_threshold(self.rows(), self.cols(), self.sigma_max())
    }

    /// Numerical rank under [`rank_threshold`].
    pub fn rank(&self) -> usize {
        let tol = self.threshold();
        self.s.iter().filter(|&&s| s > tol).count()
    }

    /// `U diag(S) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let us = self.u.scale_columns(&self.s).expect("factor shapes agree");
        us.matmul(&self.v.transpose()).expect("factor shapes agree")
    }

    /// Rank-`k` truncation `U_k diag(S_k) V_kᵀ`.
    pub(crate) fn truncated(&self, k: usize) -> DenseMatrix<T> {
        let us = self.u.leading_columns(k).scale_columns(&self.s[..k]).expect("shapes");
        us.matmul(&self.v.leading_columns(k).transpose()).expect("shapes")
    }

    fn transpose(self) -> Self {
        Svd { u: self.v, s: self.s, v: self.u }
    }

    fn apply_sign_convention(&mut self) {
        let k = self.s.len();
        for j in 0..k {
            let mut best = 0;
            let mut best_abs = T::zero();
            for i in 0..self.v.rows() {
                let a = self.v[(i, j)].abs();
                if a > best_abs {
                    best_abs = a;
                    best = i;
                }
            }
            if self.v[(best, j)] < T::zero() {
                for i in 0..self.v.rows() {
                    self.v[(i, j)] = -self.v[(i, j)];
                }
                for i in 0..self.u.rows() {
                    self.u[(i, j)] = -self.u[(i, j)];
                }
            }
        }
    }
}

/// Exact thin SVD by one-sided (Hestenes) Jacobi rotations with cyclic sweeps.
///
/// Wide inputs are handled through the transpose.
pub fn svd<T: Scalar>(a: &DenseMatrix<T>) -> Result<Svd<T>> {
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut out = if a.rows() < a.cols() {
        one_sided_jacobi(&a.transpose())?.transpose()
    } else {
        one_sided_jacobi(a)?
    };
    out.apply_sign_convention();
    Ok(out)
}

/// Singular values only (same algorithm, descending).
pub fn singular_values<T: Scalar>(a: &DenseMatrix<T>) -> Result<Vec<T>> {
    Ok(svd(a)?.s)
}

/// Largest singular value.
pub fn spectral_norm<T: Scalar>(a: &DenseMatrix<T>) -> Result<T> {
    Ok(svd(a)?.s[0])
}

fn one_sided_jacobi<T: Scalar>(a: &DenseMatrix<T>) -> Result<Svd<T>> {
    let (m, d) = a.shape();
    debug_assert!(m >= d);
    let mut cols: Vec<Vec<T>> = (0..d).map(|j| a.column(j)).collect();
    let mut v: Vec<Vec<T>> = (0..d)
        .map(|j| (0..d).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();

    let fro2 = a.frobenius_norm_sq();
    // Relative pairwise test first, absolute test against ‖A‖_F² as fallback.
    let rel_tol = T::epsilon() * T::lit(m as f64).sqrt();
    let abs_tol = T::lit(1e-13).max(T::epsilon() * T::lit(8.0)) * fro2;

    let mut converged = fro2 == T::zero() || d == 1;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for i in 0..d - 1 {
            for j in i + 1..d {
                let alpha = dot(&cols[i], &cols[i]);
                let beta = dot(&cols[j], &cols[j]);
                let gamma = dot(&cols[i], &cols[j]);
                if gamma == T::zero() || gamma.abs() <= rel_tol * (alpha.sqrt() * beta.sqrt()) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, i, j, c, s);
                rotate(&mut v, i, j, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        let worst = (0..d)
            .flat_map(|i| (i + 1..d).map(move |j| (i, j)))
            .map(|(i, j)| dot(&cols[i], &cols[j]).abs())
            .fold(T::zero(), T::max);
        if worst > abs_tol {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }
    }

    let norms: Vec<T> = cols.iter().map(|c| dot(c, c).sqrt()).collect();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&x, &y| norms[y].partial_cmp(&norms[x]).expect("finite norms"));

    let s: Vec<T> = order.iter().map(|&j| norms[j]).collect();
    let tol = rank_threshold(m, d, s[0]);

    let mut u_cols: Vec<Option<Vec<T>>> = order
        .iter()
        .zip(&s)
        .map(|(&j, &sigma)| {
            (sigma > tol && sigma > T::zero()).then(|| cols[j].iter().map(|&x| x / sigma).collect())
        })
        .collect();
    complete_basis(&mut u_cols, m);

    let mut u = DenseMatrix::zeros(m, d);
    let mut vm = DenseMatrix::zeros(d, d);
    for (out_j, (&src, ucol)) in order.iter().zip(&u_cols).enumerate() {
        let ucol = ucol.as_ref().expect("basis completed");
        for i in 0..m {
            u[(i, out_j)] = ucol[i];
        }
        for i in 0..d {
            vm[(i, out_j)] = v[src][i];
        }
    }
    Ok(Svd { u, s, v: vm })
}

fn rotate<T: Scalar>(cols: &mut [Vec<T>], i: usize, j: usize, c: T, s: T) {
    let (lo, hi) = cols.split_at_mut(j);
    for (x, y) in lo[i].iter_mut().zip(hi[0].iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Fill `None` slots with unit vectors orthogonal to every filled slot,
/// drawn from the standard basis by twice-applied Gram-Schmidt.
fn complete_basis<T: Scalar>(cols: &mut [Option<Vec<T>>], m: usize) {
    let mut candidate = 0;
    for slot in 0..cols.len() {
        if cols[slot].is_some() {
            continue;
        }
        loop {
            assert!(candidate < m, "standard basis exhausted while completing U");
            let mut w: Vec<T> = (0..m).map(|i| if i == candidate { T::one() } else { T::zero() }).collect();
            candidate += 1;
            for _ in 0..2 {
                for q in cols.iter().flatten() {
                    let proj = dot(q, &w);
                    for (wi, &qi) in w.iter_mut().zip(q) {
                        *wi -= proj * qi;
                    }
                }
            }
            let n = dot(&w, &w).sqrt();
            if n > T::lit(0.5) {
                cols[slot] = Some(w.into_iter().map(|x| x / n).collect());
                break;
            }
        }
    }
}
