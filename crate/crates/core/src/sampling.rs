//! Row-sampling distributions and i.i.d. rescaled row sketches.
//!
//! A sketch of `r` rows drawn from `p` is the matrix `Q` whose `j`-th row is
//! `e_{t_j}ᵀ / √(r·p_{t_j})`; applying it to `A` gives `Ã = QA`, an unbiased
//! estimator in the sense `E[ÃᵀÃ] = AᵀA`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix_core::{require_orthonormal, DenseMatrix};
use crate::rng::SeededStream;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DistributionKind {
    RowNorm,
    Leverage,
    Subspace,
    AsymCombined,
    Regression,
}

/// Probability vector over rows, with the oversampling factor `beta` it is
/// certified for: `p_t ≥ beta · ideal_t` for the kind's ideal distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingDistribution {
    pub p: Vec<f64>,
    pub beta: f64,
    pub kind: DistributionKind,
}

impl SamplingDistribution {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

fn check_beta(beta: f64, hi: f64) -> Result<()> {
    if beta > 0.0 && beta <= hi {
        Ok(())
    } else {
        Err(Error::BadBeta { beta, lo: 0.0, hi })
    }
}

fn normalized(weights: Vec<f64>) -> Option<Vec<f64>> {
    let total: f64 = weights.iter().sum();
    (total > 0.0 && total.is_finite()).then(|| weights.into_iter().map(|w| w / total).collect())
}

fn row_weights<T: Scalar>(a: &DenseMatrix<T>) -> Vec<f64> {
    (0..a.rows())
        .map(|t| a.row(t).iter().map(|x| x.as_f64() * x.as_f64()).sum())
        .collect()
}

/// `p_t = ‖a_t‖² / ‖A‖_F²`.
pub fn rownorm_probs<T: Scalar>(a: &DenseMatrix<T>, beta: f64) -> Result<SamplingDistribution> {
    check_beta(beta, 1.0)?;
    let p = normalized(row_weights(a)).ok_or(Error::ZeroMatrix)?;
    Ok(SamplingDistribution { p, beta, kind: DistributionKind::RowNorm })
}

/// Leverage-score probabilities `p_t = ‖u_t‖² / d` for orthonormal `U`.
pub fn leverage_probs<T: Scalar>(u: &DenseMatrix<T>, beta: f64) -> Result<SamplingDistribution> {
    check_beta(beta, 1.0)?;
    require_orthonormal(u)?;
    let p = normalized(row_weights(u)).ok_or(Error::ZeroMatrix)?;
    Ok(SamplingDistribution { p, beta, kind: DistributionKind::Leverage })
}

/// `p_t = u_tᵀ S² u_t / trace(S²)`.
pub fn subspace_probs<T: Scalar>(u: &DenseMatrix<T>, s: &[T], beta: f64) -> Result<SamplingDistribution> {
    check_beta(beta, 1.0)?;
    if s.len() != u.cols() {
        return Err(Error::DimensionMismatch(format!("{} singular values for {} columns", s.len(), u.cols())));
    }
    if s.iter().any(|&x| x < T::zero()) {
        return Err(Error::BadParams("negative singular value".into()));
    }
    require_orthonormal(u)?;
    let s2: Vec<f64> = s.iter().map(|x| x.as_f64() * x.as_f64()).collect();
    let trace: f64 = s2.iter().sum();
    if trace == 0.0 {
        return Err(Error::Singular { value: 0.0 });
    }
    let weights = (0..u.rows())
        .map(|t| u.row(t).iter().zip(&s2).map(|(x, s2j)| x.as_f64() * x.as_f64() * s2j).sum())
        .collect();
    let p = normalized(weights).ok_or(Error::Singular { value: 0.0 })?;
    Ok(SamplingDistribution { p, beta, kind: DistributionKind::Subspace })
}

/// Oversampling factor certified when both squared-norm estimates are within
/// a factor `(1 ± eps_hat)` of the truth: `(1 − ε̂)/(1 + ε̂)`.
pub fn estimate_beta(eps_hat: f64) -> f64 {
    (1.0 - eps_hat) / (1.0 + eps_hat)
}

/// Probabilities for the product `AᵀB`:
/// `p_t ∝ ‖a_t‖²/specA2 + ‖b_t‖²/specB2`.
///
/// `spec_a2`, `spec_b2` estimate `‖A‖²`, `‖B‖²`. The recorded `beta` is
/// `beta_claim` as given; with exact norms it may be 1, otherwise callers
/// should pass [`estimate_beta`] of the estimate accuracy.
pub fn asym_probs<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    spec_a2: f64,
    spec_b2: f64,
    beta_claim: f64,
) -> Result<SamplingDistribution> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!("row counts {} and {}", a.rows(), b.rows())));
    }
    for est in [spec_a2, spec_b2] {
        if !(est > 0.0 && est.is_finite()) {
            return Err(Error::BadEstimate(est));
        }
    }
    check_beta(beta_claim, 1.0)?;
    let weights = row_weights(a)
        .into_iter()
        .zip(row_weights(b))
        .map(|(wa, wb)| wa / spec_a2 + wb / spec_b2)
        .collect();
    let p = normalized(weights).ok_or(Error::ZeroMatrix)?;
    Ok(SamplingDistribution { p, beta: beta_claim, kind: DistributionKind::AsymCombined })
}

/// Three-part regression probabilities
/// `β (u_t²/d + (u_t² + ê_t²)/(d+1) + ê_t²)` with `ê_t² = ε_t²/εᵀε`,
/// topped up uniformly to sum to one.
///
/// `u` is the orthonormal left factor of `A` and `residual = y − AA⁺y`.
/// When the residual vanishes the `ê` terms are zero.
pub fn regression_probs<T: Scalar>(u: &DenseMatrix<T>, residual: &[T], beta: f64) -> Result<SamplingDistribution> {
    check_beta(beta, 1.0 / 3.0)?;
    require_orthonormal(u)?;
    let m = u.rows();
    if residual.len() != m {
        return Err(Error::DimensionMismatch(format!("residual length {} for {m} rows", residual.len())));
    }
    let d = u.cols() as f64;
    let lev = row_weights(u);
    let res2: Vec<f64> = residual.iter().map(|e| e.as_f64() * e.as_f64()).collect();
    let res_total: f64 = res2.iter().sum();
    let mut p: Vec<f64> = lev
        .iter()
        .zip(&res2)
        .map(|(&u2, &e2)| {
            let e_hat = if res_total > 0.0 { e2 / res_total } else { 0.0 };
            beta * (u2 / d + (u2 + e_hat) / (d + 1.0) + e_hat)
        })
        .collect();
    let total: f64 = p.iter().sum();
    if total <= 1.0 {
        let top_up = (1.0 - total) / m as f64;
        p.iter_mut().for_each(|x| *x += top_up);
    } else {
        // Only reachable through rounding at beta = 1/3.
        p.iter_mut().for_each(|x| *x /= total);
    }
    Ok(SamplingDistribution { p, beta, kind: DistributionKind::Regression })
}

/// `r` row indices with rescaling weights `1/√(r·p_t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowSketch {
    pub source_rows: usize,
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
    pub r: usize,
}

impl RowSketch {
    /// Sketch with explicit indices, weighting each pick by `1/√(r·p_t)`.
    pub fn from_probabilities(p: &[f64], indices: Vec<usize>) -> Result<Self> {
        let r = indices.len();
        if r == 0 {
            return Err(Error::BadSampleCount);
        }
        let mut weights = Vec::with_capacity(r);
        for &t in &indices {
            let pt = *p
                .get(t)
                .ok_or_else(|| Error::DimensionMismatch(format!("index {t} out of {} rows", p.len())))?;
            if pt.is_nan() || pt <= 0.0 {
                return Err(Error::BadParams(format!("row {t} has zero probability")));
            }
            weights.push(1.0 / (r as f64 * pt).sqrt());
        }
        Ok(Self { source_rows: p.len(), indices, weights, r })
    }

    /// Every row once with unit weight, so `QᵀQ = I`.
    pub fn exact(m: usize) -> Self {
        Self { source_rows: m, indices: (0..m).collect(), weights: vec![1.0; m], r: m }
    }

    /// Number of times each source row was drawn.
    pub fn hit_counts(&self) -> Vec<usize> {
        let mut h = vec![0; self.source_rows];
        for &t in &self.indices {
            h[t] += 1;
        }
        h
    }
}

/// Draw `r` rows i.i.d. with replacement from `dist` by inverse-CDF lookup.
pub fn draw_sketch(dist: &SamplingDistribution, r: usize, seed: u64) -> Result<RowSketch> {
    if r == 0 {
        return Err(Error::BadSampleCount);
    }
    let mut cdf = Vec::with_capacity(dist.p.len());
    let mut acc = 0.0;
    for &pt in &dist.p {
        acc += pt;
        cdf.push(acc);
    }
    let total = acc;
    if total.is_nan() || total <= 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let last_positive = dist.p.iter().rposition(|&x| x > 0.0).expect("positive mass");
    let mut stream = SeededStream::new(seed);
    let indices = (0..r)
        .map(|_| {
            let u = stream.uniform() * total;
            cdf.partition_point(|&c| c <= u).min(last_positive)
        })
        .collect();
    RowSketch::from_probabilities(&dist.p, indices)
}

/// `Q M`: row `j` is `weight_j · M[t_j, :]`.
pub fn apply_sketch<T: Scalar>(sketch: &RowSketch, m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if m.rows() != sketch.source_rows {
        return Err(Error::DimensionMismatch(format!(
            "sketch over {} rows applied to {} rows",
            sketch.source_rows,
            m.rows()
        )));
    }
    let cols = m.cols();
    let mut data = Vec::with_capacity(sketch.r * cols);
    for (&t, &w) in sketch.indices.iter().zip(&sketch.weights) {
        let w = T::lit(w);
        data.extend(m.row(t).iter().map(|&x| x * w));
    }
    Ok(DenseMatrix::from_vec_unchecked(sketch.r, cols, data))
}

/// `Q y` for a vector.
pub fn apply_sketch_vec<T: Scalar>(sketch: &RowSketch, y: &[T]) -> Result<Vec<T>> {
    if y.len() != sketch.source_rows {
        return Err(Error::DimensionMismatch(format!(
            "sketch over {} rows applied to vector of length {}",
            sketch.source_rows,
            y.len()
        )));
    }
    Ok(sketch.indices.iter().zip(&sketch.weights).map(|(&t, &w)| y[t] * T::lit(w)).collect())
}
