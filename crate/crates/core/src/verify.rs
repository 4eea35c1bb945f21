//! Exact-oracle checks for sketch quality and a Monte Carlo harness that
//! measures empirical failure rates against `(ε, δ)` targets.
//!
//! Everything here is recomputed from exact SVDs of the inputs; nothing is
//! taken from the algorithm module's intermediates except the sketch itself
//! and the algorithm's final output.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::algorithms::{
    approx_gram, approx_product, approx_regression, estimate_spectral_norm, reconstruction_profile, SketchConfig,
};
use crate::bounds::{budget, BudgetShape};
use crate::error::{Error, Result};
use crate::matrix_core::{pseudoinverse, pseudoinverse_from_svd, require_orthonormal, spectral_norm, svd, DenseMatrix};
use crate::rng::{derive_seed, SeededStream};
use crate::sampling::{apply_sketch, apply_sketch_vec, draw_sketch, leverage_probs, RowSketch};
use crate::scalar::Scalar;
use crate::Matrix;

/// Additive slack when comparing an error to its target.
pub const TARGET_SLACK: f64 = 1e-9;

/// Sign-free seed for the random probe directions in
/// [`spectrum_preservation_check`].
const PROBE_SEED: u64 = 0x005e_ed0f_d1ec;

fn sym_spectral<T: Scalar>(m: &DenseMatrix<T>) -> Result<f64> {
    Ok(spectral_norm(m)?.as_f64())
}

/// `‖I − UᵀQᵀQU‖`, or `‖S² − S UᵀQᵀQU S‖` when a spectrum is supplied.
pub fn subspace_isometry_error<T: Scalar>(u: &DenseMatrix<T>, s: Option<&[T]>, sketch: &RowSketch) -> Result<f64> {
    if u.rows() != sketch.source_rows {
        return Err(Error::DimensionMismatch(format!(
            "sketch over {} rows, U has {}",
            sketch.source_rows,
            u.rows()
        )));
    }
    let qu = apply_sketch(sketch, u)?;
    let mut g = qu.gram();
    let d = u.cols();
    let scale: Vec<T> = match s {
        Some(s) if s.len() != d => {
            return Err(Error::DimensionMismatch(format!("{} singular values for {d} columns", s.len())))
        }
        Some(s) => s.to_vec(),
        None => vec![T::one(); d],
    };
    for i in 0..d {
        for j in 0..d {
            let target = if i == j { scale[i] * scale[i] } else { T::zero() };
            g[(i, j)] = target - scale[i] * g[(i, j)] * scale[j];
        }
    }
    sym_spectral(&g)
}

/// Structural facts about `QA` for full-column-rank `A = U_A S_A V_Aᵀ`.
///
/// When rank is not preserved the three residuals are reported as
/// `f64::MAX`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// `rank(QA) = rank(QU_A) = rank(A)`.
    pub rank_preserved: bool,
    /// `‖S_{QU} − S_{QU}⁻¹‖`.
    pub s_minus_sinv_norm: f64,
    /// `‖(QU)⁺ − (QU)ᵀ‖`.
    pub pinv_vs_transpose_norm: f64,
    /// `‖(QA)⁺ − V_A S_A⁻¹ (QU_A)⁺‖ / ‖(QA)⁺‖`.
    pub factored_pinv_residual: f64,
}

pub fn sketch_structure_report<T: Scalar>(a: &DenseMatrix<T>, sketch: &RowSketch) -> Result<StructureReport> {
    let f = svd(a)?;
    let d = a.cols();
    let rank = f.rank();
    if rank < d || a.rows() < d {
        return Err(Error::RankDeficientInput { rank, cols: d });
    }
    let u = f.u.clone();
    let qu = apply_sketch(sketch, &u)?;
    let qa = apply_sketch(sketch, a)?;
    let fqu = svd(&qu)?;
    let fqa = svd(&qa)?;
    let rank_preserved = fqu.rank() == d && fqa.rank() == d;
    if !rank_preserved {
        return Ok(StructureReport {
            rank_preserved,
            s_minus_sinv_norm: f64::MAX,
            pinv_vs_transpose_norm: f64::MAX,
            factored_pinv_residual: f64::MAX,
        });
    }
    let s_minus_sinv_norm = fqu
        .s
        .iter()
        .map(|&s| (s - T::one() / s).abs().as_f64())
        .fold(0.0, f64::max);
    let qu_pinv = pseudoinverse_from_svd(&fqu);
    let pinv_vs_transpose_norm = sym_spectral(&qu_pinv.sub(&qu.transpose())?)?;

    let qa_pinv = pseudoinverse_from_svd(&fqa);
    let inv_s: Vec<T> = f.s.iter().map(|&s| T::one() / s).collect();
    let factored = f.v.scale_columns(&inv_s)?.matmul(&qu_pinv)?;
    let factored_pinv_residual = sym_spectral(&qa_pinv.sub(&factored)?)? / sym_spectral(&qa_pinv)?;
    Ok(StructureReport { rank_preserved, s_minus_sinv_norm, pinv_vs_transpose_norm, factored_pinv_residual })
}

/// `‖A − AΠ̃_k‖² ≤ ‖A − A_k‖² + 2‖AᵀA − ÃᵀÃ‖`, where `Π̃_k` projects on the
/// top-`k` right singular vectors of `Ã = QA`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionCheck {
    pub pass: bool,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn check_reconstruction_inequality<T: Scalar>(
    a: &DenseMatrix<T>,
    sketch: &RowSketch,
    k: usize,
) -> Result<ReconstructionCheck> {
    let max = a.cols().min(a.rows()).min(sketch.r.max(1)).min(a.cols());
    if k == 0 || k > max {
        return Err(Error::BadRank { k, max });
    }
    let fa = svd(a)?;
    let at = apply_sketch(sketch, a)?;
    let ft = svd(&at)?;
    if k > ft.v.cols() {
        return Err(Error::BadRank { k, max: ft.v.cols() });
    }
    let vk = ft.v.leading_columns(k);
    let proj = a.matmul(&vk)?.matmul(&vk.transpose())?;
    let lhs = sym_spectral(&a.sub(&proj)?)?.powi(2);
    let opt = fa.s.get(k).map_or(0.0, |s| s.as_f64());
    let gram_err = sym_spectral(&a.gram().sub(&at.gram())?)?;
    let rhs = opt * opt + 2.0 * gram_err;
    let norm2 = fa.s[0].as_f64().powi(2);
    Ok(ReconstructionCheck { pass: lhs <= rhs + 1e-8 * norm2, lhs, rhs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumViolation {
    /// Index of an eigenvalue of `ÃᵀÃ` outside `(1 ± iso)λ_i(AᵀA)`.
    Eigenvalue(usize),
    /// Index of a probe direction whose Rayleigh quotient escaped.
    Rayleigh(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCheck {
    /// Measured `‖I − U_AᵀQᵀQU_A‖`.
    pub iso: f64,
    /// `iso ≤ eps`.
    pub premise_holds: bool,
    /// Both sandwiches hold with factor `1 ± iso`.
    pub holds: bool,
    pub violation: Option<SpectrumViolation>,
}

/// Given the measured isometry error `iso`, check
/// `(1−iso)λ_i(AᵀA) ≤ λ_i(ÃᵀÃ) ≤ (1+iso)λ_i(AᵀA)` for all `i` and the
/// matching Rayleigh-quotient sandwich on 100 random unit directions.
pub fn spectrum_preservation_check<T: Scalar>(a: &DenseMatrix<T>, sketch: &RowSketch, eps: f64) -> Result<SpectrumCheck> {
    let f = svd(a)?;
    let d = a.cols();
    let rank = f.rank();
    if rank < d || a.rows() < d {
        return Err(Error::RankDeficientInput { rank, cols: d });
    }
    let iso = subspace_isometry_error(&f.u, None, sketch)?;
    let at = apply_sketch(sketch, a)?;
    let ft = svd(&at)?;
    let lam: Vec<f64> = f.s.iter().map(|s| s.as_f64().powi(2)).collect();
    let mut lam_t: Vec<f64> = ft.s.iter().map(|s| s.as_f64().powi(2)).collect();
    lam_t.resize(d, 0.0);
    let tol = 1e-10 * lam[0];

    let mut violation = None;
    for i in 0..d {
        if lam_t[i] < (1.0 - iso) * lam[i] - tol || lam_t[i] > (1.0 + iso) * lam[i] + tol {
            violation = Some(SpectrumViolation::Eigenvalue(i));
            break;
        }
    }
    if violation.is_none() {
        let g = a.gram();
        let gt = at.gram();
        let mut stream = SeededStream::new(PROBE_SEED);
        for j in 0..100 {
            let x: Vec<T> = stream.normals(d).into_iter().map(T::lit).collect();
            let quad = |m: &DenseMatrix<T>| -> f64 {
                let mx = m.mat_vec(&x).expect("shapes");
                x.iter().zip(&mx).map(|(a, b)| a.as_f64() * b.as_f64()).sum::<f64>()
            };
            let xx: f64 = x.iter().map(|v| v.as_f64().powi(2)).sum();
            let (q, qt) = (quad(&g) / xx, quad(&gt) / xx);
            if qt < (1.0 - iso) * q - tol || qt > (1.0 + iso) * q + tol {
                violation = Some(SpectrumViolation::Rayleigh(j));
                break;
            }
        }
    }
    Ok(SpectrumCheck { iso, premise_holds: iso <= eps, holds: violation.is_none(), violation })
}

/// `(max(‖A₁‖, ‖A₂‖), ‖[A₁ A₂]‖, √(‖A₁‖² + ‖A₂‖²))`; the middle value lies
/// between the outer two.
pub fn block_norm_bounds<T: Scalar>(a1: &DenseMatrix<T>, a2: &DenseMatrix<T>) -> Result<(f64, f64, f64)> {
    let n1 = sym_spectral(a1)?;
    let n2 = sym_spectral(a2)?;
    let n = sym_spectral(&a1.hstack(a2)?)?;
    Ok((n1.max(n2), n, (n1 * n1 + n2 * n2).sqrt()))
}

/// Workload for [`monte_carlo`].
#[derive(Clone, Debug)]
pub enum TrialTask {
    /// `ÃᵀÃ` vs `AᵀA`, target `ε‖A‖²`.
    Gram { a: Matrix },
    /// `ÃᵀB̃` vs `AᵀB` with exact norm inputs, target `ε‖A‖‖B‖`.
    Product { a: Matrix, b: Matrix },
    /// Every `k` below the rank, target `√((1+ε)/(1−ε))‖A − A_k‖`.
    Reconstruct { a: Matrix },
    /// Target `(1 + ε + ε√((1+ε)/(1−ε)))‖Ax* − y‖`, failure budget `3δ`.
    Regress { a: Matrix, y: Vec<f64> },
    /// Target interval `[‖A‖²/(2√5), 1.5‖A‖²]`.
    SpecNorm { a: Matrix },
    /// `‖I − UᵀQᵀQU‖ ≤ ε` for orthonormal `U` under leverage sampling.
    Isometry { u: Matrix },
}

impl TrialTask {
    pub fn name(&self) -> &'static str {
        match self {
            TrialTask::Gram { .. } => "gram",
            TrialTask::Product { .. } => "product",
            TrialTask::Reconstruct { .. } => "reconstruct",
            TrialTask::Regress { .. } => "regress",
            TrialTask::SpecNorm { .. } => "specnorm",
            TrialTask::Isometry { .. } => "isometry",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialParams {
    pub eps: f64,
    pub delta: f64,
    pub beta: f64,
    pub r_override: Option<usize>,
}

/// Outcome of `trials` independent runs of one task.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub task: String,
    pub trials: usize,
    pub failures: usize,
    /// Nominal failure probability (`3δ` for regression).
    pub target_delta: f64,
    pub eps_target: f64,
    /// Per-trial error divided by its target (for the spectral-norm task,
    /// the estimate divided by `‖A‖²`).
    pub error_samples: Vec<f64>,
    pub seed: u64,
    /// Rows per sketch (budget or override).
    pub sample_rows: usize,
    pub failure_rate: f64,
    /// One-sided 95% Clopper-Pearson upper bound on the failure rate.
    pub failure_rate_upper95: f64,
    /// Counts for auxiliary, ungated per-trial checks.
    pub side_checks: BTreeMap<String, usize>,
    /// Trials aborted by an error, keyed by error name.
    pub task_errors: BTreeMap<String, usize>,
    /// Per-trial sketch structure (regression task only; `None` for
    /// trials that errored).
    pub structure_reports: Vec<Option<StructureReport>>,
}

impl TrialReport {
    /// Largest failure count accepted: `2·target_delta·N`.
    pub fn gate(&self) -> usize {
        (2.0 * self.target_delta * self.trials as f64 + 1e-9).floor() as usize
    }

    pub fn passes_gate(&self) -> bool {
        self.failures <= self.gate()
    }
}

/// Exact one-sided upper confidence bound for a binomial proportion:
/// the `level` quantile of `Beta(failures + 1, trials − failures)`.
pub fn clopper_pearson_upper(failures: usize, trials: usize, level: f64) -> f64 {
    if failures >= trials {
        return 1.0;
    }
    Beta::new(failures as f64 + 1.0, (trials - failures) as f64)
        .expect("positive shape parameters")
        .inverse_cdf(level)
}

struct TrialOutcome {
    failed: bool,
    ratio: f64,
    rows: usize,
    side: Vec<&'static str>,
    structure: Option<StructureReport>,
    error: Option<&'static str>,
}

impl TrialOutcome {
    fn error(e: Error) -> Self {
        TrialOutcome { failed: true, ratio: f64::MAX, rows: 0, side: vec![], structure: None, error: Some(e.name()) }
    }
}

/// Oracle quantities shared by all trials of a task.
enum Prepared {
    Gram { gram: Matrix, norm2: f64 },
    Product { exact: Matrix, na2: f64, nb2: f64 },
    Reconstruct { rank: usize },
    Regress { u: Matrix, residual: Vec<f64> },
    SpecNorm { norm2: f64 },
    Isometry { r: usize },
}

fn prepare(task: &TrialTask, params: &TrialParams) -> Result<Prepared> {
    Ok(match task {
        TrialTask::Gram { a } => Prepared::Gram { gram: a.gram(), norm2: spectral_norm(a)?.powi(2) },
        TrialTask::Product { a, b } => Prepared::Product {
            exact: a.t_matmul(b)?,
            na2: spectral_norm(a)?.powi(2),
            nb2: spectral_norm(b)?.powi(2),
        },
        TrialTask::Reconstruct { a } => Prepared::Reconstruct { rank: svd(a)?.rank() },
        TrialTask::Regress { a, y } => {
            let f = svd(a)?;
            let u = f.u.leading_columns(f.rank().max(1));
            let fit = u.mat_vec(&u.t_mat_vec(y)?)?;
            Prepared::Regress { residual: y.iter().zip(&fit).map(|(p, q)| p - q).collect(), u }
        }
        TrialTask::SpecNorm { a } => Prepared::SpecNorm { norm2: spectral_norm(a)?.powi(2) },
        TrialTask::Isometry { u } => {
            require_orthonormal(u)?;
            let b = budget(BudgetShape::Leverage { d: u.cols() as u64 }, params.eps, params.delta, params.beta)?;
            Prepared::Isometry { r: params.r_override.unwrap_or(b.r as usize) }
        }
    })
}

fn run_trial(task: &TrialTask, prep: &Prepared, params: &TrialParams, seed: u64) -> Result<TrialOutcome> {
    let eps = params.eps;
    let mut cfg = SketchConfig::new(eps, params.delta, params.beta, seed)?;
    if let Some(r) = params.r_override {
        cfg = cfg.with_rows(r)?;
    }
    let judge = |err: f64, target: f64| (err > target + TARGET_SLACK, err / target.max(TARGET_SLACK));
    let mut side = Vec::new();
    let mut structure = None;
    let (failed, ratio, rows) = match (task, prep) {
        (TrialTask::Gram { a }, Prepared::Gram { gram, norm2 }) => {
            let g = approx_gram(a, &cfg)?;
            let err = sym_spectral(&gram.sub(&g.gram)?)?;
            let (f, r) = judge(err, eps * norm2);
            (f, r, g.sketch.r)
        }
        (TrialTask::Product { a, b }, Prepared::Product { exact, na2, nb2 }) => {
            let p = approx_product(a, b, &cfg, *na2, *nb2)?;
            let err = sym_spectral(&exact.sub(&p.product)?)?;
            let (f, r) = judge(err, eps * (na2 * nb2).sqrt());
            (f, r, p.sketch.r)
        }
        (TrialTask::Reconstruct { a }, Prepared::Reconstruct { rank }) => {
            let prof = reconstruction_profile(a, &cfg)?;
            let factor = ((1.0 + eps) / (1.0 - eps)).sqrt();
            let mut failed = false;
            let mut worst: f64 = 0.0;
            for &(k, err, opt) in prof.errors.iter().filter(|e| e.0 < *rank) {
                let (f, r) = judge(err, factor * opt);
                failed |= f;
                worst = worst.max(r);
                if !check_reconstruction_inequality(a, &prof.sketch, k)?.pass {
                    side.push("reconstruction_inequality_violated");
                }
            }
            (failed, worst, prof.sketch.r)
        }
        (TrialTask::Regress { a, y }, Prepared::Regress { u, residual }) => {
            let res = approx_regression(a, y, &cfg)?;
            let target = (1.0 + eps + eps * ((1.0 + eps) / (1.0 - eps)).sqrt()) * res.optimal_residual_norm;
            let (f, r) = judge(res.residual_norm, target);
            structure = regression_side_checks(a, u, residual, &res.sketch, eps, &mut side)?;
            (f, r, res.sketch.r)
        }
        (TrialTask::SpecNorm { a }, Prepared::SpecNorm { norm2 }) => {
            let est = estimate_spectral_norm(a, params.delta, seed)?;
            let ratio = est.value / norm2;
            let lo = 1.0 / (2.0 * 5f64.sqrt());
            (ratio < lo - TARGET_SLACK || ratio > 1.5 + TARGET_SLACK, ratio, est.sketch_rows)
        }
        (TrialTask::Isometry { u }, Prepared::Isometry { r }) => {
            let dist = leverage_probs(u, params.beta)?;
            let sketch = draw_sketch(&dist, *r, seed)?;
            let err = subspace_isometry_error(u, None, &sketch)?;
            let (f, ratio) = judge(err, eps);
            (f, ratio, sketch.r)
        }
        _ => unreachable!("prepared state matches task"),
    };
    Ok(TrialOutcome { failed, ratio, rows, side, structure, error: None })
}

/// Per-event attribution for the regression guarantee: isometry of `QU`,
/// norm of `Qε`, and `‖UᵀQᵀQε‖`, plus structural facts of the sketch.
fn regression_side_checks(
    a: &Matrix,
    u: &Matrix,
    residual: &[f64],
    sketch: &RowSketch,
    eps: f64,
    side: &mut Vec<&'static str>,
) -> Result<Option<StructureReport>> {
    if subspace_isometry_error(u, None, sketch)? > eps {
        side.push("isometry_event_failed");
    }
    let res_norm = residual.iter().map(|e| e * e).sum::<f64>().sqrt();
    if res_norm > 0.0 {
        let qe = apply_sketch_vec(sketch, residual)?;
        let qe_norm = qe.iter().map(|e| e * e).sum::<f64>().sqrt();
        if qe_norm > (1.0 + eps) * res_norm + TARGET_SLACK {
            side.push("residual_norm_event_failed");
        }
        let qu = apply_sketch(sketch, u)?;
        let cross = qu.t_mat_vec(&qe)?;
        if cross.iter().map(|e| e * e).sum::<f64>().sqrt() > eps * res_norm + TARGET_SLACK {
            side.push("cross_term_event_failed");
        }
    }
    if u.cols() < a.cols() {
        return Ok(None);
    }
    let s = sketch_structure_report(a, sketch)?;
    if !s.rank_preserved {
        side.push("rank_not_preserved");
    }
    if s.s_minus_sinv_norm > eps / (1.0 - eps).sqrt() + TARGET_SLACK {
        side.push("singular_value_spread_exceeded");
    }
    if s.factored_pinv_residual > 1e-8 {
        side.push("factored_pinv_mismatch");
    }
    Ok(Some(s))
}

/// Run `trials` independent trials (trial `i` seeded with
/// `derive_seed(seed, i)`) and count target violations. A trial that errors
/// counts as a failure.
pub fn monte_carlo(task: &TrialTask, params: &TrialParams, trials: usize, seed: u64) -> Result<TrialReport> {
    if trials == 0 {
        return Err(Error::BadParams("at least one trial required".into()));
    }
    let prep = prepare(task, params)?;
    let outcomes: Vec<TrialOutcome> = (0..trials)
        .into_par_iter()
        .map(|i| {
            run_trial(task, &prep, params, derive_seed(seed, i as u64)).unwrap_or_else(TrialOutcome::error)
        })
        .collect();

    let failures = outcomes.iter().filter(|o| o.failed).count();
    let mut side_checks = BTreeMap::new();
    let mut task_errors = BTreeMap::new();
    for o in &outcomes {
        for &s in &o.side {
            *side_checks.entry(s.to_string()).or_insert(0) += 1;
        }
        if let Some(e) = o.error {
            *task_errors.entry(e.to_string()).or_insert(0) += 1;
        }
    }
    let target_delta = match task {
        TrialTask::Regress { .. } => 3.0 * params.delta,
        _ => params.delta,
    };
    Ok(TrialReport {
        task: task.name().to_string(),
        trials,
        failures,
        target_delta,
        eps_target: match task {
            TrialTask::SpecNorm { .. } => 0.5,
            _ => params.eps,
        },
        error_samples: outcomes.iter().map(|o| o.ratio).collect(),
        seed,
        sample_rows: outcomes.iter().map(|o| o.rows).max().unwrap_or(0),
        failure_rate: failures as f64 / trials as f64,
        failure_rate_upper95: clopper_pearson_upper(failures, trials, 0.95),
        side_checks,
        task_errors,
        structure_reports: match task {
            TrialTask::Regress { .. } => outcomes.iter().map(|o| o.structure).collect(),
            _ => Vec::new(),
        },
    })
}

/// Pseudoinverse-based exact least-squares solution, for oracle use.
pub fn exact_least_squares(a: &Matrix, y: &[f64]) -> Result<Vec<f64>> {
    pseudoinverse(a)?.mat_vec(y)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_core::orthonormal_basis;
    use crate::sampling::{rownorm_probs, SamplingDistribution, DistributionKind};

    fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut s = SeededStream::new(seed);
        DenseMatrix::new(rows, cols, s.normals(rows * cols)).unwrap()
    }

    #[test]
    fn isometry_of_identity_matches_hit_counts() {
        let m = 5;
        let u = Matrix::identity(m);
        let dist = SamplingDistribution { p: vec![0.2; m], beta: 1.0, kind: DistributionKind::Leverage };
        let sketch = draw_sketch(&dist, 7, 3).unwrap();
        let closed = sketch
            .hit_counts()
            .iter()
            .map(|&h| (1.0 - h as f64 * m as f64 / 7.0).abs())
            .fold(0.0, f64::max);
        let err = subspace_isometry_error(&u, None, &sketch).unwrap();
        assert!((err - closed).abs() < 1e-13);
    }

    #[test]
    fn isometry_single_row_is_zero() {
        let u = Matrix::identity(1);
        let sketch = draw_sketch(&rownorm_probs(&u, 1.0).unwrap(), 4, 1).unwrap();
        assert!(subspace_isometry_error(&u, None, &sketch).unwrap() < 1e-15);
        assert!(subspace_isometry_error(&Matrix::identity(2), None, &sketch).is_err());
    }

    #[test]
    fn weighted_isometry_matches_definition() {
        let u = orthonormal_basis(&gaussian(20, 3, 1)).unwrap();
        let s = [3.0, 2.0, 0.5];
        let sketch = draw_sketch(&leverage_probs(&u, 1.0).unwrap(), 15, 2).unwrap();
        let qus = apply_sketch(&sketch, &u).unwrap().scale_columns(&s).unwrap();
        let direct = Matrix::diag(3, 3, &[9.0, 4.0, 0.25]).sub(&qus.gram()).unwrap();
        let expect = spectral_norm(&direct).unwrap();
        assert!((subspace_isometry_error(&u, Some(&s), &sketch).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn structure_of_exact_sketch_is_trivial() {
        let a = Matrix::new(1, 1, vec![2.5]).unwrap();
        let rep = sketch_structure_report(&a, &RowSketch::exact(1)).unwrap();
        assert!(rep.rank_preserved);
        assert!(rep.s_minus_sinv_norm < 1e-15);
        assert!(rep.pinv_vs_transpose_norm < 1e-15);
        assert!(rep.factored_pinv_residual < 1e-15);
    }

    #[test]
    fn structure_rank_one_column() {
        let a = Matrix::column_vector(&[1.0, 0.0, -2.0, 3.0]).unwrap();
        let sketch = RowSketch::from_probabilities(&[0.25; 4], vec![0, 3, 3]).unwrap();
        let rep = sketch_structure_report(&a, &sketch).unwrap();
        assert!(rep.rank_preserved);
        assert!(rep.factored_pinv_residual <= 1e-10);
    }

    #[test]
    fn structure_rejects_rank_deficient() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]).unwrap();
        assert!(matches!(
            sketch_structure_report(&a, &RowSketch::exact(3)),
            Err(Error::RankDeficientInput { rank: 1, cols: 2 })
        ));
    }

    #[test]
    fn structure_reports_lost_rank() {
        let a = gaussian(10, 3, 4);
        let sketch = RowSketch::from_probabilities(&[0.1; 10], vec![2, 2]).unwrap();
        let rep = sketch_structure_report(&a, &sketch).unwrap();
        assert!(!rep.rank_preserved);
        assert_eq!(rep.s_minus_sinv_norm, f64::MAX);
    }

    #[test]
    fn reconstruction_inequality_exact_sketch() {
        let a = Matrix::from_rows(&[vec![3.0, 1.0, -2.0]]).unwrap();
        let c = check_reconstruction_inequality(&a, &RowSketch::exact(1), 1).unwrap();
        assert!(c.pass);
        assert!(c.lhs.abs() < 1e-12 && c.rhs.abs() < 1e-12);
    }

    #[test]
    fn reconstruction_inequality_full_rank_k() {
        let a = gaussian(30, 4, 6);
        let sketch = draw_sketch(&rownorm_probs(&a, 1.0).unwrap(), 12, 7).unwrap();
        let c = check_reconstruction_inequality(&a, &sketch, 4).unwrap();
        assert!(c.pass);
        let gram_err = spectral_norm(&a.gram().sub(&apply_sketch(&sketch, &a).unwrap().gram()).unwrap()).unwrap();
        assert!(c.lhs <= 2.0 * gram_err + 1e-8);
        assert!(matches!(check_reconstruction_inequality(&a, &sketch, 0), Err(Error::BadRank { .. })));
    }

    #[test]
    fn spectrum_check_exact_and_diagonal() {
        let a = gaussian(8, 3, 2);
        let c = spectrum_preservation_check(&a, &RowSketch::exact(8), 0.1).unwrap();
        assert!(c.iso < 1e-14 && c.holds && c.premise_holds);

        // Diagonal A with every row hit twice out of r = 2m: QᵀQ = I exactly.
        let a = Matrix::diag(3, 3, &[3.0, 2.0, 1.0]);
        let sketch = RowSketch::from_probabilities(&[1.0 / 3.0; 3], vec![0, 1, 2, 0, 1, 2]).unwrap();
        let c = spectrum_preservation_check(&a, &sketch, 0.5).unwrap();
        assert!(c.iso < 1e-14 && c.holds);
    }

    #[test]
    fn block_norms_sandwich() {
        for seed in 0..20 {
            let a1 = gaussian(6, 2 + seed as usize % 3, seed);
            let a2 = gaussian(6, 1 + seed as usize % 4, seed + 100);
            let (lo, n, hi) = block_norm_bounds(&a1, &a2).unwrap();
            assert!(lo <= n + 1e-10 && n <= hi + 1e-10);
        }
        // Saturation cases.
        let a = gaussian(5, 2, 1);
        let (_, n, hi) = block_norm_bounds(&a, &a).unwrap();
        assert!((n - hi).abs() < 1e-12);
        let e1 = Matrix::column_vector(&[1.0, 0.0]).unwrap();
        let e2 = Matrix::column_vector(&[0.0, 2.0]).unwrap();
        let (lo, n, _) = block_norm_bounds(&e1, &e2).unwrap();
        assert!((n - lo).abs() < 1e-14);
    }

    #[test]
    fn clopper_pearson_values() {
        // Zero failures: 1 − 0.05^(1/n).
        let ub = clopper_pearson_upper(0, 100, 0.95);
        assert!((ub - (1.0 - 0.05f64.powf(0.01))).abs() < 1e-10);
        assert_eq!(clopper_pearson_upper(5, 5, 0.95), 1.0);
        let ub = clopper_pearson_upper(10, 100, 0.95);
        assert!(ub > 0.1 && ub < 0.2);
    }

    #[test]
    fn near_exact_sketches_never_fail() {
        let a = gaussian(6, 3, 1);
        let params = TrialParams { eps: 0.5, delta: 0.1, beta: 1.0, r_override: Some(6000) };
        let rep = monte_carlo(&TrialTask::Gram { a }, &params, 50, 3).unwrap();
        assert_eq!(rep.failures, 0);
        assert!(rep.passes_gate());
    }

    #[test]
    fn gross_undersampling_fails() {
        let u = orthonormal_basis(&gaussian(256, 8, 2)).unwrap();
        let params = TrialParams { eps: 0.5, delta: 0.1, beta: 1.0, r_override: Some(1) };
        let rep = monte_carlo(&TrialTask::Isometry { u }, &params, 50, 3).unwrap();
        assert_eq!(rep.failures, 50);
        assert!(!rep.passes_gate());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = gaussian(40, 4, 9);
        let params = TrialParams { eps: 0.5, delta: 0.1, beta: 1.0, r_override: Some(20) };
        let t = TrialTask::Gram { a };
        assert_eq!(monte_carlo(&t, &params, 16, 5).unwrap(), monte_carlo(&t, &params, 16, 5).unwrap());
    }

    #[test]
    fn task_errors_count_as_failures() {
        let a = gaussian(30, 3, 1);
        let y = gaussian(30, 1, 2).into_vec();
        // beta above 1/3 makes every regression trial error out.
        let params = TrialParams { eps: 0.5, delta: 0.1, beta: 0.9, r_override: Some(10) };
        let rep = monte_carlo(&TrialTask::Regress { a, y }, &params, 4, 1).unwrap();
        assert_eq!(rep.failures, 4);
        assert_eq!(rep.task_errors.get("BadBeta"), Some(&4));
    }
}
