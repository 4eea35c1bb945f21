//! Randomized algorithms built on row sketches: Gram and cross products,
//! row-based low-rank reconstruction, sketched least squares, and
//! spectral-norm estimation.

use serde::{Deserialize, Serialize};

use crate::bounds::{budget, BudgetShape, SampleBudget};
use crate::error::{Error, Result};
use crate::matrix_core::{
    norm2, norms_from_svd, pseudoinverse_from_svd, spectral_norm, svd, DenseMatrix, Svd,
};
use crate::rng::{derive_seed, SeededStream};
use crate::sampling::{
    apply_sketch, apply_sketch_vec, asym_probs, draw_sketch, leverage_probs, regression_probs, rownorm_probs,
    RowSketch, SamplingDistribution,
};
use crate::scalar::Scalar;

/// `(2/π + 2)³`, the constant in the power-iteration lower bound.
pub const POWER_ITERATION_CONSTANT: f64 = {
    let c = 2.0 / std::f64::consts::PI + 2.0;
    c * c * c
};

/// Restarts allowed when the random start vector lies in the null space.
pub const MAX_RESTARTS: usize = 8;

/// Accuracy, confidence and oversampling for one sketch, plus its seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SketchConfig {
    pub eps: f64,
    pub delta: f64,
    pub beta: f64,
    /// Use exactly this many rows instead of the computed budget.
    pub r_override: Option<usize>,
    pub seed: u64,
}

impl SketchConfig {
    pub fn new(eps: f64, delta: f64, beta: f64, seed: u64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) || !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::BadParams(format!("eps = {eps}, delta = {delta}, beta = {beta}")));
        }
        Ok(Self { eps, delta, beta, r_override: None, seed })
    }

    pub fn with_rows(mut self, r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::BadSampleCount);
        }
        self.r_override = Some(r);
        Ok(self)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn rows(&self, b: &SampleBudget) -> usize {
        self.r_override.unwrap_or(b.r as usize)
    }
}

/// Stable rank rounded up, ignoring rounding noise just above an integer.
fn rounded_rho(stable_rank: f64) -> f64 {
    (stable_rank - 1e-9).ceil().max(1.0)
}

fn draw<T: Scalar>(
    dist: &SamplingDistribution,
    a: &DenseMatrix<T>,
    cfg: &SketchConfig,
    b: &SampleBudget,
) -> Result<(RowSketch, DenseMatrix<T>)> {
    let sketch = draw_sketch(dist, cfg.rows(b), cfg.seed)?;
    let sketched = apply_sketch(&sketch, a)?;
    Ok((sketch, sketched))
}

/// `ÃᵀB̃ = Σ_t (h_t / (r p_t)) a_tᵀ b_t` over distinct sampled rows, with
/// `h_t` the hit count of row `t`.
fn sketched_cross<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>, p: &[f64], sketch: &RowSketch) -> DenseMatrix<T> {
    let (da, db) = (a.cols(), b.cols());
    let mut out = DenseMatrix::zeros(da, db);
    for (t, &h) in sketch.hit_counts().iter().enumerate() {
        if h == 0 {
            continue;
        }
        let c = T::lit(h as f64 / (sketch.r as f64 * p[t]));
        let (ra, rb) = (a.row(t), b.row(t));
        for (i, &x) in ra.iter().enumerate().take(da) {
            let ci = c * x;
            let row = out.row_mut(i);
            for j in 0..db {
                row[j] += ci * rb[j];
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct GramApprox<T> {
    pub sketch: RowSketch,
    pub budget: SampleBudget,
    /// `ÃᵀÃ`.
    pub gram: DenseMatrix<T>,
}

/// Approximate `AᵀA` by `ÃᵀÃ` with row-norm sampling.
///
/// Target: `‖AᵀA − ÃᵀÃ‖ ≤ ε‖A‖²` with probability at least `1 − δ`.
pub fn approx_gram<T: Scalar>(a: &DenseMatrix<T>, cfg: &SketchConfig) -> Result<GramApprox<T>> {
    let f = svd(a)?;
    let n = norms_from_svd(a, &f)?;
    let b = budget(
        BudgetShape::Symmetric { rho: rounded_rho(n.stable_rank.as_f64()), d: a.cols() as u64 },
        cfg.eps,
        cfg.delta,
        cfg.beta,
    )?;
    let dist = rownorm_probs(a, cfg.beta)?;
    let sketch = draw_sketch(&dist, cfg.rows(&b), cfg.seed)?;
    let gram = sketched_cross(a, a, &dist.p, &sketch);
    Ok(GramApprox { sketch, budget: b, gram })
}

#[derive(Clone, Debug)]
pub struct ProductApprox<T> {
    pub sketch: RowSketch,
    pub budget: SampleBudget,
    /// `ÃᵀB̃`.
    pub product: DenseMatrix<T>,
}

/// Approximate `AᵀB` by `ÃᵀB̃`, sampling rows jointly under the combined
/// distribution built from the squared-norm estimates `spec_a2`, `spec_b2`.
///
/// Target: `‖AᵀB − ÃᵀB̃‖ ≤ ε‖A‖‖B‖` with probability at least `1 − δ`,
/// at the oversampling `cfg.beta` the estimates support.
pub fn approx_product<T: Scalar>(
    a: &DenseMatrix<T>,
    b: &DenseMatrix<T>,
    cfg: &SketchConfig,
    spec_a2: f64,
    spec_b2: f64,
) -> Result<ProductApprox<T>> {
    if a.rows() != b.rows() {
        return Err(Error::DimensionMismatch(format!("row counts {} and {}", a.rows(), b.rows())));
    }
    let dist = asym_probs(a, b, spec_a2, spec_b2, cfg.beta)?;
    let na = norms_from_svd(a, &svd(a)?)?;
    let nb = norms_from_svd(b, &svd(b)?)?;
    let bud = budget(
        BudgetShape::Asymmetric {
            rho1: rounded_rho(na.stable_rank.as_f64()),
            rho2: rounded_rho(nb.stable_rank.as_f64()),
            d1: a.cols() as u64,
            d2: b.cols() as u64,
        },
        cfg.eps,
        cfg.delta,
        cfg.beta,
    )?;
    let sketch = draw_sketch(&dist, cfg.rows(&bud), cfg.seed)?;
    let product = sketched_cross(a, b, &dist.p, &sketch);
    Ok(ProductApprox { sketch, budget: bud, product })
}

#[derive(Clone, Debug)]
pub struct Reconstruction<T> {
    pub k: usize,
    /// `A Π̃_k`.
    pub projected: DenseMatrix<T>,
    /// `‖A − AΠ̃_k‖`.
    pub err: f64,
    /// `‖A − A_k‖ = σ_{k+1}`.
    pub opt_err: f64,
    pub sketch: RowSketch,
    pub budget: SampleBudget,
}

/// Errors for every `k = 1..=rank(A)` from one leverage-score sketch.
#[derive(Clone, Debug)]
pub struct ReconstructionProfile {
    pub sketch: RowSketch,
    pub budget: SampleBudget,
    /// `(k, ‖A − AΠ̃_k‖, ‖A − A_k‖)`.
    pub errors: Vec<(usize, f64, f64)>,
}

struct LeverageSketch<T> {
    factors: Svd<T>,
    sketch: RowSketch,
    budget: SampleBudget,
    right: Svd<T>,
}

fn leverage_sketch<T: Scalar>(a: &DenseMatrix<T>, cfg: &SketchConfig) -> Result<LeverageSketch<T>> {
    let factors = svd(a)?;
    let rank = factors.rank();
    if rank == 0 {
        return Err(Error::ZeroMatrix);
    }
    let dist = leverage_probs(&factors.u.leading_columns(rank), cfg.beta)?;
    let bud = budget(BudgetShape::Leverage { d: rank as u64 }, cfg.eps, cfg.delta, cfg.beta)?;
    let (sketch, sketched) = draw(&dist, a, cfg, &bud)?;
    let right = svd(&sketched)?;
    Ok(LeverageSketch { factors, sketch, budget: bud, right })
}

/// `A Ṽ_k Ṽ_kᵀ` for the top-`k` right singular vectors of the sketch.
fn project<T: Scalar>(a: &DenseMatrix<T>, right: &Svd<T>, k: usize) -> Result<DenseMatrix<T>> {
    if k > right.v.cols() {
        return Err(Error::BadRank { k, max: right.v.cols() });
    }
    let vk = right.v.leading_columns(k);
    a.matmul(&vk)?.matmul(&vk.transpose())
}

fn reconstruction_errors<T: Scalar>(
    a: &DenseMatrix<T>,
    ls: &LeverageSketch<T>,
    k: usize,
) -> Result<(DenseMatrix<T>, f64, f64)> {
    let projected = project(a, &ls.right, k)?;
    let err = spectral_norm(&a.sub(&projected)?)?.as_f64();
    let opt = ls.factors.s.get(k).map_or(0.0, |s| s.as_f64());
    Ok((projected, err, opt))
}

/// Rank-`k` reconstruction from sampled rows: project `A` onto the top-`k`
/// right singular space of the leverage-score sketch.
///
/// Target: `‖A − AΠ̃_k‖ ≤ √((1+ε)/(1−ε)) ‖A − A_k‖` with probability at least
/// `1 − δ`, simultaneously for all `k`.
pub fn sparse_reconstruct<T: Scalar>(a: &DenseMatrix<T>, k: usize, cfg: &SketchConfig) -> Result<Reconstruction<T>> {
    let ls = leverage_sketch(a, cfg)?;
    let rank = ls.factors.rank();
    if k == 0 || k > rank {
        return Err(Error::BadRank { k, max: rank });
    }
    let (projected, err, opt_err) = reconstruction_errors(a, &ls, k)?;
    Ok(Reconstruction { k, projected, err, opt_err, sketch: ls.sketch, budget: ls.budget })
}

pub fn reconstruction_profile<T: Scalar>(a: &DenseMatrix<T>, cfg: &SketchConfig) -> Result<ReconstructionProfile> {
    let ls = leverage_sketch(a, cfg)?;
    let rank = ls.factors.rank();
    let mut errors = Vec::with_capacity(rank);
    for k in 1..=rank.min(ls.right.v.cols()) {
        let (_, err, opt) = reconstruction_errors(a, &ls, k)?;
        errors.push((k, err, opt));
    }
    Ok(ReconstructionProfile { sketch: ls.sketch, budget: ls.budget, errors })
}

#[derive(Clone, Debug)]
pub struct RegressionResult<T> {
    /// `x̂ = (QA)⁺ Qy`.
    pub x_hat: Vec<T>,
    /// `‖Ax̂ − y‖`.
    pub residual_norm: f64,
    /// `‖Ax* − y‖` for the exact solution `x* = A⁺y`.
    pub optimal_residual_norm: f64,
    pub sketch: RowSketch,
    pub budget: SampleBudget,
}

/// Sketch-and-solve least squares: sample rows of `[A, y]` with the
/// three-part regression probabilities and solve the small problem.
///
/// The probabilities need the exact left factor and residual of `A`.
/// Target: `‖Ax̂ − y‖ ≤ (1 + ε + ε√((1+ε)/(1−ε))) ‖Ax* − y‖` with
/// probability at least `1 − 3δ`.
pub fn approx_regression<T: Scalar>(a: &DenseMatrix<T>, y: &[T], cfg: &SketchConfig) -> Result<RegressionResult<T>> {
    let (m, d) = a.shape();
    if y.len() != m {
        return Err(Error::DimensionMismatch(format!("y has length {} for {m} rows", y.len())));
    }
    if m <= d {
        return Err(Error::DimensionMismatch(format!("regression needs more rows than columns, got {m}x{d}")));
    }
    if !(cfg.beta > 0.0 && cfg.beta <= 1.0 / 3.0) {
        return Err(Error::BadBeta { beta: cfg.beta, lo: 0.0, hi: 1.0 / 3.0 });
    }
    let f = svd(a)?;
    let rank = f.rank();
    if rank == 0 {
        return Err(Error::ZeroMatrix);
    }
    let u = f.u.leading_columns(rank);
    let uty = u.t_mat_vec(y)?;
    let fitted = u.mat_vec(&uty)?;
    let residual: Vec<T> = y.iter().zip(&fitted).map(|(&yi, &fi)| yi - fi).collect();

    let dist = regression_probs(&u, &residual, cfg.beta)?;
    let bud = budget(BudgetShape::Regression { d: rank as u64 }, cfg.eps, cfg.delta, cfg.beta)?;
    let sketch = draw_sketch(&dist, cfg.rows(&bud), cfg.seed)?;
    let qa = apply_sketch(&sketch, a)?;
    let qy = apply_sketch_vec(&sketch, y)?;

    let fq = svd(&qa)?;
    let sketched_rank = fq.rank();
    if sketched_rank < rank {
        return Err(Error::RankCollapse { sketched: sketched_rank, original: rank });
    }
    let x_hat = pseudoinverse_from_svd(&fq).mat_vec(&qy)?;
    let x_star = pseudoinverse_from_svd(&f).mat_vec(y)?;

    let resid = |x: &[T]| -> Result<f64> {
        let ax = a.mat_vec(x)?;
        let r: Vec<T> = ax.iter().zip(y).map(|(&p, &q)| p - q).collect();
        Ok(norm2(&r).as_f64())
    };
    Ok(RegressionResult {
        residual_norm: resid(&x_hat)?,
        optimal_residual_norm: resid(&x_star)?,
        x_hat,
        sketch,
        budget: bud,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralEstimate {
    /// Estimate of `‖A‖²`.
    pub value: f64,
    pub iterations: usize,
    /// Rows of the sketch the iteration ran on (the full row count when
    /// iterating on `A` itself).
    pub sketch_rows: usize,
}

fn apply_gram<T: Scalar>(a: &DenseMatrix<T>, x: &[T]) -> Vec<T> {
    let ax = a.mat_vec(x).expect("shapes");
    a.t_mat_vec(&ax).expect("shapes")
}

/// `n` power iterations on `AᵀA` from a given unit start vector.
/// Returns `‖AᵀA x_n‖`, which never exceeds `‖A‖²`.
pub fn power_iteration_from<T: Scalar>(a: &DenseMatrix<T>, x0: &[T], n: usize) -> Result<SpectralEstimate> {
    if x0.len() != a.cols() {
        return Err(Error::DimensionMismatch(format!("start vector length {} for {} columns", x0.len(), a.cols())));
    }
    let x0_norm = norm2(x0);
    if x0_norm == T::zero() {
        return Err(Error::DeadStart { restarts: 0 });
    }
    let mut x: Vec<T> = x0.iter().map(|&v| v / x0_norm).collect();
    let mut y = apply_gram(a, &x);
    let mut lambda = norm2(&y);
    if lambda == T::zero() {
        return Err(Error::DeadStart { restarts: 0 });
    }
    for _ in 0..n {
        x = y.iter().map(|&v| v / lambda).collect();
        y = apply_gram(a, &x);
        lambda = norm2(&y);
    }
    Ok(SpectralEstimate { value: lambda.as_f64(), iterations: n, sketch_rows: a.rows() })
}

/// Power iteration from an isotropic random start: `d` standard normals
/// normalized to unit length.
pub fn power_iteration<T: Scalar>(a: &DenseMatrix<T>, n: usize, seed: u64) -> Result<SpectralEstimate> {
    if a.frobenius_norm_sq() == T::zero() {
        return Err(Error::ZeroMatrix);
    }
    for attempt in 0..=MAX_RESTARTS {
        let mut stream = SeededStream::new(derive_seed(seed, attempt as u64));
        let x0: Vec<T> = stream.normals(a.cols()).into_iter().map(T::lit).collect();
        match power_iteration_from(a, &x0, n) {
            Err(Error::DeadStart { .. }) => continue,
            other => return other,
        }
    }
    Err(Error::DeadStart { restarts: MAX_RESTARTS })
}

/// Iterations making `c·d/δ³ · 2⁻²ⁿ ≤ 1`: `⌈log₂(c·d/δ³) / 2⌉`.
pub fn power_iterations_needed(d: usize, delta: f64) -> usize {
    let x = (POWER_ITERATION_CONSTANT * d as f64 / delta.powi(3)).log2() / 2.0;
    x.ceil().max(0.0) as usize
}

/// Constant-factor estimate of `‖A‖²`: row-norm sketch at `ε = 1/2`, `β = 1`,
/// then power iteration on `ÃᵀÃ`.
///
/// Target: `‖A‖²/(2√5) ≤ value ≤ (3/2)‖A‖²`.
pub fn estimate_spectral_norm<T: Scalar>(a: &DenseMatrix<T>, delta: f64, seed: u64) -> Result<SpectralEstimate> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadParams(format!("delta = {delta}")));
    }
    let f = svd(a)?;
    let n = norms_from_svd(a, &f)?;
    let bud = budget(
        BudgetShape::Symmetric { rho: rounded_rho(n.stable_rank.as_f64()), d: a.cols() as u64 },
        0.5,
        delta,
        1.0,
    )?;
    let dist = rownorm_probs(a, 1.0)?;
    let sketch = draw_sketch(&dist, bud.r as usize, seed)?;
    let sketched = apply_sketch(&sketch, a)?;
    let iterations = power_iterations_needed(a.cols(), delta);
    let est = power_iteration(&sketched, iterations, derive_seed(seed, 1))?;
    Ok(SpectralEstimate { sketch_rows: sketch.r, ..est })
}
