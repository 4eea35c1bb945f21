//! Closed-form tail bounds for sums of independent scalar and matrix random
//! variables, and the sample budgets they imply for row sampling.
//!
//! Constants are kept exactly as derived rather than sharpened. Every tail
//! value is clamped to `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters for an average of `n` i.i.d. zero-mean terms with
/// `‖X‖ ≤ gamma` almost surely and variance bound `s2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailParams {
    pub n: u64,
    pub eps: f64,
    pub gamma: f64,
    pub s2: f64,
    /// Matrix dimension `d`, or `d₁ + d₂` for the rectangular bound.
    pub dims: u64,
}

impl TailParams {
    pub fn new(n: u64, eps: f64, gamma: f64, s2: f64, dims: u64) -> Result<Self> {
        if n < 1 || dims < 1 {
            return Err(Error::BadParams(format!("n = {n} and dims = {dims} must be at least 1")));
        }
        if !(eps > 0.0 && gamma > 0.0 && s2 >= 0.0) || !(eps.is_finite() && gamma.is_finite() && s2.is_finite()) {
            return Err(Error::BadParams(format!("eps = {eps}, gamma = {gamma}, s2 = {s2}")));
        }
        Ok(Self { n, eps, gamma, s2, dims })
    }

    fn bernstein_exponent(&self) -> f64 {
        -(self.n as f64) * self.eps * self.eps / (2.0 * self.s2 + 2.0 * self.gamma * self.eps / 3.0)
    }
}

#[inline]
fn clamp01(x: f64) -> f64 {
    if x.is_nan() {
        1.0
    } else {
        x.clamp(0.0, 1.0)
    }
}

/// `2 exp(−nε²/2γ²)`.
pub fn chernoff_tail(p: &TailParams) -> f64 {
    clamp01(2.0 * (-(p.n as f64) * p.eps * p.eps / (2.0 * p.gamma * p.gamma)).exp())
}

/// `2 exp(−nε² / (2s² + 2γε/3))`.
pub fn bernstein_tail(p: &TailParams) -> f64 {
    clamp01(2.0 * p.bernstein_exponent().exp())
}

/// Whether `ε ≤ 3s²/γ`, the regime where the variance-only form
/// [`bernstein_simplified_tail`] dominates [`bernstein_tail`].
pub fn bernstein_simplified_applies(p: &TailParams) -> bool {
    p.eps <= 3.0 * p.s2 / p.gamma
}

/// `2 exp(−nε²/4s²)`.
pub fn bernstein_simplified_tail(p: &TailParams) -> f64 {
    if p.s2 == 0.0 {
        return 0.0;
    }
    clamp01(2.0 * (-(p.n as f64) * p.eps * p.eps / (4.0 * p.s2)).exp())
}

/// Matrix Chernoff: `2d exp(−nε²/4γ²)`. The bound is trivially true for
/// `ε ≥ γ`, but the formula is still returned (clamped).
pub fn nc_chernoff_tail(p: &TailParams) -> f64 {
    clamp01(2.0 * p.dims as f64 * (-(p.n as f64) * p.eps * p.eps / (4.0 * p.gamma * p.gamma)).exp())
}

/// Matrix Bernstein. Symmetric: `2d exp(−nε²/(2s² + 2γε/3))`;
/// rectangular via dilation, with `dims = d₁ + d₂`: `(d₁+d₂) exp(…)`.
pub fn nc_bernstein_tail(p: &TailParams, rectangular: bool) -> f64 {
    let prefactor = if rectangular { p.dims as f64 } else { 2.0 * p.dims as f64 };
    clamp01(prefactor * p.bernstein_exponent().exp())
}

/// Probability that `‖S² − SUᵀQᵀQUS‖ > ε‖S‖²` for `r` rows sampled with
/// oversampling `beta` from the subspace distribution of `US`.
///
/// Full form: `2d exp(−rε² / (2(ρ/β − κ⁻⁴ + ε(ρ/β − κ⁻²)/3)))`;
/// simplified: `2d exp(−rβε²/4ρ)`, an upper bound for `ε ≤ 3`.
pub fn symmetric_sampling_tail(
    r: u64,
    eps: f64,
    rho: f64,
    beta: f64,
    kappa: f64,
    d: u64,
    simplified: bool,
) -> Result<f64> {
    if kappa.is_nan() || kappa < 1.0 {
        return Err(Error::BadKappa(kappa));
    }
    if !(rho >= 1.0 && beta > 0.0 && beta <= 1.0 && eps > 0.0 && d >= 1) {
        return Err(Error::BadParams(format!("rho = {rho}, beta = {beta}, eps = {eps}, d = {d}")));
    }
    let rf = r as f64;
    let exponent = if simplified {
        -rf * beta * eps * eps / (4.0 * rho)
    } else {
        let q = rho / beta;
        let denom = 2.0 * (q - kappa.powi(-4) + eps * (q - kappa.powi(-2)) / 3.0);
        if denom <= 0.0 {
            f64::NEG_INFINITY
        } else {
            -rf * eps * eps / denom
        }
    };
    Ok(clamp01(2.0 * d as f64 * exponent.exp()))
}

/// Identity-spectrum case for orthonormal `U` with leverage sampling:
/// `P[‖I − UᵀQᵀQU‖ > ε] ≤ 2d exp(−βrε² / 4(d − β))`.
pub fn leverage_sampling_tail(r: u64, eps: f64, beta: f64, d: u64) -> Result<f64> {
    if !(beta > 0.0 && beta <= 1.0 && eps > 0.0 && d >= 1) {
        return Err(Error::BadParams(format!("beta = {beta}, eps = {eps}, d = {d}")));
    }
    let slack = d as f64 - beta;
    if slack <= 0.0 {
        return Ok(0.0);
    }
    Ok(clamp01(2.0 * d as f64 * (-beta * r as f64 * eps * eps / (4.0 * slack)).exp()))
}

/// Asymmetric product bound with combined stable rank `ρ₁ + ρ₂` and
/// `d₁ + d₂`: `2(d₁+d₂) exp(−rβε² / 8(ρ₁+ρ₂))`.
pub fn asymmetric_sampling_tail(r: u64, eps: f64, rho_sum: f64, beta: f64, dims_sum: u64) -> Result<f64> {
    if !(rho_sum > 0.0 && beta > 0.0 && beta <= 1.0 && eps > 0.0 && dims_sum >= 1) {
        return Err(Error::BadParams(format!("rho = {rho_sum}, beta = {beta}, eps = {eps}, dims = {dims_sum}")));
    }
    Ok(clamp01(2.0 * dims_sum as f64 * (-(r as f64) * beta * eps * eps / (8.0 * rho_sum)).exp()))
}

/// Frobenius-route product bound `exp(−rβ²ε² / 16ρ₁ρ₂)`; its sample count
/// is quadratic in the stable ranks.
pub fn frobenius_product_tail(r: u64, eps: f64, rho1: f64, rho2: f64, beta: f64) -> f64 {
    clamp01((-(r as f64) * beta * beta * eps * eps / (16.0 * rho1 * rho2)).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BudgetKind {
    Symmetric,
    Asymmetric,
    Leverage,
    Regression,
}

/// Dimension data a budget formula needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BudgetShape {
    /// Gram product `AᵀA`: stable rank and column count of `A`.
    Symmetric { rho: f64, d: u64 },
    /// Product `AᵀB`.
    Asymmetric { rho1: f64, rho2: f64, d1: u64, d2: u64 },
    /// Orthonormal subspace of dimension `d`.
    Leverage { d: u64 },
    /// Least squares with `d` unknowns.
    Regression { d: u64 },
}

/// A sample count together with the parameters that produced it.
///
/// `rho` and `dims` hold the combined values the formula actually uses:
/// `ρ₁+ρ₂` and `d₁+d₂` for products, `d` for leverage, `d+1` for regression.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub r: u64,
    pub kind: BudgetKind,
    pub eps: f64,
    pub delta: f64,
    pub beta: f64,
    pub rho: f64,
    pub dims: u64,
}

impl SampleBudget {
    /// Unrounded right-hand side of the `r ≥ …` condition.
    pub fn formula_value(&self) -> f64 {
        budget_formula(self.kind, self.rho, self.dims, self.eps, self.delta, self.beta)
    }

    /// Tail bound matching this budget's kind, evaluated at `r`.
    pub fn tail_at(&self, r: u64) -> f64 {
        match self.kind {
            BudgetKind::Symmetric => {
                symmetric_sampling_tail(r, self.eps, self.rho.max(1.0), self.beta, 1.0, self.dims, true)
                    .expect("budget parameters already validated")
            }
            BudgetKind::Asymmetric | BudgetKind::Regression => {
                asymmetric_sampling_tail(r, self.eps, self.rho, self.beta, self.dims).expect("validated")
            }
            BudgetKind::Leverage => leverage_sampling_tail(r, self.eps, self.beta, self.dims).expect("validated"),
        }
    }
}

fn budget_formula(kind: BudgetKind, rho: f64, dims: u64, eps: f64, delta: f64, beta: f64) -> f64 {
    let dims = dims as f64;
    let log = (2.0 * dims / delta).ln();
    let scale = beta * eps * eps;
    match kind {
        BudgetKind::Symmetric => 4.0 * rho / scale * log,
        BudgetKind::Asymmetric => 8.0 * rho / scale * log,
        BudgetKind::Leverage => 4.0 * (dims - beta) / scale * log,
        BudgetKind::Regression => 8.0 * dims / scale * log,
    }
}

/// Least `r ≥ 1` satisfying the matching sample-count condition:
///
/// * symmetric: `r ≥ (4ρ/βε²) ln(2d/δ)`
/// * asymmetric: `r ≥ (8(ρ₁+ρ₂)/βε²) ln(2(d₁+d₂)/δ)`
/// * leverage: `r ≥ (4(d−β)/βε²) ln(2d/δ)`
/// * regression: `r ≥ (8(d+1)/βε²) ln(2(d+1)/δ)`
pub fn budget(shape: BudgetShape, eps: f64, delta: f64, beta: f64) -> Result<SampleBudget> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) || !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::BadParams(format!("eps = {eps}, delta = {delta}, beta = {beta}")));
    }
    let (kind, rho, dims) = match shape {
        BudgetShape::Symmetric { rho, d } => (BudgetKind::Symmetric, rho, d),
        BudgetShape::Asymmetric { rho1, rho2, d1, d2 } => (BudgetKind::Asymmetric, rho1 + rho2, d1 + d2),
        BudgetShape::Leverage { d } => (BudgetKind::Leverage, d as f64, d),
        BudgetShape::Regression { d } => (BudgetKind::Regression, (d + 1) as f64, d + 1),
    };
    if !(rho > 0.0 && rho.is_finite()) || dims < 1 {
        return Err(Error::BadParams(format!("rho = {rho}, dims = {dims}")));
    }
    let raw = budget_formula(kind, rho, dims, eps, delta, beta);
    let r = (raw.ceil() as u64).max(1);
    Ok(SampleBudget { r, kind, eps, delta, beta, rho, dims })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(n: u64, eps: f64, gamma: f64, s2: f64, dims: u64) -> TailParams {
        TailParams::new(n, eps, gamma, s2, dims).unwrap()
    }

    #[test]
    fn scalar_examples() {
        assert!((chernoff_tail(&tp(2, 1.0, 1.0, 0.0, 1)) - 2.0 * (-1f64).exp()).abs() < 1e-15);
        assert!((chernoff_tail(&tp(2, 1.0, 1.0, 0.0, 1)) - 0.735759).abs() < 1e-6);
        assert_eq!(chernoff_tail(&tp(1, 1e-9, 1.0, 0.0, 1)), 1.0);
        let (v1, v2) = (chernoff_tail(&tp(30, 1.0, 1.0, 0.0, 1)), chernoff_tail(&tp(60, 1.0, 1.0, 0.0, 1)));
        assert!((v2 - v1 * v1 / 2.0).abs() < 1e-15 * v2.max(1e-300));

        let b = bernstein_tail(&tp(4, 1.0, 1.0, 1.0, 1));
        assert!((b - 0.446260).abs() < 1e-6);
        // variance-free limit
        let p = tp(3, 0.5, 2.0, 0.0, 1);
        assert!((bernstein_tail(&p) - 2.0 * (-3.0f64 * 3.0 * 0.5 / (2.0 * 2.0)).exp()).abs() < 1e-15);
        // boundary eps = 3 s²/γ: simplified dominates
        let p = tp(5, 1.5, 2.0, 1.0, 1);
        assert!(bernstein_simplified_applies(&p));
        assert!(bernstein_tail(&p) <= bernstein_simplified_tail(&p));
    }

    #[test]
    fn matrix_examples() {
        let p = tp(16, 1.0, 1.0, 0.0, 2);
        assert!((nc_chernoff_tail(&p) - 0.073263).abs() < 1e-6);
        let p1 = tp(100, 0.3, 1.0, 0.0, 1);
        assert!((nc_chernoff_tail(&p1) - 2.0 * (-100.0 * 0.09 / 4.0f64).exp()).abs() < 1e-14);
        assert_eq!(nc_chernoff_tail(&tp(1, 2.0, 1.0, 0.0, 5)), 1.0);

        let p = tp(4, 1.0, 1.0, 1.0, 2);
        assert!((nc_bernstein_tail(&p, false) - 0.892521).abs() < 1e-6);
        let rect = nc_bernstein_tail(&tp(40, 1.0, 1.0, 1.0, 2), true);
        let sym1 = nc_bernstein_tail(&tp(40, 1.0, 1.0, 1.0, 1), false);
        assert_eq!(rect, sym1);
        let p = tp(50, 0.5, 1.0, 1.0, 3);
        assert!(nc_bernstein_tail(&p, false) <= 2.0 * 3.0 * (-50.0 * 0.25 / 4.0f64).exp());
    }

    #[test]
    fn sampling_tail_examples() {
        let v = symmetric_sampling_tail(141, 0.5, 2.0, 1.0, 1.0, 4, true).unwrap();
        assert!((v - 8.0 * (-4.40625f64).exp()).abs() < 1e-15);
        assert!(v < 0.1);
        assert!(matches!(symmetric_sampling_tail(1, 0.5, 2.0, 1.0, 0.5, 4, false), Err(Error::BadKappa(_))));
        for eps in [0.1, 0.5, 1.0, 2.9] {
            let full = symmetric_sampling_tail(40, eps, 3.0, 0.8, 2.0, 4, false).unwrap();
            let simple = symmetric_sampling_tail(40, eps, 3.0, 0.8, 2.0, 4, true).unwrap();
            assert!(full <= simple);
        }

        assert!((frobenius_product_tail(16, 1.0, 1.0, 1.0, 1.0) - 0.367879).abs() < 1e-6);
        // r = 16ρ₁ρ₂/(β²ε²)·ln(1/δ) recovers δ; choose δ = e⁻³ so r is whole.
        let (rho1, rho2, beta, eps) = (2.0, 3.0, 0.5, 0.5);
        let delta = (-3.0f64).exp();
        let r = 16.0 * rho1 * rho2 / (beta * beta * eps * eps) * (1.0 / delta).ln();
        assert!((r - r.round()).abs() < 1e-9);
        let v = frobenius_product_tail(r.round() as u64, eps, rho1, rho2, beta);
        assert!((v - delta).abs() < 1e-14);
    }

    #[test]
    fn budget_examples() {
        let b = budget(BudgetShape::Symmetric { rho: 2.0, d: 4 }, 0.5, 0.1, 1.0).unwrap();
        assert_eq!(b.r, 141);
        let b = budget(BudgetShape::Asymmetric { rho1: 1.0, rho2: 1.0, d1: 2, d2: 2 }, 0.5, 0.1, 1.0).unwrap();
        assert_eq!(b.r, 281);
        let b = budget(BudgetShape::Regression { d: 3 }, 0.5, 0.1, 1.0 / 3.0).unwrap();
        assert_eq!(b.r, 1683);
        let b = budget(BudgetShape::Leverage { d: 8 }, 0.5, 0.1, 1.0).unwrap();
        assert_eq!(b.r, 569);
        assert!((b.r as f64 - 1.0) < b.formula_value());

        let b = budget(BudgetShape::Leverage { d: 1 }, 0.5, 0.1, 1.0).unwrap();
        assert_eq!(b.r, 1);

        for (e, dl, bt) in [(0.0, 0.1, 1.0), (1.0, 0.1, 1.0), (0.5, 0.0, 1.0), (0.5, 1.0, 1.0), (0.5, 0.1, 0.0), (0.5, 0.1, 1.1)] {
            assert!(matches!(budget(BudgetShape::Leverage { d: 3 }, e, dl, bt), Err(Error::BadParams(_))));
        }
    }

    #[test]
    fn quadratic_versus_linear_rank_dependence() {
        // Solve each bound for r at the same (ε, δ, β) and compare growth in ρ.
        let (eps, delta) = (0.5, 0.1);
        let frob_r = |rho: f64| 16.0 * rho * rho / (eps * eps) * (1.0f64 / delta).ln();
        let asym_r = |rho: f64| budget(BudgetShape::Asymmetric { rho1: rho, rho2: rho, d1: 8, d2: 8 }, eps, delta, 1.0).unwrap().formula_value();
        assert!((frob_r(8.0) / frob_r(4.0) - 4.0).abs() < 1e-12);
        assert!((asym_r(8.0) / asym_r(4.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn params_validation() {
        assert!(TailParams::new(0, 1.0, 1.0, 1.0, 1).is_err());
        assert!(TailParams::new(1, 0.0, 1.0, 1.0, 1).is_err());
        assert!(TailParams::new(1, 1.0, 0.0, 1.0, 1).is_err());
        assert!(TailParams::new(1, 1.0, 1.0, -1.0, 1).is_err());
        assert!(TailParams::new(1, 1.0, 1.0, 1.0, 0).is_err());
    }
}
