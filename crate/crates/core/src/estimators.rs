//! Dependence statistics for a feature group, their plug-in variances, and
//! the keep/stop decisions built from them.
//!
//! Three statistics are available:
//!
//! * `κ̂_α`, the conditional tail dependence coefficient, tested against a
//!   tolerance `κ_min` (and, in its original heuristic form, against a fixed
//!   constant `C`);
//! * `η̂_α` from the ratio `r̂_α(2)/r̂_α(1)` (Peng-type);
//! * `η̂_α` from the Hill estimator of the tail index of `min_{j∈α} V̂_j`.
//!
//! Partial derivatives of `r̂_α` and `κ̂_α` at `1_α` use central differences
//! with step `h = k^{-fd_exponent}` (default `k^{-1/4}`).
//!
//! Sign convention for the κ test: `q_δ` denotes the lower `δ`-quantile
//! (negative for `δ < 0.5`), and `α` is kept when
//! `κ̂_α ≥ κ_min + q_δ σ̂/√k`. The η tests keep `α` when
//! `η̂_α ≥ 1 − q_{1−δ} σ̂/√k`.

use alloc::vec::Vec;
use core::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::data::{RankedData, TailParams};
use crate::feature_set::FeatureSet;
use crate::normal::NormalQuantile;
use crate::tail::{self, count_all, level_for, mu_delta_count_identity, rho_count, Level};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestConfig {
    /// Significance level of the tests.
    pub delta: f64,
    pub kappa_min: f64,
    /// Threshold of the original heuristic `κ̂_α ≥ C`.
    pub clef_c: f64,
    /// Peng variant stops when `ρ̂_α` is below this.
    pub rho_guard: f64,
    pub fd_exponent: f64,
}

impl Default for TestConfig {
    fn default() -> Self {
        Self { delta: 0.001, kappa_min: 0.08, clef_c: 0.05, rho_guard: 0.05, fd_exponent: 0.25 }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.into()));
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return bad("delta must lie in (0, 0.5)");
        }
        if !(self.kappa_min > 0.0 && self.kappa_min < 1.0) {
            return bad("kappa_min must lie in (0, 1)");
        }
        if !(self.clef_c > 0.0 && self.clef_c < 1.0) {
            return bad("clef_C must lie in (0, 1)");
        }
        if self.rho_guard.is_nan() || self.rho_guard < 0.0 {
            return bad("rho_guard must be non-negative");
        }
        if !self.fd_exponent.is_finite() {
            return bad("fd_exponent must be finite");
        }
        Ok(())
    }

    /// Finite-difference step `k^{-fd_exponent}`; refuses steps of 1 or more
    /// since `1 − h` would leave the positive orthant.
    pub fn fd_step(&self, p: TailParams) -> Result<f64, Error> {
        let step = libm::pow(p.k() as f64, -self.fd_exponent);
        if step >= 1.0 || !step.is_finite() {
            return Err(Error::StepTooLarge { k: p.k(), step });
        }
        Ok(step)
    }
}

/// Why a criterion stopped without testing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Guard {
    #[default]
    None,
    ZeroRho,
    LowRho,
    DegeneratePengRatio,
    ZeroDenominator,
}

/// Decision record for one feature group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionVerdict {
    pub alpha: FeatureSet,
    pub statistic: Option<f64>,
    pub sigma_hat: Option<f64>,
    pub threshold: Option<f64>,
    pub keep: bool,
    pub guard: Guard,
    /// Set when the plug-in variance came out negative and was clamped to 0.
    #[serde(default)]
    pub variance_clamped: bool,
}

impl CriterionVerdict {
    fn stopped(alpha: FeatureSet, guard: Guard, statistic: Option<f64>) -> Self {
        Self { alpha, statistic, sigma_hat: None, threshold: None, keep: false, guard, variance_clamped: false }
    }
}

/// A plug-in variance estimate, clamped at zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Variance {
    pub value: f64,
    pub clamped: bool,
}

impl Variance {
    fn from_raw(raw: f64) -> Self {
        if raw < 0.0 {
            Self { value: 0.0, clamped: true }
        } else {
            Self { value: raw, clamped: false }
        }
    }

    pub fn sd(&self) -> f64 {
        libm::sqrt(self.value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `κ̂_α ≥ C`.
    Clef,
    /// Asymptotic test of `κ_α ≥ κ_min`.
    Asymptotic,
    Peng,
    Hill,
}

impl Criterion {
    pub const ALL: [Criterion; 4] = [Criterion::Clef, Criterion::Asymptotic, Criterion::Peng, Criterion::Hill];

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Clef => "clef",
            Criterion::Asymptotic => "asymptotic",
            Criterion::Peng => "peng",
            Criterion::Hill => "hill",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn evaluate(
        self,
        rd: &RankedData,
        alpha: &FeatureSet,
        p: TailParams,
        cfg: &TestConfig,
    ) -> Result<CriterionVerdict, Error> {
        match self {
            Criterion::Clef => Ok(clef_original_criterion(rd, alpha, p, cfg)),
            Criterion::Asymptotic => kappa_criterion(rd, alpha, p, cfg),
            Criterion::Peng => peng_criterion(rd, alpha, p, cfg),
            Criterion::Hill => hill_criterion(rd, alpha, p, cfg),
        }
    }
}

// r̂_α at the point whose coordinates are given by `x(member)`.
fn r_at(rd: &RankedData, alpha: &FeatureSet, p: TailParams, x: impl Fn(usize) -> f64) -> f64 {
    let levels: Vec<Level> =
        alpha.iter().map(|column| Level { column, m: level_for(p.k(), x(column), rd.n()) }).collect();
    count_all(rd, &levels) as f64 / p.k() as f64
}

fn kappa_at_fn(rd: &RankedData, alpha: &FeatureSet, p: TailParams, x: impl Fn(usize) -> f64) -> f64 {
    let point: Vec<f64> = alpha.iter().map(x).collect();
    tail::kappa_hat_at(rd, alpha, &point, p)
}

fn pair_rho(rd: &RankedData, i: usize, j: usize, p: TailParams) -> f64 {
    if i == j {
        1.0
    } else {
        let pair = FeatureSet::singleton(i).with(j);
        rho_count(rd, &pair, p.k()) as f64 / p.k() as f64
    }
}

/// `κ̂_α = ρ̂_α / (Σ_j ρ̂_{α∖j} − (|α|−1) ρ̂_α)`, 0 when the denominator is 0.
pub fn kappa_hat(rd: &RankedData, alpha: &FeatureSet, p: TailParams) -> f64 {
    let den = mu_delta_count_identity(rd, alpha, p.k());
    if den == 0 {
        0.0
    } else {
        rho_count(rd, alpha, p.k()) as f64 / den as f64
    }
}

/// Central differences of `κ̂_α(x)` at `1_α`, one per member of `alpha`.
pub fn kappa_derivatives(
    rd: &RankedData,
    alpha: &FeatureSet,
    p: TailParams,
    cfg: &TestConfig,
) -> Result<Vec<f64>, Error> {
    let h = cfg.fd_step(p)?;
    Ok(alpha
        .iter()
        .map(|j| {
            let up = kappa_at_fn(rd, alpha, p, |m| if m == j { 1.0 + h } else { 1.0 });
            let down = kappa_at_fn(rd, alpha, p, |m| if m == j { 1.0 - h } else { 1.0 });
            (up - down) / (2.0 * h)
        })
        .collect())
}

/// Plug-in asymptotic variance of `κ̂_α`; `None` when `μ̂(Δ_α) = 0`.
pub fn kappa_sigma_hat(
    rd: &RankedData,
    alpha: &FeatureSet,
    p: TailParams,
    cfg: &TestConfig,
) -> Result<Option<Variance>, Error> {
    let k = p.k() as f64;
    let mu_delta = mu_delta_count_identity(rd, alpha, p.k()) as f64 / k;
    if mu_delta == 0.0 {
        return Ok(None);
    }
    let kappa = kappa_hat(rd, alpha, p);
    let dots = kappa_derivatives(rd, alpha, p, cfg)?;
    let members = alpha.indices();
    let inv = 1.0 / mu_delta;

    let first = (1.0 - kappa) * kappa * (inv - dots.iter().sum::<f64>());
    let mut second = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for (b, &j) in members.iter().enumerate() {
            second += dots[a] * dots[b] * pair_rho(rd, i, j, p);
        }
    }
    let third: f64 = members
        .iter()
        .zip(&dots)
        .map(|(&j, &dot)| {
            let face = alpha.without(j).expect("|alpha| >= 2");
            dot * (1.0 - inv * rho_count(rd, &face, p.k()) as f64 / k)
        })
        .sum::<f64>()
        * kappa;
    Ok(Some(Variance::from_raw(first + second + third)))
}

/// Asymptotic test of `κ_α ≥ κ_min` at level `δ`.
pub fn kappa_criterion(
    rd: &RankedData,
    alpha: &FeatureSet,
    p: TailParams,
    cfg: &TestConfig,
) -> Result<CriterionVerdict, Error> {
    let kappa = kappa_hat(rd, alpha, p);
    let Some(var) = kappa_sigma_hat(rd, alpha, p, cfg)? else {
        return Ok(CriterionVerdict::stopped(*alpha, Guard::ZeroDenominator, Some(kappa)));
    };
    let q = NormalQuantile::of(cfg.delta).value();
    let sigma = var.sd();
    let threshold = cfg.kappa_min + q * sigma / libm::sqrt(p.k() as f64);
    Ok(CriterionVerdict {
        alpha: *alpha,
        statistic: Some(kappa),
        sigma_hat: Some(sigma),
        threshold: Some(threshold),
        keep: kappa >= threshold,
        guard: Guard::None,
        variance_clamped: var.clamped,
    })
}

/// The original heuristic: keep when `κ̂_α ≥ C`.
pub fn clef_original_criterion(
    rd: &RankedData,
    alpha: &FeatureSet,
    p: TailParams,
    cfg: &TestConfig,
) -> CriterionVerdict {
    if mu_delta_count_identity(rd, alpha, p.k()) == 0 {
        return CriterionVerdict::stopped(*alpha, Guard::ZeroDenominator, Some(0.0));
    }
    let kappa = kappa_hat(rd, alpha, p);
    CriterionVerdict {
        alpha: *alpha,
        statistic: Some(kappa),
        sigma_hat: None,
        threshold: Some(cfg.clef_c),
        keep: kappa >= cfg.clef_c,
        guard: Guard::None,
        variance_clamped: false,
    }
}

/// `η̂_α = log 2 / log(r̂_α(2_α) / r̂_α(1_α))`.
///
/// Undefined when `r̂_α(1_α) = 0` ([`Guard::ZeroRho`]) or when the ratio is 1
/// ([`Guard::DegeneratePengRatio`]).
pub fn peng_eta_hat(rd: &RankedData, alpha: &FeatureSet, p: TailParams) -> Result<f64, Guard> {
    let one = rho_count(rd, alpha, p.k());
    if one == 0 {
        return Err(Guard::ZeroRho);
    }
    let two = count_all(rd, &tail::uniform_levels(rd, alpha, 2 * p.k()));
    if two <= one {
        return Err(Guard::DegeneratePengRatio);
    }
    Ok(LN_2 / libm::log(two as f64 / one as f64))
}

/// Central differences of `r̂_α(x)` at `1_α`, one per member of `alpha`.
pub fn rho_derivatives(
    rd: &RankedData,
    alpha: &FeatureSet,
    p: TailParams,
    cfg: &TestConfig,
) -> Result<Vec<f64>, Error> {
    let h = cfg.fd_step(p)?;
    Ok(alpha
        .iter()
        .map(|j| {
            let up = r_at(rd, alpha, p, |m| if m == j { 1.0 + h } else { 1.0 });
            let down = r_at(rd, alpha, p, |m| if m == j { 1.0 - h } else { 1.0 });
            (up - down) / (2.0 * h)
        })
        .collect())
}

/// Plug-in variance of the Peng-type estimator; `None` when `ρ̂_α = 0`.
pub fn peng_sigma_hat(
    rd: &RankedData,
    alpha: &FeatureSet,
    p: TailParams,
    cfg: &TestConfig,
) -> Result<Option<Variance>, Error> {
    let rho = tail::rho_hat(rd, alpha, p);
    if rho == 0.0 {
        return Ok(None);
    }
    let dots = rho_derivatives(rd, alpha, p, cfg)?;
    let members = alpha.indices();

    let mut bracket = rho;
    for (a, &j) in members.iter().enumerate() {
        let r_two_at_j = r_at(rd, alpha, p, |m| if m == j { 2.0 } else { 1.0 });
        bracket += dots[a] * (-4.0 * rho + 2.0 * r_two_at_j);
    }
    for (a, &j) in members.iter().enumerate() {
        for (b, &jj) in members.iter().enumerate() {
            let cross = if j == jj {
                1.0
            } else {
                let pair = FeatureSet::singleton(j).with(jj);
                3.0 * pair_rho(rd, j, jj, p) - 2.0 * r_at(rd, &pair, p, |m| if m == j { 2.0 } else { 1.0 })
            };
            bracket += dots[a] * dots[b] * cross;
        }
    }
    let scale = rho * LN_2;
    Ok(Some(Variance::from_raw(bracket / (2.0 * scale * scale))))
}

/// Peng-type test of `η_α = 1`, with the `ρ̂_α < rho_guard` and degenerate
/// ratio stopping rules.
pub fn peng_criterion(
    rd: &RankedData,
    alpha: &FeatureSet,
    p: TailParams,
    cfg: &TestConfig,
) -> Result<CriterionVerdict, Error> {
    let rho = tail::rho_hat(rd, alpha, p);
    if rho == 0.0 {
        return Ok(CriterionVerdict::stopped(*alpha, Guard::ZeroRho, None));
    }
    if rho < cfg.rho_guard {
        return Ok(CriterionVerdict::stopped(*alpha, Guard::LowRho, None));
    }
    let eta = match peng_eta_hat(rd, alpha, p) {
        Ok(eta) => eta,
        Err(guard) => return Ok(CriterionVerdict::stopped(*alpha, guard, None)),
    };
    let var = peng_sigma_hat(rd, alpha, p, cfg)?.expect("rho > 0");
    Ok(eta_verdict(alpha, eta, var, p, cfg))
}

fn eta_verdict(alpha: &FeatureSet, eta: f64, var: Variance, p: TailParams, cfg: &TestConfig) -> CriterionVerdict {
    let q = NormalQuantile::of(1.0 - cfg.delta).value();
    let sigma = var.sd();
    let threshold = 1.0 - q * sigma / libm::sqrt(p.k() as f64);
    CriterionVerdict {
        alpha: *alpha,
        statistic: Some(eta),
        sigma_hat: Some(sigma),
        threshold: Some(threshold),
        keep: eta >= threshold,
        guard: Guard::None,
        variance_clamped: var.clamped,
    }
}

/// Hill estimator `(1/k) Σ_{i=1}^k log(T_{(n−i+1)} / T_{(n−k)})` on an
/// arbitrary positive sample. Panics if the sample has `k` or fewer values.
pub fn hill_eta_from_sample(sample: &[f64], k: usize) -> f64 {
    assert!(k >= 1 && sample.len() > k, "need more than k values");
    let mut top: Vec<f64> = sample.to_vec();
    let pivot = top.len() - k - 1;
    top.select_nth_unstable_by(pivot, |a, b| a.total_cmp(b));
    let base = top[pivot];
    top[pivot + 1..].iter().map(|t| libm::log(t / base)).sum::<f64>() / k as f64
}

/// Hill estimator of `η_α` on `T̂_{i,α} = min_{j∈α} V̂_{i,j}`.
pub fn hill_eta_hat(rd: &RankedData, alpha: &FeatureSet, p: TailParams) -> f64 {
    let k = p.k();
    // T̂ = n / max depth, so the k+1 largest T̂ are the k+1 smallest depths.
    let depths = tail::smallest_max_depths(rd, alpha, k + 1);
    let base = depths[k] as f64;
    depths[..k].iter().map(|&d| libm::log(base / d as f64)).sum::<f64>() / k as f64
}

/// Plug-in asymptotic variance of the Hill estimator under `ρ_α > 0`;
/// `None` (infinite) when `ρ̂_α = 0`.
pub fn hill_sigma_hat(
    rd: &RankedData,
    alpha: &FeatureSet,
    p: TailParams,
    cfg: &TestConfig,
) -> Result<Option<Variance>, Error> {
    let rho = tail::rho_hat(rd, alpha, p);
    if rho == 0.0 {
        return Ok(None);
    }
    let dots = rho_derivatives(rd, alpha, p, cfg)?;
    let members = alpha.indices();
    let mut quad = 0.0;
    for (a, &i) in members.iter().enumerate() {
        for (b, &j) in members.iter().enumerate() {
            quad += dots[a] * dots[b] * pair_rho(rd, i, j, p);
        }
    }
    Ok(Some(Variance::from_raw(1.0 - 2.0 * rho + quad / rho)))
}

/// Hill-type test of `η_α = 1`; stops when no row is extreme in every
/// coordinate of `alpha`.
pub fn hill_criterion(
    rd: &RankedData,
    alpha: &FeatureSet,
    p: TailParams,
    cfg: &TestConfig,
) -> Result<CriterionVerdict, Error> {
    let Some(var) = hill_sigma_hat(rd, alpha, p, cfg)? else {
        return Ok(CriterionVerdict::stopped(*alpha, Guard::ZeroRho, None));
    };
    let eta = hill_eta_hat(rd, alpha, p);
    Ok(eta_verdict(alpha, eta, var, p, cfg))
}
