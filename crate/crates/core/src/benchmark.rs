//! Shift-agnostic optimum, relative gap and the traditional supply standards.
//!
//! The shift-agnostic problem drops every shift constraint and keeps only
//! the working-time budget: maximize `Σ f_t(y_t)` subject to
//! `Σ y_t = s·N·δ`, `y ≥ 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{self, DomainError, RewardParams, Scenario, ShiftPlan};

/// Relative tolerance on the budget reached by [`water_fill`].
pub const BUDGET_TOL: f64 = 1e-10;
/// Relative tolerance used to verify the standards against their definitions.
pub const STANDARD_TOL: f64 = 1e-9;
const MAX_BISECTIONS: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchmarkError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("demand is zero at every step")]
    ZeroDemand,
    #[error("relative gap undefined: agnostic optimum reward is {0}")]
    UndefinedGap(f64),
    #[error("budget must be finite and non-negative, got {0}")]
    BadBudget(f64),
    #[error("service fraction must lie in (0, 1), got {0}")]
    BadServiceFraction(f64),
    #[error("cost per staff must be positive, got {0}")]
    BadCost(f64),
    #[error("{standard} supply at step {t} misses its defining equation by {residual:e}")]
    Verification { standard: &'static str, t: usize, residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgnosticOptimum {
    pub y_star: Vec<f64>,
    pub r_star: f64,
    /// Common marginal reward at the optimum.
    pub lambda: f64,
}

/// Worst violations of the optimality conditions
/// `f_t'(y_t) + μ_t = λ`, `μ_t ≥ 0`, `μ_t·y_t = 0`, `Σ y_t = budget`, `y ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub complementarity: f64,
    /// `|Σ y_t − budget| / max(budget, 1)`.
    pub budget: f64,
    pub nonnegativity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.complementarity).max(self.budget).max(self.nonnegativity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub delta: f64,
    pub r_star: f64,
    pub plan_reward: f64,
}

/// A concave reward with strictly decreasing derivative on `y ≥ 0`.
pub trait ConcaveReward {
    fn value(&self, y: f64) -> f64;
    fn derivative(&self, y: f64) -> f64;
    /// The `y ≥ 0` at which the derivative equals `lambda`, or 0 if the
    /// derivative never reaches it.
    fn supply_at(&self, lambda: f64) -> f64;
    /// [`supply_at`](Self::supply_at) at `λ = e^{log_lambda}`, for multipliers
    /// too small to represent.
    fn supply_at_log(&self, log_lambda: f64) -> f64 {
        self.supply_at(log_lambda.exp())
    }
}

impl ConcaveReward for RewardParams {
    fn value(&self, y: f64) -> f64 {
        RewardParams::value(self, y)
    }

    fn derivative(&self, y: f64) -> f64 {
        RewardParams::derivative(self, y)
    }

    fn supply_at(&self, lambda: f64) -> f64 {
        if self.d == 0.0 {
            0.0
        } else {
            (self.d / self.a * (self.a / lambda).ln()).max(0.0)
        }
    }

    fn supply_at_log(&self, log_lambda: f64) -> f64 {
        if self.d == 0.0 {
            0.0
        } else {
            (self.d / self.a * (self.a.ln() - log_lambda)).max(0.0)
        }
    }
}

fn rewards(sc: &Scenario) -> Result<Vec<RewardParams>, BenchmarkError> {
    let demand = sc.demand()?;
    if demand.iter().all(|&d| d == 0.0) {
        return Err(BenchmarkError::ZeroDemand);
    }
    Ok(demand.into_iter().map(|d| sc.reward_params(d)).collect())
}

/// `y*_t = s·N·δ·d_t / Σ_τ d_τ`.
pub fn agnostic_optimum_closed_form(sc: &Scenario) -> Result<AgnosticOptimum, BenchmarkError> {
    let curves = rewards(sc)?;
    let budget = sc.working_time();
    let total: f64 = curves.iter().map(|p| p.d).sum();
    let y_star: Vec<f64> = curves.iter().map(|p| budget * p.d / total).collect();
    let r_star = curves.iter().zip(&y_star).map(|(p, &y)| p.value(y)).sum();
    let lambda = sc.a * (-sc.a * budget / total).exp();
    Ok(AgnosticOptimum { y_star, r_star, lambda })
}

/// Solves the shift-agnostic problem with budget `budget` by bisection on the
/// common marginal reward.
pub fn water_fill(sc: &Scenario, budget: f64) -> Result<AgnosticOptimum, BenchmarkError> {
    let curves = rewards(sc)?;
    water_fill_curves(&curves, budget, None)
}

/// [`water_fill`] for arbitrary concave rewards. `bracket` is an initial
/// guess `(lo, hi)` for the multiplier; it is widened as needed.
pub fn water_fill_curves<C: ConcaveReward>(
    curves: &[C],
    budget: f64,
    bracket: Option<(f64, f64)>,
) -> Result<AgnosticOptimum, BenchmarkError> {
    if !(budget.is_finite() && budget >= 0.0) {
        return Err(BenchmarkError::BadBudget(budget));
    }
    let slope_at_zero = curves.iter().map(|c| c.derivative(0.0)).fold(0.0, f64::max);
    if slope_at_zero <= 0.0 {
        return Err(BenchmarkError::ZeroDemand);
    }
    let fill = |l: f64| -> Vec<f64> { curves.iter().map(|c| c.supply_at_log(l)).collect() };
    let finish = |y_star: Vec<f64>, l: f64| {
        let r_star = curves.iter().zip(&y_star).map(|(c, &y)| c.value(y)).sum();
        Ok(AgnosticOptimum { y_star, r_star, lambda: l.exp() })
    };
    let top = slope_at_zero.ln();
    if budget == 0.0 {
        return finish(vec![0.0; curves.len()], top);
    }
    let total = |l: f64| -> f64 { curves.iter().map(|c| c.supply_at_log(l)).sum() };

    // Bisect on ln λ; heavily saturated demand puts λ below the smallest float.
    // Σ y is nonincreasing in λ: lower `lo` until it overfills, raise `hi` until it underfills.
    let (lo0, hi0) = bracket.unwrap_or((slope_at_zero * 0.5, slope_at_zero));
    let mut hi = if hi0 > 0.0 { hi0.ln().min(top) } else { top };
    let mut lo = if lo0 > 0.0 { lo0.ln().min(hi) } else { hi - 1.0 };
    let mut step = 1.0;
    while total(lo) < budget {
        lo -= step;
        step *= 2.0;
        if !lo.is_finite() {
            return Err(BenchmarkError::BadBudget(budget));
        }
    }
    let mut step = 1.0;
    while total(hi) > budget && hi < top {
        hi = (hi + step).min(top);
        step *= 2.0;
    }

    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let sum = total(mid);
        if (sum - budget).abs() <= BUDGET_TOL * budget || mid <= lo || mid >= hi {
            return finish(fill(mid), mid);
        }
        if sum > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    finish(fill(mid), mid)
}

/// Residuals of the optimality conditions for `y` with multiplier `lambda`.
pub fn kkt_residuals<C: ConcaveReward>(curves: &[C], y: &[f64], lambda: f64, budget: f64) -> KktResiduals {
    let mut res = KktResiduals { stationarity: 0.0, complementarity: 0.0, budget: 0.0, nonnegativity: 0.0 };
    for (c, &yt) in curves.iter().zip(y) {
        let g = c.derivative(yt.max(0.0));
        let mu = (lambda - g).max(0.0);
        res.stationarity = res.stationarity.max((g + mu - lambda).abs());
        res.complementarity = res.complementarity.max((mu * yt).abs());
        res.nonnegativity = res.nonnegativity.max(-yt);
    }
    let sum: f64 = y.iter().sum();
    res.budget = (sum - budget).abs() / budget.max(1.0);
    res
}

/// KKT residuals of `opt` for the scenario's rewards and working time.
pub fn verify_agnostic(sc: &Scenario, opt: &AgnosticOptimum) -> Result<KktResiduals, BenchmarkError> {
    let curves = rewards(sc)?;
    Ok(kkt_residuals(&curves, &opt.y_star, opt.lambda, sc.working_time()))
}

/// `(r* − reward)/r*`.
pub fn gap_from_reward(r_star: f64, plan_reward: f64) -> Result<GapReport, BenchmarkError> {
    if r_star.is_nan() || r_star <= 0.0 {
        return Err(BenchmarkError::UndefinedGap(r_star));
    }
    let mut delta = (r_star - plan_reward) / r_star;
    // A plan that reaches y* exactly may land a rounding error below zero.
    if delta < 0.0 && delta > -1e-12 {
        delta = 0.0;
    }
    Ok(GapReport { delta, r_star, plan_reward })
}

pub fn relative_gap(plan: &ShiftPlan, sc: &Scenario) -> Result<GapReport, BenchmarkError> {
    let opt = match agnostic_optimum_closed_form(sc) {
        Ok(o) => o,
        Err(BenchmarkError::ZeroDemand) => return Err(BenchmarkError::UndefinedGap(0.0)),
        Err(e) => return Err(e),
    };
    let reward = domain::total_reward(plan, sc)?;
    gap_from_reward(opt.r_star, reward)
}

/// Supply serving the fraction `c_frac` of demand: `f_t(y) = c_frac·d_t`.
pub fn service_standard_supply(sc: &Scenario, c_frac: f64) -> Result<Vec<f64>, BenchmarkError> {
    if !(c_frac > 0.0 && c_frac < 1.0) {
        return Err(BenchmarkError::BadServiceFraction(c_frac));
    }
    let demand = sc.demand()?;
    let scale = -(-c_frac).ln_1p() / sc.a;
    let mut out = Vec::with_capacity(demand.len());
    for (k, &d) in demand.iter().enumerate() {
        let y = d * scale;
        let target = c_frac * d;
        let residual = (sc.reward_params(d).value(y) - target).abs();
        if residual > STANDARD_TOL * target {
            return Err(BenchmarkError::Verification { standard: "service", t: k + 1, residual });
        }
        out.push(y);
    }
    Ok(out)
}

/// Supply where the marginal reward equals the cost `c_cost` (zero when `a ≤ c_cost`).
pub fn economic_standard_supply(sc: &Scenario, c_cost: f64) -> Result<Vec<f64>, BenchmarkError> {
    if !(c_cost.is_finite() && c_cost > 0.0) {
        return Err(BenchmarkError::BadCost(c_cost));
    }
    let demand = sc.demand()?;
    if sc.a <= c_cost {
        return Ok(vec![0.0; demand.len()]);
    }
    let scale = (sc.a / c_cost).ln() / sc.a;
    let mut out = Vec::with_capacity(demand.len());
    for (k, &d) in demand.iter().enumerate() {
        let y = d * scale;
        if d > 0.0 {
            let residual = (sc.reward_params(d).derivative(y) - c_cost).abs();
            if residual > STANDARD_TOL * c_cost {
                return Err(BenchmarkError::Verification { standard: "economic", t: k + 1, residual });
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DemandModel;

    fn explicit(d: Vec<f64>, n: u32, s: u32, delta: usize, a: f64) -> Scenario {
        let mut sc = Scenario::new(d.len(), n, s, delta, 0, 1.0, a);
        sc.demand_model = DemandModel::Explicit(d);
        sc
    }

    #[test]
    fn water_fill_survives_an_underflowing_multiplier() {
        let sc = explicit(vec![0.5, 0.0, 0.25], 40, 5, 3, 2.0);
        let closed = agnostic_optimum_closed_form(&sc).unwrap();
        assert_eq!(closed.lambda, 0.0);
        let filled = water_fill(&sc, sc.working_time()).unwrap();
        for (c, f) in closed.y_star.iter().zip(&filled.y_star) {
            assert!((c - f).abs() < 1e-6, "{c} vs {f}");
        }
        assert!((filled.r_star - 0.75).abs() < 1e-12);
    }

    #[test]
    fn uniform_demand_spreads_evenly() {
        let sc = explicit(vec![2.0; 6], 3, 2, 1, 1.5);
        let opt = agnostic_optimum_closed_form(&sc).unwrap();
        for y in &opt.y_star {
            assert!((y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn proportional_to_demand() {
        // s·N·δ = 4 with d = [1, 3].
        let sc = explicit(vec![1.0, 3.0], 2, 2, 1, 2.0);
        let opt = agnostic_optimum_closed_form(&sc).unwrap();
        assert!((opt.y_star[0] - 1.0).abs() < 1e-12 && (opt.y_star[1] - 3.0).abs() < 1e-12);
        let wf = water_fill(&sc, 4.0).unwrap();
        assert!((wf.y_star[0] - 1.0).abs() < 1e-9 && (wf.y_star[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn common_marginal_reward() {
        let sc = Scenario::new(168, 10, 5, 8, 8, 10.0, 2.0);
        let opt = agnostic_optimum_closed_form(&sc).unwrap();
        let demand = sc.demand().unwrap();
        for (y, d) in opt.y_star.iter().zip(&demand) {
            if *d > 0.0 {
                let slope = sc.a * (-sc.a * y / d).exp();
                assert!((slope - opt.lambda).abs() < 1e-12 * opt.lambda.max(1.0));
            }
        }
        assert!(verify_agnostic(&sc, &opt).unwrap().max() < 1e-8);
    }

    #[test]
    fn water_fill_edge_cases() {
        let sc = explicit(vec![1.0, 1.0], 1, 1, 1, 2.0);
        let zero = water_fill(&sc, 0.0).unwrap();
        assert_eq!(zero.y_star, vec![0.0, 0.0]);
        assert_eq!(zero.lambda, 2.0);
        let wf = water_fill(&sc, 2.0).unwrap();
        assert!((wf.y_star[0] - 1.0).abs() < 1e-9 && (wf.y_star[1] - 1.0).abs() < 1e-9);
        assert!((wf.lambda - 2.0 * (-2.0f64).exp()).abs() < 1e-9);
        assert!(water_fill(&sc, -1.0).is_err());
        let flat = explicit(vec![0.0; 3], 1, 1, 1, 2.0);
        assert_eq!(water_fill(&flat, 1.0), Err(BenchmarkError::ZeroDemand));
    }

    #[test]
    fn water_fill_matches_closed_form_on_week() {
        let sc = Scenario::new(168, 10, 5, 8, 8, 10.0, 2.0);
        let cf = agnostic_optimum_closed_form(&sc).unwrap();
        let wf = water_fill(&sc, sc.working_time()).unwrap();
        for (a, b) in cf.y_star.iter().zip(&wf.y_star) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(verify_agnostic(&sc, &wf).unwrap().max() < 1e-8);
    }

    #[test]
    fn gaps() {
        let sc = explicit(vec![1.0, 1.0], 1, 2, 1, 2.0);
        let g = relative_gap(&ShiftPlan::new(vec![1, 1]), &sc).unwrap();
        assert_eq!(g.delta, 0.0);
        let g = relative_gap(&ShiftPlan::zeros(2), &sc).unwrap();
        assert_eq!(g.delta, 1.0);
        let none = explicit(vec![1.0, 1.0], 0, 2, 1, 2.0);
        assert!(matches!(relative_gap(&ShiftPlan::zeros(2), &none), Err(BenchmarkError::UndefinedGap(_))));
    }

    #[test]
    fn service_examples() {
        let a = 2.0;
        let sc = explicit(vec![1.0], 1, 1, 1, a);
        let y = service_standard_supply(&sc, 1.0 - (-a).exp()).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-12);
        assert!(service_standard_supply(&sc, 1e-300).unwrap()[0] < 1e-290);
        let sc = explicit(vec![2.0], 1, 1, 1, 2.0);
        let y = service_standard_supply(&sc, 0.8).unwrap();
        assert!((y[0] - 5.0f64.ln()).abs() < 1e-12);
        assert!(service_standard_supply(&sc, 1.0).is_err());
        assert!(service_standard_supply(&sc, 0.0).is_err());
    }

    #[test]
    fn economic_examples() {
        let a = 2.0;
        let sc = explicit(vec![1.0, 0.0], 1, 1, 1, a);
        assert_eq!(economic_standard_supply(&sc, 2.0).unwrap(), vec![0.0, 0.0]);
        assert_eq!(economic_standard_supply(&sc, 3.0).unwrap(), vec![0.0, 0.0]);
        let y = economic_standard_supply(&sc, a * (-a).exp()).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-12 && y[1] == 0.0);
        assert!(economic_standard_supply(&sc, 0.0).is_err());

        // Golden-section search on f(y) − c·y as an independent check.
        let sc = explicit(vec![2.0], 1, 1, 1, 2.0);
        let y = economic_standard_supply(&sc, 1.0).unwrap()[0];
        let p = sc.reward_params(2.0);
        let g = |v: f64| p.value(v) - v;
        let (mut lo, mut hi) = (0.0f64, 10.0f64);
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let m1 = hi - phi * (hi - lo);
            let m2 = lo + phi * (hi - lo);
            if g(m1) < g(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        assert!((y - 0.5 * (lo + hi)).abs() < 1e-6);
        assert!((y - 2.0f64.ln()).abs() < 1e-12);
    }
}
