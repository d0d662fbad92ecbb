//! Scenario parameters, demand, reward and the plan-to-supply algebra.
//!
//! Time steps are 1-based in the public API (`demand_at(sc, 1)` is the first
//! step); vectors are indexed from 0, so `x[t - 1]` holds the shifts started
//! at step `t`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("invalid scenario: {field} {reason}")]
    InvalidScenario { field: &'static str, reason: String },
    #[error("time step {t} outside 1..={horizon}")]
    TimeOutOfRange { t: usize, horizon: usize },
    #[error("supply must be non-negative, got {0}")]
    NegativeSupply(f64),
    #[error("invalid reward parameters: d={d}, a={a}")]
    InvalidReward { d: f64, a: f64 },
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DemandModel {
    /// `(d_max/2)(1 − cos(πt/12))·sin(πt/T)`: daily peaks under a weekly envelope.
    #[default]
    EnvelopeSinusoid,
    /// `d_max(1 + sin(πt/12))`.
    OffsetSinusoid,
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    /// No shifts start before step 1.
    #[default]
    ZeroPadded,
    /// Indices wrap modulo `T`, for plans that repeat every horizon.
    Circular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// Number of time steps in the horizon.
    pub t: usize,
    /// Number of drivers.
    pub n: u32,
    /// Shifts per driver over the horizon.
    pub s: u32,
    /// Shift length in steps.
    pub delta: usize,
    /// Minimum break between two shifts of one driver, in steps.
    pub beta: usize,
    pub d_max: f64,
    pub a: f64,
    /// Vehicle cap on simultaneously active shifts; `None` means uncapped.
    #[serde(default)]
    pub c_veh: Option<u32>,
    #[serde(default)]
    pub demand_model: DemandModel,
    #[serde(default)]
    pub boundary: Boundary,
}

impl Scenario {
    /// Scenario with envelope demand, zero-padded boundary and no vehicle cap.
    pub fn new(t: usize, n: u32, s: u32, delta: usize, beta: usize, d_max: f64, a: f64) -> Self {
        Scenario {
            t,
            n,
            s,
            delta,
            beta,
            d_max,
            a,
            c_veh: None,
            demand_model: DemandModel::EnvelopeSinusoid,
            boundary: Boundary::ZeroPadded,
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let bad = |field, reason: &str| Err(DomainError::InvalidScenario { field, reason: reason.to_string() });
        if self.t < 1 {
            return bad("t", "must be at least 1");
        }
        if self.s < 1 {
            return bad("s", "must be at least 1");
        }
        if self.delta < 1 || self.delta > self.t {
            return bad("delta", "must lie in 1..=t");
        }
        if !(self.d_max.is_finite() && self.d_max >= 0.0) {
            return bad("d_max", "must be finite and non-negative");
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return bad("a", "must be finite and positive");
        }
        if let DemandModel::Explicit(d) = &self.demand_model {
            if d.len() != self.t {
                return Err(DomainError::InvalidScenario {
                    field: "demand_model",
                    reason: format!("explicit demand has {} entries, expected {}", d.len(), self.t),
                });
            }
            if d.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return bad("demand_model", "explicit demand entries must be finite and non-negative");
            }
        }
        Ok(())
    }

    /// `s·N`, the number of shifts a plan must contain.
    pub fn total_shifts(&self) -> u64 {
        u64::from(self.s) * u64::from(self.n)
    }

    /// `s·N·δ`, the total working time in steps.
    pub fn working_time(&self) -> f64 {
        self.total_shifts() as f64 * self.delta as f64
    }

    /// Largest supply the planner may ever reach: `min(c_veh, N)`.
    pub fn supply_cap(&self) -> u32 {
        self.c_veh.map_or(self.n, |c| c.min(self.n))
    }

    /// Demand at every step, `d_1..d_T`.
    pub fn demand(&self) -> Result<Vec<f64>, DomainError> {
        self.validate()?;
        (1..=self.t).map(|t| demand_at(self, t)).collect()
    }

    pub fn reward_params(&self, d: f64) -> RewardParams {
        RewardParams { d, a: self.a }
    }
}

/// Demand at step `t` (1-based).
pub fn demand_at(sc: &Scenario, t: usize) -> Result<f64, DomainError> {
    if t < 1 || t > sc.t {
        return Err(DomainError::TimeOutOfRange { t, horizon: sc.t });
    }
    let tf = t as f64;
    let pi = std::f64::consts::PI;
    let d = match &sc.demand_model {
        DemandModel::EnvelopeSinusoid => {
            0.5 * sc.d_max * (1.0 - (pi * tf / 12.0).cos()) * (pi * tf / sc.t as f64).sin()
        }
        DemandModel::OffsetSinusoid => sc.d_max * (1.0 + (pi * tf / 12.0).sin()),
        DemandModel::Explicit(v) => v[t - 1],
    };
    // sin(π) and friends leave rounding residue of either sign.
    Ok(d.max(0.0))
}

/// Demand `d` and steepness `a` of the reward `f(y) = d(1 − e^{−a y/d})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub d: f64,
    pub a: f64,
}

impl RewardParams {
    pub fn new(d: f64, a: f64) -> Result<Self, DomainError> {
        let p = RewardParams { d, a };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.d.is_finite() && self.d >= 0.0 && self.a.is_finite() && self.a > 0.0 {
            Ok(())
        } else {
            Err(DomainError::InvalidReward { d: self.d, a: self.a })
        }
    }

    /// `f(y)`, zero when `d = 0`. No argument checks.
    #[inline]
    pub fn value(&self, y: f64) -> f64 {
        if self.d == 0.0 {
            0.0
        } else {
            -self.d * (-self.a * y / self.d).exp_m1()
        }
    }

    /// `f'(y) = a·e^{−a y/d}`, zero when `d = 0`.
    #[inline]
    pub fn derivative(&self, y: f64) -> f64 {
        if self.d == 0.0 {
            0.0
        } else {
            self.a * (-self.a * y / self.d).exp()
        }
    }
}

/// Rides served with supply `y`.
pub fn reward(y: f64, p: &RewardParams) -> Result<f64, DomainError> {
    p.validate()?;
    if y.is_nan() || y < 0.0 {
        return Err(DomainError::NegativeSupply(y));
    }
    Ok(p.value(y))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftPlan {
    /// Shifts started at each step.
    pub x: Vec<u32>,
}

impl ShiftPlan {
    pub fn new(x: Vec<u32>) -> Self {
        ShiftPlan { x }
    }

    pub fn zeros(t: usize) -> Self {
        ShiftPlan { x: vec![0; t] }
    }

    pub fn total(&self) -> u64 {
        self.x.iter().map(|&v| u64::from(v)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SupplyCurve {
    /// Active shifts per step.
    pub y: Vec<u32>,
    /// Active extended shifts (shift plus break) per step.
    pub z: Vec<u32>,
}

/// Indices (0-based) and multiplicities of the `len` steps ending at `t`
/// (0-based), resolved by `boundary`. Under `Circular`, windows longer than
/// the horizon visit some steps more than once.
pub fn window(t: usize, len: usize, horizon: usize, boundary: Boundary) -> Vec<(usize, u32)> {
    match boundary {
        Boundary::ZeroPadded => {
            let first = (t + 1).saturating_sub(len);
            (first..=t).map(|k| (k, 1)).collect()
        }
        Boundary::Circular => {
            let mut counts = vec![0u32; horizon];
            for k in 0..len {
                counts[(t + horizon * (k / horizon + 1) - k) % horizon] += 1;
            }
            counts.into_iter().enumerate().filter(|&(_, c)| c > 0).collect()
        }
    }
}

fn window_sum(x: &[u32], t: usize, len: usize, boundary: Boundary) -> u32 {
    window(t, len, x.len(), boundary).into_iter().map(|(k, c)| x[k] * c).sum()
}

pub fn supply_curve(plan: &ShiftPlan, sc: &Scenario) -> Result<SupplyCurve, DomainError> {
    if plan.x.len() != sc.t {
        return Err(DomainError::LengthMismatch { expected: sc.t, got: plan.x.len() });
    }
    let y = (0..sc.t).map(|t| window_sum(&plan.x, t, sc.delta, sc.boundary)).collect();
    let z = (0..sc.t).map(|t| window_sum(&plan.x, t, sc.delta + sc.beta, sc.boundary)).collect();
    Ok(SupplyCurve { y, z })
}

/// Total reward of `plan` under the exact exponential reward.
pub fn total_reward(plan: &ShiftPlan, sc: &Scenario) -> Result<f64, DomainError> {
    let supply = supply_curve(plan, sc)?;
    let demand = sc.demand()?;
    Ok(supply.y.iter().zip(&demand).map(|(&y, &d)| sc.reward_params(d).value(f64::from(y))).sum())
}
