//! Builds and solves the shift-planning MILPs.
//!
//! Variables are laid out as `x_1..x_T`, `y_1..y_T`, `z_1..z_T` followed by
//! `r_1..r_T` (reward) or `e_1..e_T` (squared deviation).

use serde::{Deserialize, Serialize};
use shiftplan_milp::{milp_solve, MilpModel, Sense, SolveError, SolveOptions, Status, Var};
use thiserror::Error;

use crate::benchmark::{self, BenchmarkError};
use crate::domain::{self, window, DomainError, Scenario, ShiftPlan, SupplyCurve};
use crate::piecewise::{concavify_reward, convexify_sq_dev, PiecewiseError, PiecewiseLinear};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Piecewise(#[from] PiecewiseError),
    #[error(transparent)]
    Benchmark(#[from] BenchmarkError),
    #[error(transparent)]
    Solver(#[from] SolveError),
    #[error("desired supply entry {index} is {value}; expected a finite non-negative number")]
    BadDesired { index: usize, value: f64 },
    #[error("solver finished without a plan (status {0})")]
    NoSolution(Status),
    #[error("solver value {value} for {name} is not an integer")]
    Fractional { name: String, value: f64 },
}

/// Variable handles of a planning model.
#[derive(Debug, Clone)]
pub struct PlanVars {
    pub x: Vec<Var>,
    pub y: Vec<Var>,
    pub z: Vec<Var>,
    /// `r_t` in the reward model, `e_t` in the deviation model.
    pub objective: Vec<Var>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanResult {
    pub plan: ShiftPlan,
    pub supply: SupplyCurve,
    /// Objective of the solved model: the chord reward, or minus the chord deviation.
    pub mip_objective: f64,
    pub best_bound: f64,
    /// Reward of `plan` under the exact exponential reward.
    pub true_reward: f64,
    pub status: Status,
    pub nodes: usize,
}

impl PlanResult {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Standard {
    /// Serve the fraction `c` of the demand at every step.
    Service(f64),
    /// Staff until the marginal reward drops to the cost `c`.
    Economic(f64),
}

/// Shared variables and rows: shift starts, supply, extended supply.
fn base_model(sc: &Scenario) -> Result<(MilpModel, PlanVars), PlanError> {
    sc.validate()?;
    let t = sc.t;
    let n = f64::from(sc.n);
    let mut m = MilpModel::new();
    let x: Vec<Var> = (1..=t).map(|k| m.add_var(format!("x_{k}"), 0.0, n, 0.0, true)).collect();
    let y_cap = sc.c_veh.map_or(f64::INFINITY, f64::from);
    let y: Vec<Var> = (1..=t).map(|k| m.add_var(format!("y_{k}"), 0.0, y_cap, 0.0, false)).collect();
    let z: Vec<Var> = (1..=t).map(|k| m.add_var(format!("z_{k}"), 0.0, n, 0.0, false)).collect();
    for (k, &yk) in y.iter().enumerate() {
        let mut coeffs = vec![(yk, 1.0)];
        coeffs.extend(window(k, sc.delta, t, sc.boundary).into_iter().map(|(j, c)| (x[j], -f64::from(c))));
        m.add_row(format!("supply_{}", k + 1), coeffs, Sense::Eq, 0.0);
    }
    for (k, &zk) in z.iter().enumerate() {
        let mut coeffs = vec![(zk, 1.0)];
        coeffs.extend(window(k, sc.delta + sc.beta, t, sc.boundary).into_iter().map(|(j, c)| (x[j], -f64::from(c))));
        m.add_row(format!("extended_{}", k + 1), coeffs, Sense::Eq, 0.0);
    }
    m.add_row("shifts", x.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, sc.total_shifts() as f64);
    Ok((m, PlanVars { x, y, z, objective: Vec::new() }))
}

fn chord_cap(sc: &Scenario) -> u32 {
    sc.supply_cap().max(1)
}

/// The reward-maximizing program with integer-exact reward chords.
pub fn build_reward_mip(sc: &Scenario) -> Result<(MilpModel, PlanVars), PlanError> {
    let (mut m, mut vars) = base_model(sc)?;
    let demand = sc.demand()?;
    let cap = chord_cap(sc);
    for k in 0..sc.t {
        let r = m.add_var(format!("r_{}", k + 1), 0.0, f64::INFINITY, 1.0, false);
        vars.objective.push(r);
    }
    for (k, &d) in demand.iter().enumerate() {
        let pl = concavify_reward(&sc.reward_params(d), cap)?;
        for (i, piece) in pl.pieces().iter().enumerate() {
            m.add_row(
                format!("reward_{}_{}", k + 1, i + 1),
                vec![(vars.objective[k], 1.0), (vars.y[k], -piece.slope)],
                Sense::Le,
                piece.intercept,
            );
        }
    }
    Ok((m, vars))
}

/// The deviation-minimizing program: maximize `−Σ e_t` with `e_t` above the
/// chords of `(y_t − desired_t)²`.
pub fn build_deviation_mip(sc: &Scenario, desired: &[f64]) -> Result<(MilpModel, PlanVars), PlanError> {
    if desired.len() != sc.t {
        return Err(DomainError::LengthMismatch { expected: sc.t, got: desired.len() }.into());
    }
    if let Some((index, &value)) = desired.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(PlanError::BadDesired { index, value });
    }
    let (mut m, mut vars) = base_model(sc)?;
    let cap = chord_cap(sc);
    for k in 0..sc.t {
        let e = m.add_var(format!("e_{}", k + 1), 0.0, f64::INFINITY, -1.0, false);
        vars.objective.push(e);
    }
    for (k, &target) in desired.iter().enumerate() {
        let pl = convexify_sq_dev(target, cap)?;
        for (i, piece) in pl.pieces().iter().enumerate() {
            m.add_row(
                format!("deviation_{}_{}", k + 1, i + 1),
                vec![(vars.objective[k], 1.0), (vars.y[k], -piece.slope)],
                Sense::Ge,
                piece.intercept,
            );
        }
    }
    Ok((m, vars))
}

fn solve_and_extract(
    sc: &Scenario,
    model: &MilpModel,
    vars: &PlanVars,
    opts: &SolveOptions,
) -> Result<PlanResult, PlanError> {
    let sol = milp_solve(model, opts)?;
    if !sol.status.has_solution() {
        return Err(PlanError::NoSolution(sol.status));
    }
    let mut x = Vec::with_capacity(sc.t);
    for &v in &vars.x {
        let value = sol.values[v.index()];
        let r = value.round();
        if (value - r).abs() > shiftplan_milp::INTEGRALITY_TOL || r < 0.0 {
            return Err(PlanError::Fractional { name: model.name(v).to_string(), value });
        }
        x.push(r as u32);
    }
    let plan = ShiftPlan::new(x);
    let supply = domain::supply_curve(&plan, sc)?;
    let true_reward = domain::total_reward(&plan, sc)?;
    Ok(PlanResult {
        plan,
        supply,
        mip_objective: sol.objective,
        best_bound: sol.best_bound,
        true_reward,
        status: sol.status,
        nodes: sol.nodes_explored,
    })
}

pub fn plan(sc: &Scenario) -> Result<PlanResult, PlanError> {
    plan_with(sc, &SolveOptions::default())
}

pub fn plan_with(sc: &Scenario, opts: &SolveOptions) -> Result<PlanResult, PlanError> {
    let (model, vars) = build_reward_mip(sc)?;
    solve_and_extract(sc, &model, &vars, opts)
}

/// Desired supply of a traditional standard.
pub fn desired_supply(sc: &Scenario, standard: Standard) -> Result<Vec<f64>, PlanError> {
    Ok(match standard {
        Standard::Service(c) => benchmark::service_standard_supply(sc, c)?,
        Standard::Economic(c) => benchmark::economic_standard_supply(sc, c)?,
    })
}

pub fn plan_baseline(sc: &Scenario, standard: Standard) -> Result<PlanResult, PlanError> {
    plan_baseline_with(sc, standard, &SolveOptions::default())
}

pub fn plan_baseline_with(sc: &Scenario, standard: Standard, opts: &SolveOptions) -> Result<PlanResult, PlanError> {
    let desired = desired_supply(sc, standard)?;
    let (model, vars) = build_deviation_mip(sc, &desired)?;
    solve_and_extract(sc, &model, &vars, opts)
}
