//! Experiment configurations and the computations behind each command.
//!
//! Everything here is pure; reading configs and writing files is left to
//! the caller.

use serde::{Deserialize, Serialize};
use shiftplan_milp::SolveOptions;
use thiserror::Error;

use crate::benchmark::{self, BenchmarkError};
use crate::domain::{self, Scenario};
use crate::io::{CompareRow, NormalizedSupplyRow, RobustnessRow, SupplyRow, SweepRow};
use crate::planner::{self, PlanError, PlanResult, Standard};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Domain(#[from] domain::DomainError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    Plan,
    SweepDrivers,
    SweepShiftsPerDriver,
    SweepShiftLength,
    CompareBaselines,
    Roster,
}

impl ExperimentKind {
    pub fn is_sweep(self) -> bool {
        matches!(
            self,
            ExperimentKind::SweepDrivers | ExperimentKind::SweepShiftsPerDriver | ExperimentKind::SweepShiftLength
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    #[serde(default)]
    pub kind: ExperimentKind,
    pub scenario: Scenario,
    /// Values of `N`, `s` or `δ` for sweeps; values of `N` for comparisons.
    #[serde(default)]
    pub sweep_values: Vec<u32>,
    /// When set, every sweep point uses `d_max = d_max_per_driver · N`.
    #[serde(default)]
    pub d_max_per_driver: Option<f64>,
    /// Served fraction of the service standard.
    #[serde(default)]
    pub service_c: Option<f64>,
    /// Cost per driver of the economic standard.
    #[serde(default)]
    pub economic_c: Option<f64>,
    /// Further values of `service_c` for the robustness sweep.
    #[serde(default)]
    pub service_c_values: Vec<f64>,
    /// Further values of `economic_c` for the robustness sweep.
    #[serde(default)]
    pub economic_c_values: Vec<f64>,
    /// Plan CSV to roster instead of solving; relative to the config file.
    #[serde(default)]
    pub plan_file: Option<String>,
    /// Output directory, used when none is given on the command line.
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, scenario: Scenario) -> Self {
        ExperimentSpec {
            kind,
            scenario,
            sweep_values: Vec::new(),
            d_max_per_driver: None,
            service_c: None,
            economic_c: None,
            service_c_values: Vec::new(),
            economic_c_values: Vec::new(),
            plan_file: None,
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let spec: ExperimentSpec = serde_json::from_str(text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        self.scenario.validate()?;
        if let Some(k) = self.d_max_per_driver {
            if !(k.is_finite() && k >= 0.0) {
                return invalid(format!("d_max_per_driver must be finite and non-negative, got {k}"));
            }
        }
        if self.sweep_values.contains(&0) {
            return invalid("sweep_values must be positive".into());
        }
        for c in self.service_c.iter().chain(&self.service_c_values) {
            if !(*c > 0.0 && *c < 1.0) {
                return invalid(format!("service fraction must lie in (0, 1), got {c}"));
            }
        }
        for c in self.economic_c.iter().chain(&self.economic_c_values) {
            if !(c.is_finite() && *c > 0.0) {
                return invalid(format!("economic cost must be positive, got {c}"));
            }
        }
        match self.kind {
            k if k.is_sweep() => {
                if self.sweep_values.is_empty() {
                    return invalid("sweeps need at least one entry in sweep_values".into());
                }
                self.sweep_scenarios()?;
            }
            ExperimentKind::CompareBaselines => {
                if self.service_c.is_none() || self.economic_c.is_none() {
                    return invalid("compare_baselines needs service_c and economic_c".into());
                }
                self.compare_scenarios()?;
            }
            _ => {}
        }
        Ok(())
    }

    fn scaled(&self, mut sc: Scenario) -> Result<Scenario, ConfigError> {
        if let Some(k) = self.d_max_per_driver {
            sc.d_max = k * f64::from(sc.n);
        }
        sc.validate()?;
        Ok(sc)
    }

    /// One scenario per sweep value, in ascending order of the value.
    ///
    /// Sweeps over `s` and `δ` keep the working time `s·N·δ` of the base
    /// scenario and solve for `N`, which must come out integral.
    pub fn sweep_scenarios(&self) -> Result<Vec<(u32, Scenario)>, ConfigError> {
        let base = &self.scenario;
        let work = base.working_time();
        let mut values = self.sweep_values.clone();
        values.sort_unstable();
        values.dedup();
        let drivers_for = |s: u32, delta: usize, v: u32| -> Result<u32, ConfigError> {
            let per_driver = f64::from(s) * delta as f64;
            let n = work / per_driver;
            if n.fract() != 0.0 || n > f64::from(u32::MAX) {
                return Err(ConfigError::Invalid(format!(
                    "sweep value {v}: working time {work} is not a multiple of s·δ = {per_driver}"
                )));
            }
            Ok(n as u32)
        };
        let mut out = Vec::with_capacity(values.len());
        for v in values {
            let mut sc = base.clone();
            match self.kind {
                ExperimentKind::SweepDrivers => sc.n = v,
                ExperimentKind::SweepShiftsPerDriver => {
                    sc.s = v;
                    sc.n = drivers_for(v, sc.delta, v)?;
                }
                ExperimentKind::SweepShiftLength => {
                    sc.delta = v as usize;
                    sc.n = drivers_for(sc.s, sc.delta, v)?;
                }
                k => return Err(ConfigError::Invalid(format!("{k:?} is not a sweep"))),
            }
            out.push((v, self.scaled(sc)?));
        }
        Ok(out)
    }

    /// One scenario per tested `N`; the base scenario alone when no values are given.
    pub fn compare_scenarios(&self) -> Result<Vec<Scenario>, ConfigError> {
        if self.sweep_values.is_empty() {
            return Ok(vec![self.scaled(self.scenario.clone())?]);
        }
        let mut values = self.sweep_values.clone();
        values.sort_unstable();
        values.dedup();
        values
            .into_iter()
            .map(|n| {
                let mut sc = self.scenario.clone();
                sc.n = n;
                self.scaled(sc)
            })
            .collect()
    }
}

/// `Δ` with the convention that a zero benchmark reward counts as a total loss.
pub fn reported_gap(r_star: f64, reward: f64) -> Result<f64, BenchmarkError> {
    match benchmark::gap_from_reward(r_star, reward) {
        Ok(g) => Ok(g.delta),
        Err(BenchmarkError::UndefinedGap(_)) => Ok(1.0),
        Err(e) => Err(e),
    }
}

/// Agnostic optimum supply and reward; zero for a demand that vanishes everywhere.
pub fn agnostic(sc: &Scenario) -> Result<(Vec<f64>, f64), BenchmarkError> {
    match benchmark::agnostic_optimum_closed_form(sc) {
        Ok(o) => Ok((o.y_star, o.r_star)),
        Err(BenchmarkError::ZeroDemand) => Ok((vec![0.0; sc.t], 0.0)),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub sum_x: u64,
    pub max_z: u32,
    pub true_reward: f64,
    pub mip_objective: f64,
    pub best_bound: f64,
    pub r_star: f64,
    pub relative_gap: f64,
    pub status: String,
    pub nodes: usize,
    pub seed: Option<u64>,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub result: PlanResult,
    pub demand: Vec<f64>,
    pub y_star: Vec<f64>,
    pub r_star: f64,
    pub relative_gap: f64,
}

impl PlanOutcome {
    pub fn supply_rows(&self, sc: &Scenario) -> Vec<SupplyRow> {
        let reward: Vec<f64> = self
            .demand
            .iter()
            .zip(&self.result.supply.y)
            .map(|(&d, &y)| sc.reward_params(d).value(f64::from(y)))
            .collect();
        crate::io::supply_rows(&self.demand, &self.result.supply, &self.y_star, &reward)
    }

    pub fn summary(&self, sc: &Scenario, seed: Option<u64>) -> PlanSummary {
        let r = &self.result;
        PlanSummary {
            sum_x: r.plan.total(),
            max_z: r.supply.z.iter().copied().max().unwrap_or(0),
            true_reward: r.true_reward,
            mip_objective: r.mip_objective,
            best_bound: r.best_bound,
            r_star: self.r_star,
            relative_gap: self.relative_gap,
            status: r.status.to_string(),
            nodes: r.nodes,
            seed,
            scenario: sc.clone(),
        }
    }

    pub fn sweep_row(&self, value: u32, sc: &Scenario) -> SweepRow {
        SweepRow {
            sweep_value: value,
            relative_gap: self.relative_gap,
            true_reward: self.result.true_reward,
            r_star: self.r_star,
            nodes: self.result.nodes,
            n: sc.n,
            s: sc.s,
            delta: sc.delta,
            d_max: sc.d_max,
            status: self.result.status.to_string(),
        }
    }

    /// Supply curves divided by the working time `s·N·δ`; zero when it is zero.
    pub fn normalized_rows(&self, value: u32, sc: &Scenario) -> Vec<NormalizedSupplyRow> {
        let w = sc.working_time();
        let norm = |v: f64| if w > 0.0 { v / w } else { 0.0 };
        (0..sc.t)
            .map(|k| NormalizedSupplyRow {
                sweep_value: value,
                t: k + 1,
                y: norm(f64::from(self.result.supply.y[k])),
                y_star: norm(self.y_star[k]),
            })
            .collect()
    }
}

fn outcome(sc: &Scenario, result: PlanResult) -> Result<PlanOutcome, PlanError> {
    let demand = sc.demand()?;
    let (y_star, r_star) = agnostic(sc)?;
    let relative_gap = reported_gap(r_star, result.true_reward)?;
    Ok(PlanOutcome { result, demand, y_star, r_star, relative_gap })
}

/// Solves the reward model and compares it with the agnostic optimum.
pub fn evaluate_plan(sc: &Scenario, opts: &SolveOptions) -> Result<PlanOutcome, PlanError> {
    let result = planner::plan_with(sc, opts)?;
    outcome(sc, result)
}

/// Solves the deviation model of a standard and scores its plan like [`evaluate_plan`].
pub fn evaluate_baseline(sc: &Scenario, standard: Standard, opts: &SolveOptions) -> Result<PlanOutcome, PlanError> {
    let result = planner::plan_baseline_with(sc, standard, opts)?;
    outcome(sc, result)
}

/// Gaps of our plan and both standards at one value of `N`, plus the
/// robustness rows for every configured alternative `c`.
pub fn compare_point(
    spec: &ExperimentSpec,
    sc: &Scenario,
    opts: &SolveOptions,
) -> Result<(CompareRow, Vec<RobustnessRow>), PlanError> {
    let (service_c, economic_c) = match (spec.service_c, spec.economic_c) {
        (Some(s), Some(e)) => (s, e),
        _ => return Err(PlanError::Benchmark(BenchmarkError::BadServiceFraction(f64::NAN))),
    };
    let ours = evaluate_plan(sc, opts)?.relative_gap;
    let gap = |st: Standard| evaluate_baseline(sc, st, opts).map(|o| o.relative_gap);
    let row = CompareRow {
        n: sc.n,
        gap_ours: ours,
        gap_service: gap(Standard::Service(service_c))?,
        gap_economic: gap(Standard::Economic(economic_c))?,
    };
    let mut robust = Vec::new();
    for &c in &spec.service_c_values {
        robust.push(RobustnessRow {
            n: sc.n,
            standard: "service".into(),
            c,
            gap: gap(Standard::Service(c))?,
            gap_ours: ours,
        });
    }
    for &c in &spec.economic_c_values {
        robust.push(RobustnessRow {
            n: sc.n,
            standard: "economic".into(),
            c,
            gap: gap(Standard::Economic(c))?,
            gap_ours: ours,
        });
    }
    Ok((row, robust))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Scenario {
        Scenario::new(24, 4, 2, 4, 2, 4.0, 2.0)
    }

    #[test]
    fn parses_a_minimal_config() {
        let spec = ExperimentSpec::from_json(
            r#"{"scenario": {"t": 24, "n": 4, "s": 2, "delta": 4, "beta": 2, "d_max": 4.0, "a": 2.0}}"#,
        )
        .unwrap();
        assert_eq!(spec.kind, ExperimentKind::Plan);
        assert_eq!(spec.scenario, base());
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        let sc = serde_json::to_string(&base()).unwrap();
        assert!(ExperimentSpec::from_json(&format!(r#"{{"scenario": {sc}, "typo": 1}}"#)).is_err());
        assert!(ExperimentSpec::from_json(&format!(r#"{{"kind": "sweep_drivers", "scenario": {sc}}}"#)).is_err());
        assert!(ExperimentSpec::from_json(&format!(
            r#"{{"kind": "sweep_drivers", "scenario": {sc}, "sweep_values": [0, 2]}}"#
        ))
        .is_err());
        assert!(ExperimentSpec::from_json(&format!(
            r#"{{"kind": "compare_baselines", "scenario": {sc}, "service_c": 0.8}}"#
        ))
        .is_err());
        assert!(ExperimentSpec::from_json(&format!(
            r#"{{"kind": "compare_baselines", "scenario": {sc}, "service_c": 1.5, "economic_c": 1}}"#
        ))
        .is_err());
        assert!(ExperimentSpec::from_json("{").is_err());
    }

    #[test]
    fn shift_sweeps_keep_working_time() {
        let mut spec = ExperimentSpec::new(ExperimentKind::SweepShiftsPerDriver, base());
        spec.sweep_values = vec![4, 1, 2];
        let pts = spec.sweep_scenarios().unwrap();
        let got: Vec<(u32, u32, u32)> = pts.iter().map(|(v, sc)| (*v, sc.s, sc.n)).collect();
        assert_eq!(got, vec![(1, 1, 8), (2, 2, 4), (4, 4, 2)]);
        assert!(pts.iter().all(|(_, sc)| sc.working_time() == 32.0));

        spec.kind = ExperimentKind::SweepShiftLength;
        spec.sweep_values = vec![1, 2, 8];
        let got: Vec<(usize, u32)> = spec.sweep_scenarios().unwrap().iter().map(|(_, sc)| (sc.delta, sc.n)).collect();
        assert_eq!(got, vec![(1, 16), (2, 8), (8, 2)]);

        spec.sweep_values = vec![3];
        assert!(matches!(spec.sweep_scenarios(), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn driver_sweep_scales_demand() {
        let mut spec = ExperimentSpec::new(ExperimentKind::SweepDrivers, base());
        spec.sweep_values = vec![10, 5];
        spec.d_max_per_driver = Some(0.75);
        let pts = spec.sweep_scenarios().unwrap();
        assert_eq!(pts[0].1.n, 5);
        assert_eq!(pts[0].1.d_max, 3.75);
        assert_eq!(pts[1].1.d_max, 7.5);
    }

    #[test]
    fn zero_benchmark_counts_as_total_loss() {
        assert_eq!(reported_gap(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(reported_gap(2.0, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn no_drivers_plan_has_unit_gap() {
        let mut sc = base();
        sc.n = 0;
        let out = evaluate_plan(&sc, &SolveOptions::default()).unwrap();
        assert_eq!(out.relative_gap, 1.0);
        assert_eq!(out.summary(&sc, None).sum_x, 0);
        assert!(out.normalized_rows(0, &sc).iter().all(|r| r.y == 0.0 && r.y_star == 0.0));
    }

    #[test]
    fn comparison_without_drivers() {
        let mut spec = ExperimentSpec::new(ExperimentKind::CompareBaselines, base());
        spec.scenario.n = 0;
        spec.service_c = Some(0.8);
        spec.economic_c = Some(1.0);
        spec.service_c_values = vec![0.5];
        let sc = spec.compare_scenarios().unwrap().remove(0);
        let (row, robust) = compare_point(&spec, &sc, &SolveOptions::default()).unwrap();
        assert_eq!((row.gap_ours, row.gap_service, row.gap_economic), (1.0, 1.0, 1.0));
        assert_eq!(robust.len(), 1);
    }
}
