//! A small, deterministic mixed-integer linear programming solver.
//!
//! Models are maximization problems built with [`MilpModel`]. The LP engine
//! is a dense bounded-variable primal simplex (with a dual simplex for
//! re-optimization) whose inequality rows enter the tableau only once they
//! become binding. Integer variables are handled by best-bound
//! branch-and-bound without cuts or presolve.
//!
//! ```
//! use shiftplan_milp::{milp_solve, MilpModel, Sense, SolveOptions, Status};
//!
//! let mut m = MilpModel::new();
//! let x = m.add_var("x", 0.0, 10.0, 1.0, true);
//! m.add_row("cap", vec![(x, 2.0)], Sense::Le, 3.0);
//! let sol = milp_solve(&m, &SolveOptions::default()).unwrap();
//! assert_eq!(sol.status, Status::Optimal);
//! assert_eq!(sol.objective, 1.0);
//! ```

mod branch;
pub mod lp_format;
pub mod model;
mod simplex;

use std::fmt;

use thiserror::Error;

pub use lp_format::export_lp;
pub use model::{MilpModel, ModelError, Row, Sense, Var};

/// Distance from the nearest integer below which a value counts as integral.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("malformed model: {0}")]
    Model(#[from] ModelError),
    #[error("simplex iteration limit ({0}) exceeded")]
    IterationLimit(usize),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    /// Search stopped at a user gap looser than the optimality tolerance.
    GapLimit,
    NodeLimit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::Infeasible => "infeasible",
            Status::Unbounded => "unbounded",
            Status::GapLimit => "gap_limit",
            Status::NodeLimit => "node_limit",
        }
    }

    pub fn has_solution(self) -> bool {
        matches!(self, Status::Optimal | Status::GapLimit | Status::NodeLimit)
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Incumbent and global bound after a branch-and-bound node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub nodes: usize,
    pub incumbent: Option<f64>,
    pub best_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MilpSolution {
    pub status: Status,
    /// One value per model variable; empty when no solution was found.
    pub values: Vec<f64>,
    pub objective: f64,
    pub best_bound: f64,
    pub nodes_explored: usize,
    pub progress: Vec<Progress>,
}

impl MilpSolution {
    pub(crate) fn without_solution(status: Status, nodes: usize) -> Self {
        let bound = if status == Status::Unbounded { f64::INFINITY } else { f64::NEG_INFINITY };
        MilpSolution {
            status,
            values: Vec::new(),
            objective: f64::NEG_INFINITY,
            best_bound: bound,
            nodes_explored: nodes,
            progress: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub node_limit: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { abs_gap: 1e-6, rel_gap: 1e-6, node_limit: 1_000_000 }
    }
}

/// LP optimum together with the row prices of the final basis.
#[derive(Debug, Clone, PartialEq)]
pub struct LpReport {
    pub solution: MilpSolution,
    /// One price per model row; `c_j - Σ_i π_i a_ij` gives the reduced costs.
    pub row_duals: Vec<f64>,
    pub iterations: usize,
    /// Rows held explicitly in the final tableau; the others are slack.
    pub materialized_rows: usize,
}

/// Solves the LP relaxation (integrality flags are ignored).
pub fn lp_solve(model: &MilpModel) -> Result<MilpSolution, SolveError> {
    lp_solve_detailed(model).map(|r| r.solution)
}

pub fn lp_solve_detailed(model: &MilpModel) -> Result<LpReport, SolveError> {
    model.validate()?;
    let sf = simplex::StandardForm::new(model);
    let mut row_duals = vec![0.0; model.n_rows()];
    if sf.infeasible_empty_row {
        return Ok(LpReport {
            solution: MilpSolution::without_solution(Status::Infeasible, 1),
            row_duals,
            iterations: 0,
            materialized_rows: 0,
        });
    }
    let mut t = simplex::Tableau::new(&sf);
    let status = t.solve()?;
    let solution = match status {
        simplex::LpStatus::Optimal => {
            let values = t.structural_values();
            let objective = model.objective_value(&values);
            for (i, pi) in t.row_duals().into_iter().enumerate() {
                row_duals[sf.origin[i]] = pi;
            }
            MilpSolution {
                status: Status::Optimal,
                values,
                objective,
                best_bound: objective,
                nodes_explored: 1,
                progress: Vec::new(),
            }
        }
        simplex::LpStatus::Infeasible => MilpSolution::without_solution(Status::Infeasible, 1),
        simplex::LpStatus::Unbounded => MilpSolution::without_solution(Status::Unbounded, 1),
    };
    Ok(LpReport { solution, row_duals, iterations: t.iterations, materialized_rows: t.n_materialized() })
}

/// Solves the model with best-bound branch-and-bound.
///
/// Node selection takes the largest LP bound, then the deepest node, then the
/// oldest. Branching is on the most fractional integer variable (lowest
/// index on ties). The run is deterministic for a fixed model.
pub fn milp_solve(model: &MilpModel, opts: &SolveOptions) -> Result<MilpSolution, SolveError> {
    model.validate()?;
    for (j, &int) in model.integrality().iter().enumerate() {
        if int && !(model.lower()[j].is_finite() && model.upper()[j].is_finite()) {
            return Err(ModelError::UnboundedInteger { name: model.names()[j].clone() }.into());
        }
    }
    branch::branch_and_bound(model, opts)
}
