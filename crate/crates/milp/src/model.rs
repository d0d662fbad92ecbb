use std::fmt;

use thiserror::Error;

/// Index of a variable inside a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub usize);

impl Var {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(Var, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    /// Row activity `a·v` at the given point.
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which the row is violated at `values` (zero when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let act = self.activity(values);
        match self.sense {
            Sense::Le => (act - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - act).max(0.0),
            Sense::Eq => (act - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("row `{row}` references variable {var} but the model has {n_vars} variables")]
    UnknownVariable { row: String, var: usize, n_vars: usize },
    #[error("variable `{name}` has lower bound {lower} above upper bound {upper}")]
    InvertedBounds { name: String, lower: f64, upper: f64 },
    #[error("variable `{name}` has a non-finite objective coefficient")]
    NonFiniteObjective { name: String },
    #[error("row `{row}` has a non-finite coefficient or right-hand side")]
    NonFiniteRow { row: String },
    #[error("variable `{name}` has a NaN bound")]
    NanBound { name: String },
    #[error("integer variable `{name}` must have finite bounds")]
    UnboundedInteger { name: String },
}

/// A linear model `max c·v` subject to linear rows and variable bounds,
/// with an optional integrality requirement per variable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    names: Vec<String>,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    integer: Vec<bool>,
    rows: Vec<Row>,
}

impl MilpModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, objective: f64, integer: bool) -> Var {
        let v = Var(self.names.len());
        self.names.push(name.into());
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.push(objective);
        self.integer.push(integer);
        v
    }

    pub fn add_row(&mut self, name: impl Into<String>, coeffs: Vec<(Var, f64)>, sense: Sense, rhs: f64) -> usize {
        self.rows.push(Row { name: name.into(), coeffs, sense, rhs });
        self.rows.len() - 1
    }

    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.0]
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn set_objective(&mut self, v: Var, coef: f64) {
        self.objective[v.0] = coef;
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn set_bounds(&mut self, v: Var, lower: f64, upper: f64) {
        self.lower[v.0] = lower;
        self.upper[v.0] = upper;
    }

    pub fn integrality(&self) -> &[bool] {
        &self.integer
    }

    pub fn is_integer(&self, v: Var) -> bool {
        self.integer[v.0]
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, v)| c * v).sum()
    }

    /// Copy of the model with every integrality flag cleared.
    pub fn relaxed(&self) -> MilpModel {
        let mut m = self.clone();
        m.integer.iter_mut().for_each(|b| *b = false);
        m
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n_vars();
        for j in 0..n {
            let name = || self.names[j].clone();
            if !self.objective[j].is_finite() {
                return Err(ModelError::NonFiniteObjective { name: name() });
            }
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if lo.is_nan() || hi.is_nan() {
                return Err(ModelError::NanBound { name: name() });
            }
            if lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(ModelError::InvertedBounds { name: name(), lower: lo, upper: hi });
            }
        }
        for row in &self.rows {
            if !row.rhs.is_finite() {
                return Err(ModelError::NonFiniteRow { row: row.name.clone() });
            }
            for &(v, a) in &row.coeffs {
                if v.0 >= n {
                    return Err(ModelError::UnknownVariable { row: row.name.clone(), var: v.0, n_vars: n });
                }
                if !a.is_finite() {
                    return Err(ModelError::NonFiniteRow { row: row.name.clone() });
                }
            }
        }
        Ok(())
    }

    /// Largest scaled row residual `violation / (1 + |rhs|)` at `values`.
    pub fn max_scaled_residual(&self, values: &[f64]) -> f64 {
        self.rows.iter().map(|r| r.violation(values) / (1.0 + r.rhs.abs())).fold(0.0, f64::max)
    }

    /// Largest bound violation at `values`.
    pub fn max_bound_violation(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(j, &v)| (self.lower[j] - v).max(v - self.upper[j]).max(0.0)).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_bad_rows() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", 0.0, 1.0, 1.0, false);
        m.add_row("r", vec![(x, 1.0), (Var(3), 2.0)], Sense::Le, 1.0);
        assert!(matches!(m.validate(), Err(ModelError::UnknownVariable { var: 3, .. })));
    }

    #[test]
    fn validate_rejects_inverted_bounds() {
        let mut m = MilpModel::new();
        m.add_var("x", 2.0, 1.0, 1.0, false);
        assert!(matches!(m.validate(), Err(ModelError::InvertedBounds { .. })));
    }

    #[test]
    fn residuals() {
        let mut m = MilpModel::new();
        let x = m.add_var("x", 0.0, 10.0, 1.0, false);
        m.add_row("r", vec![(x, 2.0)], Sense::Le, 3.0);
        assert_eq!(m.max_scaled_residual(&[1.0]), 0.0);
        assert!((m.max_scaled_residual(&[2.0]) - 0.25).abs() < 1e-15);
        assert_eq!(m.max_bound_violation(&[11.0]), 1.0);
    }
}
