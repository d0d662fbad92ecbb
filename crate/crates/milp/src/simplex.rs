//! Dense bounded-variable simplex.
//!
//! Every row `i` gets a logical variable `w_i = a_i·x` carrying the row
//! bounds, so all constraints become `A x - w = 0` and all limits become
//! variable bounds. The tableau `B⁻¹[A | -I]` is stored densely, but only for
//! rows that have been *materialized*. A row stays lazy (its logical is
//! implicitly basic and feasible) until the primal ratio test finds that it
//! blocks, or until the dual simplex finishes with it violated. For models
//! with many inequality rows of which few are ever tight, this keeps the
//! tableau small without changing the pivot sequence semantics.

use crate::model::{MilpModel, Sense};
use crate::SolveError;

pub(crate) const PRIMAL_TOL: f64 = 1e-9;
pub(crate) const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_STEP: f64 = 1e-12;
/// Consecutive degenerate pivots before switching to Bland's rule.
pub(crate) const BLAND_AFTER: usize = 1000;
const REFACTOR_EVERY: usize = 5000;
/// Materialized rows allowed to accumulate before slack ones are purged.
const PURGE_SLACK: usize = 256;
/// Scaled slack above which a basic logical no longer counts as binding.
const PURGE_MARGIN: f64 = 1e-7;
/// Violated lazy rows added per separation round.
const LAZY_BATCH: usize = 64;
const NONE: usize = usize::MAX;

#[inline]
fn feas_tol(bound: f64) -> f64 {
    PRIMAL_TOL * (1.0 + bound.abs())
}

#[derive(Debug, Clone)]
pub(crate) struct StdRow {
    pub coeffs: Vec<(usize, f64)>,
    pub lo: f64,
    pub hi: f64,
}

/// The model with duplicate coefficients merged and empty rows removed.
#[derive(Debug, Clone)]
pub(crate) struct StandardForm {
    pub n: usize,
    pub cost: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<StdRow>,
    /// Index of the originating model row for each standard row.
    pub origin: Vec<usize>,
    pub columns: Vec<Vec<(usize, f64)>>,
    /// An empty row whose bounds exclude zero.
    pub infeasible_empty_row: bool,
}

impl StandardForm {
    pub fn new(model: &MilpModel) -> Self {
        let n = model.n_vars();
        let mut rows = Vec::new();
        let mut origin = Vec::new();
        let mut columns = vec![Vec::new(); n];
        let mut infeasible_empty_row = false;
        let mut dense = vec![0.0; n];
        let mut seen = Vec::new();
        for (k, row) in model.rows().iter().enumerate() {
            for &(v, a) in &row.coeffs {
                if dense[v.0] == 0.0 && a != 0.0 {
                    seen.push(v.0);
                }
                dense[v.0] += a;
            }
            seen.sort_unstable();
            seen.dedup();
            let coeffs: Vec<(usize, f64)> = seen.iter().filter(|&&j| dense[j] != 0.0).map(|&j| (j, dense[j])).collect();
            for &j in &seen {
                dense[j] = 0.0;
            }
            seen.clear();
            let (lo, hi) = match row.sense {
                Sense::Le => (f64::NEG_INFINITY, row.rhs),
                Sense::Ge => (row.rhs, f64::INFINITY),
                Sense::Eq => (row.rhs, row.rhs),
            };
            if coeffs.is_empty() {
                if lo > feas_tol(lo) || hi < -feas_tol(hi) {
                    infeasible_empty_row = true;
                }
                continue;
            }
            let i = rows.len();
            for &(j, a) in &coeffs {
                columns[j].push((i, a));
            }
            rows.push(StdRow { coeffs, lo, hi });
            origin.push(k);
        }
        StandardForm {
            n,
            cost: model.objective().to_vec(),
            lower: model.lower().to_vec(),
            upper: model.upper().to_vec(),
            rows,
            origin,
            columns,
            infeasible_empty_row,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic with both bounds infinite, sitting at zero.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DualStatus {
    Feasible,
    Infeasible,
    Stalled,
}

#[derive(Debug, Clone, Copy)]
enum Leave {
    Flip,
    Row { row: usize, to_upper: bool },
    Lazy { srow: usize, to_upper: bool },
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    leave: Leave,
    alpha: f64,
    slack: f64,
    key: usize,
}

#[derive(Clone)]
pub(crate) struct Tableau<'a> {
    sf: &'a StandardForm,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    value: Vec<f64>,
    state: Vec<State>,
    basic_row: Vec<usize>,
    rows: Vec<Vec<f64>>,
    basic: Vec<usize>,
    d: Vec<f64>,
    logical_of: Vec<usize>,
    row_of_logical: Vec<usize>,
    /// `a_i·x` for lazy rows; stale for materialized ones.
    activity: Vec<f64>,
    lazy_acc: Vec<f64>,
    lazy_mark: Vec<bool>,
    lazy_touched: Vec<usize>,
    pub iterations: usize,
    max_iterations: usize,
    pivots_since_refactor: usize,
    purge_at: usize,
}

impl<'a> Tableau<'a> {
    pub fn new(sf: &'a StandardForm) -> Self {
        let n = sf.n;
        let m = sf.rows.len();
        let mut value = vec![0.0; n];
        let mut state = vec![State::Free; n];
        for j in 0..n {
            let (lo, hi) = (sf.lower[j], sf.upper[j]);
            if lo.is_finite() {
                state[j] = State::AtLower;
                value[j] = lo;
            } else if hi.is_finite() {
                state[j] = State::AtUpper;
                value[j] = hi;
            }
        }
        let mut t = Tableau {
            sf,
            lo: sf.lower.clone(),
            hi: sf.upper.clone(),
            cost: sf.cost.clone(),
            value,
            state,
            basic_row: vec![NONE; n],
            rows: Vec::new(),
            basic: Vec::new(),
            d: sf.cost.clone(),
            logical_of: vec![NONE; m],
            row_of_logical: Vec::new(),
            activity: vec![0.0; m],
            lazy_acc: vec![0.0; m],
            lazy_mark: vec![false; m],
            lazy_touched: Vec::new(),
            iterations: 0,
            max_iterations: 50_000 + 200 * (n + m),
            pivots_since_refactor: 0,
            purge_at: 0,
        };
        t.recompute_activities();
        for i in 0..m {
            let r = &sf.rows[i];
            let a = t.activity[i];
            if r.lo == r.hi || a < r.lo - feas_tol(r.lo) || a > r.hi + feas_tol(r.hi) {
                t.materialize(i);
            }
        }
        t.purge_at = t.rows.len() + PURGE_SLACK;
        t
    }

    pub fn n_materialized(&self) -> usize {
        self.rows.len()
    }

    fn n_cols(&self) -> usize {
        self.lo.len()
    }

    /// Ordering key used by Bland's rule: structurals first, then logicals by row.
    fn key(&self, col: usize) -> usize {
        if col < self.sf.n {
            col
        } else {
            self.sf.n + self.row_of_logical[col - self.sf.n]
        }
    }

    fn recompute_activities(&mut self) {
        let n = self.sf.n;
        for (i, row) in self.sf.rows.iter().enumerate() {
            self.activity[i] = row.coeffs.iter().map(|&(j, a)| a * self.value[j]).sum();
        }
        debug_assert!(self.value.len() >= n);
    }

    fn materialize(&mut self, srow: usize) -> usize {
        debug_assert_eq!(self.logical_of[srow], NONE);
        let sf = self.sf;
        let row = &sf.rows[srow];
        let col = self.n_cols();
        let act: f64 = row.coeffs.iter().map(|&(j, a)| a * self.value[j]).sum();
        for r in self.rows.iter_mut() {
            r.push(0.0);
        }
        let mut v = vec![0.0; col + 1];
        for &(j, a) in &row.coeffs {
            v[j] += a;
        }
        v[col] = -1.0;
        for &(j, _) in &row.coeffs {
            let r = self.basic_row[j];
            if r == NONE {
                continue;
            }
            let f = v[j];
            if f == 0.0 {
                continue;
            }
            for (vk, &tk) in v.iter_mut().zip(&self.rows[r]) {
                if tk != 0.0 {
                    *vk -= f * tk;
                }
            }
            v[j] = 0.0;
        }
        for vk in v.iter_mut() {
            *vk = -*vk;
        }
        v[col] = 1.0;
        let p = self.rows.len();
        self.rows.push(v);
        self.basic.push(col);
        self.lo.push(row.lo);
        self.hi.push(row.hi);
        self.cost.push(0.0);
        self.value.push(act);
        self.state.push(State::Basic);
        self.basic_row.push(p);
        self.d.push(0.0);
        self.logical_of[srow] = col;
        self.row_of_logical.push(srow);
        self.activity[srow] = act;
        p
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let mut prow = std::mem::take(&mut self.rows[p]);
        let inv = 1.0 / prow[q];
        let mut nz = Vec::with_capacity(prow.len() / 4);
        for (j, x) in prow.iter_mut().enumerate() {
            if *x != 0.0 {
                *x *= inv;
                nz.push(j);
            }
        }
        prow[q] = 1.0;
        for (r, row) in self.rows.iter_mut().enumerate() {
            if r == p {
                continue;
            }
            let f = row[q];
            if f == 0.0 {
                continue;
            }
            for &j in &nz {
                row[j] -= f * prow[j];
            }
            row[q] = 0.0;
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in &nz {
                self.d[j] -= f * prow[j];
            }
            self.d[q] = 0.0;
        }
        self.rows[p] = prow;
        let old = self.basic[p];
        self.basic_row[old] = NONE;
        self.basic_row[q] = p;
        self.basic[p] = q;
        self.state[q] = State::Basic;
        self.pivots_since_refactor += 1;
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.iterations += 1;
        if self.iterations > self.max_iterations {
            return Err(SolveError::IterationLimit(self.max_iterations));
        }
        Ok(())
    }

    /// Accumulates `Δ(a_i·x)` per unit move of nonbasic `q` in direction `dir`
    /// for every lazy row touched by the move.
    fn lazy_direction(&mut self, q: usize, dir: f64) {
        let sf = self.sf;
        let mut acc = std::mem::take(&mut self.lazy_acc);
        let mut mark = std::mem::take(&mut self.lazy_mark);
        let mut touched = std::mem::take(&mut self.lazy_touched);
        for &i in &touched {
            acc[i] = 0.0;
            mark[i] = false;
        }
        touched.clear();
        let logical_of = &self.logical_of;
        let mut add = |j: usize, dx: f64| {
            for &(i, a) in &sf.columns[j] {
                if logical_of[i] != NONE {
                    continue;
                }
                if !mark[i] {
                    mark[i] = true;
                    touched.push(i);
                }
                acc[i] += a * dx;
            }
        };
        if q < sf.n {
            add(q, dir);
        }
        for (r, row) in self.rows.iter().enumerate() {
            let b = self.basic[r];
            if b < sf.n {
                let t = row[q];
                if t != 0.0 {
                    add(b, -dir * t);
                }
            }
        }
        self.lazy_acc = acc;
        self.lazy_mark = mark;
        self.lazy_touched = touched;
    }

    /// Moves nonbasic `q` by `dir * theta`, updating basics and lazy activities.
    /// Requires `lazy_direction(q, dir)` to have been computed.
    fn apply_step(&mut self, q: usize, dir: f64, theta: f64) {
        if theta == 0.0 {
            return;
        }
        self.value[q] += dir * theta;
        for (r, row) in self.rows.iter().enumerate() {
            let t = row[q];
            if t != 0.0 {
                self.value[self.basic[r]] -= dir * t * theta;
            }
        }
        for &i in &self.lazy_touched {
            self.activity[i] += self.lazy_acc[i] * theta;
        }
    }

    fn infeasible_rows(&self) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        for (r, &b) in self.basic.iter().enumerate() {
            let x = self.value[b];
            if x < self.lo[b] - feas_tol(self.lo[b]) {
                out.push((r, 1.0));
            } else if x > self.hi[b] + feas_tol(self.hi[b]) {
                out.push((r, -1.0));
            }
        }
        out
    }

    fn phase_one_prices(&self, infeasible: &[(usize, f64)]) -> Vec<f64> {
        let mut price = vec![0.0; self.n_cols()];
        for &(r, g) in infeasible {
            for (p, &t) in price.iter_mut().zip(&self.rows[r]) {
                if t != 0.0 {
                    *p -= g * t;
                }
            }
        }
        price
    }

    #[allow(clippy::needless_range_loop)]
    fn choose_entering(&self, price: &[f64], bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.n_cols() {
            if self.lo[j] == self.hi[j] {
                continue;
            }
            let p = price[j];
            let dir = match self.state[j] {
                State::Basic => continue,
                State::AtLower if p > DUAL_TOL => 1.0,
                State::AtUpper if p < -DUAL_TOL => -1.0,
                State::Free if p.abs() > DUAL_TOL => p.signum(),
                _ => continue,
            };
            let score = p.abs();
            let better = match best {
                None => true,
                Some((bj, _, bs)) => {
                    if bland {
                        self.key(j) < self.key(bj)
                    } else {
                        score > bs
                    }
                }
            };
            if better {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn bound_candidate(x: f64, lo: f64, hi: f64, alpha: f64, phase_one: bool) -> Option<(f64, bool)> {
        if alpha > 0.0 {
            if phase_one && x < lo - feas_tol(lo) {
                Some((lo - x, false))
            } else if x > hi + feas_tol(hi) {
                None
            } else if hi.is_finite() {
                Some(((hi - x).max(0.0), true))
            } else {
                None
            }
        } else if phase_one && x > hi + feas_tol(hi) {
            Some((x - hi, true))
        } else if x < lo - feas_tol(lo) {
            None
        } else if lo.is_finite() {
            Some(((x - lo).max(0.0), false))
        } else {
            None
        }
    }

    fn primal_ratio(&mut self, q: usize, dir: f64, phase_one: bool, bland: bool) -> Option<(f64, Leave)> {
        self.lazy_direction(q, dir);
        let mut cands: Vec<Candidate> = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            let t = row[q];
            if t.abs() <= PIVOT_TOL {
                continue;
            }
            let alpha = -dir * t;
            let b = self.basic[r];
            if let Some((slack, to_upper)) =
                Self::bound_candidate(self.value[b], self.lo[b], self.hi[b], alpha, phase_one)
            {
                cands.push(Candidate {
                    leave: Leave::Row { row: r, to_upper },
                    alpha: alpha.abs(),
                    slack,
                    key: self.key(b),
                });
            }
        }
        for &i in &self.lazy_touched {
            let alpha = self.lazy_acc[i];
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let row = &self.sf.rows[i];
            if let Some((slack, to_upper)) = Self::bound_candidate(self.activity[i], row.lo, row.hi, alpha, false) {
                cands.push(Candidate {
                    leave: Leave::Lazy { srow: i, to_upper },
                    alpha: alpha.abs(),
                    slack,
                    key: self.sf.n + i,
                });
            }
        }
        let span = self.hi[q] - self.lo[q];
        let chosen = if bland {
            let mut best: Option<(f64, Candidate)> = None;
            for c in &cands {
                let ratio = c.slack / c.alpha;
                let better = match &best {
                    None => true,
                    Some((br, bc)) => ratio < br - 1e-12 || (ratio <= br + 1e-12 && c.key < bc.key),
                };
                if better {
                    best = Some((ratio, *c));
                }
            }
            best
        } else {
            let theta_max = cands.iter().map(|c| (c.slack + PRIMAL_TOL) / c.alpha).fold(f64::INFINITY, f64::min);
            let mut best: Option<(f64, Candidate)> = None;
            for c in &cands {
                let ratio = c.slack / c.alpha;
                if ratio <= theta_max {
                    let better = match &best {
                        None => true,
                        Some((_, bc)) => c.alpha > bc.alpha,
                    };
                    if better {
                        best = Some((ratio, *c));
                    }
                }
            }
            best
        };
        match chosen {
            Some((ratio, c)) if !(span.is_finite() && span <= ratio) => Some((ratio.max(0.0), c.leave)),
            _ if span.is_finite() => Some((span, Leave::Flip)),
            _ => None,
        }
    }

    fn finish_leave(&mut self, q: usize, leave: Leave) -> Result<(), SolveError> {
        match leave {
            Leave::Flip => {
                let (lo, hi) = (self.lo[q], self.hi[q]);
                if self.state[q] == State::AtLower {
                    self.state[q] = State::AtUpper;
                    self.value[q] = hi;
                } else {
                    self.state[q] = State::AtLower;
                    self.value[q] = lo;
                }
            }
            Leave::Row { row, to_upper } => self.leave_row(row, q, to_upper),
            Leave::Lazy { srow, to_upper } => {
                let p = self.materialize(srow);
                if self.rows[p][q].abs() <= PIVOT_TOL * 1e-3 {
                    return Err(SolveError::Numerical("lazily added row does not contain the entering column".into()));
                }
                self.leave_row(p, q, to_upper);
            }
        }
        Ok(())
    }

    fn leave_row(&mut self, row: usize, q: usize, to_upper: bool) {
        let b = self.basic[row];
        if to_upper {
            self.value[b] = self.hi[b];
            self.state[b] = State::AtUpper;
        } else {
            self.value[b] = self.lo[b];
            self.state[b] = State::AtLower;
        }
        self.pivot(row, q);
    }

    /// Primal simplex: phase one (sum of infeasibilities) until feasible, then
    /// phase two. Dantzig pricing, switching to Bland's rule after
    /// [`BLAND_AFTER`] consecutive degenerate pivots.
    pub fn primal(&mut self) -> Result<LpStatus, SolveError> {
        let mut degenerate = 0usize;
        loop {
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            if self.rows.len() >= self.purge_at {
                self.purge();
                self.purge_at = self.rows.len() + PURGE_SLACK.max(self.rows.len() / 2);
            }
            self.tick()?;
            let bland = degenerate >= BLAND_AFTER;
            let infeasible = self.infeasible_rows();
            let phase_one = !infeasible.is_empty();
            let entering = if phase_one {
                let price = self.phase_one_prices(&infeasible);
                self.choose_entering(&price, bland)
            } else {
                self.choose_entering(&self.d, bland)
            };
            let Some((q, dir)) = entering else {
                if phase_one {
                    return Ok(LpStatus::Infeasible);
                }
                let violated = self.violated_lazy_rows();
                if violated.is_empty() {
                    return Ok(LpStatus::Optimal);
                }
                // Drift pushed a lazy row out of bounds; make it explicit and continue.
                for i in violated {
                    self.materialize(i);
                }
                continue;
            };
            let Some((theta, leave)) = self.primal_ratio(q, dir, phase_one, bland) else {
                if phase_one {
                    return Err(SolveError::Numerical("unbounded phase-one direction".into()));
                }
                return Ok(LpStatus::Unbounded);
            };
            degenerate = if theta <= DEGENERATE_STEP { degenerate + 1 } else { 0 };
            self.apply_step(q, dir, theta);
            self.finish_leave(q, leave)?;
        }
    }

    /// The most violated lazy rows, at most [`LAZY_BATCH`] of them.
    fn violated_lazy_rows(&mut self) -> Vec<usize> {
        self.recompute_activities();
        let mut out: Vec<(usize, f64)> = Vec::new();
        for (i, row) in self.sf.rows.iter().enumerate() {
            if self.logical_of[i] != NONE {
                continue;
            }
            let a = self.activity[i];
            let viol = if a < row.lo - feas_tol(row.lo) {
                (row.lo - a) / (1.0 + row.lo.abs())
            } else if a > row.hi + feas_tol(row.hi) {
                (a - row.hi) / (1.0 + row.hi.abs())
            } else {
                continue;
            };
            out.push((i, viol));
        }
        out.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        out.truncate(LAZY_BATCH);
        out.into_iter().map(|(i, _)| i).collect()
    }

    /// Dual simplex from a dual-feasible basis. Lazy rows are checked once the
    /// materialized part is primal feasible and added if violated.
    pub fn dual(&mut self) -> Result<DualStatus, SolveError> {
        let cap = 20 * (self.n_cols() + self.rows.len()) + 1000;
        let mut count = 0usize;
        loop {
            count += 1;
            if count > cap {
                return Ok(DualStatus::Stalled);
            }
            if self.rows.len() >= self.purge_at {
                self.purge();
                self.purge_at = self.rows.len() + PURGE_SLACK.max(self.rows.len() / 2);
            }
            self.tick()?;
            let mut pick: Option<(usize, bool, f64)> = None;
            for (r, &b) in self.basic.iter().enumerate() {
                let x = self.value[b];
                let (lo, hi) = (self.lo[b], self.hi[b]);
                let (viol, below) = if x < lo - feas_tol(lo) {
                    ((lo - x) / (1.0 + lo.abs()), true)
                } else if x > hi + feas_tol(hi) {
                    ((x - hi) / (1.0 + hi.abs()), false)
                } else {
                    continue;
                };
                if pick.is_none_or(|(_, _, v)| viol > v) {
                    pick = Some((r, below, viol));
                }
            }
            let Some((r, below, _)) = pick else {
                let violated = self.violated_lazy_rows();
                if violated.is_empty() {
                    return Ok(DualStatus::Feasible);
                }
                for i in violated {
                    self.materialize(i);
                }
                continue;
            };
            let b = self.basic[r];
            let target = if below { self.lo[b] } else { self.hi[b] };
            let row = &self.rows[r];
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for (j, &t) in row.iter().enumerate() {
                if t.abs() <= PIVOT_TOL || self.lo[j] == self.hi[j] {
                    continue;
                }
                let ok = match self.state[j] {
                    State::Basic => false,
                    State::AtLower => (t < 0.0) == below,
                    State::AtUpper => (t > 0.0) == below,
                    State::Free => true,
                };
                if ok {
                    cands.push((j, t.abs(), self.d[j].abs()));
                }
            }
            if cands.is_empty() {
                return Ok(DualStatus::Infeasible);
            }
            let theta_max = cands.iter().map(|&(_, t, dj)| (dj + DUAL_TOL) / t).fold(f64::INFINITY, f64::min);
            let mut best: Option<(usize, f64)> = None;
            for &(j, t, dj) in &cands {
                if dj / t <= theta_max && best.is_none_or(|(_, bt)| t > bt) {
                    best = Some((j, t));
                }
            }
            let (q, _) = best.expect("nonempty candidate list");
            let tq = self.rows[r][q];
            // x_B(r) moves by -tq * Δx_q.
            let delta = (self.value[b] - target) / tq;
            let dir = if delta >= 0.0 { 1.0 } else { -1.0 };
            self.lazy_direction(q, dir);
            self.apply_step(q, dir, delta.abs());
            self.leave_row(r, q, !below);
        }
    }

    fn is_dual_feasible(&self) -> bool {
        (0..self.n_cols()).all(|j| {
            let dj = self.d[j];
            match self.state[j] {
                State::Basic => true,
                _ if self.lo[j] == self.hi[j] => true,
                State::AtLower => dj <= DUAL_TOL,
                State::AtUpper => dj >= -DUAL_TOL,
                State::Free => dj.abs() <= DUAL_TOL,
            }
        })
    }

    /// Drops materialized inequality rows whose logical is basic and strictly
    /// inside its bounds. Their logicals carry no price and no other basic
    /// depends on them, so the remaining tableau is exactly the tableau of
    /// the smaller system; the rows become lazy again.
    fn purge(&mut self) {
        let n = self.sf.n;
        let w = self.n_cols();
        let mut keep = vec![true; w];
        let mut any = false;
        for &b in &self.basic {
            if b < n {
                continue;
            }
            let (x, lo, hi) = (self.value[b], self.lo[b], self.hi[b]);
            let above = lo == f64::NEG_INFINITY || x > lo + PURGE_MARGIN * (1.0 + lo.abs());
            let below = hi == f64::INFINITY || x < hi - PURGE_MARGIN * (1.0 + hi.abs());
            if above && below {
                keep[b] = false;
                any = true;
            }
        }
        if !any {
            return;
        }
        for (c, &kept) in keep.iter().enumerate().skip(n) {
            if !kept {
                let srow = self.row_of_logical[c - n];
                self.logical_of[srow] = NONE;
                self.activity[srow] = self.value[c];
            }
        }
        let old_rows = std::mem::take(&mut self.rows);
        let old_basic = std::mem::take(&mut self.basic);
        for (row, b) in old_rows.into_iter().zip(old_basic) {
            if !keep[b] {
                continue;
            }
            let compact: Vec<f64> = row.into_iter().zip(&keep).filter(|(_, &k)| k).map(|(v, _)| v).collect();
            self.rows.push(compact);
            self.basic.push(b);
        }
        fn retain<T: Copy>(v: &mut Vec<T>, keep: &[bool]) {
            let mut k = 0;
            v.retain(|_| {
                k += 1;
                keep[k - 1]
            });
        }
        retain(&mut self.lo, &keep);
        retain(&mut self.hi, &keep);
        retain(&mut self.cost, &keep);
        retain(&mut self.value, &keep);
        retain(&mut self.state, &keep);
        retain(&mut self.d, &keep);
        retain(&mut self.row_of_logical, &keep[n..]);
        let mut new_index = vec![NONE; w];
        let mut k = 0;
        for (c, &kc) in keep.iter().enumerate() {
            if kc {
                new_index[c] = k;
                k += 1;
            }
        }
        for b in self.basic.iter_mut() {
            *b = new_index[*b];
        }
        for (p, &srow) in self.row_of_logical.iter().enumerate() {
            self.logical_of[srow] = n + p;
        }
        self.basic_row = vec![NONE; k];
        for (p, &b) in self.basic.iter().enumerate() {
            self.basic_row[b] = p;
        }
    }

    /// Changes the bounds of column `j`, moving it if nonbasic.
    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
        if self.state[j] == State::Basic {
            return;
        }
        let (state, target) = match self.state[j] {
            State::AtLower if lo.is_finite() => (State::AtLower, lo),
            State::AtUpper if hi.is_finite() => (State::AtUpper, hi),
            _ if lo.is_finite() => (State::AtLower, lo),
            _ if hi.is_finite() => (State::AtUpper, hi),
            _ => (State::Free, 0.0),
        };
        self.state[j] = state;
        let delta = target - self.value[j];
        if delta != 0.0 {
            let dir = delta.signum();
            self.lazy_direction(j, dir);
            self.apply_step(j, dir, delta.abs());
            self.value[j] = target;
        }
    }

    /// Rebuilds the tableau, basic values and reduced costs from the original
    /// rows and the current basis.
    pub fn refactor(&mut self) -> Result<(), SolveError> {
        let sf = self.sf;
        let n = sf.n;
        let w = self.n_cols();
        let k = self.rows.len();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(k);
        for p in 0..k {
            let col = n + p;
            let srow = self.row_of_logical[p];
            let mut v = vec![0.0; w];
            for &(j, a) in &sf.rows[srow].coeffs {
                v[j] = -a;
            }
            v[col] = 1.0;
            rows.push(v);
        }
        let mut basic: Vec<usize> = (0..k).map(|p| n + p).collect();
        let mut pending: Vec<bool> = (0..k).map(|p| self.state[n + p] != State::Basic).collect();
        let structural_basics: Vec<usize> = (0..n).filter(|&j| self.state[j] == State::Basic).collect();
        for &j in &structural_basics {
            let mut best = (NONE, 0.0);
            for p in 0..k {
                if pending[p] && rows[p][j].abs() > best.1 {
                    best = (p, rows[p][j].abs());
                }
            }
            let (p, mag) = best;
            if p == NONE || mag < 1e-11 {
                return Err(SolveError::Numerical("singular basis during refactorization".into()));
            }
            pending[p] = false;
            let mut prow = std::mem::take(&mut rows[p]);
            let inv = 1.0 / prow[j];
            let mut nz = Vec::new();
            for (c, x) in prow.iter_mut().enumerate() {
                if *x != 0.0 {
                    *x *= inv;
                    nz.push(c);
                }
            }
            prow[j] = 1.0;
            for (r, row) in rows.iter_mut().enumerate() {
                if r == p {
                    continue;
                }
                let f = row[j];
                if f == 0.0 {
                    continue;
                }
                for &c in &nz {
                    row[c] -= f * prow[c];
                }
                row[j] = 0.0;
            }
            rows[p] = prow;
            basic[p] = j;
        }
        self.rows = rows;
        self.basic = basic;
        for c in 0..w {
            self.basic_row[c] = NONE;
        }
        for (p, &b) in self.basic.iter().enumerate() {
            self.basic_row[b] = p;
        }
        self.recompute_basic_values();
        self.recompute_reduced_costs();
        self.recompute_activities();
        self.pivots_since_refactor = 0;
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        for p in 0..self.rows.len() {
            let mut x = 0.0;
            for (j, &t) in self.rows[p].iter().enumerate() {
                if t != 0.0 && self.state[j] != State::Basic {
                    x -= t * self.value[j];
                }
            }
            let b = self.basic[p];
            self.value[b] = x;
        }
    }

    fn recompute_reduced_costs(&mut self) {
        let mut d = self.cost.clone();
        for (p, row) in self.rows.iter().enumerate() {
            let cb = self.cost[self.basic[p]];
            if cb == 0.0 {
                continue;
            }
            for (dj, &t) in d.iter_mut().zip(row) {
                if t != 0.0 {
                    *dj -= cb * t;
                }
            }
        }
        for &b in &self.basic {
            d[b] = 0.0;
        }
        self.d = d;
    }

    /// Solves to optimality from the current basis (starting with the dual
    /// simplex when the basis is dual feasible), refactoring once at the end
    /// when many pivots have accumulated.
    pub fn solve(&mut self) -> Result<LpStatus, SolveError> {
        if self.is_dual_feasible() && self.dual()? == DualStatus::Infeasible {
            return Ok(LpStatus::Infeasible);
        }
        let status = self.primal()?;
        if status == LpStatus::Optimal {
            self.purge();
        }
        if status == LpStatus::Optimal && self.pivots_since_refactor > 0 {
            self.refactor()?;
            return self.primal();
        }
        Ok(status)
    }

    /// Re-optimizes after bound changes: dual simplex, then a primal clean-up.
    pub fn resolve(&mut self) -> Result<LpStatus, SolveError> {
        match self.dual()? {
            DualStatus::Infeasible => Ok(LpStatus::Infeasible),
            DualStatus::Feasible | DualStatus::Stalled => self.primal(),
        }
    }

    pub fn structural_values(&self) -> Vec<f64> {
        self.value[..self.sf.n].to_vec()
    }

    pub fn objective(&self) -> f64 {
        self.sf.cost.iter().zip(&self.value).map(|(c, x)| c * x).sum()
    }

    /// Row prices `π` (reduced costs of the logicals), one per standard row.
    pub fn row_duals(&self) -> Vec<f64> {
        self.logical_of.iter().map(|&c| if c == NONE { 0.0 } else { self.d[c] }).collect()
    }
}
