use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::model::MilpModel;
use crate::simplex::{LpStatus, StandardForm, Tableau};
use crate::{MilpSolution, Progress, SolveError, SolveOptions, Status, INTEGRALITY_TOL};

/// Gap at or below which a search is reported as `Optimal` rather than `GapLimit`.
const OPTIMAL_ABS_GAP: f64 = 1e-6;
const OPTIMAL_REL_GAP: f64 = 1e-6;

struct Node {
    bound: f64,
    depth: usize,
    seq: usize,
    bounds: Vec<(usize, f64, f64)>,
    values: Vec<f64>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Max-heap: best bound first, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound).then(self.depth.cmp(&other.depth)).then(other.seq.cmp(&self.seq))
    }
}

fn most_fractional(values: &[f64], integer: &[bool]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (j, (&v, &int)) in values.iter().zip(integer).enumerate() {
        if !int {
            continue;
        }
        let frac = v - v.floor();
        let score = frac.min(1.0 - frac);
        if score <= INTEGRALITY_TOL {
            continue;
        }
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((j, score));
        }
    }
    best.map(|(j, _)| j)
}

fn with_bound(bounds: &[(usize, f64, f64)], j: usize, lo: f64, hi: f64) -> Vec<(usize, f64, f64)> {
    let mut out: Vec<(usize, f64, f64)> = bounds.iter().copied().filter(|b| b.0 != j).collect();
    out.push((j, lo, hi));
    out
}

fn gap_closed(bound: f64, incumbent: f64, abs: f64, rel: f64) -> bool {
    let gap = bound - incumbent;
    gap <= abs || gap <= rel * incumbent.abs()
}

struct Search<'a> {
    model: &'a MilpModel,
    root: Tableau<'a>,
    opts: SolveOptions,
    incumbent: Option<(f64, Vec<f64>)>,
    nodes: usize,
    seq: usize,
    progress: Vec<Progress>,
}

impl<'a> Search<'a> {
    fn prune_tol(&self, inc: f64) -> f64 {
        self.opts.abs_gap.max(self.opts.rel_gap * inc.abs())
    }

    /// Solves the LP at a node. Returns `None` when infeasible or pruned; an
    /// integral solution updates the incumbent.
    fn evaluate(
        &mut self,
        bounds: Vec<(usize, f64, f64)>,
        parent_bound: f64,
        depth: usize,
    ) -> Result<Option<Node>, SolveError> {
        self.nodes += 1;
        let mut t = self.root.clone();
        for &(j, lo, hi) in &bounds {
            t.set_bounds(j, lo, hi);
        }
        match t.resolve()? {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Ok(None),
            LpStatus::Unbounded => {
                return Err(SolveError::Numerical("bounded node relaxation reported unbounded".into()))
            }
        }
        let bound = t.objective().min(parent_bound);
        let values = t.structural_values();
        if let Some((inc, _)) = &self.incumbent {
            if bound <= inc + self.prune_tol(*inc) {
                return Ok(None);
            }
        }
        if most_fractional(&values, self.model.integrality()).is_none() {
            self.accept(t, values)?;
            return Ok(None);
        }
        self.seq += 1;
        Ok(Some(Node { bound, depth, seq: self.seq, bounds, values }))
    }

    /// Fixes the integer columns at their rounded values, re-solves for the
    /// continuous part and records the result if it beats the incumbent.
    fn accept(&mut self, mut t: Tableau<'a>, values: Vec<f64>) -> Result<(), SolveError> {
        let integer = self.model.integrality();
        for (j, &v) in values.iter().enumerate() {
            if integer[j] {
                let r = v.round();
                t.set_bounds(j, r, r);
            }
        }
        let mut polished = match t.resolve() {
            Ok(LpStatus::Optimal) => t.structural_values(),
            _ => values,
        };
        for (j, v) in polished.iter_mut().enumerate() {
            if integer[j] {
                *v = v.round();
            }
        }
        let obj = self.model.objective_value(&polished);
        if self.incumbent.as_ref().is_none_or(|(inc, _)| obj > *inc) {
            self.incumbent = Some((obj, polished));
        }
        Ok(())
    }

    fn record(&mut self, open_bound: Option<f64>) {
        let inc = self.incumbent.as_ref().map(|(v, _)| *v);
        let best_bound = match (open_bound, inc) {
            (Some(b), Some(i)) => b.max(i),
            (Some(b), None) => b,
            (None, Some(i)) => i,
            (None, None) => f64::NEG_INFINITY,
        };
        let best_bound = match self.progress.last() {
            Some(p) => best_bound.min(p.best_bound),
            None => best_bound,
        };
        self.progress.push(Progress { nodes: self.nodes, incumbent: inc, best_bound });
    }
}

pub(crate) fn branch_and_bound(model: &MilpModel, opts: &SolveOptions) -> Result<MilpSolution, SolveError> {
    let sf = StandardForm::new(model);
    if sf.infeasible_empty_row {
        return Ok(MilpSolution::without_solution(Status::Infeasible, 0));
    }
    let mut root = Tableau::new(&sf);
    let root_status = root.solve()?;
    match root_status {
        LpStatus::Infeasible => return Ok(MilpSolution::without_solution(Status::Infeasible, 1)),
        LpStatus::Unbounded => return Ok(MilpSolution::without_solution(Status::Unbounded, 1)),
        LpStatus::Optimal => {}
    }
    let root_bound = root.objective();
    let root_values = root.structural_values();
    let mut search = Search {
        model,
        root: root.clone(),
        opts: opts.clone(),
        incumbent: None,
        nodes: 1,
        seq: 0,
        progress: Vec::new(),
    };
    let mut heap = BinaryHeap::new();
    if most_fractional(&root_values, model.integrality()).is_none() {
        search.accept(root, root_values)?;
    } else {
        heap.push(Node { bound: root_bound, depth: 0, seq: 0, bounds: Vec::new(), values: root_values });
    }
    search.record(heap.peek().map(|n| n.bound));

    let mut hit_node_limit = false;
    while let Some(top) = heap.peek() {
        if let Some((inc, _)) = &search.incumbent {
            if gap_closed(top.bound, *inc, opts.abs_gap, opts.rel_gap) {
                break;
            }
        }
        if search.nodes >= opts.node_limit {
            hit_node_limit = true;
            break;
        }
        let node = heap.pop().expect("peeked");
        let j = most_fractional(&node.values, model.integrality()).expect("open nodes are fractional");
        let v = node.values[j];
        let (lo, hi) = node
            .bounds
            .iter()
            .rev()
            .find(|b| b.0 == j)
            .map(|b| (b.1, b.2))
            .unwrap_or((model.lower()[j], model.upper()[j]));
        let down = with_bound(&node.bounds, j, lo, v.floor());
        let up = with_bound(&node.bounds, j, v.ceil(), hi);
        for child in [down, up] {
            if let Some(n) = search.evaluate(child, node.bound, node.depth + 1)? {
                heap.push(n);
            }
        }
        log::trace!("node {} bound {:.9} open {}", search.nodes, node.bound, heap.len());
        search.record(heap.peek().map(|n| n.bound));
    }

    let open_bound = heap.peek().map(|n| n.bound);
    let nodes = search.nodes;
    let progress = search.progress;
    let Some((objective, values)) = search.incumbent else {
        let status = if hit_node_limit { Status::NodeLimit } else { Status::Infeasible };
        let mut sol = MilpSolution::without_solution(status, nodes);
        sol.best_bound = open_bound.unwrap_or(f64::NEG_INFINITY);
        sol.progress = progress;
        return Ok(sol);
    };
    let best_bound = open_bound.map_or(objective, |b| b.max(objective));
    let status = if hit_node_limit {
        Status::NodeLimit
    } else if gap_closed(best_bound, objective, OPTIMAL_ABS_GAP, OPTIMAL_REL_GAP) {
        Status::Optimal
    } else {
        Status::GapLimit
    };
    Ok(MilpSolution { status, values, objective, best_bound, nodes_explored: nodes, progress })
}
