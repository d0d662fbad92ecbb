//! Assigning a shift plan to individual drivers.
//!
//! [`greedy_assign`] hands out shifts in start order to any driver whose
//! previous extended shift (shift plus break) has ended; this respects all
//! breaks but may leave shift counts unequal. [`rebalance`] then repeatedly
//! moves shifts from the busiest to the idlest driver by swapping an
//! alternating path in the overlap graph of their shifts, until every driver
//! works exactly `s` shifts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Boundary, Scenario, ShiftPlan};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RosterError {
    #[error("rostering requires a zero-padded boundary")]
    CircularBoundary,
    #[error("plan has {got} steps, scenario has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no driver is free for a shift starting at step {t}")]
    NoAvailableDriver { t: usize },
    #[error("roster holds {got} shifts, expected {expected}")]
    WrongTotal { expected: u64, got: u64 },
    #[error("shift starting at {start} overlaps {degree} shifts of the other driver")]
    DegreeTooHigh { start: usize, degree: usize },
    #[error("no alternating path moves a shift from driver {from} to driver {to}")]
    NoSwapPath { from: usize, to: usize },
    #[error("shifts of unequal length: {0:?}")]
    UnequalLength(ExtendedShift),
}

/// A shift together with the break after it, as the half-open interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ExtendedShift {
    pub start: usize,
    pub end: usize,
}

impl ExtendedShift {
    pub fn new(start: usize, delta: usize, beta: usize) -> Self {
        ExtendedShift { start, end: start + delta + beta }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

pub fn overlap(a: &ExtendedShift, b: &ExtendedShift) -> bool {
    a.start < b.end && b.start < a.end
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Roster {
    /// Shifts of each driver, sorted by start.
    pub drivers: Vec<Vec<ExtendedShift>>,
}

impl Roster {
    pub fn total_shifts(&self) -> u64 {
        self.drivers.iter().map(|d| d.len() as u64).sum()
    }

    /// `Σ_driver |count − s|`.
    pub fn imbalance(&self, s: u32) -> u64 {
        self.drivers.iter().map(|d| (d.len() as i64 - i64::from(s)).unsigned_abs()).sum()
    }
}

pub fn greedy_assign(plan: &ShiftPlan, sc: &Scenario) -> Result<Roster, RosterError> {
    if sc.boundary == Boundary::Circular {
        return Err(RosterError::CircularBoundary);
    }
    if plan.x.len() != sc.t {
        return Err(RosterError::LengthMismatch { expected: sc.t, got: plan.x.len() });
    }
    let n = sc.n as usize;
    let mut drivers: Vec<Vec<ExtendedShift>> = vec![Vec::new(); n];
    let mut free_from = vec![0usize; n];
    for (k, &count) in plan.x.iter().enumerate() {
        let t = k + 1;
        for _ in 0..count {
            let pick = (0..n)
                .filter(|&i| free_from[i] <= t)
                .min_by_key(|&i| (drivers[i].len(), i))
                .ok_or(RosterError::NoAvailableDriver { t })?;
            let shift = ExtendedShift::new(t, sc.delta, sc.beta);
            free_from[pick] = shift.end;
            drivers[pick].push(shift);
        }
    }
    Ok(Roster { drivers })
}

/// One path swap performed by [`rebalance`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Swap {
    pub from: usize,
    pub to: usize,
    /// Shifts moved from `from` to `to`.
    pub moved_out: Vec<ExtendedShift>,
    /// Shifts moved from `to` to `from`.
    pub moved_in: Vec<ExtendedShift>,
    pub imbalance_before: u64,
    pub imbalance_after: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RebalanceStats {
    pub swaps: Vec<Swap>,
}

pub fn rebalance(roster: &Roster, s: u32) -> Result<Roster, RosterError> {
    rebalance_with_stats(roster, s).map(|(r, _)| r)
}

pub fn rebalance_with_stats(roster: &Roster, s: u32) -> Result<(Roster, RebalanceStats), RosterError> {
    let expected = u64::from(s) * roster.drivers.len() as u64;
    if roster.total_shifts() != expected {
        return Err(RosterError::WrongTotal { expected, got: roster.total_shifts() });
    }
    let mut drivers = roster.drivers.clone();
    for d in drivers.iter_mut() {
        d.sort();
    }
    if let Some(first) = drivers.iter().flatten().next() {
        if let Some(bad) = drivers.iter().flatten().find(|e| e.len() != first.len()) {
            return Err(RosterError::UnequalLength(*bad));
        }
    }
    let target = s as usize;
    let mut stats = RebalanceStats::default();
    // Busiest driver and idlest driver, lowest index on ties.
    while let Some(d1) = (0..drivers.len())
        .filter(|&i| drivers[i].len() > target)
        .max_by_key(|&i| (drivers[i].len(), std::cmp::Reverse(i)))
    {
        let d2 = (0..drivers.len())
            .filter(|&i| drivers[i].len() < target)
            .min_by_key(|&i| (drivers[i].len(), i))
            .expect("a driver above the target implies one below it");
        let before = Roster { drivers: drivers.clone() }.imbalance(s);
        let (out, inn) = swap_path(&drivers[d1], &drivers[d2])?.ok_or(RosterError::NoSwapPath { from: d1, to: d2 })?;
        drivers[d1].retain(|e| !out.contains(e));
        drivers[d2].retain(|e| !inn.contains(e));
        drivers[d1].extend(inn.iter().copied());
        drivers[d2].extend(out.iter().copied());
        drivers[d1].sort();
        drivers[d2].sort();
        let after = Roster { drivers: drivers.clone() }.imbalance(s);
        stats.swaps.push(Swap {
            from: d1,
            to: d2,
            moved_out: out,
            moved_in: inn,
            imbalance_before: before,
            imbalance_after: after,
        });
    }
    Ok((Roster { drivers }, stats))
}

/// Finds a connected component of the overlap graph between `s1` and `s2`
/// that holds exactly one more shift of `s1` than of `s2`, preferring the
/// one with the earliest start. Returns the `s1` and `s2` members.
#[allow(clippy::type_complexity)]
fn swap_path(
    s1: &[ExtendedShift],
    s2: &[ExtendedShift],
) -> Result<Option<(Vec<ExtendedShift>, Vec<ExtendedShift>)>, RosterError> {
    // Nodes 0..s1.len() are s1, the rest s2. Shifts of one driver never overlap.
    let nodes: Vec<(ExtendedShift, bool)> =
        s1.iter().map(|&e| (e, true)).chain(s2.iter().map(|&e| (e, false))).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for i in 0..s1.len() {
        for j in s1.len()..nodes.len() {
            if overlap(&nodes[i].0, &nodes[j].0) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    if let Some(i) = (0..nodes.len()).find(|&i| adj[i].len() > 2) {
        return Err(RosterError::DegreeTooHigh { start: nodes[i].0.start, degree: adj[i].len() });
    }
    let mut component = vec![usize::MAX; nodes.len()];
    let mut best: Option<(usize, Vec<usize>)> = None;
    for root in 0..nodes.len() {
        if component[root] != usize::MAX {
            continue;
        }
        let mut members = vec![root];
        component[root] = root;
        let mut k = 0;
        while k < members.len() {
            for &nb in &adj[members[k]] {
                if component[nb] == usize::MAX {
                    component[nb] = root;
                    members.push(nb);
                }
            }
            k += 1;
        }
        let ones = members.iter().filter(|&&m| nodes[m].1).count();
        if ones != members.len() - ones + 1 {
            continue;
        }
        let earliest = members.iter().map(|&m| nodes[m].0.start).min().expect("nonempty component");
        if best.as_ref().is_none_or(|(e, _)| earliest < *e) {
            best = Some((earliest, members));
        }
    }
    let Some((_, members)) = best else {
        return Ok(None);
    };
    let out = members.iter().filter(|&&m| nodes[m].1).map(|&m| nodes[m].0).collect();
    let inn = members.iter().filter(|&&m| !nodes[m].1).map(|&m| nodes[m].0).collect();
    Ok(Some((out, inn)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The roster starts `found` shifts at step `t` where the plan starts `expected`.
    StartMismatch {
        t: usize,
        expected: u64,
        found: u64,
    },
    /// Two extended shifts of one driver overlap.
    Overlap {
        driver: usize,
        first: ExtendedShift,
        second: ExtendedShift,
    },
    WrongCount {
        driver: usize,
        count: usize,
        expected: u32,
    },
    TooManyDrivers {
        count: usize,
        limit: u32,
    },
    /// A shift whose length differs from `delta + beta`.
    BadShift {
        driver: usize,
        shift: ExtendedShift,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

pub fn verify_roster(roster: &Roster, plan: &ShiftPlan, sc: &Scenario) -> RosterReport {
    let mut violations = Vec::new();
    let mut starts: BTreeMap<usize, u64> = BTreeMap::new();
    for (driver, shifts) in roster.drivers.iter().enumerate() {
        for shift in shifts {
            *starts.entry(shift.start).or_default() += 1;
            if *shift != ExtendedShift::new(shift.start, sc.delta, sc.beta) {
                violations.push(Violation::BadShift { driver, shift: *shift });
            }
        }
        let mut sorted = shifts.clone();
        sorted.sort();
        for (i, a) in sorted.iter().enumerate() {
            for b in &sorted[i + 1..] {
                if overlap(a, b) {
                    violations.push(Violation::Overlap { driver, first: *a, second: *b });
                }
            }
        }
        if shifts.len() != sc.s as usize {
            violations.push(Violation::WrongCount { driver, count: shifts.len(), expected: sc.s });
        }
    }
    for (k, &x) in plan.x.iter().enumerate() {
        let found = starts.remove(&(k + 1)).unwrap_or(0);
        if found != u64::from(x) {
            violations.push(Violation::StartMismatch { t: k + 1, expected: u64::from(x), found });
        }
    }
    for (t, found) in starts {
        violations.push(Violation::StartMismatch { t, expected: 0, found });
    }
    if roster.drivers.len() > sc.n as usize {
        violations.push(Violation::TooManyDrivers { count: roster.drivers.len(), limit: sc.n });
    }
    RosterReport { ok: violations.is_empty(), violations }
}

/// Greedy assignment followed by rebalancing.
pub fn build_roster(plan: &ShiftPlan, sc: &Scenario) -> Result<Roster, RosterError> {
    rebalance(&greedy_assign(plan, sc)?, sc.s)
}
