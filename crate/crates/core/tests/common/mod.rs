//! Brute-force oracles and random generators shared by the integration tests.
//!
//! The oracles recompute windows and rewards from scratch instead of calling
//! into the library, so a bug in one is unlikely to hide in the other.

#![allow(dead_code)]

use rand::Rng;
use shiftplan::domain::{Boundary, DemandModel, Scenario, ShiftPlan};
use shiftplan::roster::{ExtendedShift, Roster};

pub fn reward(d: f64, a: f64, y: f64) -> f64 {
    if d == 0.0 {
        0.0
    } else {
        d * (1.0 - (-a * y / d).exp())
    }
}

/// Sum of `x` over the `len` steps ending at each step.
pub fn window_sums(x: &[u32], len: usize, boundary: Boundary) -> Vec<u32> {
    let t = x.len() as i64;
    (0..t)
        .map(|k| {
            (0..len as i64)
                .filter_map(|j| {
                    let i = k - j;
                    match boundary {
                        Boundary::ZeroPadded => (i >= 0).then_some(i),
                        Boundary::Circular => Some(i.rem_euclid(t)),
                    }
                })
                .map(|i| x[i as usize])
                .sum()
        })
        .collect()
}

pub fn demand(sc: &Scenario) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    (1..=sc.t)
        .map(|t| {
            let tf = t as f64;
            let v = match &sc.demand_model {
                DemandModel::EnvelopeSinusoid => {
                    sc.d_max / 2.0 * (1.0 - (pi * tf / 12.0).cos()) * (pi * tf / sc.t as f64).sin()
                }
                DemandModel::OffsetSinusoid => sc.d_max * (1.0 + (pi * tf / 12.0).sin()),
                DemandModel::Explicit(d) => d[t - 1],
            };
            v.max(0.0)
        })
        .collect()
}

pub fn feasible(sc: &Scenario, x: &[u32]) -> bool {
    let total: u64 = x.iter().map(|&v| u64::from(v)).sum();
    if total != sc.total_shifts() {
        return false;
    }
    let y = window_sums(x, sc.delta, sc.boundary);
    let z = window_sums(x, sc.delta + sc.beta, sc.boundary);
    let cap = sc.c_veh.unwrap_or(u32::MAX);
    z.iter().all(|&v| v <= sc.n) && y.iter().all(|&v| v <= cap) && x.iter().all(|&v| v <= sc.n)
}

pub fn plan_reward(sc: &Scenario, x: &[u32]) -> f64 {
    let d = demand(sc);
    window_sums(x, sc.delta, sc.boundary).iter().zip(&d).map(|(&y, &d)| reward(d, sc.a, f64::from(y))).sum()
}

/// Best reward over all feasible plans, by enumerating every vector in `{0..=N}^T`.
pub fn enumerate_best(sc: &Scenario) -> Option<(f64, Vec<u32>)> {
    let t = sc.t;
    let n = sc.n;
    let mut x = vec![0u32; t];
    let mut best: Option<(f64, Vec<u32>)> = None;
    loop {
        if feasible(sc, &x) {
            let r = plan_reward(sc, &x);
            if best.as_ref().is_none_or(|(b, _)| r > *b) {
                best = Some((r, x.clone()));
            }
        }
        let mut k = 0;
        while k < t && x[k] == n {
            x[k] = 0;
            k += 1;
        }
        if k == t {
            return best;
        }
        x[k] += 1;
    }
}

/// Scenario with `T ≤ 8`, `N ≤ 2`, `s ≤ 2`, `δ ≤ 2`, `β ≤ 1`.
pub fn random_tiny_scenario<R: Rng>(rng: &mut R) -> Scenario {
    let t = rng.gen_range(1..=8);
    let n = rng.gen_range(0..=2);
    let s = rng.gen_range(1..=2);
    let delta = rng.gen_range(1..=2.min(t));
    let beta = rng.gen_range(0..=1);
    let a = rng.gen_range(0.2..4.0);
    let mut sc = Scenario::new(t, n, s, delta, beta, rng.gen_range(0.0..5.0), a);
    sc.demand_model = match rng.gen_range(0..4) {
        0 => DemandModel::EnvelopeSinusoid,
        1 => DemandModel::OffsetSinusoid,
        _ => DemandModel::Explicit(
            (0..t).map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(0.0..5.0) }).collect(),
        ),
    };
    if rng.gen_bool(0.3) {
        sc.boundary = Boundary::Circular;
    }
    if rng.gen_bool(0.3) {
        sc.c_veh = Some(rng.gen_range(1..=2));
    }
    sc
}

/// Small zero-padded scenario with random explicit demand.
pub fn random_roster_scenario<R: Rng>(rng: &mut R) -> Scenario {
    let delta = rng.gen_range(1..=4);
    let beta = rng.gen_range(0..=3);
    let s = rng.gen_range(1..=4);
    let n = rng.gen_range(1..=5);
    let t = rng.gen_range((delta + beta) * s as usize..=(delta + beta) * s as usize + 12);
    let mut sc = Scenario::new(t, n, s, delta, beta, 1.0, rng.gen_range(0.5..3.0));
    sc.demand_model = DemandModel::Explicit((0..t).map(|_| rng.gen_range(0.0..4.0)).collect());
    sc
}

/// Places shifts one at a time at random steps that keep every extended
/// window within `N`; retries from scratch when it paints itself into a corner.
pub fn random_feasible_plan<R: Rng>(sc: &Scenario, rng: &mut R) -> Option<ShiftPlan> {
    let ext = sc.delta + sc.beta;
    for _ in 0..200 {
        let mut x = vec![0u32; sc.t];
        let mut z = vec![0u32; sc.t];
        let mut placed = 0;
        while placed < sc.total_shifts() {
            let open: Vec<usize> = (0..sc.t).filter(|&k| (k..(k + ext).min(sc.t)).all(|i| z[i] < sc.n)).collect();
            if open.is_empty() {
                break;
            }
            let k = open[rng.gen_range(0..open.len())];
            x[k] += 1;
            for zi in z.iter_mut().take((k + ext).min(sc.t)).skip(k) {
                *zi += 1;
            }
            placed += 1;
        }
        if placed == sc.total_shifts() {
            debug_assert!(feasible(sc, &x));
            return Some(ShiftPlan::new(x));
        }
    }
    None
}

/// Assigns shifts in start order, each to a uniformly random free driver.
/// Valid whenever the plan respects `z_t ≤ N`, but usually unbalanced.
pub fn random_assignment<R: Rng>(plan: &ShiftPlan, sc: &Scenario, rng: &mut R) -> Option<Roster> {
    let mut drivers: Vec<Vec<ExtendedShift>> = vec![Vec::new(); sc.n as usize];
    for (k, &count) in plan.x.iter().enumerate() {
        let start = k + 1;
        for _ in 0..count {
            let free: Vec<usize> =
                (0..drivers.len()).filter(|&i| drivers[i].last().is_none_or(|e| e.end <= start)).collect();
            if free.is_empty() {
                return None;
            }
            let i = free[rng.gen_range(0..free.len())];
            drivers[i].push(ExtendedShift::new(start, sc.delta, sc.beta));
        }
    }
    Some(Roster { drivers })
}
