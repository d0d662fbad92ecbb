//! Plans one week with ten drivers and prints the gap to the shift-agnostic optimum.

use std::time::Instant;

use shiftplan::benchmark::relative_gap;
use shiftplan::domain::Scenario;
use shiftplan::planner::plan;

fn main() {
    let n: u32 = std::env::args().nth(1).and_then(|v| v.parse().ok()).unwrap_or(10);
    let mut sc = Scenario::new(168, n, 5, 8, 8, 10.0, 2.0);
    if let Some(d) = std::env::args().nth(2).and_then(|v| v.parse().ok()) {
        sc.d_max = d;
    }
    let start = Instant::now();
    let res = plan(&sc).expect("plan");
    let gap = relative_gap(&res.plan, &sc).expect("gap");
    println!(
        "N={} status={} nodes={} reward={:.6} gap={:.6} ({:.2?})",
        sc.n,
        res.status,
        res.nodes,
        res.true_reward,
        gap.delta,
        start.elapsed()
    );
}
