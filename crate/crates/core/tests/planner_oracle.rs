mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shiftplan::domain::{total_reward, Boundary, DemandModel, Scenario};
use shiftplan::planner::{plan, PlanError};
use shiftplan_milp::Status;

fn check(sc: &Scenario) {
    let oracle = common::enumerate_best(sc);
    match (plan(sc), oracle) {
        (Ok(res), Some((best, _))) => {
            assert_eq!(res.status, Status::Optimal, "{sc:?}");
            assert!((res.true_reward - best).abs() <= 1e-6, "{sc:?}: {} vs {best}", res.true_reward);
            assert!((res.mip_objective - best).abs() <= 1e-6, "{sc:?}: {} vs {best}", res.mip_objective);
            assert!(common::feasible(sc, &res.plan.x), "{sc:?}: {:?}", res.plan);
            assert!((total_reward(&res.plan, sc).unwrap() - common::plan_reward(sc, &res.plan.x)).abs() < 1e-12);
        }
        (Err(PlanError::NoSolution(Status::Infeasible)), None) => {}
        (got, want) => panic!("{sc:?}: planner {got:?}, enumeration {want:?}"),
    }
}

#[test]
fn matches_enumeration_on_random_tiny_scenarios() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..80 {
        check(&common::random_tiny_scenario(&mut rng));
    }
}

#[test]
fn matches_enumeration_with_wraparound_and_caps() {
    let mut sc = Scenario::new(6, 2, 2, 2, 1, 3.0, 1.5);
    sc.demand_model = DemandModel::Explicit(vec![0.0, 4.0, 1.0, 0.0, 3.0, 0.5]);
    check(&sc);
    sc.boundary = Boundary::Circular;
    check(&sc);
    sc.c_veh = Some(1);
    check(&sc);
}

#[test]
fn circular_windows_longer_than_the_horizon() {
    let mut sc = Scenario::new(3, 2, 1, 2, 1, 1.0, 1.0);
    sc.boundary = Boundary::Circular;
    sc.demand_model = DemandModel::Explicit(vec![1.0, 2.0, 3.0]);
    check(&sc);
    sc.n = 1;
    check(&sc);
}

#[test]
fn crowded_scenarios_are_infeasible() {
    let sc = Scenario::new(4, 1, 2, 2, 2, 1.0, 1.0);
    assert!(common::enumerate_best(&sc).is_none());
    check(&sc);
}
