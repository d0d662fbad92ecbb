//! Reward-maximizing shift planning.
//!
//! A [`Scenario`](domain::Scenario) describes the horizon, the drivers and
//! the demand. [`planner::plan`] solves the shift-planning MILP,
//! [`benchmark`] supplies the shift-agnostic optimum and the traditional
//! standards it is compared against, and [`roster`] turns a plan into
//! per-driver schedules.

pub mod benchmark;
pub mod domain;
pub mod experiment;
pub mod io;
pub mod piecewise;
pub mod planner;
pub mod roster;
