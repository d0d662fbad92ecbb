//! CSV records written and read by the command-line tools.
//!
//! Every file has a header row, LF line endings and `.` as decimal
//! separator. Floats are written in shortest round-trip form, so reading a
//! file back reproduces the values exactly.

use std::io::{Read, Write};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ShiftPlan, SupplyCurve};
use crate::roster::{ExtendedShift, Roster};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("row {row}: {reason}")]
    Invalid { row: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanRow {
    pub t: usize,
    pub x: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupplyRow {
    pub t: usize,
    pub demand: f64,
    pub y: u32,
    pub z: u32,
    pub y_star: f64,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep_value: u32,
    pub relative_gap: f64,
    pub true_reward: f64,
    pub r_star: f64,
    pub nodes: usize,
    pub n: u32,
    pub s: u32,
    pub delta: usize,
    pub d_max: f64,
    pub status: String,
}

/// Supply divided by the total working time `s·N·δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedSupplyRow {
    pub sweep_value: u32,
    pub t: usize,
    pub y: f64,
    pub y_star: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    #[serde(rename = "N")]
    pub n: u32,
    pub gap_ours: f64,
    pub gap_service: f64,
    pub gap_economic: f64,
}

/// Gap of one baseline at one value of its parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessRow {
    #[serde(rename = "N")]
    pub n: u32,
    pub standard: String,
    pub c: f64,
    pub gap: f64,
    pub gap_ours: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterRow {
    pub driver_id: usize,
    pub shift_index: usize,
    pub start_step: usize,
    /// End of the working part, excluding the break.
    pub end_step: usize,
}

pub fn write_rows<W: Write, T: Serialize>(out: W, rows: &[T]) -> Result<(), IoError> {
    write_rows_with_header(out, rows, None)
}

/// Writes `rows`; `header` is used when `rows` is empty (serde derives the
/// header from the first record otherwise).
pub fn write_rows_with_header<W: Write, T: Serialize>(
    out: W,
    rows: &[T],
    header: Option<&[&str]>,
) -> Result<(), IoError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    if rows.is_empty() {
        if let Some(h) = header {
            w.write_record(h)?;
        }
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read, T: DeserializeOwned>(input: R) -> Result<Vec<T>, IoError> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

pub const PLAN_HEADER: &[&str] = &["t", "x"];
pub const SUPPLY_HEADER: &[&str] = &["t", "demand", "y", "z", "y_star", "reward"];
pub const SWEEP_HEADER: &[&str] =
    &["sweep_value", "relative_gap", "true_reward", "r_star", "nodes", "n", "s", "delta", "d_max", "status"];
pub const NORMALIZED_SUPPLY_HEADER: &[&str] = &["sweep_value", "t", "y", "y_star"];
pub const COMPARE_HEADER: &[&str] = &["N", "gap_ours", "gap_service", "gap_economic"];
pub const ROBUSTNESS_HEADER: &[&str] = &["N", "standard", "c", "gap", "gap_ours"];
pub const ROSTER_HEADER: &[&str] = &["driver_id", "shift_index", "start_step", "end_step"];

pub fn plan_rows(plan: &ShiftPlan) -> Vec<PlanRow> {
    plan.x.iter().enumerate().map(|(k, &x)| PlanRow { t: k + 1, x }).collect()
}

/// Rebuilds a plan from rows that must list steps `1..=T` in order.
pub fn plan_from_rows(rows: &[PlanRow]) -> Result<ShiftPlan, IoError> {
    for (k, r) in rows.iter().enumerate() {
        if r.t != k + 1 {
            return Err(IoError::Invalid { row: k + 1, reason: format!("expected t = {}, found {}", k + 1, r.t) });
        }
    }
    Ok(ShiftPlan::new(rows.iter().map(|r| r.x).collect()))
}

pub fn read_plan<R: Read>(input: R) -> Result<ShiftPlan, IoError> {
    plan_from_rows(&read_rows::<_, PlanRow>(input)?)
}

pub fn write_plan<W: Write>(out: W, plan: &ShiftPlan) -> Result<(), IoError> {
    write_rows_with_header(out, &plan_rows(plan), Some(PLAN_HEADER))
}

pub fn supply_rows(demand: &[f64], supply: &SupplyCurve, y_star: &[f64], reward: &[f64]) -> Vec<SupplyRow> {
    (0..demand.len())
        .map(|k| SupplyRow {
            t: k + 1,
            demand: demand[k],
            y: supply.y[k],
            z: supply.z[k],
            y_star: y_star[k],
            reward: reward[k],
        })
        .collect()
}

pub fn roster_rows(roster: &Roster, delta: usize) -> Vec<RosterRow> {
    let mut rows = Vec::new();
    for (driver_id, shifts) in roster.drivers.iter().enumerate() {
        for (shift_index, s) in shifts.iter().enumerate() {
            rows.push(RosterRow { driver_id, shift_index, start_step: s.start, end_step: s.start + delta });
        }
    }
    rows
}

/// Rebuilds a roster of `n_drivers` drivers; the break length restores the
/// extended-shift ends.
pub fn roster_from_rows(rows: &[RosterRow], n_drivers: usize, beta: usize) -> Result<Roster, IoError> {
    let mut drivers: Vec<Vec<ExtendedShift>> = vec![Vec::new(); n_drivers];
    for (k, r) in rows.iter().enumerate() {
        let Some(d) = drivers.get_mut(r.driver_id) else {
            return Err(IoError::Invalid { row: k + 1, reason: format!("driver {} out of range", r.driver_id) });
        };
        if r.end_step < r.start_step || r.shift_index != d.len() {
            return Err(IoError::Invalid { row: k + 1, reason: "malformed shift".into() });
        }
        d.push(ExtendedShift { start: r.start_step, end: r.end_step + beta });
    }
    Ok(Roster { drivers })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_round_trip() {
        let plan = ShiftPlan::new(vec![0, 3, 1]);
        let mut buf = Vec::new();
        write_plan(&mut buf, &plan).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "t,x\n1,0\n2,3\n3,1\n");
        assert_eq!(read_plan(buf.as_slice()).unwrap(), plan);
    }

    #[test]
    fn empty_files_keep_their_header() {
        let mut buf = Vec::new();
        write_rows_with_header::<_, RosterRow>(&mut buf, &[], Some(ROSTER_HEADER)).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "driver_id,shift_index,start_step,end_step\n");
    }

    fn first_line<T: Serialize>(row: T) -> String {
        let mut buf = Vec::new();
        write_rows(&mut buf, &[row]).unwrap();
        String::from_utf8(buf).unwrap().lines().next().unwrap().to_string()
    }

    #[test]
    fn header_constants_match_the_records() {
        assert_eq!(first_line(PlanRow { t: 1, x: 0 }), PLAN_HEADER.join(","));
        let supply = SupplyRow { t: 1, demand: 0.0, y: 0, z: 0, y_star: 0.0, reward: 0.0 };
        assert_eq!(first_line(supply), SUPPLY_HEADER.join(","));
        let sweep = SweepRow {
            sweep_value: 1,
            relative_gap: 0.0,
            true_reward: 0.0,
            r_star: 0.0,
            nodes: 0,
            n: 0,
            s: 0,
            delta: 0,
            d_max: 0.0,
            status: String::new(),
        };
        assert_eq!(first_line(sweep), SWEEP_HEADER.join(","));
        let norm = NormalizedSupplyRow { sweep_value: 1, t: 1, y: 0.0, y_star: 0.0 };
        assert_eq!(first_line(norm), NORMALIZED_SUPPLY_HEADER.join(","));
        let cmp = CompareRow { n: 0, gap_ours: 0.0, gap_service: 0.0, gap_economic: 0.0 };
        assert_eq!(first_line(cmp), COMPARE_HEADER.join(","));
        let rob = RobustnessRow { n: 0, standard: String::new(), c: 0.0, gap: 0.0, gap_ours: 0.0 };
        assert_eq!(first_line(rob), ROBUSTNESS_HEADER.join(","));
        let roster = RosterRow { driver_id: 0, shift_index: 0, start_step: 1, end_step: 2 };
        assert_eq!(first_line(roster), ROSTER_HEADER.join(","));
    }

    #[test]
    fn plan_rows_must_be_in_order() {
        assert!(read_plan("t,x\n2,1\n".as_bytes()).is_err());
        assert!(read_plan("t,x\n1,-1\n".as_bytes()).is_err());
        assert!(read_plan("t,y\n1,1\n".as_bytes()).is_err());
    }

    #[test]
    fn floats_round_trip_exactly() {
        let rows = vec![CompareRow { n: 5, gap_ours: 0.1 + 0.2, gap_service: 1.0 / 3.0, gap_economic: 1e-300 }];
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        assert!(String::from_utf8(buf.clone()).unwrap().starts_with("N,gap_ours"));
        let back: Vec<CompareRow> = read_rows(buf.as_slice()).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn roster_round_trip() {
        let roster = Roster { drivers: vec![vec![ExtendedShift::new(1, 2, 1), ExtendedShift::new(5, 2, 1)], vec![]] };
        let rows = roster_rows(&roster, 2);
        assert_eq!(rows[1], RosterRow { driver_id: 0, shift_index: 1, start_step: 5, end_step: 7 });
        let mut buf = Vec::new();
        write_rows(&mut buf, &rows).unwrap();
        let back: Vec<RosterRow> = read_rows(buf.as_slice()).unwrap();
        assert_eq!(roster_from_rows(&back, 2, 1).unwrap(), roster);
        assert!(roster_from_rows(&back, 0, 1).is_err());
    }
}
