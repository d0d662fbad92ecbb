//! Replays the fuzz corpus seeds through the same round-trip checks the fuzz
//! targets make, so the seeds stay valid inputs.

use std::fs;
use std::path::PathBuf;

use shiftplan::experiment::ExperimentSpec;
use shiftplan::io::{self, RosterRow};

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let body = fs::read(&p).unwrap();
            (p, body)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn config_seeds_parse_and_round_trip() {
    for (path, body) in seeds("config_json") {
        let spec = ExperimentSpec::from_json(std::str::from_utf8(&body).unwrap())
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let again = serde_json::to_string(&spec).unwrap();
        assert_eq!(ExperimentSpec::from_json(&again).unwrap(), spec);
    }
}

#[test]
fn plan_seeds_round_trip() {
    for (path, body) in seeds("plan_csv") {
        let plan = io::read_plan(body.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let mut buf = Vec::new();
        io::write_plan(&mut buf, &plan).unwrap();
        assert_eq!(io::read_plan(buf.as_slice()).unwrap(), plan);
    }
}

#[test]
fn roster_seeds_round_trip() {
    for (path, body) in seeds("roster_csv") {
        let rows: Vec<RosterRow> = io::read_rows(body.as_slice()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let roster = io::roster_from_rows(&rows, 8, 2).unwrap();
        assert_eq!(roster.total_shifts(), rows.len() as u64);
    }
}
