#![no_main]

use libfuzzer_sys::fuzz_target;
use shiftplan::io::{self, RosterRow};

fuzz_target!(|data: &[u8]| {
    let Ok(rows) = io::read_rows::<_, RosterRow>(data) else { return };
    let mut buf = Vec::new();
    io::write_rows(&mut buf, &rows).unwrap();
    assert_eq!(io::read_rows::<_, RosterRow>(buf.as_slice()).unwrap(), rows);
    if let Ok(roster) = io::roster_from_rows(&rows, 8, 2) {
        assert_eq!(roster.total_shifts(), rows.len() as u64);
    }
});
