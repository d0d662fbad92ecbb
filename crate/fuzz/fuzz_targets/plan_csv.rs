#![no_main]

use libfuzzer_sys::fuzz_target;
use shiftplan::io;

fuzz_target!(|data: &[u8]| {
    if let Ok(plan) = io::read_plan(data) {
        let mut buf = Vec::new();
        io::write_plan(&mut buf, &plan).unwrap();
        assert_eq!(io::read_plan(buf.as_slice()).unwrap(), plan);
    }
});
