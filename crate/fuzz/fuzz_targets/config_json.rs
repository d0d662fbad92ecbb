#![no_main]

use libfuzzer_sys::fuzz_target;
use shiftplan::experiment::ExperimentSpec;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(spec) = ExperimentSpec::from_json(text) else { return };
    // Anything accepted must survive a round trip unchanged.
    let again = serde_json::to_string(&spec).unwrap();
    assert_eq!(ExperimentSpec::from_json(&again).unwrap(), spec);
    let _ = spec.sweep_scenarios();
    let _ = spec.compare_scenarios();
});
