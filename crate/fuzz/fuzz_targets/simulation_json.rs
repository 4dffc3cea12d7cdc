#![no_main]

use libfuzzer_sys::fuzz_target;
use risbc::export::SimulationReport;

fuzz_target!(|data: &[u8]| {
    if let Ok(report) = serde_json::from_slice::<SimulationReport>(data) {
        let text = serde_json::to_string(&report).unwrap();
        let back: SimulationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
    }
});
