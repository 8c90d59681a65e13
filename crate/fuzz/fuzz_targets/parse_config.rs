#![no_main]

use bapred_harness::{ExperimentConfig, Grid};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(cfg) = ExperimentConfig::parse(text) {
        assert_eq!(ExperimentConfig::parse(&cfg.to_text()).as_ref(), Ok(&cfg));
    }
    let _ = Grid::parse(text);
});
