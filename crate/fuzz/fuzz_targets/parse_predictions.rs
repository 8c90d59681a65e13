#![no_main]

use bapred::predictions::PredictionMatrix;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(m) = PredictionMatrix::parse_text(text) {
        assert_eq!(PredictionMatrix::parse_text(&m.to_text()).as_ref(), Ok(&m));
    }
});
