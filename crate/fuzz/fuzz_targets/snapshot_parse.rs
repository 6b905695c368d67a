#![no_main]

use lagflow::session::{format_snapshot, parse_snapshot};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if let Ok(s) = parse_snapshot(text) {
        assert_eq!(parse_snapshot(&format_snapshot(&s)).as_ref(), Ok(&s));
    }
});
