#![no_main]

use lagflow::expr::parse;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    match parse(text) {
        Ok(e) => assert_eq!(parse(&e.to_string()).as_ref(), Ok(&e)),
        Err(err) => {
            if let Some(off) = err.offset() {
                assert!(off <= text.len());
            }
        }
    }
});
