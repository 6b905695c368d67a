#![no_main]

use lagflow::expr::{evaluate, evaluate_gradient, parse};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if data.len() < 24 {
        return;
    }
    let (coords, body) = data.split_at(24);
    let at = |i: usize| f64::from_le_bytes(coords[8 * i..8 * i + 8].try_into().unwrap());
    let (x, y, s) = (at(0), at(1), at(2));
    let Ok(text) = std::str::from_utf8(body) else { return };
    let Ok(e) = parse(text) else { return };
    if let Ok(v) = evaluate(&e, x, y, s) {
        assert!(v.is_finite());
    }
    let _ = evaluate_gradient(&e, x, y, s);
});
