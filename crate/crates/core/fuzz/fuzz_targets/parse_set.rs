#![no_main]

use epiter::grammar::{emit_set, parse_set, ParsedSet};
use epiter::limits::with_window_cap;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    with_window_cap(1 << 16, || {
        if let Ok(ParsedSet::Exact(s)) = parse_set(text) {
            let emitted = emit_set(&s);
            let again = parse_set(&emitted).expect("canonical text parses");
            assert_eq!(again, ParsedSet::Exact(s), "{emitted}");
        }
    });
});
