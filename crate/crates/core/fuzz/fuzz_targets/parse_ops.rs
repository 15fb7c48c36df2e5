#![no_main]

use epiter::grammar::{emit_ops, parse_ops};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(seq) = parse_ops(text) {
        let emitted = emit_ops(&seq);
        assert_eq!(parse_ops(&emitted).as_ref(), Ok(&seq), "{emitted}");
    }
});
