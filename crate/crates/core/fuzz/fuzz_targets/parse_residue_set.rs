#![no_main]

use epiter::grammar::{emit_residue_set, parse_residue_set};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(u) = parse_residue_set(text) {
        let emitted = emit_residue_set(&u);
        assert_eq!(parse_residue_set(&emitted).as_ref(), Ok(&u), "{emitted}");
    }
});
