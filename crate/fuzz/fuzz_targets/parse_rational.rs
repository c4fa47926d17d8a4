#![no_main]

use hexmg::rational::{format_decimal, parse_rational};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if text.len() > 256 {
        return;
    }
    if let Ok(x) = parse_rational(text) {
        let shown = format_decimal(&x, 6);
        let back = parse_rational(&shown).expect("formatted decimals parse");
        assert_eq!(format_decimal(&back, 6), shown);
    }
});
