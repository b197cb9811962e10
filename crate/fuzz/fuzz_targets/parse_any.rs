#![no_main]

use crane_yetter::simplicial::{parse_any, parse_triangulation, parse_triangulation_json};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(t) = parse_any(text) else { return };
    let direct = if text.trim_start().starts_with('{') { parse_triangulation_json(text) } else { parse_triangulation(text) };
    let direct = direct.expect("dispatch agrees with the direct parser");
    assert_eq!(direct.simplices(), t.simplices());
    assert_eq!(parse_any(&t.to_json()).expect("json form parses").simplices(), t.simplices());
    assert_eq!(parse_any(&t.to_text()).expect("text form parses").simplices(), t.simplices());
});
