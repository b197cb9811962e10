#![no_main]

use crane_yetter::simplicial::parse_triangulation_json;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(t) = parse_triangulation_json(text) else { return };
    let again = parse_triangulation_json(&t.to_json()).expect("serialized json parses");
    assert_eq!(again.simplices(), t.simplices());
    assert_eq!(again.signs(), t.signs());
    if t.simplices().len() <= 64 {
        let _ = t.validate_and_orient();
    }
});
