#![no_main]

use crane_yetter::scalars::{Cyclo, CycloSerial};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(doc) = serde_json::from_slice::<CycloSerial>(data) else { return };
    if doc.coeffs.iter().map(String::len).sum::<usize>() > 4096 {
        return;
    }
    let Ok(z) = Cyclo::from_serial(&doc) else { return };
    let back = Cyclo::from_serial(&z.to_serial()).expect("serialized value decodes");
    assert_eq!(back, z);
});
