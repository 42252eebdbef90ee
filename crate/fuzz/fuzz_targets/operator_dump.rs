#![no_main]

use libfuzzer_sys::fuzz_target;
use zigzag_core::dump;

fuzz_target!(|data: &[u8]| {
    if let Ok(d) = dump::decode(data) {
        let again = dump::decode(&dump::encode(&d.params, &d.operator)).expect("re-decode");
        assert_eq!(again.params, d.params);
        assert_eq!(again.operator, d.operator);
    }
});
