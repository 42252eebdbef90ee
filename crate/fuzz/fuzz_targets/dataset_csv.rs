#![no_main]

use libfuzzer_sys::fuzz_target;
use zigzag_core::observables::report::{read_rows, write_rows};

fuzz_target!(|data: &[u8]| {
    if let Ok(rows) = read_rows(data) {
        let mut out = Vec::new();
        write_rows(&mut out, &rows).expect("write");
        let again = read_rows(out.as_slice()).expect("reparse");
        assert_eq!(again.len(), rows.len());
    }
});
