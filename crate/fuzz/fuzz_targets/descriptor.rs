#![no_main]

use fpt_core::descriptor::parse_descriptor_file;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(s) = std::str::from_utf8(data) {
        let _ = parse_descriptor_file(s);
    }
});
