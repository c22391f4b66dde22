#![no_main]

use cat_core::io::config::parse_bank_spec;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(spec) = parse_bank_spec(data) {
        spec.validate().expect("parsed specs are valid");
    }
});
