#![no_main]

use cat_core::io::explanations::{parse_explanation_line, parse_explanations};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    let _ = parse_explanations(data);
    for line in data.lines() {
        if let Ok(parsed) = parse_explanation_line(line) {
            let json = parsed.to_json().expect("parsed line serializes");
            assert_eq!(parse_explanation_line(&json).expect("round trip"), parsed);
        }
    }
});
