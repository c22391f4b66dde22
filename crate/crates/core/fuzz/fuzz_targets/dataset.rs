#![no_main]

use cat_core::io::dataset::{parse_dataset, write_dataset};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(records) = parse_dataset(data) {
        let written = write_dataset(&records).expect("parsed records serialize");
        assert_eq!(parse_dataset(&written).expect("round trip"), records);
    }
});
