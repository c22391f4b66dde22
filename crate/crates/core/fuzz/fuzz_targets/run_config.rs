#![no_main]

use cat_core::io::RunConfig;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(config) = RunConfig::parse(data) {
        config.hyperparams().validate().expect("parsed configs are valid");
        let _ = config.config_hash(b"");
    }
});
