#![no_main]

use cat_core::text::{tokenize, word_levenshtein};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &str| {
    if let Ok(x) = tokenize(data) {
        // Normalization is idempotent.
        let again = tokenize(&x.joined()).expect("joined text re-tokenizes");
        assert_eq!(again.words(), x.words());
        assert_eq!(word_levenshtein(&x, &again), 0);
    }
});
