#![no_main]

use cat_core::model::{AttributeScorer, Classifier, FluencyModel, SentenceEmbedder};
use cat_core::reference::{AttributeBank, AveragedEmbedder, EmbeddingBagClassifier, NgramModel};
use cat_core::registry::{parse_keyword_attributes, parse_keyword_classifier};
use cat_core::text::tokenize;
use libfuzzer_sys::fuzz_target;

// Every checkpoint decoder sees the same bytes; whatever loads must also run.
fuzz_target!(|data: &str| {
    let x = tokenize("the bank reports profit").unwrap();
    if let Ok(m) = EmbeddingBagClassifier::from_json(data) {
        let _ = m.classify(&x);
    }
    if let Ok(m) = AttributeBank::from_json(data) {
        let _ = m.score_attributes(&x);
    }
    if let Ok(m) = NgramModel::from_json(data) {
        let _ = m.lm_loss(&x);
    }
    if let Ok(m) = AveragedEmbedder::from_json(data) {
        let _ = m.embed(&x);
    }
    if let Ok(m) = parse_keyword_classifier(data) {
        let _ = m.classify(&x);
    }
    if let Ok(m) = parse_keyword_attributes(data) {
        let _ = m.score_attributes(&x);
    }
});
