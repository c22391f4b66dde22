//! Deterministic desk-scale corpora: a 4-class news-like topic set and
//! keyword-driven attribute corpora that share part of its vocabulary.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::io::dataset::{write_dataset, DatasetRecord};

pub const TOPICS: [(&str, [&str; 8]); 4] = [
    (
        "world",
        ["election", "minister", "troops", "embassy", "treaty", "border", "protest", "refugees"],
    ),
    (
        "sports",
        ["team", "coach", "league", "match", "season", "player", "stadium", "tournament"],
    ),
    (
        "business",
        ["bank", "market", "stocks", "profit", "shares", "investors", "merger", "earnings"],
    ),
    (
        "sci-tech",
        ["software", "chip", "rocket", "orbit", "robot", "internet", "satellite", "genome"],
    ),
];

const DETS: [&str; 3] = ["the", "a", "another"];
const VERBS: [&str; 8] = ["says", "reports", "faces", "expects", "announces", "plans", "sees", "signs"];
const PREPS: [&str; 5] = ["in", "after", "before", "during", "over"];
const TAILS: [&str; 8] = ["talks", "week", "monday", "friday", "deal", "year", "weekend", "review"];

/// Raw binary attribute labels with their keywords. `food & drink` and
/// `taste` merge into one attribute; `spam` is dropped.
pub const BINARY_ATTRIBUTES: [(&str, [&str; 5]); 7] = [
    ("finance", ["bank", "market", "stocks", "profit", "earnings"]),
    ("conflict", ["troops", "border", "protest", "refugees", "embassy"]),
    ("competition", ["match", "league", "tournament", "season", "stadium"]),
    ("technology", ["software", "chip", "robot", "internet", "genome"]),
    ("food & drink", ["coffee", "pizza", "dinner", "wine", "bakery"]),
    ("taste", ["flavor", "spicy", "sweet", "delicious", "bitter"]),
    ("spam", ["click", "free", "winner", "offer", "prize"]),
];

pub const MULTICLASS_ATTRIBUTES: [(&str, [&str; 5]); 5] = [
    ("forsale", ["sale", "price", "shipping", "offer", "condition"]),
    ("hockey", ["puck", "goalie", "rink", "coach", "season"]),
    ("cryptography", ["encryption", "cipher", "security", "key", "software"]),
    ("medicine", ["doctor", "patients", "vaccine", "genome", "clinic"]),
    ("space", ["rocket", "orbit", "satellite", "launch", "astronaut"]),
];

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).copied().expect("non-empty word list")
}

/// A short sentence built around two distinct keywords.
fn sentence(rng: &mut ChaCha8Rng, keywords: &[&str]) -> String {
    let mut two: Vec<&str> = keywords.choose_multiple(rng, 2).copied().collect();
    two.shuffle(rng);
    let (a, b) = (two[0], two[1]);
    let (d1, d2) = (pick(rng, &DETS), pick(rng, &DETS));
    let (v, p, t) = (pick(rng, &VERBS), pick(rng, &PREPS), pick(rng, &TAILS));
    match rng.gen_range(0..3) {
        0 => format!("{d1} {a} {v} {d2} {b} {p} {t}"),
        1 => format!("{a} {v} {b} {p} {d1} {t}"),
        _ => format!("{d1} {a} {p} {t} {v} {d2} {b}"),
    }
}

/// `per_class` examples of each topic, classes interleaved.
pub fn news_corpus(per_class: usize, seed: u64, id_prefix: &str) -> Vec<DatasetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_class * TOPICS.len());
    for _ in 0..per_class {
        for (topic, words) in &TOPICS {
            out.push(DatasetRecord {
                id: format!("{id_prefix}{:04}", out.len()),
                text: sentence(&mut rng, words),
                label: (*topic).to_string(),
            });
        }
    }
    out
}

/// One record per example, labelled with its raw attribute name.
pub fn binary_attribute_corpus(per_label: usize, seed: u64) -> Vec<DatasetRecord> {
    labelled_corpus(&BINARY_ATTRIBUTES, per_label, seed, "attr-")
}

pub fn multiclass_attribute_corpus(per_label: usize, seed: u64) -> Vec<DatasetRecord> {
    labelled_corpus(&MULTICLASS_ATTRIBUTES, per_label, seed, "mc-")
}

fn labelled_corpus(labels: &[(&str, [&str; 5])], per_label: usize, seed: u64, prefix: &str) -> Vec<DatasetRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(per_label * labels.len());
    for _ in 0..per_label {
        for (label, words) in labels {
            out.push(DatasetRecord {
                id: format!("{prefix}{:04}", out.len()),
                text: sentence(&mut rng, words),
                label: (*label).to_string(),
            });
        }
    }
    out
}

pub const ATTRIBUTE_SPEC_TOML: &str = r#"negative_cap_fraction = 0.8

[[binary_attributes]]
name = "finance"

[[binary_attributes]]
name = "conflict"

[[binary_attributes]]
name = "competition"

[[binary_attributes]]
name = "technology"

[[binary_attributes]]
name = "taste"

[merge_map]
"food & drink" = "taste"
spam = "DROP"

[multiclass_family]
classes = ["forsale", "hockey", "cryptography", "medicine", "space"]
"#;

pub const CONFIG_TOML: &str = r#"# Objective weights and search settings.
lambda = 5.0
beta = 3.0
eta = 1.0
nu = 2.0
beam_k = 10
edit_budget = 3
top_positions = 5
ig_steps = 64
early_exit = true
seed = 0
attribution = "ig"

# Backends and their checkpoints.
classifier = "embedding-bag"
classifier_path = "models/classifier.json"
attributes = "bow-attribute-bank"
attributes_path = "models/attributes.json"
filler = "bigram"
filler_path = "models/bigram.json"
embedder = "averaged"
embedder_path = "models/embedder.json"
fluency = "bigram"
fluency_path = "models/bigram.json"

# Data.
dataset = "data/news_test.jsonl"
train_data = "data/news_train.jsonl"
heldout_data = "data/news_heldout.jsonl"
lm_corpus = "data/news_train.jsonl"
classifier_epochs = 60
attribute_spec = "attribute_spec.toml"
attribute_data = "data/attributes.jsonl"
attribute_multiclass_data = "data/attributes_multiclass.jsonl"
"#;

/// Writes the datasets, attribute spec and run config under `dir`.
/// Models are produced afterwards by `cat train --target all`.
pub fn write_fixture_set(dir: &Path) -> Result<()> {
    let data = dir.join("data");
    std::fs::create_dir_all(&data)?;
    std::fs::create_dir_all(dir.join("models"))?;
    let files = [
        ("news_train.jsonl", news_corpus(60, 1, "train-")),
        ("news_heldout.jsonl", news_corpus(15, 2, "heldout-")),
        ("news_test.jsonl", news_corpus(13, 3, "test-").into_iter().take(50).collect()),
        ("attributes.jsonl", binary_attribute_corpus(30, 4)),
        ("attributes_multiclass.jsonl", multiclass_attribute_corpus(30, 5)),
    ];
    for (name, records) in files {
        std::fs::write(data.join(name), write_dataset(&records)?)?;
    }
    std::fs::write(dir.join("attribute_spec.toml"), ATTRIBUTE_SPEC_TOML)?;
    std::fs::write(dir.join("config.toml"), CONFIG_TOML)?;
    Ok(())
}
