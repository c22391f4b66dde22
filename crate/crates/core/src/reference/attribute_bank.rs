//! Bag-of-words attribute bank: one-vs-all logistic scorers for the binary
//! family and one shared softmax scorer for the multiclass family.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::embedding_bag::{softmax, word_counts, LabeledText};
use super::vocab::Vocabulary;
use crate::error::{CatError, Result};
use crate::model::{AttributeScoreVector, AttributeScorer};
use crate::text::TokenizedText;

/// Merge-map target that removes a label's rows.
pub const DROP: &str = "DROP";

pub const DEFAULT_BINARY_TAU: f64 = 0.3;
pub const DEFAULT_MULTICLASS_TAU: f64 = 0.05;
pub const DEFAULT_NEGATIVE_CAP: f64 = 0.8;

/// Relabels rows through `merge_map`; rows mapped to [`DROP`] are removed.
/// Unmapped labels pass through. Order is preserved.
pub fn merge_labels(dataset: Vec<LabeledText>, merge_map: &BTreeMap<String, String>) -> Vec<LabeledText> {
    dataset
        .into_iter()
        .filter_map(|mut row| match merge_map.get(&row.label) {
            Some(new) if new == DROP => None,
            Some(new) => {
                row.label = new.clone();
                Some(row)
            }
            None => Some(row),
        })
        .collect()
}

/// Largest negative count `n` with `n <= cap * (positives + n)`.
pub fn max_negatives(positives: usize, cap: f64) -> usize {
    if cap >= 1.0 {
        return usize::MAX;
    }
    let fits = |n: usize| n as f64 <= cap * (positives + n) as f64;
    let mut n = (cap * positives as f64 / (1.0 - cap)).floor().max(0.0) as usize;
    while n > 0 && !fits(n) {
        n -= 1;
    }
    while fits(n + 1) {
        n += 1;
    }
    n
}

/// Keeps every positive and a uniform sample of negatives so that negatives
/// make up at most `cap` of the result. Negatives keep their input order.
pub fn subsample_negatives<T: Clone>(positives: &[T], negatives: &[T], cap: f64, seed: u64) -> Vec<T> {
    assert!(cap > 0.0 && cap <= 1.0, "cap must lie in (0, 1]");
    let keep = max_negatives(positives.len(), cap).min(negatives.len());
    let mut out = positives.to_vec();
    if keep == negatives.len() {
        out.extend_from_slice(negatives);
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, negatives.len(), keep).into_vec();
    picked.sort_unstable();
    out.extend(picked.into_iter().map(|i| negatives[i].clone()));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryAttributeSpec {
    pub name: String,
    #[serde(default = "default_binary_tau")]
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MulticlassFamilySpec {
    pub classes: Vec<String>,
    #[serde(default = "default_multiclass_tau")]
    pub tau: f64,
}

fn default_binary_tau() -> f64 {
    DEFAULT_BINARY_TAU
}

fn default_multiclass_tau() -> f64 {
    DEFAULT_MULTICLASS_TAU
}

fn default_cap() -> f64 {
    DEFAULT_NEGATIVE_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeBankSpec {
    #[serde(default)]
    pub binary_attributes: Vec<BinaryAttributeSpec>,
    /// Applied to the binary corpus before one-vs-all splitting.
    #[serde(default)]
    pub merge_map: BTreeMap<String, String>,
    #[serde(default)]
    pub multiclass_family: Option<MulticlassFamilySpec>,
    #[serde(default = "default_cap")]
    pub negative_cap_fraction: f64,
}

impl AttributeBankSpec {
    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeSet::new();
        let all = self
            .binary_attributes
            .iter()
            .map(|a| (&a.name, a.tau))
            .chain(self.multiclass_family.iter().flat_map(|f| f.classes.iter().map(move |c| (c, f.tau))));
        for (name, tau) in all {
            if !names.insert(name.clone()) {
                return Err(CatError::Config(format!("duplicate attribute name `{name}`")));
            }
            if !(tau > 0.0 && tau < 1.0) {
                return Err(CatError::Config(format!("tau {tau} for `{name}` outside (0, 1)")));
            }
        }
        if !(self.negative_cap_fraction > 0.0 && self.negative_cap_fraction <= 1.0) {
            return Err(CatError::Config(format!(
                "negative_cap_fraction {} outside (0, 1]",
                self.negative_cap_fraction
            )));
        }
        if let Some(f) = &self.multiclass_family {
            if f.classes.len() < 2 {
                return Err(CatError::Config("multiclass family needs at least two classes".into()));
            }
        }
        Ok(())
    }

    pub fn attribute_count(&self) -> usize {
        self.binary_attributes.len() + self.multiclass_family.as_ref().map_or(0, |f| f.classes.len())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttributeTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for AttributeTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            batch_size: 16,
            learning_rate: 0.05,
            weight_decay: 0.01,
            seed: 0,
        }
    }
}

/// Training corpora for the two attribute families.
#[derive(Debug, Clone, Default)]
pub struct AttributeDatasets {
    pub binary: Vec<LabeledText>,
    pub multiclass: Vec<LabeledText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BinaryScorer {
    name: String,
    tau: f64,
    weights: Vec<f64>,
    bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MulticlassScorer {
    classes: Vec<String>,
    tau: f64,
    /// Row-major `|V| × classes`.
    weights: Vec<f64>,
    biases: Vec<f64>,
}

pub const ATTRIBUTE_BANK_KIND: &str = "bow-attribute-bank";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    kind: String,
    vocabulary: Vocabulary,
    binary: Vec<BinaryScorer>,
    multiclass: Option<MulticlassScorer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeBank {
    vocab: Vocabulary,
    binary: Vec<BinaryScorer>,
    multiclass: Option<MulticlassScorer>,
    names: Vec<String>,
    thresholds: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl AttributeBank {
    fn assemble(vocab: Vocabulary, binary: Vec<BinaryScorer>, multiclass: Option<MulticlassScorer>) -> Self {
        let mut names: Vec<String> = binary.iter().map(|b| b.name.clone()).collect();
        let mut thresholds: Vec<f64> = binary.iter().map(|b| b.tau).collect();
        if let Some(m) = &multiclass {
            names.extend(m.classes.iter().cloned());
            thresholds.extend(std::iter::repeat_n(m.tau, m.classes.len()));
        }
        Self {
            vocab,
            binary,
            multiclass,
            names,
            thresholds,
        }
    }

    fn features(&self, x: &TokenizedText) -> Vec<usize> {
        features(&self.vocab, x)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::io::json::to_string(&Checkpoint {
            kind: ATTRIBUTE_BANK_KIND.into(),
            vocabulary: self.vocab.clone(),
            binary: self.binary.clone(),
            multiclass: self.multiclass.clone(),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s)?;
        if c.kind != ATTRIBUTE_BANK_KIND {
            return Err(CatError::Checkpoint(format!("expected kind `{ATTRIBUTE_BANK_KIND}`, got `{}`", c.kind)));
        }
        let v = c.vocabulary.len();
        let mut names = BTreeSet::new();
        for b in &c.binary {
            if b.weights.len() != v {
                return Err(CatError::Checkpoint(format!("`{}` has {} weights for {v} words", b.name, b.weights.len())));
            }
            check_tau(b.tau)?;
            if !names.insert(b.name.clone()) {
                return Err(CatError::Checkpoint(format!("duplicate attribute `{}`", b.name)));
            }
        }
        if let Some(m) = &c.multiclass {
            let k = m.classes.len();
            if k < 2 || m.weights.len() != v * k || m.biases.len() != k {
                return Err(CatError::Checkpoint("multiclass scorer shape mismatch".into()));
            }
            check_tau(m.tau)?;
            for cl in &m.classes {
                if !names.insert(cl.clone()) {
                    return Err(CatError::Checkpoint(format!("duplicate attribute `{cl}`")));
                }
            }
        }
        let finite = c
            .binary
            .iter()
            .flat_map(|b| b.weights.iter().chain(std::iter::once(&b.bias)))
            .chain(c.multiclass.iter().flat_map(|m| m.weights.iter().chain(&m.biases)))
            .all(|w| w.is_finite());
        if !finite {
            return Err(CatError::Checkpoint("non-finite weight".into()));
        }
        Ok(Self::assemble(c.vocabulary, c.binary, c.multiclass))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(CatError::Checkpoint(format!("tau {tau} outside (0, 1)")))
    }
}

/// Distinct known-word indices of a text (presence features).
fn features(vocab: &Vocabulary, x: &TokenizedText) -> Vec<usize> {
    let set: BTreeSet<usize> = x.words().iter().filter_map(|w| vocab.get(w)).collect();
    set.into_iter().collect()
}

impl AttributeScorer for AttributeBank {
    fn names(&self) -> &[String] {
        &self.names
    }

    fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    fn score_attributes(&self, x: &TokenizedText) -> Result<AttributeScoreVector> {
        let feats = self.features(x);
        let mut scores: Vec<f64> = self
            .binary
            .iter()
            .map(|b| sigmoid(b.bias + feats.iter().map(|&i| b.weights[i]).sum::<f64>()))
            .collect();
        if let Some(m) = &self.multiclass {
            let k = m.classes.len();
            let mut logits = m.biases.clone();
            for &i in &feats {
                for (z, w) in logits.iter_mut().zip(&m.weights[i * k..(i + 1) * k]) {
                    *z += w;
                }
            }
            scores.extend(softmax(&logits));
        }
        AttributeScoreVector::new(scores, self.names.clone(), self.thresholds.clone())
    }
}

fn train_binary(
    vocab: &Vocabulary,
    data: &[(Vec<usize>, bool)],
    config: &AttributeTrainConfig,
    seed: u64,
) -> (Vec<f64>, f64) {
    let v = vocab.len();
    let mut params = vec![0.0; v + 1];
    let mut opt = Adam::new(v + 1, config.learning_rate, config.weight_decay);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grads = vec![0.0; v + 1];
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size.max(1)) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (feats, y) = &data[i];
                let z = params[v] + feats.iter().map(|&f| params[f]).sum::<f64>();
                let d = scale * (sigmoid(z) - f64::from(u8::from(*y)));
                for &f in feats {
                    grads[f] += d;
                }
                grads[v] += d;
            }
            opt.step(&mut params, &grads);
        }
    }
    let bias = params.pop().expect("bias present");
    (params, bias)
}

fn train_multiclass(
    vocab: &Vocabulary,
    data: &[(Vec<usize>, usize)],
    k: usize,
    config: &AttributeTrainConfig,
    seed: u64,
) -> (Vec<f64>, Vec<f64>) {
    let v = vocab.len();
    let n = v * k + k;
    let mut params = vec![0.0; n];
    let mut opt = Adam::new(n, config.learning_rate, config.weight_decay);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grads = vec![0.0; n];
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size.max(1)) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (feats, y) = &data[i];
                let mut logits = params[v * k..].to_vec();
                for &f in feats {
                    for (z, w) in logits.iter_mut().zip(&params[f * k..(f + 1) * k]) {
                        *z += w;
                    }
                }
                let probs = softmax(&logits);
                for c in 0..k {
                    let d = scale * (probs[c] - f64::from(u8::from(c == *y)));
                    for &f in feats {
                        grads[f * k + c] += d;
                    }
                    grads[v * k + c] += d;
                }
            }
            opt.step(&mut params, &grads);
        }
    }
    let biases = params.split_off(v * k);
    (params, biases)
}

/// Trains every scorer of the bank described by `spec`.
pub fn train_attribute_bank(
    datasets: &AttributeDatasets,
    spec: &AttributeBankSpec,
    config: &AttributeTrainConfig,
) -> Result<AttributeBank> {
    spec.validate()?;
    let binary_rows = merge_labels(datasets.binary.clone(), &spec.merge_map);
    let multiclass_rows: Vec<&LabeledText> = match &spec.multiclass_family {
        Some(f) => datasets.multiclass.iter().filter(|r| f.classes.contains(&r.label)).collect(),
        None => Vec::new(),
    };
    let texts = binary_rows.iter().map(|r| &r.text).chain(multiclass_rows.iter().map(|r| &r.text));
    let vocab = Vocabulary::from_counts(&word_counts(texts), 1);

    let mut binary = Vec::with_capacity(spec.binary_attributes.len());
    for (ai, attr) in spec.binary_attributes.iter().enumerate() {
        let (pos, neg): (Vec<&LabeledText>, Vec<&LabeledText>) =
            binary_rows.iter().partition(|r| r.label == attr.name);
        if pos.is_empty() || neg.is_empty() {
            return Err(CatError::DegenerateDataset(format!(
                "attribute `{}` has {} positives and {} negatives",
                attr.name,
                pos.len(),
                neg.len()
            )));
        }
        let seed = config.seed.wrapping_add(1000 + ai as u64);
        let rows = subsample_negatives(&pos, &neg, spec.negative_cap_fraction, seed);
        let n_pos = pos.len();
        let data: Vec<(Vec<usize>, bool)> = rows
            .iter()
            .enumerate()
            .map(|(i, r)| (features(&vocab, &r.text), i < n_pos))
            .collect();
        let (weights, bias) = train_binary(&vocab, &data, config, seed);
        binary.push(BinaryScorer {
            name: attr.name.clone(),
            tau: attr.tau,
            weights,
            bias,
        });
    }

    let multiclass = match &spec.multiclass_family {
        None => None,
        Some(f) => {
            let present: BTreeSet<&str> = multiclass_rows.iter().map(|r| r.label.as_str()).collect();
            if present.len() < 2 {
                return Err(CatError::DegenerateDataset(format!(
                    "multiclass family has {} class(es) present",
                    present.len()
                )));
            }
            let data: Vec<(Vec<usize>, usize)> = multiclass_rows
                .iter()
                .map(|r| {
                    let y = f.classes.iter().position(|c| *c == r.label).expect("filtered to known classes");
                    (features(&vocab, &r.text), y)
                })
                .collect();
            let (weights, biases) = train_multiclass(&vocab, &data, f.classes.len(), config, config.seed.wrapping_add(7));
            Some(MulticlassScorer {
                classes: f.classes.clone(),
                tau: f.tau,
                weights,
                biases,
            })
        }
    };
    Ok(AttributeBank::assemble(vocab, binary, multiclass))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn row(text: &str, label: &str) -> LabeledText {
        LabeledText {
            text: tokenize(text).unwrap(),
            label: label.into(),
        }
    }

    #[test]
    fn subsample_examples() {
        let pos: Vec<u32> = (0..10).collect();
        let neg: Vec<u32> = (100..110).collect();
        assert_eq!(subsample_negatives(&pos, &neg, 0.8, 1).len(), 20);

        let neg: Vec<u32> = (100..200).collect();
        let out = subsample_negatives(&pos, &neg, 0.8, 1);
        assert_eq!(out.len(), 50);
        assert_eq!(out.iter().filter(|v| **v >= 100).count(), 40);
        assert_eq!(&out[..10], &pos[..]);

        let all = subsample_negatives(&pos, &neg, 1.0, 1);
        assert_eq!(all.len(), 110);
        assert_eq!(subsample_negatives(&pos, &neg, 0.8, 3), subsample_negatives(&pos, &neg, 0.8, 3));
    }

    #[test]
    fn max_negatives_solves_the_cap() {
        assert_eq!(max_negatives(10, 0.8), 40);
        assert_eq!(max_negatives(1, 0.5), 1);
        assert_eq!(max_negatives(0, 0.8), 0);
        assert_eq!(max_negatives(3, 0.8), 12);
    }

    #[test]
    fn merge_examples() {
        let data = vec![row("a", "food & drink"), row("b", "taste"), row("c", "money"), row("d", "fifty")];
        let map: BTreeMap<String, String> = [
            ("food & drink".to_string(), "food".to_string()),
            ("taste".to_string(), "food".to_string()),
            ("fifty".to_string(), DROP.to_string()),
        ]
        .into();
        let merged = merge_labels(data.clone(), &map);
        let labels: Vec<_> = merged.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["food", "food", "money"]);
        assert_eq!(merge_labels(data.clone(), &BTreeMap::new()), data);
    }

    fn keyword_corpus() -> AttributeDatasets {
        let mut binary = Vec::new();
        for i in 0..30 {
            binary.push(row(&format!("great pizza night {i}"), "food"));
            binary.push(row(&format!("stock market report {i}"), "money"));
            binary.push(row(&format!("team wins match {i}"), "sports"));
        }
        let mut multiclass = Vec::new();
        for i in 0..20 {
            multiclass.push(row(&format!("rocket orbit launch {i}"), "space"));
            multiclass.push(row(&format!("doctor patient clinic {i}"), "medicine"));
            multiclass.push(row(&format!("puck ice goalie {i}"), "hockey"));
        }
        AttributeDatasets { binary, multiclass }
    }

    fn spec() -> AttributeBankSpec {
        AttributeBankSpec {
            binary_attributes: vec![
                BinaryAttributeSpec {
                    name: "food".into(),
                    tau: DEFAULT_BINARY_TAU,
                },
                BinaryAttributeSpec {
                    name: "money".into(),
                    tau: DEFAULT_BINARY_TAU,
                },
            ],
            merge_map: BTreeMap::new(),
            multiclass_family: Some(MulticlassFamilySpec {
                classes: vec!["space".into(), "medicine".into(), "hockey".into()],
                tau: DEFAULT_MULTICLASS_TAU,
            }),
            negative_cap_fraction: DEFAULT_NEGATIVE_CAP,
        }
    }

    #[test]
    fn bank_shape_and_thresholds() {
        let bank = train_attribute_bank(&keyword_corpus(), &spec(), &AttributeTrainConfig::default()).unwrap();
        let v = bank.score_attributes(&tokenize("pizza").unwrap()).unwrap();
        assert_eq!(v.len(), 5);
        assert_eq!(v.names(), ["food", "money", "space", "medicine", "hockey"]);
        assert_eq!(v.thresholds(), [0.3, 0.3, 0.05, 0.05, 0.05]);
    }

    #[test]
    fn keyword_raises_its_attribute() {
        let bank = train_attribute_bank(&keyword_corpus(), &spec(), &AttributeTrainConfig::default()).unwrap();
        let with = bank.score_attributes(&tokenize("the pizza was cold").unwrap()).unwrap();
        let without = bank.score_attributes(&tokenize("the weather was cold").unwrap()).unwrap();
        assert!(with.scores()[0] > without.scores()[0]);
        let orbit = bank.score_attributes(&tokenize("orbit").unwrap()).unwrap();
        assert!(orbit.scores()[2] > orbit.scores()[3]);
    }

    #[test]
    fn missing_positives_are_degenerate() {
        let mut s = spec();
        s.binary_attributes.push(BinaryAttributeSpec {
            name: "travel".into(),
            tau: 0.3,
        });
        assert!(matches!(
            train_attribute_bank(&keyword_corpus(), &s, &AttributeTrainConfig::default()),
            Err(CatError::DegenerateDataset(_))
        ));
    }

    #[test]
    fn spec_defaults_from_json() {
        let s: AttributeBankSpec = serde_json::from_str(
            r#"{"binary_attributes":[{"name":"food"}],"multiclass_family":{"classes":["a","b"]}}"#,
        )
        .unwrap();
        assert_eq!(s.binary_attributes[0].tau, 0.3);
        assert_eq!(s.multiclass_family.as_ref().unwrap().tau, 0.05);
        assert_eq!(s.negative_cap_fraction, 0.8);
        assert_eq!(s.attribute_count(), 3);
    }

    #[test]
    fn checkpoint_round_trip() {
        let bank = train_attribute_bank(&keyword_corpus(), &spec(), &AttributeTrainConfig { epochs: 2, ..Default::default() }).unwrap();
        let back = AttributeBank::from_json(&bank.to_json().unwrap()).unwrap();
        assert_eq!(back, bank);
    }
}
