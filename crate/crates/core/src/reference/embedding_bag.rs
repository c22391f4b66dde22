//! Mean-pooled embedding bag followed by affine → ReLU → affine → softmax.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use super::adam::Adam;
use super::vocab::Vocabulary;
use crate::error::{CatError, Result};
use crate::model::{ClassDistribution, Classifier, DifferentiableClassifier};
use crate::text::TokenizedText;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for ClassifierTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 20,
            batch_size: 32,
            learning_rate: 1e-3,
            weight_decay: 0.01,
            embed_dim: 32,
            hidden_dim: 32,
            min_count: 1,
            seed: 0,
        }
    }
}

/// A text with its gold label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledText {
    pub text: TokenizedText,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Layout {
    vocab: usize,
    embed: usize,
    hidden: usize,
    classes: usize,
}

impl Layout {
    fn emb(&self) -> std::ops::Range<usize> {
        0..self.vocab * self.embed
    }
    fn w1(&self) -> std::ops::Range<usize> {
        let s = self.emb().end;
        s..s + self.embed * self.hidden
    }
    fn b1(&self) -> std::ops::Range<usize> {
        let s = self.w1().end;
        s..s + self.hidden
    }
    fn w2(&self) -> std::ops::Range<usize> {
        let s = self.b1().end;
        s..s + self.hidden * self.classes
    }
    fn b2(&self) -> std::ops::Range<usize> {
        let s = self.w2().end;
        s..s + self.classes
    }
    fn total(&self) -> usize {
        self.b2().end
    }
}

/// Intermediate activations of one forward pass.
struct Forward {
    mean: Vec<f64>,
    pre: Vec<f64>,
    probs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingBagClassifier {
    labels: Vec<String>,
    vocab: Vocabulary,
    layout: Layout,
    params: Vec<f64>,
}

/// On-disk form: shapes plus flattened row-major weight arrays.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    kind: String,
    labels: Vec<String>,
    vocabulary: Vocabulary,
    embed_dim: usize,
    hidden_dim: usize,
    embedding: Vec<f64>,
    hidden_weight: Vec<f64>,
    hidden_bias: Vec<f64>,
    output_weight: Vec<f64>,
    output_bias: Vec<f64>,
}

pub const EMBEDDING_BAG_KIND: &str = "embedding-bag";

impl EmbeddingBagClassifier {
    /// Randomly initialized model: embeddings ~ N(0, 1), linear layers
    /// ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
    pub fn init(labels: Vec<String>, vocab: Vocabulary, embed_dim: usize, hidden_dim: usize, seed: u64) -> Self {
        let layout = Layout {
            vocab: vocab.len(),
            embed: embed_dim,
            hidden: hidden_dim,
            classes: labels.len(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = vec![0.0; layout.total()];
        let normal = Normal::new(0.0, 1.0).expect("valid normal");
        for p in &mut params[layout.emb()] {
            *p = normal.sample(&mut rng);
        }
        let a1 = 1.0 / (embed_dim as f64).sqrt();
        let u1 = Uniform::new_inclusive(-a1, a1);
        for r in [layout.w1(), layout.b1()] {
            for p in &mut params[r] {
                *p = u1.sample(&mut rng);
            }
        }
        let a2 = 1.0 / (hidden_dim as f64).sqrt();
        let u2 = Uniform::new_inclusive(-a2, a2);
        for r in [layout.w2(), layout.b2()] {
            for p in &mut params[r] {
                *p = u2.sample(&mut rng);
            }
        }
        Self {
            labels,
            vocab,
            layout,
            params,
        }
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn embed_dim(&self) -> usize {
        self.layout.embed
    }

    /// Embedding row for a vocabulary index.
    pub fn embedding_row(&self, index: usize) -> &[f64] {
        let d = self.layout.embed;
        &self.params[index * d..(index + 1) * d]
    }

    fn token_ids(&self, x: &TokenizedText) -> Vec<usize> {
        x.words().iter().map(|w| self.vocab.lookup(w)).collect()
    }

    fn forward_mean(&self, mean: Vec<f64>) -> Forward {
        let l = self.layout;
        let w1 = &self.params[l.w1()];
        let b1 = &self.params[l.b1()];
        let w2 = &self.params[l.w2()];
        let b2 = &self.params[l.b2()];
        let mut pre = b1.to_vec();
        for (i, &m) in mean.iter().enumerate() {
            let row = &w1[i * l.hidden..(i + 1) * l.hidden];
            for (h, w) in pre.iter_mut().zip(row) {
                *h += m * w;
            }
        }
        let mut logits = b2.to_vec();
        for (j, &h) in pre.iter().enumerate() {
            let r = h.max(0.0);
            if r == 0.0 {
                continue;
            }
            let row = &w2[j * l.classes..(j + 1) * l.classes];
            for (z, w) in logits.iter_mut().zip(row) {
                *z += r * w;
            }
        }
        Forward {
            mean,
            pre,
            probs: softmax(&logits),
        }
    }

    fn forward_ids(&self, ids: &[usize]) -> Forward {
        let d = self.layout.embed;
        let mut mean = vec![0.0; d];
        for &id in ids {
            for (m, e) in mean.iter_mut().zip(self.embedding_row(id)) {
                *m += e;
            }
        }
        let n = ids.len().max(1) as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        self.forward_mean(mean)
    }

    /// Backpropagates `dlogits` to the pooled mean, accumulating parameter
    /// gradients into `grads` when given.
    fn backward(&self, fwd: &Forward, dlogits: &[f64], mut grads: Option<&mut [f64]>) -> Vec<f64> {
        let l = self.layout;
        let w1 = &self.params[l.w1()];
        let w2 = &self.params[l.w2()];
        let mut dpre = vec![0.0; l.hidden];
        for j in 0..l.hidden {
            if fwd.pre[j] <= 0.0 {
                continue;
            }
            let r = fwd.pre[j];
            let row = &w2[j * l.classes..(j + 1) * l.classes];
            dpre[j] = row.iter().zip(dlogits).map(|(w, g)| w * g).sum();
            if let Some(g) = &mut grads {
                let gw2 = &mut g[l.w2()];
                for c in 0..l.classes {
                    gw2[j * l.classes + c] += r * dlogits[c];
                }
            }
        }
        if let Some(g) = &mut grads {
            for (gb, d) in g[l.b2()].iter_mut().zip(dlogits) {
                *gb += d;
            }
            for (gb, d) in g[l.b1()].iter_mut().zip(&dpre) {
                *gb += d;
            }
            let gw1 = &mut g[l.w1()];
            for i in 0..l.embed {
                let m = fwd.mean[i];
                if m == 0.0 {
                    continue;
                }
                for j in 0..l.hidden {
                    gw1[i * l.hidden + j] += m * dpre[j];
                }
            }
        }
        (0..l.embed)
            .map(|i| {
                let row = &w1[i * l.hidden..(i + 1) * l.hidden];
                row.iter().zip(&dpre).map(|(w, d)| w * d).sum()
            })
            .collect()
    }

    pub fn accuracy(&self, data: &[LabeledText]) -> f64 {
        if data.is_empty() {
            return 0.0;
        }
        let correct = data
            .iter()
            .filter(|ex| {
                let fwd = self.forward_ids(&self.token_ids(&ex.text));
                let best = argmax(&fwd.probs);
                self.labels[best] == ex.label
            })
            .count();
        correct as f64 / data.len() as f64
    }

    pub fn to_json(&self) -> Result<String> {
        let l = self.layout;
        let ckpt = Checkpoint {
            kind: EMBEDDING_BAG_KIND.into(),
            labels: self.labels.clone(),
            vocabulary: self.vocab.clone(),
            embed_dim: l.embed,
            hidden_dim: l.hidden,
            embedding: self.params[l.emb()].to_vec(),
            hidden_weight: self.params[l.w1()].to_vec(),
            hidden_bias: self.params[l.b1()].to_vec(),
            output_weight: self.params[l.w2()].to_vec(),
            output_bias: self.params[l.b2()].to_vec(),
        };
        crate::io::json::to_string(&ckpt)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s)?;
        if c.kind != EMBEDDING_BAG_KIND {
            return Err(CatError::Checkpoint(format!("expected kind `{EMBEDDING_BAG_KIND}`, got `{}`", c.kind)));
        }
        if c.labels.len() < 2 {
            return Err(CatError::Checkpoint("need at least two labels".into()));
        }
        if c.embed_dim == 0 || c.hidden_dim == 0 {
            return Err(CatError::Checkpoint("zero-sized layer".into()));
        }
        let layout = Layout {
            vocab: c.vocabulary.len(),
            embed: c.embed_dim,
            hidden: c.hidden_dim,
            classes: c.labels.len(),
        };
        let expect = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(CatError::Checkpoint(format!("{name} has {got} entries, expected {want}")))
            }
        };
        expect("embedding", c.embedding.len(), layout.emb().len())?;
        expect("hidden_weight", c.hidden_weight.len(), layout.w1().len())?;
        expect("hidden_bias", c.hidden_bias.len(), layout.b1().len())?;
        expect("output_weight", c.output_weight.len(), layout.w2().len())?;
        expect("output_bias", c.output_bias.len(), layout.b2().len())?;
        let params: Vec<f64> = [c.embedding, c.hidden_weight, c.hidden_bias, c.output_weight, c.output_bias].concat();
        if params.iter().any(|p| !p.is_finite()) {
            return Err(CatError::Checkpoint("non-finite weight".into()));
        }
        Ok(Self {
            labels: c.labels,
            vocab: c.vocabulary,
            layout,
            params,
        })
    }
}

impl Classifier for EmbeddingBagClassifier {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn classify(&self, x: &TokenizedText) -> Result<ClassDistribution> {
        let fwd = self.forward_ids(&self.token_ids(x));
        ClassDistribution::new(fwd.probs, self.labels.clone())
    }

    fn as_differentiable(&self) -> Option<&dyn DifferentiableClassifier> {
        Some(self)
    }
}

impl DifferentiableClassifier for EmbeddingBagClassifier {
    fn word_embeddings(&self, x: &TokenizedText) -> Vec<Vec<f64>> {
        self.token_ids(x)
            .into_iter()
            .map(|id| self.embedding_row(id).to_vec())
            .collect()
    }

    fn target_prob(&self, embeddings: &[Vec<f64>], target: usize) -> f64 {
        self.forward_mean(mean_rows(embeddings, self.layout.embed)).probs[target]
    }

    fn target_prob_grad(&self, embeddings: &[Vec<f64>], target: usize) -> (f64, Vec<Vec<f64>>) {
        let fwd = self.forward_mean(mean_rows(embeddings, self.layout.embed));
        let pt = fwd.probs[target];
        let dlogits: Vec<f64> = fwd
            .probs
            .iter()
            .enumerate()
            .map(|(c, &pc)| pt * (f64::from(u8::from(c == target)) - pc))
            .collect();
        let dmean = self.backward(&fwd, &dlogits, None);
        let n = embeddings.len().max(1) as f64;
        let row: Vec<f64> = dmean.iter().map(|g| g / n).collect();
        (pt, vec![row; embeddings.len()])
    }
}

fn mean_rows(rows: &[Vec<f64>], dim: usize) -> Vec<f64> {
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r) {
            *m += v;
        }
    }
    let n = rows.len().max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Sorted distinct labels of a dataset.
pub(crate) fn label_set(data: &[LabeledText]) -> Vec<String> {
    let mut labels: Vec<String> = data.iter().map(|e| e.label.clone()).collect();
    labels.sort();
    labels.dedup();
    labels
}

pub(crate) fn word_counts<'a>(texts: impl IntoIterator<Item = &'a TokenizedText>) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for t in texts {
        for w in t.words() {
            *counts.entry(w.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Trains with cross-entropy and Adam on shuffled mini-batches.
pub fn train_classifier(data: &[LabeledText], config: &ClassifierTrainConfig) -> Result<EmbeddingBagClassifier> {
    if data.is_empty() {
        return Err(CatError::DegenerateDataset("empty dataset".into()));
    }
    let labels = label_set(data);
    if labels.len() < 2 {
        return Err(CatError::DegenerateDataset(format!(
            "only one class present: `{}`",
            labels[0]
        )));
    }
    if config.batch_size == 0 || config.embed_dim == 0 || config.hidden_dim == 0 {
        return Err(CatError::Config("batch size and layer sizes must be positive".into()));
    }
    let vocab = Vocabulary::from_counts(&word_counts(data.iter().map(|e| &e.text)), config.min_count.max(1));
    let mut model = EmbeddingBagClassifier::init(labels.clone(), vocab, config.embed_dim, config.hidden_dim, config.seed);
    let examples: Vec<(Vec<usize>, usize)> = data
        .iter()
        .map(|e| {
            let y = labels.binary_search(&e.label).expect("label in set");
            (model.token_ids(&e.text), y)
        })
        .collect();

    let l = model.layout;
    let mut opt = Adam::new(l.total(), config.learning_rate, config.weight_decay);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut grads = vec![0.0; l.total()];
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            grads.iter_mut().for_each(|g| *g = 0.0);
            let scale = 1.0 / batch.len() as f64;
            for &i in batch {
                let (ids, y) = &examples[i];
                let fwd = model.forward_ids(ids);
                let dlogits: Vec<f64> = fwd
                    .probs
                    .iter()
                    .enumerate()
                    .map(|(c, &p)| scale * (p - f64::from(u8::from(c == *y))))
                    .collect();
                let dmean = model.backward(&fwd, &dlogits, Some(&mut grads));
                let n = ids.len().max(1) as f64;
                let d = l.embed;
                for &id in ids {
                    let row = &mut grads[id * d..(id + 1) * d];
                    for (g, dm) in row.iter_mut().zip(&dmean) {
                        *g += dm / n;
                    }
                }
            }
            opt.step(&mut model.params, &grads);
        }
    }
    Ok(model)
}
