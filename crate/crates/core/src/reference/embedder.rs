//! Averaged word vectors built by random indexing over a corpus.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};
use crate::model::SentenceEmbedder;
use crate::text::TokenizedText;

pub const AVERAGED_EMBEDDING_KIND: &str = "averaged-embedding";

const NONZEROS: usize = 4;
const WINDOW: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AveragedEmbedder {
    kind: String,
    dim: usize,
    seed: u64,
    table: BTreeMap<String, Vec<f64>>,
}

fn fnv1a(word: &str) -> u64 {
    word.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Sparse ternary signature of a word, fixed by its hash and the seed.
fn index_vector(word: &str, dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(word) ^ seed);
    let mut v = vec![0.0; dim];
    for _ in 0..NONZEROS.min(dim) {
        let i = rng.gen_range(0..dim);
        v[i] += if rng.gen::<bool>() { 1.0 } else { -1.0 };
    }
    if v.iter().all(|x| *x == 0.0) {
        v[rng.gen_range(0..dim)] = 1.0;
    }
    v
}

fn unit(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    v
}

impl AveragedEmbedder {
    /// Uses the given rows directly.
    pub fn from_table(dim: usize, table: BTreeMap<String, Vec<f64>>, seed: u64) -> Result<Self> {
        let e = Self {
            kind: AVERAGED_EMBEDDING_KIND.into(),
            dim,
            seed,
            table,
        };
        e.validate()?;
        Ok(e)
    }

    /// Each word's vector is its own signature plus the signatures of its
    /// neighbours within a two-word window, normalized to unit length.
    pub fn train<'a>(corpus: impl IntoIterator<Item = &'a TokenizedText>, dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(CatError::Config("embedding dimension must be positive".into()));
        }
        let mut acc: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for text in corpus {
            let words = text.words();
            for (i, w) in words.iter().enumerate() {
                let row = acc.entry(w.clone()).or_insert_with(|| index_vector(w, dim, seed));
                let lo = i.saturating_sub(WINDOW);
                let hi = (i + WINDOW + 1).min(words.len());
                for (j, ctx) in words.iter().enumerate().take(hi).skip(lo) {
                    if j == i {
                        continue;
                    }
                    for (r, c) in row.iter_mut().zip(index_vector(ctx, dim, seed)) {
                        *r += c;
                    }
                }
            }
        }
        if acc.is_empty() {
            return Err(CatError::DegenerateDataset("empty embedding corpus".into()));
        }
        let table = acc.into_iter().map(|(w, v)| (w, unit(v))).collect();
        Self::from_table(dim, table, seed)
    }

    fn validate(&self) -> Result<()> {
        if self.kind != AVERAGED_EMBEDDING_KIND {
            return Err(CatError::Checkpoint(format!(
                "expected kind `{AVERAGED_EMBEDDING_KIND}`, got `{}`",
                self.kind
            )));
        }
        if self.dim == 0 {
            return Err(CatError::Checkpoint("zero embedding dimension".into()));
        }
        for (w, row) in &self.table {
            if row.len() != self.dim || row.iter().any(|x| !x.is_finite()) {
                return Err(CatError::Checkpoint(format!("bad row for `{w}`")));
            }
        }
        Ok(())
    }

    /// Row for a word; unknown words use their unit-length signature.
    pub fn word_vector(&self, word: &str) -> Vec<f64> {
        match self.table.get(word) {
            Some(row) => row.clone(),
            None => unit(index_vector(word, self.dim, self.seed)),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        crate::io::json::to_string(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let e: Self = serde_json::from_str(s)?;
        e.validate()?;
        Ok(e)
    }
}

impl SentenceEmbedder for AveragedEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, x: &TokenizedText) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for w in x.words() {
            for (m, v) in mean.iter_mut().zip(self.word_vector(w)) {
                *m += v;
            }
        }
        let n = x.len() as f64;
        mean.iter_mut().for_each(|m| *m /= n);
        mean
    }
}
