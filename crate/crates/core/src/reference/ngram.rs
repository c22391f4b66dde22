//! Add-one smoothed unigram/bigram counts, used both as a mask filler and
//! as a fluency model.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};
use crate::model::{rank_proposals, FillProposal, FillSite, FluencyModel, MaskFiller};
use crate::text::TokenizedText;

pub const NGRAM_KIND: &str = "ngram";

#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    order: u8,
    unigrams: BTreeMap<String, u64>,
    bigrams: BTreeMap<(String, String), u64>,
    /// How often each word appears as the left side of a bigram.
    left_totals: BTreeMap<String, u64>,
    total: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Checkpoint {
    kind: String,
    order: u8,
    unigrams: BTreeMap<String, u64>,
    bigrams: Vec<(String, String, u64)>,
}

impl NgramModel {
    pub fn build<'a>(corpus: impl IntoIterator<Item = &'a TokenizedText>, order: u8) -> Result<Self> {
        if !(1..=2).contains(&order) {
            return Err(CatError::Config(format!("n-gram order must be 1 or 2, got {order}")));
        }
        let mut unigrams = BTreeMap::new();
        let mut bigrams = BTreeMap::new();
        for text in corpus {
            for w in text.words() {
                *unigrams.entry(w.clone()).or_insert(0) += 1;
            }
            for pair in text.words().windows(2) {
                *bigrams.entry((pair[0].clone(), pair[1].clone())).or_insert(0) += 1;
            }
        }
        if unigrams.is_empty() {
            return Err(CatError::DegenerateDataset("empty n-gram corpus".into()));
        }
        Ok(Self::from_counts(order, unigrams, bigrams))
    }

    fn from_counts(order: u8, unigrams: BTreeMap<String, u64>, bigrams: BTreeMap<(String, String), u64>) -> Self {
        let mut left_totals = BTreeMap::new();
        for ((l, _), c) in &bigrams {
            *left_totals.entry(l.clone()).or_insert(0) += c;
        }
        let total = unigrams.values().sum();
        Self {
            order,
            unigrams,
            bigrams,
            left_totals,
            total,
        }
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    pub fn vocabulary_size(&self) -> usize {
        self.unigrams.len()
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.unigrams.keys().map(String::as_str)
    }

    fn unigram_count(&self, w: &str) -> u64 {
        self.unigrams.get(w).copied().unwrap_or(0)
    }

    fn bigram_count(&self, l: &str, r: &str) -> u64 {
        self.bigrams.get(&(l.to_string(), r.to_string())).copied().unwrap_or(0)
    }

    fn left_total(&self, l: &str) -> u64 {
        self.left_totals.get(l).copied().unwrap_or(0)
    }

    fn vocab_f(&self) -> f64 {
        self.unigrams.len() as f64
    }

    /// Smoothed log-probability of `word` filling a site with the given
    /// neighbours.
    pub fn fill_score(&self, word: &str, left: Option<&str>, right: Option<&str>) -> f64 {
        let v = self.vocab_f();
        let unigram = || ((self.unigram_count(word) + 1) as f64 / (self.total as f64 + v)).ln();
        if self.order == 1 || (left.is_none() && right.is_none()) {
            return unigram();
        }
        let mut score = 0.0;
        if let Some(l) = left {
            score += ((self.bigram_count(l, word) + 1) as f64 / (self.left_total(l) as f64 + v)).ln();
        }
        if let Some(r) = right {
            score += ((self.bigram_count(word, r) + 1) as f64 / (self.left_total(word) as f64 + v)).ln();
        }
        score
    }

    pub fn to_json(&self) -> Result<String> {
        crate::io::json::to_string(&Checkpoint {
            kind: NGRAM_KIND.into(),
            order: self.order,
            unigrams: self.unigrams.clone(),
            bigrams: self.bigrams.iter().map(|((l, r), c)| (l.clone(), r.clone(), *c)).collect(),
        })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Checkpoint = serde_json::from_str(s)?;
        if c.kind != NGRAM_KIND {
            return Err(CatError::Checkpoint(format!("expected kind `{NGRAM_KIND}`, got `{}`", c.kind)));
        }
        if !(1..=2).contains(&c.order) {
            return Err(CatError::Checkpoint(format!("n-gram order {} unsupported", c.order)));
        }
        if c.unigrams.is_empty() {
            return Err(CatError::Checkpoint("empty vocabulary".into()));
        }
        if c.unigrams.keys().any(|w| w.is_empty() || w.chars().any(char::is_whitespace)) {
            return Err(CatError::Checkpoint("vocabulary entries must be single words".into()));
        }
        let mut bigrams = BTreeMap::new();
        for (l, r, n) in c.bigrams {
            if !c.unigrams.contains_key(&l) || !c.unigrams.contains_key(&r) {
                return Err(CatError::Checkpoint(format!("bigram ({l}, {r}) uses unknown words")));
            }
            if bigrams.insert((l.clone(), r.clone()), n).is_some() {
                return Err(CatError::Checkpoint(format!("duplicate bigram ({l}, {r})")));
            }
        }
        if c.unigrams.values().try_fold(0u64, |acc, n| acc.checked_add(*n)).is_none()
            || bigrams.values().try_fold(0u64, |acc, n| acc.checked_add(*n)).is_none()
        {
            return Err(CatError::Checkpoint("counts overflow".into()));
        }
        Ok(Self::from_counts(c.order, c.unigrams, bigrams))
    }

    /// Smoothed probability used for fluency scoring; one extra slot is
    /// reserved for unseen words.
    fn token_prob(&self, prev: Option<&str>, word: &str) -> f64 {
        let v = self.vocab_f() + 1.0;
        match prev {
            Some(p) if self.order == 2 => (self.bigram_count(p, word) + 1) as f64 / (self.left_total(p) as f64 + v),
            _ => (self.unigram_count(word) + 1) as f64 / (self.total as f64 + v),
        }
    }
}

impl MaskFiller for NgramModel {
    fn propose_fills(&self, x: &TokenizedText, site: FillSite, k: usize, forbid: &BTreeSet<String>) -> Vec<FillProposal> {
        if k == 0 || !site.is_valid_for(x) {
            return Vec::new();
        }
        let (left, right) = site.context(x);
        let proposals = self
            .unigrams
            .keys()
            .filter(|w| !forbid.contains(*w))
            .map(|w| FillProposal {
                word: w.clone(),
                lm_score: self.fill_score(w, left, right),
            })
            .collect();
        rank_proposals(proposals, k)
    }
}

impl FluencyModel for NgramModel {
    fn lm_loss(&self, x: &TokenizedText) -> f64 {
        let words = x.words();
        let nll: f64 = words
            .iter()
            .enumerate()
            .map(|(i, w)| -self.token_prob(i.checked_sub(1).map(|j| words[j].as_str()), w).ln())
            .sum();
        nll / words.len() as f64
    }
}

/// Fluency model from an explicit unigram probability table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnigramTable {
    probs: BTreeMap<String, f64>,
    unknown: f64,
}

impl UnigramTable {
    pub fn new(probs: BTreeMap<String, f64>, unknown: f64) -> Result<Self> {
        if probs.values().chain(std::iter::once(&unknown)).any(|p| !(*p > 0.0 && *p <= 1.0)) {
            return Err(CatError::Config("unigram probabilities must lie in (0, 1]".into()));
        }
        Ok(Self { probs, unknown })
    }

    /// Uniform distribution over `words`.
    pub fn uniform<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        let p = 1.0 / words.len() as f64;
        Self::new(words.into_iter().map(|w| (w, p)).collect(), p)
    }
}

impl FluencyModel for UnigramTable {
    fn lm_loss(&self, x: &TokenizedText) -> f64 {
        let nll: f64 = x
            .words()
            .iter()
            .map(|w| -self.probs.get(w).copied().unwrap_or(self.unknown).ln())
            .sum();
        nll / x.len() as f64
    }
}
