use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};

pub const UNK: &str = "<unk>";

/// Word → index map with index 0 reserved for unknown words.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Vocabulary {
    words: Vec<String>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    /// Builds a vocabulary from word counts, keeping words seen at least
    /// `min_count` times, in lexicographic order after the unknown token.
    pub fn from_counts(counts: &BTreeMap<String, usize>, min_count: usize) -> Self {
        let words = std::iter::once(UNK.to_string())
            .chain(counts.iter().filter(|(_, &c)| c >= min_count).map(|(w, _)| w.clone()))
            .collect::<Vec<_>>();
        Self::from_words_unchecked(words)
    }

    fn from_words_unchecked(words: Vec<String>) -> Self {
        let index = words.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        Self { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Index of `word`, or 0 when unknown.
    pub fn lookup(&self, word: &str) -> usize {
        self.index.get(word).copied().unwrap_or(0)
    }

    pub fn get(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied().filter(|&i| i != 0)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }
}

impl TryFrom<Vec<String>> for Vocabulary {
    type Error = CatError;

    fn try_from(words: Vec<String>) -> Result<Self> {
        if words.first().map(String::as_str) != Some(UNK) {
            return Err(CatError::Checkpoint(format!("vocabulary must start with `{UNK}`")));
        }
        let v = Self::from_words_unchecked(words);
        if v.index.len() != v.words.len() {
            return Err(CatError::Checkpoint("vocabulary has duplicate entries".into()));
        }
        Ok(v)
    }
}

impl From<Vocabulary> for Vec<String> {
    fn from(v: Vocabulary) -> Self {
        v.words
    }
}
