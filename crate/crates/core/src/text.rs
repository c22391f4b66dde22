//! Word-level text representation, edit application and Levenshtein distance.
//!
//! Texts are normalized by lowercasing and collapsing whitespace. Punctuation
//! stays glued to the word it is written against, so `"U.S. Weather"` becomes
//! `["u.s.", "weather"]`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};

/// A normalized word sequence together with the string it was built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenizedText {
    words: Vec<String>,
    raw: String,
}

impl TokenizedText {
    /// Builds a text from words that are already normalized. The raw form is
    /// the space-joined sequence.
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let words: Vec<String> = words.into_iter().map(Into::into).collect();
        if words.is_empty() {
            return Err(CatError::EmptyText);
        }
        for w in &words {
            check_word(w)?;
        }
        let raw = words.join(" ");
        Ok(Self { words, raw })
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// The normalized text: words joined by single spaces.
    pub fn joined(&self) -> String {
        self.words.join(" ")
    }

    /// Copy of this text with the word at `position` removed.
    pub fn without_word(&self, position: usize) -> Result<Self> {
        apply_edit(self, &Edit::delete(position, self.words.get(position).cloned().unwrap_or_default()))
    }
}

impl fmt::Display for TokenizedText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.joined())
    }
}

fn check_word(w: &str) -> Result<()> {
    if w.is_empty() {
        return Err(CatError::InvalidEdit("empty word".into()));
    }
    if w.chars().any(char::is_whitespace) {
        return Err(CatError::InvalidEdit(format!("word `{w}` contains whitespace")));
    }
    Ok(())
}

/// Lowercases and collapses runs of whitespace into single spaces.
pub fn normalize(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn tokenize(raw: &str) -> Result<TokenizedText> {
    let words: Vec<String> = raw.split_whitespace().map(str::to_lowercase).collect();
    if words.is_empty() {
        return Err(CatError::EmptyText);
    }
    Ok(TokenizedText {
        words,
        raw: raw.to_string(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EditKind {
    Substitute,
    Insert,
    Delete,
}

impl EditKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EditKind::Substitute => "substitute",
            EditKind::Insert => "insert",
            EditKind::Delete => "delete",
        }
    }
}

/// One word-level perturbation.
///
/// For inserts `position` is a gap index in `0..=len`, meaning "before the
/// word currently at `position`". Substitutes and deletes address a word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edit {
    pub kind: EditKind,
    pub position: usize,
    pub old: Option<String>,
    pub new: Option<String>,
}

impl Edit {
    pub fn substitute(position: usize, old: impl Into<String>, new: impl Into<String>) -> Self {
        Self {
            kind: EditKind::Substitute,
            position,
            old: Some(old.into()),
            new: Some(new.into()),
        }
    }

    pub fn insert(position: usize, new: impl Into<String>) -> Self {
        Self {
            kind: EditKind::Insert,
            position,
            old: None,
            new: Some(new.into()),
        }
    }

    pub fn delete(position: usize, old: impl Into<String>) -> Self {
        Self {
            kind: EditKind::Delete,
            position,
            old: Some(old.into()),
            new: None,
        }
    }

    /// The word this edit writes into the text, if any.
    pub fn new_word(&self) -> Option<&str> {
        self.new.as_deref()
    }

    pub fn old_word(&self) -> Option<&str> {
        self.old.as_deref()
    }
}

impl fmt::Display for Edit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            EditKind::Substitute => write!(
                f,
                "substitute@{} {}→{}",
                self.position,
                self.old.as_deref().unwrap_or(""),
                self.new.as_deref().unwrap_or("")
            ),
            EditKind::Insert => write!(f, "insert@{} {}", self.position, self.new.as_deref().unwrap_or("")),
            EditKind::Delete => write!(f, "delete@{} {}", self.position, self.old.as_deref().unwrap_or("")),
        }
    }
}

/// Edits applied in order; each is indexed against the text produced by the
/// edits before it.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EditPath {
    pub edits: Vec<Edit>,
}

impl EditPath {
    pub fn new(edits: Vec<Edit>) -> Self {
        Self { edits }
    }

    pub fn len(&self) -> usize {
        self.edits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Edit> {
        self.edits.iter()
    }

    pub fn extended(&self, edit: Edit) -> Self {
        let mut edits = self.edits.clone();
        edits.push(edit);
        Self { edits }
    }
}

/// Applies a single edit, validating bounds and the recorded old word.
pub fn apply_edit(x: &TokenizedText, edit: &Edit) -> Result<TokenizedText> {
    let mut words = x.words.clone();
    let n = words.len();
    match edit.kind {
        EditKind::Substitute => {
            let new = edit
                .new
                .as_deref()
                .ok_or_else(|| CatError::InvalidEdit("substitute without a new word".into()))?;
            check_word(new)?;
            if edit.position >= n {
                return Err(CatError::InvalidEdit(format!(
                    "substitute position {} out of bounds for {n} words",
                    edit.position
                )));
            }
            let current = &words[edit.position];
            if let Some(old) = edit.old.as_deref() {
                if old != current {
                    return Err(CatError::InvalidEdit(format!(
                        "substitute expects `{old}` at {} but found `{current}`",
                        edit.position
                    )));
                }
            }
            if new == current {
                return Err(CatError::InvalidEdit(format!("substitute repeats the old word `{new}`")));
            }
            words[edit.position] = new.to_string();
        }
        EditKind::Insert => {
            let new = edit
                .new
                .as_deref()
                .ok_or_else(|| CatError::InvalidEdit("insert without a new word".into()))?;
            check_word(new)?;
            if edit.position > n {
                return Err(CatError::InvalidEdit(format!(
                    "insert gap {} out of bounds for {n} words",
                    edit.position
                )));
            }
            words.insert(edit.position, new.to_string());
        }
        EditKind::Delete => {
            if edit.position >= n {
                return Err(CatError::InvalidEdit(format!(
                    "delete position {} out of bounds for {n} words",
                    edit.position
                )));
            }
            if let Some(old) = edit.old.as_deref() {
                if old != words[edit.position] {
                    return Err(CatError::InvalidEdit(format!(
                        "delete expects `{old}` at {} but found `{}`",
                        edit.position, words[edit.position]
                    )));
                }
            }
            if n == 1 {
                return Err(CatError::InvalidEdit("cannot delete the only word".into()));
            }
            words.remove(edit.position);
        }
    }
    let raw = words.join(" ");
    Ok(TokenizedText { words, raw })
}

pub fn apply_edits(x: &TokenizedText, path: &EditPath) -> Result<TokenizedText> {
    let mut current = x.clone();
    for edit in path.iter() {
        current = apply_edit(&current, edit)?;
    }
    Ok(current)
}

/// Minimum number of word insertions, deletions and substitutions turning
/// `a` into `b`.
pub fn word_levenshtein(a: &TokenizedText, b: &TokenizedText) -> usize {
    levenshtein_slices(&a.words, &b.words)
}

pub fn levenshtein_slices<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, wa) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, wb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(wa != wb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Word Levenshtein divided by the input's word count.
pub fn normalized_levenshtein(input: &TokenizedText, contrast: &TokenizedText) -> f64 {
    word_levenshtein(input, contrast) as f64 / input.len() as f64
}
