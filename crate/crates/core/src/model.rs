//! Contracts for the pluggable models the explainer consumes, plus a handful
//! of rule-based backends that are handy for toy runs and tests.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};
use crate::text::TokenizedText;

const PROB_SUM_TOLERANCE: f64 = 1e-6;

/// Classifier output: a probability vector over an ordered label list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    probabilities: Vec<f64>,
    labels: Vec<String>,
}

impl ClassDistribution {
    pub fn new(probabilities: Vec<f64>, labels: Vec<String>) -> Result<Self> {
        if probabilities.len() != labels.len() {
            return Err(CatError::InvalidDistribution(format!(
                "{} probabilities for {} labels",
                probabilities.len(),
                labels.len()
            )));
        }
        if probabilities.is_empty() {
            return Err(CatError::InvalidDistribution("no classes".into()));
        }
        if probabilities.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(CatError::InvalidDistribution("negative or non-finite entry".into()));
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > PROB_SUM_TOLERANCE {
            return Err(CatError::InvalidDistribution(format!("entries sum to {sum}")));
        }
        Ok(Self { probabilities, labels })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn prob(&self, class: usize) -> f64 {
        self.probabilities[class]
    }

    /// Index of the most probable class; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probabilities.iter().enumerate().skip(1) {
            if p > self.probabilities[best] {
                best = i;
            }
        }
        best
    }

    pub fn label(&self) -> &str {
        &self.labels[self.argmax()]
    }

    pub fn num_classes(&self) -> usize {
        self.probabilities.len()
    }
}

/// Per-attribute presence scores in `[0, 1]`, each with its own threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeScoreVector {
    scores: Vec<f64>,
    names: Vec<String>,
    thresholds: Vec<f64>,
}

impl AttributeScoreVector {
    pub fn new(scores: Vec<f64>, names: Vec<String>, thresholds: Vec<f64>) -> Result<Self> {
        if scores.len() != names.len() || names.len() != thresholds.len() {
            return Err(CatError::MismatchedBanks(format!(
                "{} scores, {} names, {} thresholds",
                scores.len(),
                names.len(),
                thresholds.len()
            )));
        }
        if let Some(s) = scores.iter().find(|s| !(0.0..=1.0).contains(*s)) {
            return Err(CatError::InvalidDistribution(format!("attribute score {s} outside [0, 1]")));
        }
        if let Some(t) = thresholds.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
            return Err(CatError::InvalidDistribution(format!("threshold {t} outside (0, 1)")));
        }
        Ok(Self {
            scores,
            names,
            thresholds,
        })
    }

    pub fn empty() -> Self {
        Self {
            scores: Vec::new(),
            names: Vec::new(),
            thresholds: Vec::new(),
        }
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// A whole-word fill candidate. Higher `lm_score` means more fluent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FillProposal {
    pub word: String,
    pub lm_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FillMode {
    /// Replace the word at `position`.
    Substitute,
    /// Insert into gap `position` (before the word currently there).
    Insert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FillSite {
    pub mode: FillMode,
    pub position: usize,
}

impl FillSite {
    pub fn substitute(position: usize) -> Self {
        Self {
            mode: FillMode::Substitute,
            position,
        }
    }

    pub fn insert(position: usize) -> Self {
        Self {
            mode: FillMode::Insert,
            position,
        }
    }

    /// Left and right neighbours of the site, if any.
    pub fn context<'a>(&self, x: &'a TokenizedText) -> (Option<&'a str>, Option<&'a str>) {
        let words = x.words();
        let (left, right) = match self.mode {
            FillMode::Substitute => (self.position.checked_sub(1), self.position + 1),
            FillMode::Insert => (self.position.checked_sub(1), self.position),
        };
        (
            left.and_then(|i| words.get(i)).map(String::as_str),
            words.get(right).map(String::as_str),
        )
    }

    pub fn is_valid_for(&self, x: &TokenizedText) -> bool {
        match self.mode {
            FillMode::Substitute => self.position < x.len(),
            FillMode::Insert => self.position <= x.len(),
        }
    }
}

/// Sorts proposals by descending score, ties by word, and truncates to `k`.
pub fn rank_proposals(mut proposals: Vec<FillProposal>, k: usize) -> Vec<FillProposal> {
    proposals.sort_by(|a, b| b.lm_score.total_cmp(&a.lm_score).then_with(|| a.word.cmp(&b.word)));
    proposals.truncate(k);
    proposals
}

/// The black-box model being explained.
pub trait Classifier: Send + Sync {
    fn labels(&self) -> &[String];

    fn classify(&self, x: &TokenizedText) -> Result<ClassDistribution>;

    /// Gradient access for integrated gradients, when the backend has it.
    fn as_differentiable(&self) -> Option<&dyn DifferentiableClassifier> {
        None
    }

    /// Whether concurrent read-only inference is allowed.
    fn supports_concurrent_inference(&self) -> bool {
        true
    }
}

/// A classifier whose class probabilities are differentiable with respect to
/// per-word embedding inputs.
pub trait DifferentiableClassifier {
    /// One embedding row per word of `x`.
    fn word_embeddings(&self, x: &TokenizedText) -> Vec<Vec<f64>>;

    /// Probability of `target` for a sequence of word embeddings.
    fn target_prob(&self, embeddings: &[Vec<f64>], target: usize) -> f64;

    /// Probability of `target` and its gradient with respect to every
    /// embedding coordinate.
    fn target_prob_grad(&self, embeddings: &[Vec<f64>], target: usize) -> (f64, Vec<Vec<f64>>);
}

/// The attribute classifier bank.
pub trait AttributeScorer: Send + Sync {
    fn names(&self) -> &[String];

    fn thresholds(&self) -> &[f64];

    fn score_attributes(&self, x: &TokenizedText) -> Result<AttributeScoreVector>;

    fn supports_concurrent_inference(&self) -> bool {
        true
    }
}

/// Proposes whole words for a masked site.
pub trait MaskFiller: Send + Sync {
    /// At most `k` proposals sorted by descending `lm_score` (ties by word),
    /// none of which is in `forbid`.
    fn propose_fills(&self, x: &TokenizedText, site: FillSite, k: usize, forbid: &BTreeSet<String>) -> Vec<FillProposal>;

    fn supports_concurrent_inference(&self) -> bool {
        true
    }
}

pub trait SentenceEmbedder: Send + Sync {
    fn dim(&self) -> usize;

    fn embed(&self, x: &TokenizedText) -> Vec<f64>;
}

pub trait FluencyModel: Send + Sync {
    /// Average per-token negative log-likelihood.
    fn lm_loss(&self, x: &TokenizedText) -> f64;
}

/// Returns the same distribution for every input.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantClassifier {
    labels: Vec<String>,
    probabilities: Vec<f64>,
}

impl ConstantClassifier {
    pub fn new(labels: Vec<String>, probabilities: Vec<f64>) -> Result<Self> {
        ClassDistribution::new(probabilities.clone(), labels.clone())?;
        Ok(Self { labels, probabilities })
    }
}

impl Classifier for ConstantClassifier {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn classify(&self, _x: &TokenizedText) -> Result<ClassDistribution> {
        ClassDistribution::new(self.probabilities.clone(), self.labels.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordRule {
    pub word: String,
    pub label: String,
    pub confidence: f64,
}

/// Rule-based classifier: the most confident matching keyword decides.
///
/// A matched rule puts `confidence` on its label and spreads the remainder
/// evenly over the other labels. Ties between rules go to the earlier rule.
/// With no match the fallback distribution is returned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeywordClassifier {
    labels: Vec<String>,
    rules: Vec<KeywordRule>,
    fallback: Vec<f64>,
}

impl KeywordClassifier {
    pub fn new(labels: Vec<String>, rules: Vec<KeywordRule>, fallback: Option<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(CatError::Config("keyword classifier needs at least two labels".into()));
        }
        let fallback = fallback.unwrap_or_else(|| vec![1.0 / n as f64; n]);
        ClassDistribution::new(fallback.clone(), labels.clone())?;
        for r in &rules {
            if !labels.contains(&r.label) {
                return Err(CatError::Config(format!("rule label `{}` is not a class", r.label)));
            }
            if !(0.0..=1.0).contains(&r.confidence) {
                return Err(CatError::Config(format!("rule confidence {} outside [0, 1]", r.confidence)));
            }
        }
        Ok(Self { labels, rules, fallback })
    }
}

impl Classifier for KeywordClassifier {
    fn labels(&self) -> &[String] {
        &self.labels
    }

    fn classify(&self, x: &TokenizedText) -> Result<ClassDistribution> {
        let present: BTreeSet<&str> = x.words().iter().map(String::as_str).collect();
        let mut best: Option<&KeywordRule> = None;
        for rule in self.rules.iter().filter(|r| present.contains(r.word.as_str())) {
            if best.is_none_or(|b| rule.confidence > b.confidence) {
                best = Some(rule);
            }
        }
        let probs = match best {
            None => self.fallback.clone(),
            Some(rule) => {
                let rest = (1.0 - rule.confidence) / (self.labels.len() - 1) as f64;
                self.labels
                    .iter()
                    .map(|l| if *l == rule.label { rule.confidence } else { rest })
                    .collect()
            }
        };
        ClassDistribution::new(probs, self.labels.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordAttribute {
    pub name: String,
    pub keywords: Vec<String>,
    pub tau: f64,
}

/// Scores each attribute as the fraction of its keywords present in the text.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KeywordAttributeScorer {
    names: Vec<String>,
    thresholds: Vec<f64>,
    keywords: Vec<BTreeSet<String>>,
}

impl KeywordAttributeScorer {
    pub fn new(attributes: Vec<KeywordAttribute>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for a in &attributes {
            if !seen.insert(a.name.clone()) {
                return Err(CatError::Config(format!("duplicate attribute `{}`", a.name)));
            }
            if a.keywords.is_empty() {
                return Err(CatError::Config(format!("attribute `{}` has no keywords", a.name)));
            }
        }
        Ok(Self {
            names: attributes.iter().map(|a| a.name.clone()).collect(),
            thresholds: attributes.iter().map(|a| a.tau).collect(),
            keywords: attributes
                .into_iter()
                .map(|a| a.keywords.into_iter().collect())
                .collect(),
        })
    }
}

impl AttributeScorer for KeywordAttributeScorer {
    fn names(&self) -> &[String] {
        &self.names
    }

    fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    fn score_attributes(&self, x: &TokenizedText) -> Result<AttributeScoreVector> {
        let present: BTreeSet<&str> = x.words().iter().map(String::as_str).collect();
        let scores = self
            .keywords
            .iter()
            .map(|kw| kw.iter().filter(|w| present.contains(w.as_str())).count() as f64 / kw.len() as f64)
            .collect();
        AttributeScoreVector::new(scores, self.names.clone(), self.thresholds.clone())
    }
}

/// A bank with no attributes; the objective's attribute terms vanish.
#[derive(Debug, Clone, Default)]
pub struct EmptyAttributeBank;

impl AttributeScorer for EmptyAttributeBank {
    fn names(&self) -> &[String] {
        &[]
    }

    fn thresholds(&self) -> &[f64] {
        &[]
    }

    fn score_attributes(&self, _x: &TokenizedText) -> Result<AttributeScoreVector> {
        Ok(AttributeScoreVector::empty())
    }
}

/// Proposes a fixed vocabulary with fixed scores, regardless of context.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StaticFiller {
    scores: BTreeMap<String, f64>,
}

impl StaticFiller {
    pub fn new<I, S>(scores: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        Self {
            scores: scores.into_iter().map(|(w, s)| (w.into(), s)).collect(),
        }
    }
}

impl MaskFiller for StaticFiller {
    fn propose_fills(&self, x: &TokenizedText, site: FillSite, k: usize, forbid: &BTreeSet<String>) -> Vec<FillProposal> {
        if k == 0 || !site.is_valid_for(x) {
            return Vec::new();
        }
        let proposals = self
            .scores
            .iter()
            .filter(|(w, _)| !forbid.contains(*w))
            .map(|(w, &s)| FillProposal {
                word: w.clone(),
                lm_score: s,
            })
            .collect();
        rank_proposals(proposals, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn labels(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn distribution_validation() {
        assert!(ClassDistribution::new(vec![0.5, 0.5], labels(&["a", "b"])).is_ok());
        assert!(ClassDistribution::new(vec![0.5, 0.5 + 1e-7], labels(&["a", "b"])).is_ok());
        assert!(ClassDistribution::new(vec![0.6, 0.5], labels(&["a", "b"])).is_err());
        assert!(ClassDistribution::new(vec![1.1, -0.1], labels(&["a", "b"])).is_err());
        assert!(ClassDistribution::new(vec![1.0], labels(&["a", "b"])).is_err());
    }

    #[test]
    fn argmax_ties_go_low() {
        let d = ClassDistribution::new(vec![0.25, 0.375, 0.375], labels(&["a", "b", "c"])).unwrap();
        assert_eq!(d.argmax(), 1);
        let d = ClassDistribution::new(vec![0.5, 0.5], labels(&["a", "b"])).unwrap();
        assert_eq!(d.argmax(), 0);
    }

    #[test]
    fn constant_classifier_is_constant() {
        let c = ConstantClassifier::new(labels(&["a", "b"]), vec![0.3, 0.7]).unwrap();
        let x = tokenize("anything at all").unwrap();
        let y = tokenize("something else").unwrap();
        assert_eq!(c.classify(&x).unwrap(), c.classify(&y).unwrap());
        assert_eq!(c.classify(&x).unwrap().probabilities(), [0.3, 0.7]);
    }

    #[test]
    fn keyword_classifier() {
        let c = KeywordClassifier::new(
            labels(&["negative", "positive"]),
            vec![KeywordRule {
                word: "good".into(),
                label: "positive".into(),
                confidence: 0.9,
            }],
            None,
        )
        .unwrap();
        let x = tokenize("good food").unwrap();
        let d = c.classify(&x).unwrap();
        assert_eq!(d.label(), "positive");
        assert_eq!(d.prob(1), 0.9);
        assert_eq!(d, c.classify(&x).unwrap());
    }

    #[test]
    fn keyword_scorer() {
        let s = KeywordAttributeScorer::new(vec![KeywordAttribute {
            name: "food".into(),
            keywords: vec!["pizza".into(), "pasta".into()],
            tau: 0.3,
        }])
        .unwrap();
        let none = s.score_attributes(&tokenize("the weather is nice").unwrap()).unwrap();
        assert_eq!(none.scores(), [0.0]);
        let half = s.score_attributes(&tokenize("pizza tonight").unwrap()).unwrap();
        assert_eq!(half.scores(), [0.5]);
        assert_eq!(half, s.score_attributes(&tokenize("pizza tonight").unwrap()).unwrap());
    }

    #[test]
    fn score_vector_validation() {
        assert!(AttributeScoreVector::new(vec![0.5], labels(&["a"]), vec![0.3]).is_ok());
        assert!(AttributeScoreVector::new(vec![1.5], labels(&["a"]), vec![0.3]).is_err());
        assert!(AttributeScoreVector::new(vec![0.5], labels(&["a"]), vec![1.0]).is_err());
        assert!(AttributeScoreVector::new(vec![0.5], labels(&["a", "b"]), vec![0.3]).is_err());
    }

    #[test]
    fn static_filler_contract() {
        let f = StaticFiller::new([("bad", -1.0), ("fine", -0.5), ("ok", -0.5)]);
        let x = tokenize("the food is good").unwrap();
        assert!(f.propose_fills(&x, FillSite::substitute(3), 0, &BTreeSet::new()).is_empty());
        let all = f.propose_fills(&x, FillSite::substitute(3), 10, &BTreeSet::new());
        let words: Vec<_> = all.iter().map(|p| p.word.as_str()).collect();
        assert_eq!(words, ["fine", "ok", "bad"]);
        let forbid: BTreeSet<String> = ["fine".to_string()].into();
        let some = f.propose_fills(&x, FillSite::substitute(3), 10, &forbid);
        assert!(some.iter().all(|p| p.word != "fine"));
    }

    #[test]
    fn site_context() {
        let x = tokenize("a b c").unwrap();
        assert_eq!(FillSite::substitute(1).context(&x), (Some("a"), Some("c")));
        assert_eq!(FillSite::insert(0).context(&x), (None, Some("a")));
        assert_eq!(FillSite::insert(3).context(&x), (Some("c"), None));
        assert!(!FillSite::substitute(3).is_valid_for(&x));
    }
}
