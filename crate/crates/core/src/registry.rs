//! Backends by name: reads the checkpoints a run config points to.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};
use crate::io::RunConfig;
use crate::model::{
    AttributeScorer, Classifier, EmptyAttributeBank, FluencyModel, KeywordAttribute, KeywordAttributeScorer,
    KeywordClassifier, KeywordRule, MaskFiller, SentenceEmbedder,
};
use crate::reference::{AttributeBank, AveragedEmbedder, EmbeddingBagClassifier, NgramModel};
use crate::eval::MetricModels;
use crate::search::SearchBackends;

pub const KEYWORD_CLASSIFIER_KIND: &str = "keyword-classifier";
pub const KEYWORD_ATTRIBUTES_KIND: &str = "keyword-attributes";

/// JSON form of a [`KeywordClassifier`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeywordClassifierFile {
    pub kind: String,
    pub labels: Vec<String>,
    pub rules: Vec<KeywordRule>,
    #[serde(default)]
    pub fallback: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeywordAttributesFile {
    pub kind: String,
    pub attributes: Vec<KeywordAttribute>,
}

fn check_kind(found: &str, expected: &str) -> Result<()> {
    if found != expected {
        return Err(CatError::Checkpoint(format!("expected kind `{expected}`, got `{found}`")));
    }
    Ok(())
}

pub fn parse_keyword_classifier(s: &str) -> Result<KeywordClassifier> {
    let f: KeywordClassifierFile = serde_json::from_str(s)?;
    check_kind(&f.kind, KEYWORD_CLASSIFIER_KIND)?;
    KeywordClassifier::new(f.labels, f.rules, f.fallback)
}

pub fn parse_keyword_attributes(s: &str) -> Result<KeywordAttributeScorer> {
    let f: KeywordAttributesFile = serde_json::from_str(s)?;
    check_kind(&f.kind, KEYWORD_ATTRIBUTES_KIND)?;
    KeywordAttributeScorer::new(f.attributes)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| CatError::Config(format!("cannot read {}: {e}", path.display())))
}

fn ngram(path: &Path, name: &str) -> Result<NgramModel> {
    let m = NgramModel::from_json(&read(path)?)?;
    let expected = n_gram_order(name)?;
    if m.order() != expected {
        return Err(CatError::Config(format!(
            "backend `{name}` needs an order-{expected} checkpoint, {} has order {}",
            path.display(),
            m.order()
        )));
    }
    Ok(m)
}

pub fn n_gram_order(name: &str) -> Result<u8> {
    match name {
        "bigram" => Ok(2),
        "unigram" => Ok(1),
        other => Err(CatError::Config(format!("unknown n-gram backend `{other}`"))),
    }
}

pub fn load_classifier(name: &str, path: &Path) -> Result<Box<dyn Classifier>> {
    match name {
        "embedding-bag" => Ok(Box::new(EmbeddingBagClassifier::from_json(&read(path)?)?)),
        "keyword" => Ok(Box::new(parse_keyword_classifier(&read(path)?)?)),
        other => Err(CatError::Config(format!("unknown classifier backend `{other}`"))),
    }
}

pub fn load_attributes(name: &str, path: Option<&Path>) -> Result<Box<dyn AttributeScorer>> {
    let need = || path.ok_or_else(|| CatError::Config("`attributes_path` is not set".into()));
    match name {
        "none" => Ok(Box::new(EmptyAttributeBank)),
        "bow-attribute-bank" => Ok(Box::new(AttributeBank::from_json(&read(need()?)?)?)),
        "keyword" => Ok(Box::new(parse_keyword_attributes(&read(need()?)?)?)),
        other => Err(CatError::Config(format!("unknown attribute backend `{other}`"))),
    }
}

pub fn load_filler(name: &str, path: &Path) -> Result<Box<dyn MaskFiller>> {
    Ok(Box::new(ngram(path, name)?))
}

pub fn load_embedder(name: &str, path: &Path) -> Result<Box<dyn SentenceEmbedder>> {
    match name {
        "averaged" => Ok(Box::new(AveragedEmbedder::from_json(&read(path)?)?)),
        other => Err(CatError::Config(format!("unknown embedder backend `{other}`"))),
    }
}

pub fn load_fluency(name: &str, path: &Path) -> Result<Box<dyn FluencyModel>> {
    Ok(Box::new(ngram(path, name)?))
}

/// The embedder and fluency model used for Cont and Fluency.
pub struct MetricBackends {
    pub embedder: Box<dyn SentenceEmbedder>,
    pub fluency: Box<dyn FluencyModel>,
}

impl MetricBackends {
    pub fn load(config: &RunConfig) -> Result<Self> {
        Ok(Self {
            embedder: load_embedder(&config.embedder, config.require("embedder_path")?)?,
            fluency: load_fluency(&config.fluency, config.require("fluency_path")?)?,
        })
    }

    pub fn models(&self) -> MetricModels<'_> {
        MetricModels {
            embedder: self.embedder.as_ref(),
            fluency: self.fluency.as_ref(),
        }
    }
}

/// Everything a run needs, loaded from a config.
pub struct Backends {
    pub classifier: Box<dyn Classifier>,
    pub attributes: Box<dyn AttributeScorer>,
    pub filler: Box<dyn MaskFiller>,
    /// Present when both metric checkpoints are configured.
    pub metrics: Option<MetricBackends>,
}

impl Backends {
    pub fn load(config: &RunConfig) -> Result<Self> {
        config.require_checkpoints()?;
        let attributes_path = if config.attributes == "none" {
            None
        } else {
            Some(config.require("attributes_path")?)
        };
        let metrics = if config.embedder_path.is_some() && config.fluency_path.is_some() {
            Some(MetricBackends::load(config)?)
        } else {
            None
        };
        Ok(Self {
            classifier: load_classifier(&config.classifier, config.require("classifier_path")?)?,
            attributes: load_attributes(&config.attributes, attributes_path)?,
            filler: load_filler(&config.filler, config.require("filler_path")?)?,
            metrics,
        })
    }

    pub fn search(&self) -> SearchBackends<'_> {
        SearchBackends {
            classifier: self.classifier.as_ref(),
            attributes: self.attributes.as_ref(),
            filler: self.filler.as_ref(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    #[test]
    fn keyword_classifier_file() {
        let s = r#"{"kind":"keyword-classifier","labels":["neg","pos"],"rules":[{"word":"good","label":"pos","confidence":0.9}]}"#;
        let c = parse_keyword_classifier(s).unwrap();
        assert_eq!(c.classify(&tokenize("good").unwrap()).unwrap().label(), "pos");
        let bad = s.replace("keyword-classifier", "embedding-bag");
        assert!(matches!(parse_keyword_classifier(&bad), Err(CatError::Checkpoint(_))));
    }

    #[test]
    fn keyword_attribute_file() {
        let s = r#"{"kind":"keyword-attributes","attributes":[{"name":"taste","keywords":["sweet","spicy"],"tau":0.3}]}"#;
        let a = parse_keyword_attributes(s).unwrap();
        assert_eq!(a.score_attributes(&tokenize("so sweet").unwrap()).unwrap().scores(), &[0.5]);
    }

    #[test]
    fn unknown_backend_names() {
        assert!(matches!(load_classifier("bert", Path::new("x")), Err(CatError::Config(_))));
        assert!(matches!(load_attributes("zeta", None), Err(CatError::Config(_))));
        assert!(matches!(load_attributes("keyword", None), Err(CatError::Config(_))));
        assert!(load_attributes("none", None).is_ok());
        assert!(n_gram_order("trigram").is_err());
    }

    #[test]
    fn ngram_order_must_match_name() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("lm.json");
        let m = NgramModel::build(&[tokenize("a b").unwrap()], 1).unwrap();
        std::fs::write(&p, m.to_json().unwrap()).unwrap();
        assert!(load_filler("unigram", &p).is_ok());
        assert!(matches!(load_filler("bigram", &p), Err(CatError::Config(_))));
    }
}
