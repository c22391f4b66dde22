//! Run configuration: a flat TOML document.
//!
//! Relative paths are resolved against the directory holding the config
//! file. `CAT_SEED` in the environment replaces `seed`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::attribution::AttributionMethod;
use crate::error::{CatError, Result};
use crate::objective::HyperParams;
use crate::reference::{AttributeBankSpec, AttributeTrainConfig, ClassifierTrainConfig};

pub const SEED_ENV: &str = "CAT_SEED";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: f64,
    pub beta: f64,
    pub eta: f64,
    pub nu: f64,
    pub beam_k: usize,
    pub edit_budget: usize,
    pub top_positions: usize,
    pub ig_steps: usize,
    pub early_exit: bool,
    pub seed: u64,
    pub attribution: AttributionMethod,

    /// `embedding-bag` or `keyword`.
    pub classifier: String,
    pub classifier_path: Option<PathBuf>,
    /// `bow-attribute-bank`, `keyword` or `none`.
    pub attributes: String,
    pub attributes_path: Option<PathBuf>,
    /// `bigram` or `unigram`; both read an n-gram checkpoint.
    pub filler: String,
    pub filler_path: Option<PathBuf>,
    /// `averaged`.
    pub embedder: String,
    pub embedder_path: Option<PathBuf>,
    /// `bigram` or `unigram`.
    pub fluency: String,
    pub fluency_path: Option<PathBuf>,

    /// Default input of `explain`.
    pub dataset: Option<PathBuf>,
    /// Explain a seeded random subset of this size, kept in file order.
    pub sample_size: Option<usize>,

    pub train_data: Option<PathBuf>,
    pub heldout_data: Option<PathBuf>,
    pub classifier_epochs: usize,
    pub classifier_batch_size: usize,
    pub classifier_learning_rate: f64,
    pub classifier_weight_decay: f64,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub min_count: usize,

    /// TOML file describing the attribute bank.
    pub attribute_spec: Option<PathBuf>,
    pub attribute_data: Option<PathBuf>,
    pub attribute_multiclass_data: Option<PathBuf>,
    pub attribute_epochs: usize,
    pub attribute_batch_size: usize,
    pub attribute_learning_rate: f64,
    pub attribute_weight_decay: f64,

    /// Corpus for the filler, fluency model and embedder; defaults to `train_data`.
    pub lm_corpus: Option<PathBuf>,
    pub embedder_dim: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let h = HyperParams::default();
        let c = ClassifierTrainConfig::default();
        let a = AttributeTrainConfig::default();
        Self {
            lambda: h.lambda,
            beta: h.beta,
            eta: h.eta,
            nu: h.nu,
            beam_k: h.beam_k,
            edit_budget: h.edit_budget,
            top_positions: h.top_positions,
            ig_steps: h.ig_steps,
            early_exit: h.early_exit,
            seed: h.seed,
            attribution: AttributionMethod::IntegratedGradients,
            classifier: "embedding-bag".into(),
            classifier_path: None,
            attributes: "bow-attribute-bank".into(),
            attributes_path: None,
            filler: "bigram".into(),
            filler_path: None,
            embedder: "averaged".into(),
            embedder_path: None,
            fluency: "bigram".into(),
            fluency_path: None,
            dataset: None,
            sample_size: None,
            train_data: None,
            heldout_data: None,
            classifier_epochs: c.epochs,
            classifier_batch_size: c.batch_size,
            classifier_learning_rate: c.learning_rate,
            classifier_weight_decay: c.weight_decay,
            embed_dim: c.embed_dim,
            hidden_dim: c.hidden_dim,
            min_count: c.min_count,
            attribute_spec: None,
            attribute_data: None,
            attribute_multiclass_data: None,
            attribute_epochs: a.epochs,
            attribute_batch_size: a.batch_size,
            attribute_learning_rate: a.learning_rate,
            attribute_weight_decay: a.weight_decay,
            lm_corpus: None,
            embedder_dim: 64,
        }
    }
}

fn parse_seed(v: &str) -> Result<u64> {
    v.trim()
        .parse()
        .map_err(|_| CatError::Config(format!("{SEED_ENV} must be an unsigned integer, got `{v}`")))
}

impl RunConfig {
    pub fn parse(content: &str) -> Result<Self> {
        let c: Self = toml::from_str(content).map_err(|e| CatError::Config(e.to_string()))?;
        c.hyperparams().validate()?;
        Ok(c)
    }

    /// Reads the file, resolves relative paths and applies `CAT_SEED`.
    pub fn load(path: &Path) -> Result<Self> {
        let content = std::fs::read_to_string(path)
            .map_err(|e| CatError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut c = Self::parse(&content)?;
        c.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        if let Ok(v) = std::env::var(SEED_ENV) {
            c.seed = parse_seed(&v)?;
        }
        Ok(c)
    }

    fn paths_mut(&mut self) -> [(&'static str, &mut Option<PathBuf>); 12] {
        [
            ("classifier_path", &mut self.classifier_path),
            ("attributes_path", &mut self.attributes_path),
            ("filler_path", &mut self.filler_path),
            ("embedder_path", &mut self.embedder_path),
            ("fluency_path", &mut self.fluency_path),
            ("dataset", &mut self.dataset),
            ("train_data", &mut self.train_data),
            ("heldout_data", &mut self.heldout_data),
            ("attribute_spec", &mut self.attribute_spec),
            ("attribute_data", &mut self.attribute_data),
            ("attribute_multiclass_data", &mut self.attribute_multiclass_data),
            ("lm_corpus", &mut self.lm_corpus),
        ]
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for (_, p) in self.paths_mut() {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
    }

    pub fn hyperparams(&self) -> HyperParams {
        HyperParams {
            lambda: self.lambda,
            beta: self.beta,
            eta: self.eta,
            nu: self.nu,
            beam_k: self.beam_k,
            edit_budget: self.edit_budget,
            top_positions: self.top_positions,
            ig_steps: self.ig_steps,
            seed: self.seed,
            early_exit: self.early_exit,
        }
    }

    pub fn classifier_train_config(&self) -> ClassifierTrainConfig {
        ClassifierTrainConfig {
            epochs: self.classifier_epochs,
            batch_size: self.classifier_batch_size,
            learning_rate: self.classifier_learning_rate,
            weight_decay: self.classifier_weight_decay,
            embed_dim: self.embed_dim,
            hidden_dim: self.hidden_dim,
            min_count: self.min_count,
            seed: self.seed,
        }
    }

    pub fn attribute_train_config(&self) -> AttributeTrainConfig {
        AttributeTrainConfig {
            epochs: self.attribute_epochs,
            batch_size: self.attribute_batch_size,
            learning_rate: self.attribute_learning_rate,
            weight_decay: self.attribute_weight_decay,
            seed: self.seed,
        }
    }

    /// The value of a path-valued key, or a configuration error naming it.
    pub fn require(&self, key: &str) -> Result<&Path> {
        match self.path_ref(key) {
            Some(Some(p)) if p.exists() => Ok(p),
            Some(Some(p)) => Err(CatError::Config(format!("`{key}` points to missing file {}", p.display()))),
            Some(None) => Err(CatError::Config(format!("`{key}` is not set"))),
            None => Err(CatError::Config(format!("unknown path key `{key}`"))),
        }
    }

    fn path_ref(&self, key: &str) -> Option<Option<&Path>> {
        let p = match key {
            "classifier_path" => &self.classifier_path,
            "attributes_path" => &self.attributes_path,
            "filler_path" => &self.filler_path,
            "embedder_path" => &self.embedder_path,
            "fluency_path" => &self.fluency_path,
            "dataset" => &self.dataset,
            "train_data" => &self.train_data,
            "heldout_data" => &self.heldout_data,
            "attribute_spec" => &self.attribute_spec,
            "attribute_data" => &self.attribute_data,
            "attribute_multiclass_data" => &self.attribute_multiclass_data,
            "lm_corpus" => &self.lm_corpus,
            _ => return None,
        };
        Some(p.as_deref())
    }

    /// Checks that every checkpoint the explain pipeline reads exists.
    pub fn require_checkpoints(&self) -> Result<()> {
        self.require("classifier_path")?;
        if self.attributes != "none" {
            self.require("attributes_path")?;
        }
        self.require("filler_path")?;
        Ok(())
    }

    /// Digest of everything that can change explain output: all settings,
    /// the contents (not locations) of every referenced file, and the input.
    pub fn config_hash(&self, input: &[u8]) -> Result<String> {
        let mut copy = self.clone();
        let mut digests = Vec::new();
        for (key, p) in copy.paths_mut() {
            let digest = match p.take() {
                Some(path) => match std::fs::read(&path) {
                    Ok(bytes) => hex::encode(Sha256::digest(&bytes)),
                    Err(_) => "missing".into(),
                },
                None => "unset".into(),
            };
            digests.push(format!("{key}={digest}"));
        }
        let mut h = Sha256::new();
        h.update(b"cat-config-v1\n");
        h.update(env!("CARGO_PKG_VERSION").as_bytes());
        h.update(b"\n");
        h.update(crate::io::json::to_string(&copy)?.as_bytes());
        h.update(b"\n");
        h.update(digests.join("\n").as_bytes());
        h.update(b"\ninput=");
        h.update(Sha256::digest(input));
        Ok(hex::encode(h.finalize()))
    }
}

pub fn parse_bank_spec(content: &str) -> Result<AttributeBankSpec> {
    let spec: AttributeBankSpec = toml::from_str(content).map_err(|e| CatError::Config(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}

pub fn load_bank_spec(path: &Path) -> Result<AttributeBankSpec> {
    parse_bank_spec(&std::fs::read_to_string(path)?)
}
