//! Batch drivers behind the command-line tool.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::attribution::AttributionMethod;
use crate::error::{CatError, Result};
use crate::eval::{
    aggregate, compare, instance_metrics, Aggregate, ComparisonReport, MetricModels, MetricRecord, TestKind,
};
use crate::io::config::load_bank_spec;
use crate::io::dataset::{load_dataset, parse_dataset, to_labeled, DatasetRecord};
use crate::io::explanations::{write_explanations, ExplanationLine, Status};
use crate::io::RunConfig;
use crate::objective::{attribute_deltas, HyperParams};
use crate::reference::{
    train_attribute_bank, train_classifier, AttributeDatasets, AveragedEmbedder, NgramModel,
};
use crate::registry::{n_gram_order, Backends};
use crate::search::{run_search, Explanation, SearchBackends};
use crate::text::{tokenize, TokenizedText};

/// Command-line overrides of config values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub attribution: Option<AttributionMethod>,
    pub early_exit: Option<bool>,
    pub beam_k: Option<usize>,
    pub edit_budget: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) -> Result<()> {
        if let Some(a) = self.attribution {
            config.attribution = a;
        }
        if let Some(e) = self.early_exit {
            config.early_exit = e;
        }
        if let Some(k) = self.beam_k {
            config.beam_k = k;
        }
        if let Some(b) = self.edit_budget {
            config.edit_budget = b;
        }
        config.hyperparams().validate()
    }
}

/// Seeded subset of `records` of size `n`, kept in file order.
pub fn sample_records(records: Vec<DatasetRecord>, n: Option<usize>, seed: u64) -> Vec<DatasetRecord> {
    match n {
        Some(n) if n < records.len() => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx = rand::seq::index::sample(&mut rng, records.len(), n).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| records[i].clone()).collect()
        }
        _ => records,
    }
}

/// Explains one record. Failures are reported on the line, never raised.
pub fn explain_record(
    record: &DatasetRecord,
    backends: SearchBackends<'_>,
    metrics: Option<MetricModels<'_>>,
    method: AttributionMethod,
    params: &HyperParams,
    config_hash: &str,
) -> ExplanationLine {
    let fail = |e: CatError| ExplanationLine::failed(&record.id, &record.text, e.to_string(), params.seed, config_hash);
    let x = match tokenize(&record.text) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let outcome = match run_search(&x, backends, method, params) {
        Ok(o) => o,
        Err(e) => return fail(e),
    };
    let Some(best) = outcome.best else {
        return ExplanationLine::no_contrast(&record.id, &x.joined(), &outcome.input_dist, params.seed, config_hash);
    };
    let changes = match attribute_deltas(&outcome.input_attrs, &best.attrs) {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    let metrics = metrics.and_then(|m| match instance_metrics(m.embedder, m.fluency, &x, &best.text) {
        Ok(v) => Some(v),
        Err(e) => {
            log::warn!("{}: metrics unavailable: {e}", record.id);
            None
        }
    });
    let e = Explanation {
        input_label: outcome.input_dist.label().to_string(),
        input: x,
        input_dist: outcome.input_dist,
        contrast_label: best.dist.label().to_string(),
        contrast: best.text,
        contrast_dist: best.dist,
        path: best.path,
        attribute_changes: changes,
        breakdown: best.breakdown,
        metrics,
    };
    ExplanationLine::ok(&record.id, &e, params.seed, config_hash)
}

/// Explains every record, in input order.
pub fn explain_records(
    records: &[DatasetRecord],
    backends: SearchBackends<'_>,
    metrics: Option<MetricModels<'_>>,
    method: AttributionMethod,
    params: &HyperParams,
    config_hash: &str,
) -> Vec<ExplanationLine> {
    let concurrent = backends.classifier.supports_concurrent_inference()
        && backends.attributes.supports_concurrent_inference()
        && backends.filler.supports_concurrent_inference();
    let one = |r: &DatasetRecord| explain_record(r, backends, metrics, method, params, config_hash);
    if concurrent {
        records.par_iter().map(one).collect()
    } else {
        records.iter().map(one).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplainRun {
    pub lines: Vec<ExplanationLine>,
    /// The JSONL file contents.
    pub output: String,
    pub config_hash: String,
}

impl ExplainRun {
    pub fn count(&self, status: Status) -> usize {
        self.lines.iter().filter(|l| l.status == status).count()
    }

    /// 0 when every instance produced a contrast, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.lines.iter().all(|l| l.status == Status::Ok) {
            0
        } else {
            2
        }
    }
}

/// Loads backends, explains the dataset bytes in `input` and renders JSONL.
pub fn run_explain(config: &RunConfig, input: &[u8]) -> Result<ExplainRun> {
    let text = std::str::from_utf8(input).map_err(|e| CatError::Config(format!("input is not UTF-8: {e}")))?;
    let records = parse_dataset(text)?;
    let backends = Backends::load(config)?;
    let config_hash = config.config_hash(input)?;
    let records = sample_records(records, config.sample_size, config.seed);
    let metrics = backends.metrics.as_ref().map(|m| m.models());
    let lines = explain_records(
        &records,
        backends.search(),
        metrics,
        config.attribution,
        &config.hyperparams(),
        &config_hash,
    );
    Ok(ExplainRun {
        output: write_explanations(&lines)?,
        lines,
        config_hash,
    })
}

/// Recomputes Dist/Cont/Fluency from the texts on each line.
pub fn metric_records(lines: &[ExplanationLine], models: MetricModels<'_>) -> Result<Vec<MetricRecord>> {
    lines
        .par_iter()
        .map(|l| {
            let metrics = match (&l.status, &l.contrast_text) {
                (Status::Ok, Some(c)) => Some(instance_metrics(
                    models.embedder,
                    models.fluency,
                    &tokenize(&l.input_text)?,
                    &tokenize(c)?,
                )?),
                _ => None,
            };
            Ok(MetricRecord {
                id: l.id.clone(),
                flipped: l.flipped(),
                metrics,
            })
        })
        .collect()
}

pub fn evaluate_lines(lines: &[ExplanationLine], models: MetricModels<'_>) -> Result<Aggregate> {
    aggregate(&metric_records(lines, models)?)
}

/// Compares two explanation files. With `models` the metrics are recomputed,
/// otherwise the values stored on each line are used.
pub fn compare_lines(
    a: &[ExplanationLine],
    b: &[ExplanationLine],
    models: Option<MetricModels<'_>>,
    test: TestKind,
) -> Result<ComparisonReport> {
    let records = |lines: &[ExplanationLine]| match models {
        Some(m) => metric_records(lines, m),
        None => Ok(lines.iter().map(ExplanationLine::metric_record).collect()),
    };
    compare(&records(a)?, &records(b)?, test)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainTarget {
    Classifier,
    AttributeBank,
    Filler,
    Fluency,
    Embedder,
    All,
}

impl FromStr for TrainTarget {
    type Err = CatError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "classifier" => Self::Classifier,
            "attribute-bank" => Self::AttributeBank,
            "filler" => Self::Filler,
            "fluency" => Self::Fluency,
            "embedder" => Self::Embedder,
            "all" => Self::All,
            other => return Err(CatError::Config(format!("unknown training target `{other}`"))),
        })
    }
}

impl fmt::Display for TrainTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Classifier => "classifier",
            Self::AttributeBank => "attribute-bank",
            Self::Filler => "filler",
            Self::Fluency => "fluency",
            Self::Embedder => "embedder",
            Self::All => "all",
        })
    }
}

impl TrainTarget {
    fn expand(self) -> Vec<TrainTarget> {
        match self {
            Self::All => vec![Self::Classifier, Self::AttributeBank, Self::Filler, Self::Fluency, Self::Embedder],
            t => vec![t],
        }
    }
}

fn output_path<'a>(key: &str, value: &'a Option<std::path::PathBuf>) -> Result<&'a Path> {
    value
        .as_deref()
        .ok_or_else(|| CatError::Config(format!("`{key}` is not set; nowhere to write the checkpoint")))
}

fn lm_corpus_key(config: &RunConfig) -> &'static str {
    if config.lm_corpus.is_some() {
        "lm_corpus"
    } else {
        "train_data"
    }
}

/// Checks every input and output a target needs before anything trains.
fn preflight(config: &RunConfig, target: TrainTarget) -> Result<()> {
    match target {
        TrainTarget::Classifier => {
            config.require("train_data")?;
            if config.heldout_data.is_some() {
                config.require("heldout_data")?;
            }
            output_path("classifier_path", &config.classifier_path)?;
        }
        TrainTarget::AttributeBank => {
            config.require("attribute_spec")?;
            config.require("attribute_data")?;
            if config.attribute_multiclass_data.is_some() {
                config.require("attribute_multiclass_data")?;
            }
            output_path("attributes_path", &config.attributes_path)?;
        }
        TrainTarget::Filler => {
            n_gram_order(&config.filler)?;
            config.require(lm_corpus_key(config))?;
            output_path("filler_path", &config.filler_path)?;
        }
        TrainTarget::Fluency => {
            n_gram_order(&config.fluency)?;
            config.require(lm_corpus_key(config))?;
            output_path("fluency_path", &config.fluency_path)?;
        }
        TrainTarget::Embedder => {
            if config.embedder != "averaged" {
                return Err(CatError::Config(format!("cannot train embedder backend `{}`", config.embedder)));
            }
            config.require(lm_corpus_key(config))?;
            output_path("embedder_path", &config.embedder_path)?;
        }
        TrainTarget::All => unreachable!("expanded before preflight"),
    }
    Ok(())
}

fn write_checkpoint(path: &Path, json: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, json)?;
    Ok(())
}

fn lm_texts(config: &RunConfig) -> Result<Vec<TokenizedText>> {
    let records = load_dataset(config.require(lm_corpus_key(config))?)?;
    records.iter().map(|r| tokenize(&r.text)).collect()
}

/// Trains the requested checkpoints and returns a short report per target.
pub fn run_train(config: &RunConfig, target: TrainTarget) -> Result<Vec<String>> {
    let targets = target.expand();
    for t in &targets {
        preflight(config, *t)?;
    }
    let mut report = Vec::new();
    for t in targets {
        match t {
            TrainTarget::Classifier => {
                let train = to_labeled(&load_dataset(config.require("train_data")?)?)?;
                let model = train_classifier(&train, &config.classifier_train_config())?;
                let (split, eval) = match &config.heldout_data {
                    Some(p) => ("held-out", to_labeled(&load_dataset(p)?)?),
                    None => ("training", train),
                };
                let path = output_path("classifier_path", &config.classifier_path)?;
                write_checkpoint(path, &model.to_json()?)?;
                report.push(format!(
                    "classifier: {split} accuracy {:.4} over {} examples -> {}",
                    model.accuracy(&eval),
                    eval.len(),
                    path.display()
                ));
            }
            TrainTarget::AttributeBank => {
                let spec = load_bank_spec(config.require("attribute_spec")?)?;
                let datasets = AttributeDatasets {
                    binary: to_labeled(&load_dataset(config.require("attribute_data")?)?)?,
                    multiclass: match &config.attribute_multiclass_data {
                        Some(p) => to_labeled(&load_dataset(p)?)?,
                        None => Vec::new(),
                    },
                };
                let bank = train_attribute_bank(&datasets, &spec, &config.attribute_train_config())?;
                let path = output_path("attributes_path", &config.attributes_path)?;
                write_checkpoint(path, &bank.to_json()?)?;
                report.push(format!(
                    "attribute-bank: {} attributes -> {}",
                    spec.attribute_count(),
                    path.display()
                ));
            }
            TrainTarget::Filler | TrainTarget::Fluency => {
                let (name, path) = if t == TrainTarget::Filler {
                    (&config.filler, output_path("filler_path", &config.filler_path)?)
                } else {
                    (&config.fluency, output_path("fluency_path", &config.fluency_path)?)
                };
                let model = NgramModel::build(&lm_texts(config)?, n_gram_order(name)?)?;
                write_checkpoint(path, &model.to_json()?)?;
                report.push(format!(
                    "{t}: order-{} model over {} words -> {}",
                    model.order(),
                    model.vocabulary_size(),
                    path.display()
                ));
            }
            TrainTarget::Embedder => {
                let model = AveragedEmbedder::train(&lm_texts(config)?, config.embedder_dim, config.seed)?;
                let path = output_path("embedder_path", &config.embedder_path)?;
                write_checkpoint(path, &model.to_json()?)?;
                report.push(format!("embedder: dimension {} -> {}", config.embedder_dim, path.display()));
            }
            TrainTarget::All => unreachable!("expanded above"),
        }
    }
    Ok(report)
}
