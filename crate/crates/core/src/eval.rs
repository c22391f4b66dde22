//! Explanation quality metrics, aggregation and significance tests.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize, Serializer};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{CatError, Result};
use crate::model::{FluencyModel, SentenceEmbedder};
use crate::text::{normalized_levenshtein, TokenizedText};

/// Per-instance metrics of a produced contrast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceMetrics {
    pub dist: f64,
    pub cont: f64,
    pub fluency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub id: String,
    pub flipped: bool,
    pub metrics: Option<InstanceMetrics>,
}

pub fn flip_rate(records: &[MetricRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(CatError::EmptyEvaluation);
    }
    Ok(records.iter().filter(|r| r.flipped).count() as f64 / records.len() as f64)
}

pub fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return Err(CatError::DegenerateEmbedding);
    }
    if a == b {
        return Ok(1.0);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok((dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Cosine similarity of the sentence embeddings of input and contrast.
pub fn content_preservation(embedder: &dyn SentenceEmbedder, x: &TokenizedText, x_prime: &TokenizedText) -> Result<f64> {
    cosine(&embedder.embed(x), &embedder.embed(x_prime))
}

/// `lm_loss(x') / lm_loss(x)`.
pub fn fluency_ratio(model: &dyn FluencyModel, x: &TokenizedText, x_prime: &TokenizedText) -> Result<f64> {
    ratio(model.lm_loss(x_prime), model.lm_loss(x))
}

fn ratio(contrast_loss: f64, input_loss: f64) -> Result<f64> {
    if input_loss == 0.0 || !input_loss.is_finite() {
        return Err(CatError::DegenerateLoss);
    }
    Ok(contrast_loss / input_loss)
}

/// Models needed for Cont and Fluency.
#[derive(Clone, Copy)]
pub struct MetricModels<'a> {
    pub embedder: &'a dyn SentenceEmbedder,
    pub fluency: &'a dyn FluencyModel,
}

pub fn instance_metrics(
    embedder: &dyn SentenceEmbedder,
    fluency: &dyn FluencyModel,
    x: &TokenizedText,
    x_prime: &TokenizedText,
) -> Result<InstanceMetrics> {
    Ok(InstanceMetrics {
        dist: normalized_levenshtein(x, x_prime),
        cont: content_preservation(embedder, x, x_prime)?,
        fluency: fluency_ratio(fluency, x, x_prime)?,
    })
}

/// Mean and sample standard deviation of one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub n: usize,
    pub mean: Option<f64>,
    /// `None` below two observations.
    pub std: Option<f64>,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self { n, mean: None, std: None };
        }
        let mean = mean(values);
        let std = (n >= 2).then(|| sample_variance(values, mean).sqrt());
        Self {
            n,
            mean: Some(mean),
            std,
        }
    }
}

fn mean(values: &[f64]) -> f64 {
    let first = values[0];
    if values.iter().all(|v| *v == first) {
        return first;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_variance(values: &[f64], mean: f64) -> f64 {
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub instances: usize,
    pub contrasts: usize,
    pub flip_rate: f64,
    pub dist: MetricSummary,
    pub cont: MetricSummary,
    pub fluency: MetricSummary,
}

/// Flip rate over all records; other metrics over records with a contrast.
pub fn aggregate(records: &[MetricRecord]) -> Result<Aggregate> {
    let flip_rate = flip_rate(records)?;
    let produced: Vec<&InstanceMetrics> = records.iter().filter_map(|r| r.metrics.as_ref()).collect();
    let column = |f: fn(&InstanceMetrics) -> f64| MetricSummary::of(&produced.iter().map(|m| f(m)).collect::<Vec<_>>());
    Ok(Aggregate {
        instances: records.len(),
        contrasts: produced.len(),
        flip_rate,
        dist: column(|m| m.dist),
        cont: column(|m| m.cont),
        fluency: column(|m| m.fluency),
    })
}

fn serialize_signed<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn deserialize_signed<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Text(s) => match s.as_str() {
            "inf" => Ok(f64::INFINITY),
            "-inf" => Ok(f64::NEG_INFINITY),
            "nan" => Ok(f64::NAN),
            other => Err(serde::de::Error::custom(format!("bad statistic `{other}`"))),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    #[serde(serialize_with = "serialize_signed", deserialize_with = "deserialize_signed")]
    pub t: f64,
    pub p: f64,
    pub df: f64,
}

fn two_sided_p(t: f64, df: f64) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Paired t-test on `a − b`. Identical samples give `(0, 1)`; constant
/// nonzero differences give `(±∞, 0)`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(CatError::UnpairedInputs(format!("{} vs {} values", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(CatError::UnpairedInputs("need at least two pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let df = n - 1.0;
    let m = d.iter().sum::<f64>() / n;
    let var = sample_variance(&d, m);
    if var == 0.0 {
        return Ok(if m == 0.0 {
            TTest { t: 0.0, p: 1.0, df }
        } else {
            TTest {
                t: f64::INFINITY.copysign(m),
                p: 0.0,
                df,
            }
        });
    }
    let t = m / (var / n).sqrt();
    Ok(TTest {
        t,
        p: two_sided_p(t, df),
        df,
    })
}

/// Unpaired Welch t-test on the means of `a` and `b`.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(CatError::UnpairedInputs("each sample needs at least two values".into()));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (ma, mb) = (a.iter().sum::<f64>() / na, b.iter().sum::<f64>() / nb);
    let (va, vb) = (sample_variance(a, ma) / na, sample_variance(b, mb) / nb);
    let se2 = va + vb;
    let diff = ma - mb;
    if se2 == 0.0 {
        let df = na + nb - 2.0;
        return Ok(if diff == 0.0 {
            TTest { t: 0.0, p: 1.0, df }
        } else {
            TTest {
                t: f64::INFINITY.copysign(diff),
                p: 0.0,
                df,
            }
        });
    }
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    let t = diff / se2.sqrt();
    Ok(TTest {
        t,
        p: two_sided_p(t, df),
        df,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Paired,
    Welch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub pairs: usize,
    pub mean_a: Option<f64>,
    pub mean_b: Option<f64>,
    /// Mean of `a − b` over paired instances.
    pub mean_difference: Option<f64>,
    pub test: Option<TTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub test: TestKind,
    pub a: Aggregate,
    pub b: Aggregate,
    pub metrics: Vec<MetricComparison>,
}

/// Aggregates both record sets and tests Dist, Cont and Fluency. Records are
/// paired by id; both sets must cover the same ids. Flip rate is reported
/// but not tested.
pub fn compare(a: &[MetricRecord], b: &[MetricRecord], test: TestKind) -> Result<ComparisonReport> {
    let index = |rs: &[MetricRecord]| -> Result<BTreeMap<String, Option<InstanceMetrics>>> {
        let mut m = BTreeMap::new();
        for r in rs {
            if m.insert(r.id.clone(), r.metrics.clone()).is_some() {
                return Err(CatError::UnpairedInputs(format!("duplicate id `{}`", r.id)));
            }
        }
        Ok(m)
    };
    let ia = index(a)?;
    let ib = index(b)?;
    if ia.keys().ne(ib.keys()) {
        let only_a: Vec<_> = ia.keys().filter(|k| !ib.contains_key(*k)).take(3).collect();
        let only_b: Vec<_> = ib.keys().filter(|k| !ia.contains_key(*k)).take(3).collect();
        return Err(CatError::UnpairedInputs(format!(
            "instance ids differ (only in a: {only_a:?}, only in b: {only_b:?})"
        )));
    }
    let agg_a = aggregate(a)?;
    let agg_b = aggregate(b)?;
    type Getter = fn(&InstanceMetrics) -> f64;
    let columns: [(&str, Getter); 3] = [("dist", |m| m.dist), ("cont", |m| m.cont), ("fluency", |m| m.fluency)];
    let mut metrics = Vec::new();
    for (name, get) in columns {
        let (va, vb): (Vec<f64>, Vec<f64>) = ia
            .iter()
            .filter_map(|(id, ma)| match (ma, &ib[id]) {
                (Some(ma), Some(mb)) => Some((get(ma), get(mb))),
                _ => None,
            })
            .unzip();
        let all_a: Vec<f64> = ia.values().flatten().map(get).collect();
        let all_b: Vec<f64> = ib.values().flatten().map(get).collect();
        let result = match test {
            TestKind::Paired => paired_t_test(&va, &vb),
            TestKind::Welch => welch_t_test(&all_a, &all_b),
        };
        let diffs: Vec<f64> = va.iter().zip(&vb).map(|(x, y)| x - y).collect();
        metrics.push(MetricComparison {
            metric: name.into(),
            pairs: va.len(),
            mean_a: MetricSummary::of(&all_a).mean,
            mean_b: MetricSummary::of(&all_b).mean,
            mean_difference: MetricSummary::of(&diffs).mean,
            test: result.ok(),
        });
    }
    Ok(ComparisonReport {
        test,
        a: agg_a,
        b: agg_b,
        metrics,
    })
}

fn cell(s: &MetricSummary) -> String {
    match (s.mean, s.std) {
        (Some(m), Some(sd)) => format!("{m:.3} ± {sd:.3}"),
        (Some(m), None) => format!("{m:.3}"),
        _ => "-".into(),
    }
}

/// Flip / Dist / Cont / Fluency table, one row per named system.
pub fn render_table(rows: &[(&str, &Aggregate)]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>6} {:>16} {:>16} {:>16}", "system", "Flip", "Dist", "Cont", "Fluency");
    for (name, agg) in rows {
        let _ = writeln!(
            out,
            "{:<12} {:>6.3} {:>16} {:>16} {:>16}",
            name,
            agg.flip_rate,
            cell(&agg.dist),
            cell(&agg.cont),
            cell(&agg.fluency)
        );
    }
    out
}

pub fn render_comparison(report: &ComparisonReport) -> String {
    let mut out = render_table(&[("a", &report.a), ("b", &report.b)]);
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<8} {:>6} {:>12} {:>10} {:>12}   ({} t-test)",
        "metric",
        "pairs",
        "mean(a-b)",
        "t",
        "p",
        match report.test {
            TestKind::Paired => "paired",
            TestKind::Welch => "welch",
        }
    );
    for m in &report.metrics {
        let diff = m.mean_difference.map_or("-".into(), |d| format!("{d:.4}"));
        let (t, p) = m
            .test
            .map_or(("-".into(), "-".into()), |r| (format!("{:.4}", r.t), format!("{:.3e}", r.p)));
        let _ = writeln!(out, "{:<8} {:>6} {:>12} {:>10} {:>12}", m.metric, m.pairs, diff, t, p);
    }
    out
}
