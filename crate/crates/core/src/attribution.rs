//! Word importance used to order candidate edit sites.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};
use crate::model::{Classifier, DifferentiableClassifier};
use crate::text::TokenizedText;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttributionMethod {
    #[serde(rename = "ig")]
    IntegratedGradients,
    #[serde(rename = "occlusion")]
    Occlusion,
}

impl FromStr for AttributionMethod {
    type Err = CatError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ig" | "integrated-gradients" => Ok(Self::IntegratedGradients),
            "occlusion" => Ok(Self::Occlusion),
            other => Err(CatError::Config(format!("unknown attribution method `{other}`"))),
        }
    }
}

impl fmt::Display for AttributionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::IntegratedGradients => "ig",
            Self::Occlusion => "occlusion",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionVector {
    pub scores: Vec<f64>,
    pub method: AttributionMethod,
    pub target_class: usize,
}

/// Drop in the target probability when each word is deleted in turn.
/// A single-word text gets `[1.0]`.
pub fn occlusion_importance(x: &TokenizedText, f: &dyn Classifier, target_class: usize) -> Result<AttributionVector> {
    if x.len() == 1 {
        return Ok(AttributionVector {
            scores: vec![1.0],
            method: AttributionMethod::Occlusion,
            target_class,
        });
    }
    let base = f.classify(x)?.prob(target_class);
    let scores = (0..x.len())
        .map(|i| Ok(base - f.classify(&x.without_word(i)?)?.prob(target_class)))
        .collect::<Result<Vec<_>>>()?;
    Ok(AttributionVector {
        scores,
        method: AttributionMethod::Occlusion,
        target_class,
    })
}

/// Integrated gradients of the target probability along the straight path
/// from `baseline` (all-zero embeddings when `None`) to the word embeddings,
/// approximated with the midpoint rule over `steps` points and summed per
/// word.
pub fn integrated_gradients(
    x: &TokenizedText,
    f: &dyn DifferentiableClassifier,
    target_class: usize,
    steps: usize,
    baseline: Option<&[Vec<f64>]>,
) -> Result<AttributionVector> {
    if steps == 0 {
        return Err(CatError::InvalidParams("integrated gradients needs at least one step".into()));
    }
    let emb = f.word_embeddings(x);
    let zeros;
    let base: &[Vec<f64>] = match baseline {
        Some(b) => {
            if b.len() != emb.len() || b.iter().zip(&emb).any(|(b, e)| b.len() != e.len()) {
                return Err(CatError::InvalidParams("baseline shape differs from the input embeddings".into()));
            }
            b
        }
        None => {
            zeros = emb.iter().map(|e| vec![0.0; e.len()]).collect::<Vec<_>>();
            &zeros
        }
    };
    let diff: Vec<Vec<f64>> = emb
        .iter()
        .zip(base)
        .map(|(e, b)| e.iter().zip(b).map(|(e, b)| e - b).collect())
        .collect();
    let mut grad_sum: Vec<Vec<f64>> = emb.iter().map(|e| vec![0.0; e.len()]).collect();
    let mut point = base.to_vec();
    for s in 0..steps {
        let alpha = (s as f64 + 0.5) / steps as f64;
        for ((p, b), d) in point.iter_mut().zip(base).zip(&diff) {
            for ((p, b), d) in p.iter_mut().zip(b).zip(d) {
                *p = b + alpha * d;
            }
        }
        let (_, grad) = f.target_prob_grad(&point, target_class);
        for (acc, g) in grad_sum.iter_mut().zip(grad) {
            for (a, g) in acc.iter_mut().zip(g) {
                *a += g;
            }
        }
    }
    let scores = diff
        .iter()
        .zip(&grad_sum)
        .map(|(d, g)| d.iter().zip(g).map(|(d, g)| d * g / steps as f64).sum())
        .collect();
    Ok(AttributionVector {
        scores,
        method: AttributionMethod::IntegratedGradients,
        target_class,
    })
}

/// Runs the requested method, falling back to occlusion when the classifier
/// exposes no gradients.
pub fn attribute(
    x: &TokenizedText,
    f: &dyn Classifier,
    target_class: usize,
    method: AttributionMethod,
    ig_steps: usize,
) -> Result<AttributionVector> {
    match method {
        AttributionMethod::Occlusion => occlusion_importance(x, f, target_class),
        AttributionMethod::IntegratedGradients => match f.as_differentiable() {
            Some(d) => integrated_gradients(x, d, target_class, ig_steps, None),
            None => occlusion_importance(x, f, target_class),
        },
    }
}

/// Picks the method that will actually run, warning once when integrated
/// gradients were requested for a backend without gradients.
pub fn effective_method(f: &dyn Classifier, requested: AttributionMethod) -> AttributionMethod {
    if requested == AttributionMethod::IntegratedGradients && f.as_differentiable().is_none() {
        log::warn!("classifier exposes no gradients; falling back to occlusion attribution");
        return AttributionMethod::Occlusion;
    }
    requested
}

/// Positions by descending score, ties to the lower index, at most `top_p`.
pub fn rank_positions(attr: &AttributionVector, top_p: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..attr.scores.len()).collect();
    order.sort_by(|&a, &b| attr.scores[b].total_cmp(&attr.scores[a]).then(a.cmp(&b)));
    order.truncate(top_p);
    order
}
