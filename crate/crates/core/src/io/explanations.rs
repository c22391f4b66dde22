//! The explanation JSONL format: one object per instance, fixed key order,
//! floats written with 17 significant digits.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};
use crate::eval::{InstanceMetrics, MetricRecord};
use crate::model::ClassDistribution;
use crate::objective::{AttributeDelta, ObjectiveBreakdown};
use crate::search::Explanation;
use crate::text::Edit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    NoContrast,
    /// The instance could not be processed; `error` holds the reason.
    Error,
}

/// One line of an explanation file. Fields are declared in output order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplanationLine {
    pub id: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub input_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast_text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contrast_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edits: Option<Vec<Edit>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub attribute_changes: Option<Vec<AttributeDelta>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub objective: Option<ObjectiveBreakdown>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metrics: Option<InstanceMetrics>,
    pub seed: u64,
    pub config_hash: String,
}

impl ExplanationLine {
    pub fn ok(id: &str, e: &Explanation, seed: u64, config_hash: &str) -> Self {
        Self {
            id: id.into(),
            status: Status::Ok,
            error: None,
            input_text: e.input.joined(),
            input_label: Some(e.input_label.clone()),
            input_probs: Some(e.input_dist.probabilities().to_vec()),
            contrast_text: Some(e.contrast.joined()),
            contrast_label: Some(e.contrast_label.clone()),
            contrast_probs: Some(e.contrast_dist.probabilities().to_vec()),
            edits: Some(e.path.edits.clone()),
            attribute_changes: Some(e.attribute_changes.clone()),
            objective: Some(e.breakdown.clone()),
            metrics: e.metrics.clone(),
            seed,
            config_hash: config_hash.into(),
        }
    }

    pub fn no_contrast(id: &str, input_text: &str, dist: &ClassDistribution, seed: u64, config_hash: &str) -> Self {
        Self {
            status: Status::NoContrast,
            input_label: Some(dist.label().to_string()),
            input_probs: Some(dist.probabilities().to_vec()),
            ..Self::bare(id, input_text, seed, config_hash)
        }
    }

    pub fn failed(id: &str, input_text: &str, reason: String, seed: u64, config_hash: &str) -> Self {
        Self {
            status: Status::Error,
            error: Some(reason),
            ..Self::bare(id, input_text, seed, config_hash)
        }
    }

    fn bare(id: &str, input_text: &str, seed: u64, config_hash: &str) -> Self {
        Self {
            id: id.into(),
            status: Status::Error,
            error: None,
            input_text: input_text.into(),
            input_label: None,
            input_probs: None,
            contrast_text: None,
            contrast_label: None,
            contrast_probs: None,
            edits: None,
            attribute_changes: None,
            objective: None,
            metrics: None,
            seed,
            config_hash: config_hash.into(),
        }
    }

    /// Checks that the fields present match the status.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let contrast_fields = [
            self.contrast_text.is_some(),
            self.contrast_label.is_some(),
            self.contrast_probs.is_some(),
            self.edits.is_some(),
            self.attribute_changes.is_some(),
            self.objective.is_some(),
        ];
        match self.status {
            Status::Ok => {
                if !contrast_fields.iter().all(|b| *b) || self.input_label.is_none() || self.input_probs.is_none() {
                    return Err("ok line is missing contrast fields".into());
                }
                if self.error.is_some() {
                    return Err("ok line carries an error".into());
                }
            }
            Status::NoContrast | Status::Error => {
                if contrast_fields.iter().any(|b| *b) || self.metrics.is_some() {
                    return Err("line without a contrast carries contrast fields".into());
                }
                if (self.status == Status::Error) != self.error.is_some() {
                    return Err("`error` must be present exactly on error lines".into());
                }
                if self.status == Status::NoContrast && (self.input_label.is_none() || self.input_probs.is_none()) {
                    return Err("no_contrast line is missing the input prediction".into());
                }
            }
        }
        Ok(())
    }

    /// A flip is an ok line whose contrast label differs from the input label.
    pub fn flipped(&self) -> bool {
        self.status == Status::Ok && self.contrast_label.is_some() && self.contrast_label != self.input_label
    }

    pub fn metric_record(&self) -> MetricRecord {
        MetricRecord {
            id: self.id.clone(),
            flipped: self.flipped(),
            metrics: self.metrics.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        crate::io::json::to_string(self)
    }
}

pub fn parse_explanation_line(line: &str) -> std::result::Result<ExplanationLine, String> {
    let parsed: ExplanationLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    parsed.validate()?;
    Ok(parsed)
}

pub fn parse_explanations(content: &str) -> Result<Vec<ExplanationLine>> {
    content
        .lines()
        .enumerate()
        .map(|(i, line)| parse_explanation_line(line).map_err(|reason| CatError::MalformedRecord { line: i + 1, reason }))
        .collect()
}

pub fn load_explanations(path: &Path) -> Result<Vec<ExplanationLine>> {
    parse_explanations(&std::fs::read_to_string(path)?)
}

pub fn write_explanations(lines: &[ExplanationLine]) -> Result<String> {
    let mut out = String::new();
    for l in lines {
        out.push_str(&l.to_json()?);
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::Direction;

    fn ok_line() -> ExplanationLine {
        ExplanationLine {
            id: "n1".into(),
            status: Status::Ok,
            error: None,
            input_text: "the team won".into(),
            input_label: Some("sports".into()),
            input_probs: Some(vec![0.1, 0.9]),
            contrast_text: Some("the bank won".into()),
            contrast_label: Some("business".into()),
            contrast_probs: Some(vec![0.7, 0.3]),
            edits: Some(vec![Edit::substitute(1, "team", "bank")]),
            attribute_changes: Some(vec![AttributeDelta {
                name: "finance".into(),
                direction: Direction::Added,
                delta: 0.45,
            }]),
            objective: Some(ObjectiveBreakdown {
                attr_linf: 0.45,
                attr_changed_count: 1,
                contrast_gain: -0.2,
                lm_surrogate: -3.5,
                lev_raw: 1,
                total: -9.05,
            }),
            metrics: Some(InstanceMetrics {
                dist: 1.0 / 3.0,
                cont: 0.8,
                fluency: 1.1,
            }),
            seed: 7,
            config_hash: "abc".into(),
        }
    }

    #[test]
    fn key_order_is_fixed() {
        let s = ok_line().to_json().unwrap();
        let keys = [
            "\"id\"",
            "\"status\"",
            "\"input_text\"",
            "\"input_label\"",
            "\"input_probs\"",
            "\"contrast_text\"",
            "\"contrast_label\"",
            "\"contrast_probs\"",
            "\"edits\"",
            "\"attribute_changes\"",
            "\"objective\"",
            "\"metrics\"",
            "\"seed\"",
            "\"config_hash\"",
        ];
        let positions: Vec<usize> = keys.iter().map(|k| s.find(k).unwrap()).collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{s}");
        assert!(s.contains("\"edits\":[{\"kind\":\"substitute\",\"position\":1,\"old\":\"team\",\"new\":\"bank\"}]"));
        assert!(s.contains("\"dist\":0.33333333333333331"));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let s = ok_line().to_json().unwrap();
        let back = parse_explanation_line(&s).unwrap();
        assert_eq!(back, ok_line());
        assert_eq!(back.to_json().unwrap(), s);
    }

    #[test]
    fn no_contrast_omits_contrast_fields() {
        let dist = ClassDistribution::new(vec![0.5, 0.5], vec!["a".into(), "b".into()]).unwrap();
        let line = ExplanationLine::no_contrast("x", "some text", &dist, 1, "h");
        let s = line.to_json().unwrap();
        assert!(!s.contains("contrast_") && !s.contains("metrics") && !s.contains("edits"));
        assert_eq!(parse_explanation_line(&s).unwrap(), line);
        assert!(!line.flipped());
    }

    #[test]
    fn inconsistent_lines_rejected() {
        let mut l = ok_line();
        l.status = Status::NoContrast;
        assert!(parse_explanation_line(&l.to_json().unwrap()).is_err());
        let mut l = ok_line();
        l.objective = None;
        assert!(parse_explanation_line(&l.to_json().unwrap()).is_err());
        assert!(matches!(parse_explanations("{}\n"), Err(CatError::MalformedRecord { line: 1, .. })));
    }
}
