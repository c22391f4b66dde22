//! Labelled text datasets, one JSON object per line.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CatError, Result};
use crate::reference::LabeledText;
use crate::text::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRecord {
    pub id: String,
    pub text: String,
    pub label: String,
}

impl DatasetRecord {
    pub fn to_labeled(&self) -> Result<LabeledText> {
        Ok(LabeledText {
            text: tokenize(&self.text)?,
            label: self.label.clone(),
        })
    }
}

/// Parses `{"id", "text", "label"}` lines. Line numbers in errors are 1-based.
pub fn parse_dataset(content: &str) -> Result<Vec<DatasetRecord>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line_no = i + 1;
        let record: DatasetRecord = serde_json::from_str(line).map_err(|e| CatError::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        if tokenize(&record.text).is_err() {
            return Err(CatError::MalformedRecord {
                line: line_no,
                reason: "text is empty after normalization".into(),
            });
        }
        if !seen.insert(record.id.clone()) {
            return Err(CatError::DuplicateId {
                id: record.id,
                line: line_no,
            });
        }
        out.push(record);
    }
    Ok(out)
}

pub fn load_dataset(path: &Path) -> Result<Vec<DatasetRecord>> {
    let content = std::fs::read_to_string(path)?;
    parse_dataset(&content)
}

pub fn write_dataset(records: &[DatasetRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn to_labeled(records: &[DatasetRecord]) -> Result<Vec<LabeledText>> {
    records.iter().map(DatasetRecord::to_labeled).collect()
}
