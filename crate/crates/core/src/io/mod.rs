//! File formats.

pub mod config;
pub mod dataset;
pub mod explanations;
pub mod json;

pub use config::RunConfig;
pub use dataset::{load_dataset, parse_dataset, DatasetRecord};
pub use explanations::{load_explanations, parse_explanations, ExplanationLine, Status};
