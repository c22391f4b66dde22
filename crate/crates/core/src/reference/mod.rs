//! Desk-scale concrete backends.

mod adam;
pub mod attribute_bank;
pub mod embedder;
pub mod embedding_bag;
pub mod ngram;
pub mod vocab;

pub use attribute_bank::{
    max_negatives, merge_labels, subsample_negatives, train_attribute_bank, AttributeBank, AttributeBankSpec, AttributeDatasets,
    AttributeTrainConfig, BinaryAttributeSpec, MulticlassFamilySpec, DROP,
};
pub use embedder::AveragedEmbedder;
pub use embedding_bag::{train_classifier, ClassifierTrainConfig, EmbeddingBagClassifier, LabeledText};
pub use ngram::{NgramModel, UnigramTable};
pub use vocab::Vocabulary;
