//! Contrastive explanations for text classifiers: word-level edit search
//! that flips a prediction while tracking which latent attributes move.

pub mod attribution;
pub mod error;
pub mod eval;
pub mod io;
pub mod model;
pub mod objective;
pub mod reference;
pub mod registry;
pub mod runner;
pub mod search;
pub mod synthetic;
pub mod text;

pub use error::{CatError, Result};
