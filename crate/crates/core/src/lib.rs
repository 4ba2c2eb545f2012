//! Textual entailment with max-cosine word matching and an LSTM.
//!
//! Every hypothesis word is paired with its most cosine-similar premise word;
//! the sequence of concatenated pair vectors is encoded by an LSTM and a
//! softmax layer predicts entailment, contradiction or neutral. Optional
//! extras: concatenating two embedding libraries, a second LSTM over the
//! premise matched against the hypothesis ("biway"), and averaging models
//! trained from different seeds.
//!
//! All parameters are `f64` and every backward pass is exact, which lets the
//! gradients be checked against finite differences.

pub mod checkpoint;
pub mod config;
pub mod data;
pub mod embedding;
pub mod ensemble;
mod error;
pub mod matcher;
pub mod model;
pub mod numerics;
pub mod precise;
pub mod synthetic;
pub mod training;

pub use checkpoint::Checkpoint;
pub use data::{Label, SentencePair};
pub use embedding::{cosine, EmbeddingLibrary, WordVector};
pub use ensemble::Ensemble;
pub use error::{Error, Result};
pub use model::{Model, ModelConfig};
pub use training::TrainConfig;
