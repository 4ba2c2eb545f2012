//! `key = value` run configuration shared by the CLI commands.
//!
//! One pair per line, `#` starts a comment, unknown keys are errors. Values
//! applied later (command-line flags) override earlier ones (the file).

use std::fs;
use std::path::{Path, PathBuf};

use crate::embedding::{EmbeddingLibrary, DEFAULT_OOV_WINDOW};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::training::TrainConfig;

pub const SEED_ENV: &str = "MAXCOSINE_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingFormat {
    /// `.bin` files are binary, everything else text.
    Auto,
    Text,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: Option<PathBuf>,
    pub val: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub embeddings: Option<PathBuf>,
    pub embeddings2: Option<PathBuf>,
    pub embedding_format: EmbeddingFormat,
    pub embedding_dim: Option<usize>,
    pub out_dir: PathBuf,
    pub hidden: usize,
    pub dropout: f64,
    pub biway: bool,
    pub bi_embedding: bool,
    pub seed: Option<u64>,
    pub oov_window: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub workers: usize,
    pub seeds: Option<Vec<u64>>,
    pub ensemble_size: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        RunConfig {
            train: None,
            val: None,
            test: None,
            embeddings: None,
            embeddings2: None,
            embedding_format: EmbeddingFormat::Auto,
            embedding_dim: None,
            out_dir: PathBuf::from("run"),
            hidden: 300,
            dropout: 0.3,
            biway: false,
            bi_embedding: false,
            seed: None,
            oov_window: DEFAULT_OOV_WINDOW,
            epochs: t.epochs,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            beta1: t.beta1,
            beta2: t.beta2,
            epsilon: t.epsilon,
            workers: t.workers,
            seeds: None,
            ensemble_size: crate::ensemble::DEFAULT_ENSEMBLE_SIZE,
        }
    }
}

pub const KEYS: &[&str] = &[
    "train",
    "val",
    "test",
    "embeddings",
    "embeddings2",
    "embedding_format",
    "embedding_dim",
    "out_dir",
    "hidden",
    "dropout",
    "biway",
    "bi_embedding",
    "seed",
    "oov_window",
    "epochs",
    "batch_size",
    "learning_rate",
    "beta1",
    "beta2",
    "epsilon",
    "workers",
    "seeds",
    "ensemble_size",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "train" => self.train = Some(value.into()),
            "val" => self.val = Some(value.into()),
            "test" => self.test = Some(value.into()),
            "embeddings" => self.embeddings = Some(value.into()),
            "embeddings2" => self.embeddings2 = Some(value.into()),
            "embedding_format" => {
                self.embedding_format = match value {
                    "auto" => EmbeddingFormat::Auto,
                    "text" => EmbeddingFormat::Text,
                    "binary" => EmbeddingFormat::Binary,
                    _ => return Err(Error::Config(format!("embedding_format: {value:?}"))),
                }
            }
            "embedding_dim" => self.embedding_dim = Some(parse(key, value)?),
            "out_dir" => self.out_dir = value.into(),
            "hidden" => self.hidden = parse(key, value)?,
            "dropout" => self.dropout = parse(key, value)?,
            "biway" => self.biway = parse_bool(key, value)?,
            "bi_embedding" => self.bi_embedding = parse_bool(key, value)?,
            "seed" => self.seed = Some(parse(key, value)?),
            "oov_window" => self.oov_window = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "beta1" => self.beta1 = parse(key, value)?,
            "beta2" => self.beta2 = parse(key, value)?,
            "epsilon" => self.epsilon = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            "seeds" => {
                self.seeds = Some(
                    value
                        .split(',')
                        .map(|s| parse(key, s.trim()))
                        .collect::<Result<_>>()?,
                )
            }
            "ensemble_size" => self.ensemble_size = parse(key, value)?,
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = match line.find('#') {
                Some(p) => &line[..p],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
            self.set(k.trim(), v)
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Defaults, then the optional file, then `overrides` in order.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply_text(&text)?;
        }
        for (k, v) in overrides {
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Seed from the config, else from `MAXCOSINE_SEED`, else 1.
    pub fn resolved_seed(&self) -> Result<u64> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => parse(SEED_ENV, &v),
            Err(_) => Ok(1),
        }
    }

    pub fn embedding_paths(&self) -> Result<Vec<PathBuf>> {
        let first = self
            .embeddings
            .clone()
            .ok_or_else(|| Error::Config("embeddings path is required".into()))?;
        match (self.bi_embedding, &self.embeddings2) {
            (true, Some(second)) => Ok(vec![first, second.clone()]),
            (true, None) => Err(Error::Config("bi_embedding needs embeddings2".into())),
            (false, _) => Ok(vec![first]),
        }
    }

    pub fn load_library(&self) -> Result<EmbeddingLibrary> {
        load_libraries(&self.embedding_paths()?, self.embedding_format, self.embedding_dim)
    }

    /// `embed_dim` must be the dimension of the library the model will read.
    pub fn model_config(&self, embed_dim: usize) -> Result<ModelConfig> {
        let cfg = ModelConfig {
            embed_dim,
            hidden: self.hidden,
            dropout: self.dropout,
            biway: self.biway,
            bi_embedding: self.bi_embedding,
            seed: self.resolved_seed()?,
            oov_window: self.oov_window,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
            batch_size: self.batch_size,
            epochs: self.epochs,
            workers: self.workers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Explicit seed list, else `ensemble_size` consecutive seeds starting at
    /// the run seed.
    pub fn ensemble_seeds(&self) -> Result<Vec<u64>> {
        match &self.seeds {
            Some(s) => Ok(s.clone()),
            None => {
                let base = self.resolved_seed()?;
                Ok((0..self.ensemble_size as u64).map(|i| base + i).collect())
            }
        }
    }
}

pub fn load_library(path: &Path, format: EmbeddingFormat, expected_dim: Option<usize>) -> Result<EmbeddingLibrary> {
    let binary = match format {
        EmbeddingFormat::Binary => true,
        EmbeddingFormat::Text => false,
        EmbeddingFormat::Auto => path.extension().is_some_and(|e| e == "bin"),
    };
    if binary {
        let lib = EmbeddingLibrary::load_binary(path)?;
        if let Some(d) = expected_dim.filter(|&d| d != lib.dim()) {
            return Err(Error::Dimension(format!(
                "{} has dimension {}, expected {d}",
                path.display(),
                lib.dim()
            )));
        }
        Ok(lib)
    } else {
        EmbeddingLibrary::load_text(path, expected_dim)
    }
}

/// Loads one library, or two and concatenates them in the given order.
/// `expected_dim` applies to each file separately.
pub fn load_libraries(paths: &[PathBuf], format: EmbeddingFormat, expected_dim: Option<usize>) -> Result<EmbeddingLibrary> {
    match paths {
        [one] => load_library(one, format, expected_dim),
        [a, b] => Ok(EmbeddingLibrary::concat(
            &load_library(a, format, expected_dim)?,
            &load_library(b, format, expected_dim)?,
        )),
        _ => Err(Error::Config("expected one or two embedding files".into())),
    }
}
