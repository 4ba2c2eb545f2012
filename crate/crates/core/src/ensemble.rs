//! Model averaging over members that differ only in their seed.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::checkpoint::Checkpoint;
use crate::data::{Label, SentencePair};
use crate::embedding::EmbeddingLibrary;
use crate::error::{Error, Result};
use crate::model::{label_of, EncodedPair, Model, ModelConfig};
use crate::training::{self, encode_all, TrainConfig, TrainOutcome};

pub const DEFAULT_ENSEMBLE_SIZE: usize = 5;

#[derive(Debug, Clone)]
pub struct Ensemble {
    members: Vec<Model>,
}

impl Ensemble {
    /// All members must share one configuration apart from the seed.
    pub fn new(members: Vec<Model>) -> Result<Self> {
        let first = members.first().ok_or(Error::Ensemble("no members".into()))?;
        let key = |c: &ModelConfig| ModelConfig { seed: 0, ..c.clone() };
        let want = key(&first.config);
        if let Some(m) = members.iter().find(|m| key(&m.config) != want) {
            return Err(Error::Ensemble(format!(
                "member with seed {} has a different configuration",
                m.config.seed
            )));
        }
        Ok(Ensemble { members })
    }

    pub fn members(&self) -> &[Model] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn config(&self) -> &ModelConfig {
        &self.members[0].config
    }

    /// Mean of the members' probability vectors for a pre-matched pair.
    pub fn probabilities(&self, pair: &EncodedPair) -> Result<[f64; 3]> {
        let probs = self
            .members
            .iter()
            .map(|m| m.probabilities(pair))
            .collect::<Result<Vec<_>>>()?;
        Ok(average_probabilities(&probs))
    }

    pub fn predict(&self, pair: &SentencePair, lib: &EmbeddingLibrary) -> Result<([f64; 3], Label)> {
        let enc = EncodedPair::new(pair, lib, self.config())?;
        let probs = self.probabilities(&enc)?;
        Ok((probs, label_of(&probs)))
    }

    pub fn evaluate(&self, dataset: &[SentencePair], lib: &EmbeddingLibrary) -> Result<training::Evaluation> {
        let enc = encode_all(dataset, lib, self.config())?;
        training::evaluate_with(&enc, |p| self.probabilities(p))
    }
}

/// Coordinate-wise arithmetic mean. Each coordinate is averaged over its
/// values in sorted order with a running mean, so the result does not depend
/// on member order and equal inputs come back unchanged.
pub fn average_probabilities(probs: &[[f64; 3]]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (j, o) in out.iter_mut().enumerate() {
        let mut col: Vec<f64> = probs.iter().map(|p| p[j]).collect();
        col.sort_by(f64::total_cmp);
        let mut mean = 0.0;
        for (n, x) in col.into_iter().enumerate() {
            mean += (x - mean) / (n + 1) as f64;
        }
        *o = mean;
    }
    out
}

/// Averaged prediction for a raw pair.
pub fn predict_ensemble(
    ensemble: &Ensemble,
    pair: &SentencePair,
    lib: &EmbeddingLibrary,
) -> Result<([f64; 3], Label)> {
    ensemble.predict(pair, lib)
}

/// Trains one member per seed; everything else comes from `model_cfg`.
pub fn train_ensemble(
    model_cfg: &ModelConfig,
    train_cfg: &TrainConfig,
    seeds: &[u64],
    train_set: &[SentencePair],
    val_set: &[SentencePair],
    lib: &EmbeddingLibrary,
) -> Result<(Ensemble, Vec<TrainOutcome>)> {
    if seeds.is_empty() {
        return Err(Error::Ensemble("no seeds".into()));
    }
    let mut seen = HashSet::new();
    if let Some(s) = seeds.iter().find(|s| !seen.insert(**s)) {
        return Err(Error::Ensemble(format!("duplicate seed {s}")));
    }
    let train_enc = encode_all(train_set, lib, model_cfg)?;
    let val_enc = encode_all(val_set, lib, model_cfg)?;
    let mut outcomes = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let cfg = ModelConfig {
            seed,
            ..model_cfg.clone()
        };
        log::info!("ensemble member seed {seed}");
        outcomes.push(training::train_encoded(
            &train_enc,
            &val_enc,
            Model::new(cfg)?,
            train_cfg,
        )?);
    }
    let members = outcomes.iter().map(|o| o.best.model.clone()).collect();
    Ok((Ensemble::new(members)?, outcomes))
}

/// One line per member: `seed TAB checkpoint-path`. `#` starts a comment.
/// Relative paths are resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub members: Vec<(u64, PathBuf)>,
}

impl Manifest {
    pub fn to_text(&self) -> String {
        let mut s = String::from("# maxcosine ensemble manifest: seed<TAB>checkpoint\n");
        for (seed, path) in &self.members {
            s.push_str(&format!("{seed}\t{}\n", path.display()));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut members = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (seed, path) = line
                .split_once('\t')
                .ok_or_else(|| Error::Ensemble(format!("manifest line {}: expected seed<TAB>path", i + 1)))?;
            let seed = seed
                .trim()
                .parse()
                .map_err(|_| Error::Ensemble(format!("manifest line {}: bad seed {seed:?}", i + 1)))?;
            members.push((seed, PathBuf::from(path.trim())));
        }
        if members.is_empty() {
            return Err(Error::Ensemble("manifest lists no members".into()));
        }
        Ok(Manifest { members })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        Self::parse(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
    }

    /// Loads every member checkpoint and checks the recorded seeds.
    pub fn load_ensemble(path: impl AsRef<Path>) -> Result<(Ensemble, Vec<Checkpoint>)> {
        let path = path.as_ref();
        let manifest = Self::load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut checkpoints = Vec::new();
        for (seed, p) in &manifest.members {
            let full = if p.is_absolute() { p.clone() } else { base.join(p) };
            let ck = Checkpoint::load(&full)?;
            if ck.model.config.seed != *seed {
                return Err(Error::Ensemble(format!(
                    "{} was trained with seed {}, manifest says {seed}",
                    full.display(),
                    ck.model.config.seed
                )));
            }
            checkpoints.push(ck);
        }
        let ensemble = Ensemble::new(checkpoints.iter().map(|c| c.model.clone()).collect())?;
        Ok((ensemble, checkpoints))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn averaging_examples() {
        let p = average_probabilities(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]);
        assert_eq!(p, [0.5, 0.5, 0.0]);
        assert_eq!(label_of(&p), Label::Entailment);

        let p = average_probabilities(&[[0.2, 0.3, 0.5], [0.4, 0.4, 0.2], [0.3, 0.3, 0.4]]);
        let want = [0.3, 1.0 / 3.0, 11.0 / 30.0];
        for (a, b) in p.iter().zip(want) {
            assert!((a - b).abs() < 1e-15, "{p:?}");
        }

        let x = [0.1, 0.2, 0.7];
        assert_eq!(average_probabilities(&[x; 7]), x);
        assert_eq!(average_probabilities(&[x]), x);
    }

    #[test]
    fn averaging_is_order_invariant() {
        let a = [0.11, 0.52, 0.37];
        let b = [0.3, 0.3, 0.4];
        let c = [0.9, 0.05, 0.05];
        let p = average_probabilities(&[a, b, c]);
        assert_eq!(p, average_probabilities(&[c, a, b]));
        assert_eq!(p, average_probabilities(&[b, c, a]));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn manifest_roundtrip() {
        let m = Manifest {
            members: vec![(1, "m1.ckpt".into()), (22, "/abs/m2.ckpt".into())],
        };
        assert_eq!(Manifest::parse(&m.to_text()).unwrap(), m);
        assert!(Manifest::parse("# nothing\n").is_err());
        assert!(Manifest::parse("x\tpath").is_err());
    }

    #[test]
    fn mixed_configs_rejected() {
        let cfg = ModelConfig {
            embed_dim: 2,
            hidden: 3,
            ..ModelConfig::default()
        };
        let a = Model::new(ModelConfig { seed: 1, ..cfg.clone() }).unwrap();
        let b = Model::new(ModelConfig { seed: 2, ..cfg.clone() }).unwrap();
        let c = Model::new(ModelConfig { seed: 3, hidden: 4, ..cfg }).unwrap();
        assert!(Ensemble::new(vec![a.clone(), b]).is_ok());
        assert!(Ensemble::new(vec![a, c]).is_err());
        assert!(Ensemble::new(vec![]).is_err());
    }
}
