//! Cross-entropy objective, Adam, the mini-batch training loop and
//! evaluation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::checkpoint::{Checkpoint, CheckpointMeta};
use crate::data::{Label, SentencePair};
use crate::embedding::EmbeddingLibrary;
use crate::error::{Error, Result};
use crate::model::{self, label_of, EncodedPair, Model, ModelConfig, Params, LOG_FLOOR};
use crate::numerics::Rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Worker threads for per-pair forward/backward. Results do not depend
    /// on this value.
    #[serde(default = "one")]
    pub workers: usize,
}

fn one() -> usize {
    1
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 128,
            epochs: 10,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return Err(Error::Config("beta1 and beta2 must lie in [0, 1)".into()));
        }
        if self.batch_size == 0 || self.epochs == 0 || self.workers == 0 {
            return Err(Error::Config("batch_size, epochs and workers must be positive".into()));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.learning_rate) || !positive(self.epsilon) {
            return Err(Error::Config("learning_rate and epsilon must be positive".into()));
        }
        Ok(())
    }
}

/// Mean negative log-probability of the gold labels.
pub fn cross_entropy(probs: &[[f64; 3]], gold: &[Label]) -> Result<f64> {
    if probs.is_empty() {
        return Err(Error::Empty("batch"));
    }
    if probs.len() != gold.len() {
        return Err(Error::Dimension(format!(
            "{} predictions for {} labels",
            probs.len(),
            gold.len()
        )));
    }
    let total: f64 = probs
        .iter()
        .zip(gold)
        .map(|(p, g)| -p[g.index()].max(LOG_FLOOR).ln())
        .sum();
    Ok(total / probs.len() as f64)
}

/// First and second moment estimates, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub t: u64,
}

impl AdamState {
    pub fn new<I: IntoIterator<Item = usize>>(tensor_lens: I) -> Self {
        let (m, v) = tensor_lens
            .into_iter()
            .map(|n| (vec![0.0; n], vec![0.0; n]))
            .unzip();
        AdamState { m, v, t: 0 }
    }

    pub fn for_params(params: &Params) -> Self {
        Self::new(params.named_tensors().iter().map(|(_, d, _)| d.len()))
    }
}

/// One Adam update over a list of tensors. Fails without touching anything
/// if a gradient is non-finite.
pub fn adam_update(
    params: Vec<&mut [f64]>,
    grads: Vec<&[f64]>,
    state: &mut AdamState,
    cfg: &TrainConfig,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.m.len() {
        return Err(Error::Dimension("adam: tensor count mismatch".into()));
    }
    for (i, (p, g)) in params.iter().zip(&grads).enumerate() {
        if p.len() != g.len() || p.len() != state.m[i].len() {
            return Err(Error::Dimension(format!("adam: tensor {i} shape mismatch")));
        }
        if let Some(j) = g.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "gradient tensor {i}, entry {j}: {}",
                g[j]
            )));
        }
    }
    state.t += 1;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (i, (p, g)) in params.into_iter().zip(grads).enumerate() {
        let (m, v) = (&mut state.m[i], &mut state.v[i]);
        for j in 0..p.len() {
            m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
            v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
            let m_hat = m[j] / c1;
            let v_hat = v[j] / c2;
            p[j] -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.epsilon);
        }
    }
    Ok(())
}

pub fn adam_step(params: &mut Params, grads: &Params, state: &mut AdamState, cfg: &TrainConfig) -> Result<()> {
    let g: Vec<&[f64]> = grads.named_tensors().into_iter().map(|(_, d, _)| d).collect();
    adam_update(params.tensors_mut(), g, state, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    /// 1-based.
    pub epoch: usize,
    /// Mean per-pair training loss over the epoch (dropout active).
    pub train_loss: f64,
    pub val_accuracy: f64,
}

impl EpochMetrics {
    /// `epoch TAB train_loss TAB val_accuracy`.
    pub fn log_line(&self) -> String {
        format!("{}\t{}\t{}", self.epoch, self.train_loss, self.val_accuracy)
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the highest validation accuracy
    /// (earliest on ties).
    pub best: Checkpoint,
    pub metrics: Vec<EpochMetrics>,
    /// Parameters after the last epoch.
    pub last: Model,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))
}

/// Matches every pair against the library once; vectors are fixed during
/// training so the augmented sequences never change.
pub fn encode_all(
    pairs: &[SentencePair],
    lib: &EmbeddingLibrary,
    config: &ModelConfig,
) -> Result<Vec<EncodedPair>> {
    pairs
        .par_iter()
        .map(|p| EncodedPair::new(p, lib, config))
        .collect()
}

/// Stream of the per-pair dropout generator in a given epoch.
fn pair_stream(epoch: usize, index: usize) -> u64 {
    ((epoch as u64 + 1) << 32) | index as u64
}

const SHUFFLE_STREAM: u64 = 1;

/// Trains a fresh model (initialised from `model_cfg.seed`).
pub fn train(
    train_set: &[SentencePair],
    val_set: &[SentencePair],
    model_cfg: &ModelConfig,
    cfg: &TrainConfig,
    lib: &EmbeddingLibrary,
) -> Result<TrainOutcome> {
    if train_set.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if val_set.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    let train_enc = encode_all(train_set, lib, model_cfg)?;
    let val_enc = encode_all(val_set, lib, model_cfg)?;
    train_encoded(&train_enc, &val_enc, Model::new(model_cfg.clone())?, cfg)
}

/// Training loop over pre-matched pairs, starting from `model`.
pub fn train_encoded(
    train_set: &[EncodedPair],
    val_set: &[EncodedPair],
    model: Model,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::Empty("training set"));
    }
    if val_set.is_empty() {
        return Err(Error::Empty("validation set"));
    }
    let pool = pool(cfg.workers)?;
    let seed = model.config.seed;
    let dropout = model.config.dropout;
    let mut model = model;
    let mut adam = AdamState::for_params(&model.params);
    let mut shuffler = Rng::with_stream(seed, SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut metrics = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(Model, EpochMetrics)> = None;

    for epoch in 0..cfg.epochs {
        shuffler.shuffle(&mut order);
        let mut loss_sum = 0.0;
        for (b, batch) in order.chunks(cfg.batch_size).enumerate() {
            let params = &model.params;
            let results: Vec<Result<(f64, Params)>> = pool.install(|| {
                batch
                    .par_iter()
                    .map(|&i| {
                        let mut rng = Rng::with_stream(seed, pair_stream(epoch, i));
                        model::loss_and_grad(params, &train_set[i], dropout, &mut rng)
                    })
                    .collect()
            });
            let mut grads = params.zeros_like();
            let mut batch_loss = 0.0;
            for r in results {
                let (loss, g) = r?;
                batch_loss += loss;
                grads.add_assign(&g);
            }
            if !batch_loss.is_finite() {
                return Err(Error::Diverged {
                    epoch: epoch + 1,
                    batch: b,
                    loss: batch_loss,
                });
            }
            loss_sum += batch_loss;
            grads.scale(1.0 / batch.len() as f64);
            adam_step(&mut model.params, &grads, &mut adam, cfg).map_err(|e| match e {
                Error::NonFinite(_) => Error::Diverged {
                    epoch: epoch + 1,
                    batch: b,
                    loss: f64::NAN,
                },
                e => e,
            })?;
        }
        let val_accuracy = pool.install(|| evaluate_encoded(val_set, &model))?.accuracy;
        let m = EpochMetrics {
            epoch: epoch + 1,
            train_loss: loss_sum / train_set.len() as f64,
            val_accuracy,
        };
        log::info!("{}", m.log_line());
        metrics.push(m);
        if best.as_ref().is_none_or(|(_, bm)| m.val_accuracy > bm.val_accuracy) {
            best = Some((model.clone(), m));
        }
    }

    let (best_model, bm) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        best: Checkpoint::new(
            best_model,
            CheckpointMeta {
                train: Some(cfg.clone()),
                embeddings: Vec::new(),
                epoch: Some(bm.epoch),
                val_accuracy: Some(bm.val_accuracy),
            },
        ),
        metrics,
        last: model,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// `confusion[gold][predicted]`, indexed by [`Label::index`].
    pub confusion: [[usize; 3]; 3],
}

impl Evaluation {
    pub fn from_predictions<I: IntoIterator<Item = (Label, Label)>>(pairs: I) -> Self {
        let mut confusion = [[0usize; 3]; 3];
        for (gold, pred) in pairs {
            confusion[gold.index()][pred.index()] += 1;
        }
        let total: usize = confusion.iter().flatten().sum();
        let correct: usize = (0..3).map(|i| confusion[i][i]).sum();
        Evaluation {
            total,
            correct,
            accuracy: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
            confusion,
        }
    }

    /// Plain-text report: accuracy line plus the confusion matrix.
    pub fn report(&self) -> String {
        let mut s = format!(
            "accuracy\t{:.6}\t({}/{})\ngold\\pred",
            self.accuracy, self.correct, self.total
        );
        for l in Label::ALL {
            s.push('\t');
            s.push_str(l.name());
        }
        for g in Label::ALL {
            s.push('\n');
            s.push_str(g.name());
            for p in Label::ALL {
                s.push_str(&format!("\t{}", self.confusion[g.index()][p.index()]));
            }
        }
        s
    }
}

/// Accuracy of an arbitrary probability predictor over pre-matched pairs.
pub fn evaluate_with<F>(dataset: &[EncodedPair], predict: F) -> Result<Evaluation>
where
    F: Fn(&EncodedPair) -> Result<[f64; 3]> + Sync,
{
    let preds: Vec<Label> = dataset
        .par_iter()
        .map(|p| predict(p).map(|probs| label_of(&probs)))
        .collect::<Result<_>>()?;
    Ok(Evaluation::from_predictions(
        dataset.iter().map(|p| p.label).zip(preds),
    ))
}

pub fn evaluate_encoded(dataset: &[EncodedPair], model: &Model) -> Result<Evaluation> {
    evaluate_with(dataset, |p| model.probabilities(p))
}

/// Eval-mode accuracy and confusion counts of `model` on `dataset`.
pub fn evaluate(dataset: &[SentencePair], model: &Model, lib: &EmbeddingLibrary) -> Result<Evaluation> {
    let enc = encode_all(dataset, lib, &model.config)?;
    evaluate_encoded(&enc, model)
}
