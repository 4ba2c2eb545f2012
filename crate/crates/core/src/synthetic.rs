//! Random embedding libraries and sentence pairs for desk-scale checks, plus
//! the whole-model gradient check used by `maxcosine gradcheck`.

use crate::data::{Label, SentencePair};
use crate::embedding::EmbeddingLibrary;
use crate::error::Result;
use crate::model::{self, EncodedPair, Model, ModelConfig, Params};
use crate::numerics::{gradient_check, Rng};
use crate::precise::{reference_loss, Dd};

/// Words `w0 .. w{n-1}` with entries uniform in `[-1, 1)`.
pub fn random_library(vocab: usize, dim: usize, rng: &mut Rng) -> EmbeddingLibrary {
    let rows: Vec<(String, Vec<f64>)> = (0..vocab)
        .map(|i| {
            let v = (0..dim).map(|_| rng.uniform_range(-1.0, 1.0)).collect();
            (format!("w{i}"), v)
        })
        .collect();
    EmbeddingLibrary::from_rows(dim, rows).expect("dim > 0")
}

/// `n` pairs of in-vocabulary words with lengths drawn from `lengths`
/// (inclusive) and uniformly random labels.
pub fn random_pairs(
    n: usize,
    lib: &EmbeddingLibrary,
    lengths: (usize, usize),
    rng: &mut Rng,
) -> Vec<SentencePair> {
    let (lo, hi) = lengths;
    let sentence = |rng: &mut Rng| -> Vec<String> {
        let len = lo + rng.below(hi - lo + 1);
        (0..len).map(|_| lib.words()[rng.below(lib.len())].clone()).collect()
    };
    (0..n)
        .map(|id| SentencePair {
            premise: sentence(rng),
            hypothesis: sentence(rng),
            label: Label::ALL[rng.below(3)],
            id,
        })
        .collect()
}

/// Mean loss of `pairs` (dropout off) and its analytic gradient.
pub fn batch_loss_and_grad(params: &Params, pairs: &[EncodedPair]) -> Result<(f64, Params)> {
    let mut grads = params.zeros_like();
    let mut loss = 0.0;
    let mut rng = Rng::new(0);
    for p in pairs {
        let (l, g) = model::loss_and_grad(params, p, 0.0, &mut rng)?;
        loss += l;
        grads.add_assign(&g);
    }
    let n = pairs.len() as f64;
    grads.scale(1.0 / n);
    Ok((loss / n, grads))
}

/// Builds a random model and `n_pairs` random pairs (sequence lengths 3-6)
/// and compares the analytic gradient of the mean loss with central
/// differences at step `h`. Returns the worst relative error.
///
/// The numeric side evaluates the loss in double-double arithmetic relative
/// to its value at the unperturbed point (see [`crate::precise`]), so the
/// differences are not swamped by f64 rounding of a loss of size ~1.
pub fn check_model_gradients(cfg: &ModelConfig, n_pairs: usize, h: f64) -> Result<f64> {
    let mut rng = Rng::with_stream(cfg.seed, 7);
    let lib = random_library(40, cfg.embed_dim, &mut rng);
    let pairs = random_pairs(n_pairs, &lib, (3, 6), &mut rng);
    let cfg = ModelConfig {
        dropout: 0.0,
        ..cfg.clone()
    };
    let model = Model::new(cfg)?;
    let enc = pairs
        .iter()
        .map(|p| model.encode(p, &lib))
        .collect::<Result<Vec<_>>>()?;
    let (_, grads) = batch_loss_and_grad(&model.params, &enc)?;
    let base: Vec<Dd> = enc.iter().map(|e| reference_loss(&model.params, e)).collect();
    let scale = Dd::ONE / Dd::from(enc.len() as f64);
    let objective = |theta: &[f64]| {
        let mut p = model.params.clone();
        p.set_from_flat(theta).expect("same length");
        let shift = enc
            .iter()
            .zip(&base)
            .fold(Dd::ZERO, |acc, (e, &l0)| acc + (reference_loss(&p, e) - l0));
        (shift * scale).to_f64()
    };
    gradient_check(objective, &model.params.to_flat(), &grads.to_flat(), h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{forward, pair_loss, Mode};

    #[test]
    fn reference_loss_matches_forward() {
        for biway in [false, true] {
            let cfg = ModelConfig {
                embed_dim: 6,
                hidden: 5,
                dropout: 0.0,
                biway,
                seed: 3,
                ..ModelConfig::default()
            };
            let mut rng = Rng::new(11);
            let lib = random_library(20, 6, &mut rng);
            let model = Model::new(cfg).unwrap();
            for p in random_pairs(10, &lib, (1, 7), &mut rng) {
                let e = model.encode(&p, &lib).unwrap();
                let t = forward(&model.params, &e, 0.0, Mode::Eval, &mut rng).unwrap();
                let fast = pair_loss(&t.probs, e.label);
                let precise = reference_loss(&model.params, &e).to_f64();
                assert!((fast - precise).abs() < 1e-13, "{fast} vs {precise}");
            }
        }
    }
}
