//! LSTM encoder, softmax decision layer and their exact backward passes.
//!
//! The base model encodes the hypothesis augmented against the premise with
//! one LSTM and classifies its last hidden state. The biway model adds a
//! second, independently parameterised LSTM over the premise augmented
//! against the hypothesis; the two final states are concatenated
//! premise-side first and classified together.
//!
//! Dropout is inverted dropout on every LSTM input vector and on the final
//! LSTM output, active only in [`Mode::Train`].

use serde::{Deserialize, Serialize};

use crate::data::{Label, SentencePair};
use crate::embedding::{EmbeddingLibrary, DEFAULT_OOV_WINDOW};
use crate::error::{Error, Result};
use crate::matcher::{build_augmented_sequence, AugmentedSequence};
use crate::numerics::{
    argmax, sigmoid, sigmoid_grad_from_output, softmax, tanh, tanh_grad_from_output, Matrix, Rng,
};

/// Floor applied to the gold-label probability before taking its log.
pub const LOG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Word-vector dimension `d` of the library the model reads (already
    /// doubled when two libraries are concatenated).
    pub embed_dim: usize,
    /// Hidden size `k`.
    pub hidden: usize,
    pub dropout: f64,
    pub biway: bool,
    pub bi_embedding: bool,
    pub seed: u64,
    /// Half-width of the OOV context window.
    pub oov_window: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            embed_dim: 300,
            hidden: 300,
            dropout: 0.3,
            biway: false,
            bi_embedding: false,
            seed: 1,
            oov_window: DEFAULT_OOV_WINDOW,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.embed_dim == 0 || self.hidden == 0 {
            return Err(Error::Config("embed_dim and hidden must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!(
                "dropout must lie in [0, 1), got {}",
                self.dropout
            )));
        }
        Ok(())
    }

    /// Width of each LSTM input `z_t`.
    pub fn input_dim(&self) -> usize {
        2 * self.embed_dim
    }

    /// Width of the vector fed to the softmax layer.
    pub fn feature_dim(&self) -> usize {
        if self.biway {
            2 * self.hidden
        } else {
            self.hidden
        }
    }
}

/// Gate weights act on `H = [z_t ‖ h_{t-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w_i: Matrix,
    pub w_f: Matrix,
    pub w_o: Matrix,
    pub w_c: Matrix,
    pub b_i: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_o: Vec<f64>,
    pub b_c: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        let w = Matrix::zeros(hidden, input_dim + hidden);
        LstmParams {
            w_i: w.clone(),
            w_f: w.clone(),
            w_o: w.clone(),
            w_c: w,
            b_i: vec![0.0; hidden],
            b_f: vec![0.0; hidden],
            b_o: vec![0.0; hidden],
            b_c: vec![0.0; hidden],
        }
    }

    pub fn hidden(&self) -> usize {
        self.w_i.rows()
    }

    pub fn input_dim(&self) -> usize {
        self.w_i.cols() - self.w_i.rows()
    }

    fn glorot(input_dim: usize, hidden: usize, rng: &mut Rng) -> Self {
        let mut p = LstmParams::zeros(input_dim, hidden);
        for w in [&mut p.w_i, &mut p.w_f, &mut p.w_o, &mut p.w_c] {
            glorot_fill(w, rng);
        }
        p
    }

    fn tensors(&self) -> [(&'static str, &[f64], (usize, usize)); 8] {
        let k = self.hidden();
        let s = self.w_i.shape();
        [
            ("w_i", self.w_i.as_slice(), s),
            ("w_f", self.w_f.as_slice(), s),
            ("w_o", self.w_o.as_slice(), s),
            ("w_c", self.w_c.as_slice(), s),
            ("b_i", &self.b_i, (k, 1)),
            ("b_f", &self.b_f, (k, 1)),
            ("b_o", &self.b_o, (k, 1)),
            ("b_c", &self.b_c, (k, 1)),
        ]
    }

    fn tensors_mut(&mut self) -> [&mut [f64]; 8] {
        [
            self.w_i.as_mut_slice(),
            self.w_f.as_mut_slice(),
            self.w_o.as_mut_slice(),
            self.w_c.as_mut_slice(),
            &mut self.b_i,
            &mut self.b_f,
            &mut self.b_o,
            &mut self.b_c,
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxParams {
    /// `3 × feature_dim`.
    pub w: Matrix,
    pub b: Vec<f64>,
}

impl SoftmaxParams {
    pub fn zeros(width: usize) -> Self {
        SoftmaxParams {
            w: Matrix::zeros(3, width),
            b: vec![0.0; 3],
        }
    }
}

/// All trainable parameters. `premise` is present only for biway models.
/// Gradients use the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub hypothesis: LstmParams,
    pub premise: Option<LstmParams>,
    pub softmax: SoftmaxParams,
}

impl Params {
    pub fn zeros(config: &ModelConfig) -> Self {
        Params {
            hypothesis: LstmParams::zeros(config.input_dim(), config.hidden),
            premise: config
                .biway
                .then(|| LstmParams::zeros(config.input_dim(), config.hidden)),
            softmax: SoftmaxParams::zeros(config.feature_dim()),
        }
    }

    /// Glorot-uniform weights (`±√(6/(fan_in+fan_out))` per matrix), zero
    /// biases. Draw order: hypothesis LSTM, premise LSTM, softmax.
    pub fn init(config: &ModelConfig, rng: &mut Rng) -> Self {
        let hypothesis = LstmParams::glorot(config.input_dim(), config.hidden, rng);
        let premise = config
            .biway
            .then(|| LstmParams::glorot(config.input_dim(), config.hidden, rng));
        let mut softmax = SoftmaxParams::zeros(config.feature_dim());
        glorot_fill(&mut softmax.w, rng);
        Params {
            hypothesis,
            premise,
            softmax,
        }
    }

    pub fn zeros_like(&self) -> Self {
        let z = |p: &LstmParams| LstmParams::zeros(p.input_dim(), p.hidden());
        Params {
            hypothesis: z(&self.hypothesis),
            premise: self.premise.as_ref().map(z),
            softmax: SoftmaxParams::zeros(self.softmax.w.cols()),
        }
    }

    /// Named tensors with their `(rows, cols)` shapes, in a fixed order.
    pub fn named_tensors(&self) -> Vec<(String, &[f64], (usize, usize))> {
        let mut out = Vec::new();
        for (prefix, lstm) in [("hypothesis", Some(&self.hypothesis)), ("premise", self.premise.as_ref())] {
            if let Some(lstm) = lstm {
                for (name, data, shape) in lstm.tensors() {
                    out.push((format!("{prefix}.{name}"), data, shape));
                }
            }
        }
        out.push(("softmax.w".into(), self.softmax.w.as_slice(), self.softmax.w.shape()));
        out.push(("softmax.b".into(), &self.softmax.b, (3, 1)));
        out
    }

    /// Mutable views in the same order as [`named_tensors`](Self::named_tensors).
    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        out.extend(self.hypothesis.tensors_mut());
        if let Some(p) = self.premise.as_mut() {
            out.extend(p.tensors_mut());
        }
        out.push(self.softmax.w.as_mut_slice());
        out.push(&mut self.softmax.b);
        out
    }

    pub fn len(&self) -> usize {
        self.named_tensors().iter().map(|(_, d, _)| d.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.named_tensors()
            .into_iter()
            .flat_map(|(_, d, _)| d.iter().copied())
            .collect()
    }

    pub fn set_from_flat(&mut self, flat: &[f64]) -> Result<()> {
        if flat.len() != self.len() {
            return Err(Error::Dimension(format!(
                "{} flat values for {} parameters",
                flat.len(),
                self.len()
            )));
        }
        let mut offset = 0;
        for t in self.tensors_mut() {
            t.copy_from_slice(&flat[offset..offset + t.len()]);
            offset += t.len();
        }
        Ok(())
    }

    /// `self += other`, tensor by tensor.
    pub fn add_assign(&mut self, other: &Params) {
        let src: Vec<&[f64]> = other.named_tensors().into_iter().map(|(_, d, _)| d).collect();
        for (dst, src) in self.tensors_mut().into_iter().zip(src) {
            for (a, b) in dst.iter_mut().zip(src) {
                *a += b;
            }
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.named_tensors()
            .iter()
            .all(|(_, d, _)| d.iter().all(|v| v.is_finite()))
    }

    fn check_shapes(&self, config: &ModelConfig) -> Result<()> {
        let want = Params::zeros(config);
        let got: Vec<_> = self.named_tensors().into_iter().map(|(n, _, s)| (n, s)).collect();
        let exp: Vec<_> = want.named_tensors().into_iter().map(|(n, _, s)| (n, s)).collect();
        if got != exp {
            return Err(Error::Dimension(format!(
                "parameter shapes {got:?} do not match config {exp:?}"
            )));
        }
        Ok(())
    }
}

fn glorot_fill(w: &mut Matrix, rng: &mut Rng) {
    let bound = (6.0 / (w.rows() + w.cols()) as f64).sqrt();
    for v in w.as_mut_slice() {
        *v = rng.uniform_range(-bound, bound);
    }
}

/// Activations of one LSTM step, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct StepCache {
    /// `H = [z_t ‖ h_{t-1}]` (after input dropout).
    pub concat: Vec<f64>,
    pub input_gate: Vec<f64>,
    pub forget_gate: Vec<f64>,
    pub output_gate: Vec<f64>,
    /// `tanh(W_c H + b_c)`.
    pub candidate: Vec<f64>,
    pub c_prev: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

/// One step of the LSTM recurrence.
pub fn lstm_step(
    params: &LstmParams,
    z: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> Result<StepCache> {
    let k = params.hidden();
    if z.len() != params.input_dim() || h_prev.len() != k || c_prev.len() != k {
        return Err(Error::Dimension(format!(
            "lstm_step: input {} (want {}), h {} / c {} (want {k})",
            z.len(),
            params.input_dim(),
            h_prev.len(),
            c_prev.len()
        )));
    }
    let mut concat = Vec::with_capacity(z.len() + k);
    concat.extend_from_slice(z);
    concat.extend_from_slice(h_prev);

    let gate = |w: &Matrix, b: &[f64], act: fn(f64) -> f64| -> Result<Vec<f64>> {
        let mut a = w.matvec(&concat)?;
        for (x, bias) in a.iter_mut().zip(b) {
            *x = act(*x + bias);
        }
        Ok(a)
    };
    let input_gate = gate(&params.w_i, &params.b_i, sigmoid)?;
    let forget_gate = gate(&params.w_f, &params.b_f, sigmoid)?;
    let output_gate = gate(&params.w_o, &params.b_o, sigmoid)?;
    let candidate = gate(&params.w_c, &params.b_c, tanh)?;

    let c: Vec<f64> = (0..k)
        .map(|j| forget_gate[j] * c_prev[j] + input_gate[j] * candidate[j])
        .collect();
    let tanh_c: Vec<f64> = c.iter().map(|&x| tanh(x)).collect();
    let h = output_gate.iter().zip(&tanh_c).map(|(o, t)| o * t).collect();
    Ok(StepCache {
        concat,
        input_gate,
        forget_gate,
        output_gate,
        candidate,
        c_prev: c_prev.to_vec(),
        c,
        tanh_c,
        h,
    })
}

#[derive(Debug, Clone)]
pub struct LstmTrace {
    pub steps: Vec<StepCache>,
    /// Inverted-dropout multipliers applied to each input, train mode only.
    pub input_masks: Option<Vec<Vec<f64>>>,
    pub output_mask: Option<Vec<f64>>,
    /// Final output after output dropout.
    pub output: Vec<f64>,
}

fn dropout_mask(len: usize, rate: f64, rng: &mut Rng) -> Vec<f64> {
    let keep = 1.0 / (1.0 - rate);
    (0..len)
        .map(|_| if rng.uniform() < rate { 0.0 } else { keep })
        .collect()
}

/// Runs the LSTM over `inputs` from zero state and returns the (dropped-out,
/// in train mode) last hidden state with its trace.
pub fn encode_sequence(
    params: &LstmParams,
    inputs: &[Vec<f64>],
    dropout: f64,
    mode: Mode,
    rng: &mut Rng,
) -> Result<LstmTrace> {
    if inputs.is_empty() {
        return Err(Error::Empty("input sequence"));
    }
    let k = params.hidden();
    let drop = mode == Mode::Train && dropout > 0.0;
    let mut h = vec![0.0; k];
    let mut c = vec![0.0; k];
    let mut steps = Vec::with_capacity(inputs.len());
    let mut input_masks = drop.then(Vec::new);
    for z in inputs {
        let step = if let Some(masks) = input_masks.as_mut() {
            let mask = dropout_mask(z.len(), dropout, rng);
            let dropped: Vec<f64> = z.iter().zip(&mask).map(|(x, m)| x * m).collect();
            masks.push(mask);
            lstm_step(params, &dropped, &h, &c)?
        } else {
            lstm_step(params, z, &h, &c)?
        };
        h.clone_from(&step.h);
        c.clone_from(&step.c);
        steps.push(step);
    }
    let output_mask = drop.then(|| dropout_mask(k, dropout, rng));
    let output = match &output_mask {
        Some(m) => h.iter().zip(m).map(|(x, m)| x * m).collect(),
        None => h,
    };
    Ok(LstmTrace {
        steps,
        input_masks,
        output_mask,
        output,
    })
}

/// Softmax decision: probabilities and the argmax label (ties go to the
/// smaller label).
pub fn decide(params: &SoftmaxParams, h: &[f64]) -> Result<([f64; 3], Label)> {
    let logits = params.w.matvec(h)?;
    let logits: Vec<f64> = logits.iter().zip(&params.b).map(|(p, b)| p + b).collect();
    let p = softmax(&logits);
    let probs = [p[0], p[1], p[2]];
    Ok((probs, label_of(&probs)))
}

pub fn label_of(probs: &[f64; 3]) -> Label {
    Label::from_index(argmax(probs)).expect("argmax of a 3-vector")
}

/// A sentence pair after matching: the hypothesis augmented against the
/// premise, plus (biway only) the premise augmented against the hypothesis.
#[derive(Debug, Clone)]
pub struct EncodedPair {
    pub hypothesis: AugmentedSequence,
    pub premise: Option<AugmentedSequence>,
    pub label: Label,
}

impl EncodedPair {
    pub fn new(pair: &SentencePair, lib: &EmbeddingLibrary, config: &ModelConfig) -> Result<Self> {
        if lib.dim() != config.embed_dim {
            return Err(Error::Dimension(format!(
                "model expects {}-d word vectors but the embedding library has dimension {}",
                config.embed_dim,
                lib.dim()
            )));
        }
        let hypothesis =
            build_augmented_sequence(&pair.hypothesis, &pair.premise, lib, config.oov_window)?;
        let premise = if config.biway {
            Some(build_augmented_sequence(
                &pair.premise,
                &pair.hypothesis,
                lib,
                config.oov_window,
            )?)
        } else {
            None
        };
        Ok(EncodedPair {
            hypothesis,
            premise,
            label: pair.label,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ForwardTrace {
    pub hypothesis: LstmTrace,
    pub premise: Option<LstmTrace>,
    /// Softmax input: `[h_premise ‖ h_hypothesis]` for biway, else `h_hypothesis`.
    pub features: Vec<f64>,
    pub probs: [f64; 3],
}

impl ForwardTrace {
    pub fn label(&self) -> Label {
        label_of(&self.probs)
    }
}

/// Forward pass of either architecture; biway iff `params.premise` is set.
pub fn forward(
    params: &Params,
    pair: &EncodedPair,
    dropout: f64,
    mode: Mode,
    rng: &mut Rng,
) -> Result<ForwardTrace> {
    let hyp = encode_sequence(&params.hypothesis, &pair.hypothesis.steps, dropout, mode, rng)?;
    let (premise, features) = match (&params.premise, &pair.premise) {
        (Some(pp), Some(seq)) => {
            let prem = encode_sequence(pp, &seq.steps, dropout, mode, rng)?;
            let mut f = prem.output.clone();
            f.extend_from_slice(&hyp.output);
            (Some(prem), f)
        }
        (None, _) => (None, hyp.output.clone()),
        (Some(_), None) => {
            return Err(Error::Dimension(
                "biway parameters need the premise-side augmented sequence".into(),
            ))
        }
    };
    let (probs, _) = decide(&params.softmax, &features)?;
    Ok(ForwardTrace {
        hypothesis: hyp,
        premise,
        features,
        probs,
    })
}

/// Base architecture on a raw sentence pair.
pub fn forward_base(
    pair: &SentencePair,
    lib: &EmbeddingLibrary,
    params: &Params,
    config: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<ForwardTrace> {
    let config = ModelConfig {
        biway: false,
        ..config.clone()
    };
    let base = Params {
        premise: None,
        ..params.clone()
    };
    base.check_shapes(&config)?;
    let enc = EncodedPair::new(pair, lib, &config)?;
    forward(&base, &enc, config.dropout, mode, rng)
}

/// Biway architecture on a raw sentence pair.
pub fn forward_biway(
    pair: &SentencePair,
    lib: &EmbeddingLibrary,
    params: &Params,
    config: &ModelConfig,
    mode: Mode,
    rng: &mut Rng,
) -> Result<ForwardTrace> {
    let config = ModelConfig {
        biway: true,
        ..config.clone()
    };
    params.check_shapes(&config)?;
    let enc = EncodedPair::new(pair, lib, &config)?;
    forward(params, &enc, config.dropout, mode, rng)
}

/// Cross-entropy of a single prediction.
pub fn pair_loss(probs: &[f64; 3], gold: Label) -> f64 {
    -probs[gold.index()].max(LOG_FLOOR).ln()
}

/// Gradient of `-log p(gold)` with respect to every parameter. Word vectors
/// are inputs, not parameters, and receive nothing.
pub fn backward(trace: &ForwardTrace, gold: Label, params: &Params) -> Result<Params> {
    let width = params.softmax.w.cols();
    if trace.features.len() != width || trace.premise.is_some() != params.premise.is_some() {
        return Err(Error::Dimension("trace does not belong to these parameters".into()));
    }
    let mut grads = params.zeros_like();

    let mut dlogits = trace.probs.to_vec();
    dlogits[gold.index()] -= 1.0;
    grads.softmax.w.add_outer(&dlogits, &trace.features);
    grads.softmax.b.copy_from_slice(&dlogits);
    let mut dfeatures = vec![0.0; width];
    params.softmax.w.matvec_transpose_acc(&dlogits, &mut dfeatures);

    let k = params.hypothesis.hidden();
    match (&params.premise, &trace.premise, grads.premise.as_mut()) {
        (Some(pp), Some(pt), Some(pg)) => {
            lstm_backward(pp, pt, &dfeatures[..k], pg);
            lstm_backward(&params.hypothesis, &trace.hypothesis, &dfeatures[k..], &mut grads.hypothesis);
        }
        _ => lstm_backward(&params.hypothesis, &trace.hypothesis, &dfeatures, &mut grads.hypothesis),
    }
    Ok(grads)
}

/// Backpropagation through time for one LSTM, accumulating into `grads`.
/// `d_output` is the gradient with respect to the (dropped-out) final output.
fn lstm_backward(params: &LstmParams, trace: &LstmTrace, d_output: &[f64], grads: &mut LstmParams) {
    let k = params.hidden();
    let input_dim = params.input_dim();
    let mut dh: Vec<f64> = match &trace.output_mask {
        Some(m) => d_output.iter().zip(m).map(|(g, m)| g * m).collect(),
        None => d_output.to_vec(),
    };
    let mut dc_next = vec![0.0; k];
    let (mut da_i, mut da_f, mut da_o, mut da_c) =
        (vec![0.0; k], vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    let mut dconcat = vec![0.0; input_dim + k];

    for s in trace.steps.iter().rev() {
        for j in 0..k {
            let dc = dc_next[j] + dh[j] * s.output_gate[j] * tanh_grad_from_output(s.tanh_c[j]);
            let d_o = dh[j] * s.tanh_c[j];
            let d_i = dc * s.candidate[j];
            let d_g = dc * s.input_gate[j];
            let d_f = dc * s.c_prev[j];
            dc_next[j] = dc * s.forget_gate[j];
            da_i[j] = d_i * sigmoid_grad_from_output(s.input_gate[j]);
            da_f[j] = d_f * sigmoid_grad_from_output(s.forget_gate[j]);
            da_o[j] = d_o * sigmoid_grad_from_output(s.output_gate[j]);
            da_c[j] = d_g * tanh_grad_from_output(s.candidate[j]);
        }
        dconcat.fill(0.0);
        for (w, gw, gb, da) in [
            (&params.w_i, &mut grads.w_i, &mut grads.b_i, &da_i),
            (&params.w_f, &mut grads.w_f, &mut grads.b_f, &da_f),
            (&params.w_o, &mut grads.w_o, &mut grads.b_o, &da_o),
            (&params.w_c, &mut grads.w_c, &mut grads.b_c, &da_c),
        ] {
            gw.add_outer(da, &s.concat);
            gb.iter_mut().zip(da).for_each(|(g, d)| *g += d);
            w.matvec_transpose_acc(da, &mut dconcat);
        }
        dh.copy_from_slice(&dconcat[input_dim..]);
    }
}

/// Loss and gradients for one pair.
pub fn loss_and_grad(
    params: &Params,
    pair: &EncodedPair,
    dropout: f64,
    rng: &mut Rng,
) -> Result<(f64, Params)> {
    let trace = forward(params, pair, dropout, Mode::Train, rng)?;
    let grads = backward(&trace, pair.label, params)?;
    Ok((pair_loss(&trace.probs, pair.label), grads))
}

/// Parameters plus the configuration they were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub params: Params,
}

impl Model {
    pub fn new(config: ModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = Rng::new(config.seed);
        let params = Params::init(&config, &mut rng);
        Ok(Model { config, params })
    }

    pub fn from_parts(config: ModelConfig, params: Params) -> Result<Self> {
        config.validate()?;
        params.check_shapes(&config)?;
        Ok(Model { config, params })
    }

    pub fn encode(&self, pair: &SentencePair, lib: &EmbeddingLibrary) -> Result<EncodedPair> {
        EncodedPair::new(pair, lib, &self.config)
    }

    /// Eval-mode probabilities for an already matched pair.
    pub fn probabilities(&self, pair: &EncodedPair) -> Result<[f64; 3]> {
        // Eval mode never draws from the generator.
        let mut rng = Rng::new(0);
        Ok(forward(&self.params, pair, self.config.dropout, Mode::Eval, &mut rng)?.probs)
    }

    pub fn predict(&self, pair: &SentencePair, lib: &EmbeddingLibrary) -> Result<([f64; 3], Label)> {
        let probs = self.probabilities(&self.encode(pair, lib)?)?;
        Ok((probs, label_of(&probs)))
    }
}
