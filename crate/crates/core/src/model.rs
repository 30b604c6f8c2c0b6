//! Two-hidden-layer ReLU classifier with softmax output, trained by
//! minibatch Adam on mean cross-entropy.
//!
//! Parameters live in one flat vector so that optimizer state, the proximal
//! term and serialization all work on plain slices. Layout: `W1 (h1 x d)`,
//! `b1`, `W2 (h2 x h1)`, `b2`, `W3 (c x h2)`, `b3`, weights row-major with one
//! row per output unit.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::matrix::Matrix;
use crate::rng::{seeded, Rng};

/// Lower clamp applied to probabilities before taking logs.
pub const PROB_FLOOR: f64 = 1e-12;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

/// Magic bytes at the start of a serialized parameter file.
pub const MAGIC: &[u8; 8] = b"SFPMLP01";

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("expected {expected} input features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("input contains non-finite values")]
    NonFiniteInput,
    #[error("loss became non-finite in epoch {epoch} (batch {batch})")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("label {label} is outside [0, {classes})")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("{rows} rows cannot fill a batch of {batch}")]
    TooFewRows { rows: usize, batch: usize },
    #[error("architecture mismatch: {0}")]
    ArchitectureMismatch(String),
    #[error("malformed parameter file: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub inputs: usize,
    pub hidden1: usize,
    pub hidden2: usize,
    pub outputs: usize,
}

impl Architecture {
    pub fn new(inputs: usize, hidden: (usize, usize), outputs: usize) -> Self {
        Self {
            inputs,
            hidden1: hidden.0,
            hidden2: hidden.1,
            outputs,
        }
    }

    pub fn param_count(&self) -> usize {
        let Self {
            inputs: d,
            hidden1: h1,
            hidden2: h2,
            outputs: c,
        } = *self;
        h1 * d + h1 + h2 * h1 + h2 + c * h2 + c
    }

    // Start offsets of W1, b1, W2, b2, W3, b3.
    fn offsets(&self) -> [usize; 6] {
        let Self {
            inputs: d,
            hidden1: h1,
            hidden2: h2,
            outputs: c,
        } = *self;
        let w1 = 0;
        let b1 = w1 + h1 * d;
        let w2 = b1 + h1;
        let b2 = w2 + h2 * h1;
        let w3 = b2 + h2;
        let b3 = w3 + c * h2;
        [w1, b1, w2, b2, w3, b3]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    arch: Architecture,
    values: Vec<f64>,
}

struct Layers<'a> {
    w1: &'a [f64],
    b1: &'a [f64],
    w2: &'a [f64],
    b2: &'a [f64],
    w3: &'a [f64],
    b3: &'a [f64],
}

impl MlpParams {
    pub fn zeros(arch: Architecture) -> Self {
        Self {
            arch,
            values: vec![0.0; arch.param_count()],
        }
    }

    /// Uniform He initialization, `U(-sqrt(6 / fan_in), sqrt(6 / fan_in))`,
    /// with zero biases.
    pub fn init(arch: Architecture, rng: &mut Rng) -> Self {
        let mut p = Self::zeros(arch);
        let [w1, b1, w2, b2, w3, b3] = arch.offsets();
        let fill = |slice: &mut [f64], fan_in: usize, rng: &mut Rng| {
            let bound = (6.0 / fan_in as f64).sqrt();
            for v in slice {
                *v = rng.random_range(-bound..bound);
            }
        };
        fill(&mut p.values[w1..b1], arch.inputs, rng);
        fill(&mut p.values[w2..b2], arch.hidden1, rng);
        fill(&mut p.values[w3..b3], arch.hidden2, rng);
        p
    }

    pub fn from_values(arch: Architecture, values: Vec<f64>) -> Result<Self, ModelError> {
        if values.len() != arch.param_count() {
            return Err(ModelError::ArchitectureMismatch(format!(
                "{} values for {} parameters",
                values.len(),
                arch.param_count()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteInput);
        }
        Ok(Self { arch, values })
    }

    pub fn architecture(&self) -> Architecture {
        self.arch
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Squared Euclidean distance between two parameter vectors.
    pub fn sq_distance(&self, other: &MlpParams) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    fn layers(&self) -> Layers<'_> {
        let [w1, b1, w2, b2, w3, b3] = self.arch.offsets();
        let v = &self.values;
        Layers {
            w1: &v[w1..b1],
            b1: &v[b1..w2],
            w2: &v[w2..b2],
            b2: &v[b2..w3],
            w3: &v[w3..b3],
            b3: &v[b3..],
        }
    }

    /// Binary encoding: magic, then `d, h1, h2, label_count` as little-endian
    /// `u64`, then the parameters as little-endian `f64` in layout order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let a = self.arch;
        let mut out = Vec::with_capacity(8 + 32 + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        for dim in [a.inputs, a.hidden1, a.hidden2, a.outputs] {
            out.extend_from_slice(&(dim as u64).to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, ModelError> {
        if bytes.len() < 40 || &bytes[..8] != MAGIC {
            return Err(ModelError::Format("missing magic header".into()));
        }
        let word = |k: usize| {
            let mut b = [0u8; 8];
            b.copy_from_slice(&bytes[8 + 8 * k..16 + 8 * k]);
            u64::from_le_bytes(b) as usize
        };
        let arch = Architecture {
            inputs: word(0),
            hidden1: word(1),
            hidden2: word(2),
            outputs: word(3),
        };
        let body = &bytes[40..];
        if body.len() != 8 * arch.param_count() {
            return Err(ModelError::Format(format!(
                "{} payload bytes for {} parameters",
                body.len(),
                arch.param_count()
            )));
        }
        let values = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Self::from_values(arch, values)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ParamsFile::from(self)).expect("plain data serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let f: ParamsFile = serde_json::from_str(s).map_err(|e| ModelError::Format(e.to_string()))?;
        if f.magic != std::str::from_utf8(MAGIC).expect("ascii") {
            return Err(ModelError::Format(format!("unexpected magic `{}`", f.magic)));
        }
        let arch = Architecture {
            inputs: f.d,
            hidden1: f.h1,
            hidden2: f.h2,
            outputs: f.label_count,
        };
        Self::from_values(arch, f.weights)
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsFile {
    magic: String,
    d: usize,
    h1: usize,
    h2: usize,
    label_count: usize,
    weights: Vec<f64>,
}

impl From<&MlpParams> for ParamsFile {
    fn from(p: &MlpParams) -> Self {
        Self {
            magic: std::str::from_utf8(MAGIC).expect("ascii").to_string(),
            d: p.arch.inputs,
            h1: p.arch.hidden1,
            h2: p.arch.hidden2,
            label_count: p.arch.outputs,
            weights: p.values.clone(),
        }
    }
}

/// Minibatch training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
    pub hidden: (usize, usize),
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 32,
            learning_rate: 1e-3,
            seed: 0,
            hidden: (32, 32),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.epochs == 0 {
            return Err(ModelError::InvalidConfig("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(ModelError::InvalidConfig("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(ModelError::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.hidden.0 == 0 || self.hidden.1 == 0 {
            return Err(ModelError::InvalidConfig("hidden sizes must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self {
            seed,
            ..self.clone()
        }
    }

    /// Same config with the batch size capped at `rows`, for small shards.
    pub fn fitted_to(&self, rows: usize) -> Self {
        Self {
            batch_size: self.batch_size.min(rows.max(1)),
            ..self.clone()
        }
    }
}

// ---------------------------------------------------------------------------
// Forward and backward passes

/// Activations of one batch, kept for backpropagation.
#[derive(Default)]
pub(crate) struct Tape {
    rows: usize,
    z1: Vec<f64>,
    a1: Vec<f64>,
    z2: Vec<f64>,
    a2: Vec<f64>,
    /// Softmax outputs, `rows x classes`.
    pub(crate) probs: Vec<f64>,
    d2: Vec<f64>,
    d1: Vec<f64>,
}

fn check_input(params: &MlpParams, x: &Matrix) -> Result<(), ModelError> {
    if x.cols() != params.arch.inputs {
        return Err(ModelError::DimensionMismatch {
            expected: params.arch.inputs,
            found: x.cols(),
        });
    }
    if !x.is_finite() {
        return Err(ModelError::NonFiniteInput);
    }
    Ok(())
}

fn softmax_in_place(row: &mut [f64]) {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in row.iter_mut() {
        *v /= sum;
    }
}

/// Runs the rows `idx` of `x` through the network, recording activations.
pub(crate) fn forward_tape(params: &MlpParams, x: &Matrix, idx: &[usize], tape: &mut Tape) {
    let a = params.arch;
    let (d, h1, h2, c) = (a.inputs, a.hidden1, a.hidden2, a.outputs);
    let l = params.layers();
    let n = idx.len();
    tape.rows = n;
    tape.z1.resize(n * h1, 0.0);
    tape.a1.resize(n * h1, 0.0);
    tape.z2.resize(n * h2, 0.0);
    tape.a2.resize(n * h2, 0.0);
    tape.probs.resize(n * c, 0.0);
    for (r, &i) in idx.iter().enumerate() {
        let xi = x.row(i);
        for u in 0..h1 {
            let w = &l.w1[u * d..(u + 1) * d];
            let z = l.b1[u] + w.iter().zip(xi).map(|(w, x)| w * x).sum::<f64>();
            tape.z1[r * h1 + u] = z;
            tape.a1[r * h1 + u] = z.max(0.0);
        }
        let a1 = &tape.a1[r * h1..(r + 1) * h1];
        for u in 0..h2 {
            let w = &l.w2[u * h1..(u + 1) * h1];
            let z = l.b2[u] + w.iter().zip(a1).map(|(w, x)| w * x).sum::<f64>();
            tape.z2[r * h2 + u] = z;
            tape.a2[r * h2 + u] = z.max(0.0);
        }
        let a2 = &tape.a2[r * h2..(r + 1) * h2];
        let out = &mut tape.probs[r * c..(r + 1) * c];
        for (u, o) in out.iter_mut().enumerate() {
            let w = &l.w3[u * h2..(u + 1) * h2];
            *o = l.b3[u] + w.iter().zip(a2).map(|(w, x)| w * x).sum::<f64>();
        }
        softmax_in_place(out);
    }
}

/// Accumulates into `grad` the parameter gradient for upstream logit
/// gradients `dlogits` (`rows x classes`) of the batch held in `tape`.
pub(crate) fn backward_tape(
    params: &MlpParams,
    x: &Matrix,
    idx: &[usize],
    tape: &mut Tape,
    dlogits: &[f64],
    grad: &mut [f64],
) {
    let a = params.arch;
    let (d, h1, h2, c) = (a.inputs, a.hidden1, a.hidden2, a.outputs);
    let l = params.layers();
    let [o_w1, o_b1, o_w2, o_b2, o_w3, o_b3] = a.offsets();
    let n = tape.rows;
    tape.d2.resize(h2, 0.0);
    tape.d1.resize(h1, 0.0);
    for (r, &i) in idx.iter().enumerate().take(n) {
        let g3 = &dlogits[r * c..(r + 1) * c];
        let a2 = &tape.a2[r * h2..(r + 1) * h2];
        tape.d2.iter_mut().for_each(|v| *v = 0.0);
        for (u, &g) in g3.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad[o_b3 + u] += g;
            let gw = &mut grad[o_w3 + u * h2..o_w3 + (u + 1) * h2];
            let w = &l.w3[u * h2..(u + 1) * h2];
            for k in 0..h2 {
                gw[k] += g * a2[k];
                tape.d2[k] += g * w[k];
            }
        }
        let z2 = &tape.z2[r * h2..(r + 1) * h2];
        let a1 = &tape.a1[r * h1..(r + 1) * h1];
        tape.d1.iter_mut().for_each(|v| *v = 0.0);
        for u in 0..h2 {
            if z2[u] <= 0.0 {
                continue;
            }
            let g = tape.d2[u];
            if g == 0.0 {
                continue;
            }
            grad[o_b2 + u] += g;
            let gw = &mut grad[o_w2 + u * h1..o_w2 + (u + 1) * h1];
            let w = &l.w2[u * h1..(u + 1) * h1];
            for k in 0..h1 {
                gw[k] += g * a1[k];
                tape.d1[k] += g * w[k];
            }
        }
        let z1 = &tape.z1[r * h1..(r + 1) * h1];
        let xi = x.row(i);
        for u in 0..h1 {
            if z1[u] <= 0.0 {
                continue;
            }
            let g = tape.d1[u];
            if g == 0.0 {
                continue;
            }
            grad[o_b1 + u] += g;
            let gw = &mut grad[o_w1 + u * d..o_w1 + (u + 1) * d];
            for k in 0..d {
                gw[k] += g * xi[k];
            }
        }
    }
}

/// Class probabilities for every row of `x`.
pub fn forward(params: &MlpParams, x: &Matrix) -> Result<Matrix, ModelError> {
    check_input(params, x)?;
    let idx: Vec<usize> = (0..x.rows()).collect();
    let mut tape = Tape::default();
    forward_tape(params, x, &idx, &mut tape);
    Ok(Matrix::from_vec(x.rows(), params.arch.outputs, tape.probs).expect("rows x classes"))
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = k;
        }
    }
    best
}

/// Hard predictions (argmax of the probabilities).
pub fn predict(params: &MlpParams, x: &Matrix) -> Result<Vec<usize>, ModelError> {
    Ok(forward(params, x)?.iter_rows().map(argmax).collect())
}

/// Fraction of rows of `data` whose label is predicted correctly.
pub fn accuracy(params: &MlpParams, data: &Dataset) -> Result<f64, ModelError> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let preds = predict(params, data.features())?;
    let hits = preds.iter().zip(data.labels()).filter(|(p, y)| p == y).count();
    Ok(hits as f64 / data.len() as f64)
}

/// Mean cross-entropy with probabilities clamped at [`PROB_FLOOR`].
pub fn loss(probs: &Matrix, labels: &[usize]) -> Result<f64, ModelError> {
    if probs.rows() != labels.len() {
        return Err(ModelError::DimensionMismatch {
            expected: probs.rows(),
            found: labels.len(),
        });
    }
    if labels.is_empty() {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for (row, &y) in probs.iter_rows().zip(labels) {
        if y >= row.len() {
            return Err(ModelError::LabelOutOfRange {
                label: y,
                classes: row.len(),
            });
        }
        total -= row[y].max(PROB_FLOOR).ln();
    }
    Ok(total / labels.len() as f64)
}

fn check_labels(labels: &[usize], classes: usize) -> Result<(), ModelError> {
    match labels.iter().find(|&&y| y >= classes) {
        Some(&label) => Err(ModelError::LabelOutOfRange { label, classes }),
        None => Ok(()),
    }
}

/// Gradient of the mean cross-entropy, in the same layout as the parameters.
pub fn backward(params: &MlpParams, x: &Matrix, labels: &[usize]) -> Result<MlpParams, ModelError> {
    check_input(params, x)?;
    if labels.len() != x.rows() {
        return Err(ModelError::DimensionMismatch {
            expected: x.rows(),
            found: labels.len(),
        });
    }
    let c = params.arch.outputs;
    check_labels(labels, c)?;
    let idx: Vec<usize> = (0..x.rows()).collect();
    let mut tape = Tape::default();
    forward_tape(params, x, &idx, &mut tape);
    let mut dlogits = tape.probs.clone();
    let scale = 1.0 / x.rows().max(1) as f64;
    for (r, &y) in labels.iter().enumerate() {
        dlogits[r * c + y] -= 1.0;
    }
    dlogits.iter_mut().for_each(|v| *v *= scale);
    let mut grad = MlpParams::zeros(params.arch);
    backward_tape(params, x, &idx, &mut tape, &dlogits, &mut grad.values);
    Ok(grad)
}

// ---------------------------------------------------------------------------
// Training

/// Extra objective term evaluated on each minibatch, e.g. a fairness penalty.
pub(crate) trait BatchPenalty {
    /// Adds the penalty's gradient with respect to the logits of the batch
    /// rows to `dlogits` and returns the penalty value.
    fn apply(&mut self, batch: &[usize], probs: &[f64], classes: usize, dlogits: &mut [f64]) -> f64;

    /// Called once after every epoch.
    fn end_epoch(&mut self);
}

/// Optional proximal anchor `lambda * ||theta - anchor||^2`.
#[derive(Clone, Copy)]
pub(crate) struct Proximal<'a> {
    pub anchor: &'a MlpParams,
    pub lambda: f64,
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(len: usize, lr: f64) -> Self {
        Self {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
            lr,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g;
            *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + ADAM_EPS);
        }
    }
}

/// Shared minibatch loop behind every trainer in the crate.
pub(crate) fn fit(
    x: &Matrix,
    labels: &[usize],
    classes: usize,
    config: &TrainConfig,
    proximal: Option<Proximal<'_>>,
    mut penalty: Option<&mut dyn BatchPenalty>,
) -> Result<MlpParams, ModelError> {
    config.validate()?;
    if x.rows() != labels.len() {
        return Err(ModelError::DimensionMismatch {
            expected: x.rows(),
            found: labels.len(),
        });
    }
    if x.rows() < config.batch_size {
        return Err(ModelError::TooFewRows {
            rows: x.rows(),
            batch: config.batch_size,
        });
    }
    if !x.is_finite() {
        return Err(ModelError::NonFiniteInput);
    }
    check_labels(labels, classes)?;
    let arch = Architecture::new(x.cols(), config.hidden, classes);
    if let Some(p) = &proximal {
        if p.anchor.arch != arch {
            return Err(ModelError::ArchitectureMismatch(format!(
                "anchor {:?} vs model {:?}",
                p.anchor.arch, arch
            )));
        }
    }

    let mut rng = seeded(config.seed);
    let mut params = MlpParams::init(arch, &mut rng);
    let mut adam = Adam::new(arch.param_count(), config.learning_rate);
    let mut order: Vec<usize> = (0..x.rows()).collect();
    let mut tape = Tape::default();
    let mut grad = vec![0.0; arch.param_count()];
    let mut dlogits = Vec::new();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for (b, batch) in order.chunks(config.batch_size).enumerate() {
            forward_tape(&params, x, batch, &mut tape);
            let scale = 1.0 / batch.len() as f64;
            dlogits.clear();
            dlogits.extend_from_slice(&tape.probs);
            let mut objective = 0.0;
            for (r, &i) in batch.iter().enumerate() {
                let y = labels[i];
                objective -= tape.probs[r * classes + y].max(PROB_FLOOR).ln();
                dlogits[r * classes + y] -= 1.0;
            }
            objective *= scale;
            dlogits.iter_mut().for_each(|v| *v *= scale);
            if let Some(pen) = penalty.as_deref_mut() {
                objective += pen.apply(batch, &tape.probs, classes, &mut dlogits);
            }
            grad.iter_mut().for_each(|g| *g = 0.0);
            backward_tape(&params, x, batch, &mut tape, &dlogits, &mut grad);
            if let Some(p) = &proximal {
                if p.lambda > 0.0 {
                    for ((g, th), an) in grad.iter_mut().zip(&params.values).zip(&p.anchor.values) {
                        *g += 2.0 * p.lambda * (th - an);
                    }
                    objective += p.lambda * params.sq_distance(p.anchor);
                }
            }
            if !objective.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(ModelError::NonFiniteLoss { epoch, batch: b });
            }
            adam.step(&mut params.values, &grad);
        }
        if let Some(pen) = penalty.as_deref_mut() {
            pen.end_epoch();
        }
    }
    Ok(params)
}

/// Plain empirical risk minimization on `data`'s labels.
pub fn train_erm(data: &Dataset, config: &TrainConfig) -> Result<MlpParams, ModelError> {
    fit(data.features(), data.labels(), data.label_count(), config, None, None)
}

/// Minimizes `loss + lambda * ||theta - theta_star||^2`, optionally on
/// substituted labels.
pub fn train_proximal(
    data: &Dataset,
    labels_override: Option<&[usize]>,
    theta_star: &MlpParams,
    lambda: f64,
    config: &TrainConfig,
) -> Result<MlpParams, ModelError> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(ModelError::InvalidConfig(format!("lambda must be >= 0, got {lambda}")));
    }
    let labels = match labels_override {
        Some(l) if l.len() != data.len() => {
            return Err(ModelError::DimensionMismatch {
                expected: data.len(),
                found: l.len(),
            })
        }
        Some(l) => l,
        None => data.labels(),
    };
    fit(
        data.features(),
        labels,
        data.label_count(),
        config,
        Some(Proximal {
            anchor: theta_star,
            lambda,
        }),
        None,
    )
}
