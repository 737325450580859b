//! Two-hidden-layer dropout network with softmax output, trained by RMSProp.
//!
//! The eight tunable quantities (two dropout rates, two layer widths,
//! learning rate, epochs, batch size and the RMSProp decay factor) bind
//! directly to the demo search-space presets. Training is deterministic
//! under a fixed seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::data::Dataset;

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("batch feature width {got} does not match input dimension {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("training diverged: non-finite loss at epoch {0}")]
    Diverged(usize),
}

/// Probability floor/ceiling applied before taking logs in the loss.
const PROB_CLIP: f64 = 1e-7;
const RMSPROP_EPS: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub dropout1: f64,
    pub dropout2: f64,
    pub units1: usize,
    pub units2: usize,
    pub lr: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub rho: f64,
}

impl Default for MlpConfig {
    /// Default configuration of the demo network.
    fn default() -> Self {
        MlpConfig {
            dropout1: 0.4,
            dropout2: 0.3,
            units1: 256,
            units2: 128,
            lr: 0.001,
            epochs: 20,
            batch_size: 64,
            rho: 0.9,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<(), MlpError> {
        let err = |m: String| Err(MlpError::InvalidConfig(m));
        if !(0.0..1.0).contains(&self.dropout1) || !(0.0..1.0).contains(&self.dropout2) {
            return err(format!(
                "dropout rates must lie in [0,1), got {}/{}",
                self.dropout1, self.dropout2
            ));
        }
        if self.units1 == 0 || self.units2 == 0 {
            return err("layer widths must be at least 1".into());
        }
        if !(self.lr > 0.0) {
            return err(format!("learning rate must be positive, got {}", self.lr));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return err("epochs and batch size must be at least 1".into());
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return err(format!("rho must lie in (0,1), got {}", self.rho));
        }
        Ok(())
    }
}

/// One dense layer with its RMSProp accumulators.
#[derive(Debug, Clone)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    /// Row-major `in_dim x out_dim`.
    pub w: Vec<f64>,
    pub b: Vec<f64>,
    v_w: Vec<f64>,
    v_b: Vec<f64>,
}

impl Dense {
    fn new(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Dense {
        // He-style init: zero biases, normal weights with std sqrt(2/fan_in).
        let std = (2.0 / in_dim as f64).sqrt();
        let w = (0..in_dim * out_dim)
            .map(|_| std * standard_normal(rng))
            .collect();
        Dense {
            in_dim,
            out_dim,
            w,
            b: vec![0.0; out_dim],
            v_w: vec![0.0; in_dim * out_dim],
            v_b: vec![0.0; out_dim],
        }
    }
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub layer1: Dense,
    pub layer2: Dense,
    pub output: Dense,
    pub dropout1: f64,
    pub dropout2: f64,
}

/// Activations cached by a forward pass, consumed by [`Network::backward`].
pub struct ForwardCache {
    input: Vec<f64>,
    batch: usize,
    /// ReLU outputs before dropout.
    a1: Vec<f64>,
    a2: Vec<f64>,
    /// Scaled dropout masks (entries 0 or 1/(1-rate)).
    mask1: Vec<f64>,
    mask2: Vec<f64>,
    /// Hidden activations after dropout, as fed to the next layer.
    h1: Vec<f64>,
    h2: Vec<f64>,
    pub probabilities: Vec<f64>,
}

/// Per-tensor gradients of the mean cross-entropy.
pub struct Gradients {
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: Vec<f64>,
}

/// `out = a (m x k) * b (k x n)`, row-major.
fn matmul(a: &[f64], m: usize, k: usize, b: &[f64], n: usize, out: &mut [f64]) {
    out.fill(0.0);
    for i in 0..m {
        for kk in 0..k {
            let aik = a[i * k + kk];
            if aik == 0.0 {
                continue;
            }
            let brow = &b[kk * n..kk * n + n];
            let orow = &mut out[i * n..i * n + n];
            for j in 0..n {
                orow[j] += aik * brow[j];
            }
        }
    }
}

/// `out = a^T (k x m) * b (m x n)` where `a` is stored `m x k`.
fn matmul_tn(a: &[f64], m: usize, k: usize, b: &[f64], n: usize, out: &mut [f64]) {
    out.fill(0.0);
    for i in 0..m {
        let arow = &a[i * k..i * k + k];
        let brow = &b[i * n..i * n + n];
        for (kk, &aik) in arow.iter().enumerate() {
            if aik == 0.0 {
                continue;
            }
            let orow = &mut out[kk * n..kk * n + n];
            for j in 0..n {
                orow[j] += aik * brow[j];
            }
        }
    }
}

/// `out = a (m x n) * b^T (n x k)` where `b` is stored `k x n`.
fn matmul_nt(a: &[f64], m: usize, n: usize, b: &[f64], k: usize, out: &mut [f64]) {
    for i in 0..m {
        let arow = &a[i * n..i * n + n];
        for kk in 0..k {
            let brow = &b[kk * n..kk * n + n];
            out[i * k + kk] = arow.iter().zip(brow).map(|(x, y)| x * y).sum();
        }
    }
}

impl Network {
    pub fn new(in_dim: usize, config: &MlpConfig, seed: u64) -> Network {
        Self::with_classes(in_dim, config, 10, seed)
    }

    pub fn with_classes(in_dim: usize, config: &MlpConfig, classes: usize, seed: u64) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Network {
            layer1: Dense::new(in_dim, config.units1, &mut rng),
            layer2: Dense::new(config.units1, config.units2, &mut rng),
            output: Dense::new(config.units2, classes, &mut rng),
            dropout1: config.dropout1,
            dropout2: config.dropout2,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.layer1.in_dim
    }

    pub fn classes(&self) -> usize {
        self.output.out_dim
    }

    /// Forward pass over a row-major batch. Train mode applies inverted
    /// dropout after each hidden ReLU; infer mode applies neither the masks
    /// nor the rescaling. Softmax rows sum to one.
    pub fn forward(
        &self,
        batch: &[f64],
        mode: Mode,
        dropout_seed: u64,
    ) -> Result<ForwardCache, MlpError> {
        let in_dim = self.in_dim();
        if batch.len() % in_dim != 0 {
            return Err(MlpError::ShapeMismatch {
                expected: in_dim,
                got: batch.len(),
            });
        }
        let b = batch.len() / in_dim;
        let (u1, u2, c) = (
            self.layer1.out_dim,
            self.layer2.out_dim,
            self.output.out_dim,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(dropout_seed);
        let mut draw_mask = |len: usize, rate: f64| -> Vec<f64> {
            if mode == Mode::Infer || rate == 0.0 {
                return vec![1.0; len];
            }
            let keep = 1.0 - rate;
            (0..len)
                .map(|_| {
                    if rng.random::<f64>() < keep {
                        1.0 / keep
                    } else {
                        0.0
                    }
                })
                .collect()
        };

        let mut z1 = vec![0.0; b * u1];
        matmul(batch, b, in_dim, &self.layer1.w, u1, &mut z1);
        add_bias_relu(&mut z1, &self.layer1.b, b, u1);
        let a1 = z1;
        let mask1 = draw_mask(b * u1, self.dropout1);
        let h1: Vec<f64> = a1.iter().zip(&mask1).map(|(a, m)| a * m).collect();

        let mut z2 = vec![0.0; b * u2];
        matmul(&h1, b, u1, &self.layer2.w, u2, &mut z2);
        add_bias_relu(&mut z2, &self.layer2.b, b, u2);
        let a2 = z2;
        let mask2 = draw_mask(b * u2, self.dropout2);
        let h2: Vec<f64> = a2.iter().zip(&mask2).map(|(a, m)| a * m).collect();

        let mut z3 = vec![0.0; b * c];
        matmul(&h2, b, u2, &self.output.w, c, &mut z3);
        for i in 0..b {
            for j in 0..c {
                z3[i * c + j] += self.output.b[j];
            }
        }
        softmax_rows(&mut z3, b, c);

        Ok(ForwardCache {
            input: batch.to_vec(),
            batch: b,
            a1,
            a2,
            mask1,
            mask2,
            h1,
            h2,
            probabilities: z3,
        })
    }

    /// Exact gradients of the mean categorical cross-entropy with the
    /// dropout masks held fixed from the forward pass.
    pub fn backward(&self, cache: &ForwardCache, labels: &[f64]) -> Gradients {
        let b = cache.batch;
        let (in_dim, u1, u2, c) = (
            self.in_dim(),
            self.layer1.out_dim,
            self.layer2.out_dim,
            self.output.out_dim,
        );
        assert_eq!(labels.len(), b * c, "one-hot labels must match the batch");

        // softmax + cross-entropy: dz = (p - y) / batch
        let dz3: Vec<f64> = cache
            .probabilities
            .iter()
            .zip(labels)
            .map(|(p, y)| (p - y) / b as f64)
            .collect();

        let mut w3 = vec![0.0; u2 * c];
        matmul_tn(&cache.h2, b, u2, &dz3, c, &mut w3);
        let b3 = column_sums(&dz3, b, c);

        let mut dh2 = vec![0.0; b * u2];
        matmul_nt(&dz3, b, c, &self.output.w, u2, &mut dh2);
        let dz2: Vec<f64> = (0..b * u2)
            .map(|i| {
                let relu_grad = if cache.a2[i] > 0.0 { 1.0 } else { 0.0 };
                dh2[i] * cache.mask2[i] * relu_grad
            })
            .collect();

        let mut w2 = vec![0.0; u1 * u2];
        matmul_tn(&cache.h1, b, u1, &dz2, u2, &mut w2);
        let b2 = column_sums(&dz2, b, u2);

        let mut dh1 = vec![0.0; b * u1];
        matmul_nt(&dz2, b, u2, &self.layer2.w, u1, &mut dh1);
        let dz1: Vec<f64> = (0..b * u1)
            .map(|i| {
                let relu_grad = if cache.a1[i] > 0.0 { 1.0 } else { 0.0 };
                dh1[i] * cache.mask1[i] * relu_grad
            })
            .collect();

        let mut w1 = vec![0.0; in_dim * u1];
        matmul_tn(&cache.input, b, in_dim, &dz1, u1, &mut w1);
        let b1 = column_sums(&dz1, b, u1);

        Gradients {
            w1,
            b1,
            w2,
            b2,
            w3,
            b3,
        }
    }

    /// One RMSProp update: `v <- rho v + (1-rho) g^2`,
    /// `w <- w - lr g / (sqrt(v) + eps)`.
    pub fn rmsprop_step(&mut self, grads: &Gradients, lr: f64, rho: f64) {
        let update = |w: &mut [f64], v: &mut [f64], g: &[f64]| {
            for i in 0..w.len() {
                v[i] = rho * v[i] + (1.0 - rho) * g[i] * g[i];
                w[i] -= lr * g[i] / (v[i].sqrt() + RMSPROP_EPS);
            }
        };
        update(&mut self.layer1.w, &mut self.layer1.v_w, &grads.w1);
        update(&mut self.layer1.b, &mut self.layer1.v_b, &grads.b1);
        update(&mut self.layer2.w, &mut self.layer2.v_w, &grads.w2);
        update(&mut self.layer2.b, &mut self.layer2.v_b, &grads.b2);
        update(&mut self.output.w, &mut self.output.v_w, &grads.w3);
        update(&mut self.output.b, &mut self.output.v_b, &grads.b3);
    }

    /// Loss and accuracy over the given sample indices, in infer mode.
    pub fn evaluate(&self, data: &Dataset, idx: &[usize]) -> (f64, f64) {
        let mut features = Vec::with_capacity(idx.len() * data.p);
        let mut labels = Vec::with_capacity(idx.len() * data.classes);
        for &i in idx {
            features.extend_from_slice(data.feature_row(i));
            labels.extend_from_slice(data.label_row(i));
        }
        let cache = self.forward(&features, Mode::Infer, 0).unwrap();
        let loss = loss_cce(&cache.probabilities, &labels, data.classes);
        let c = data.classes;
        let correct = idx
            .iter()
            .enumerate()
            .filter(|(row, &i)| {
                let probs = &cache.probabilities[row * c..(row + 1) * c];
                let argmax = probs
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                    .unwrap()
                    .0;
                argmax == data.targets[i]
            })
            .count();
        (loss, correct as f64 / idx.len() as f64)
    }
}

fn add_bias_relu(z: &mut [f64], bias: &[f64], rows: usize, cols: usize) {
    for i in 0..rows {
        for j in 0..cols {
            let v = z[i * cols + j] + bias[j];
            z[i * cols + j] = if v > 0.0 { v } else { 0.0 };
        }
    }
}

fn softmax_rows(z: &mut [f64], rows: usize, cols: usize) {
    for i in 0..rows {
        let row = &mut z[i * cols..(i + 1) * cols];
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = (*v - max).exp();
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
}

fn column_sums(m: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut out = vec![0.0; cols];
    for i in 0..rows {
        for j in 0..cols {
            out[j] += m[i * cols + j];
        }
    }
    out
}

/// Mean categorical cross-entropy with probabilities clipped to
/// `[1e-7, 1 - 1e-7]`.
pub fn loss_cce(probabilities: &[f64], one_hot: &[f64], classes: usize) -> f64 {
    let rows = one_hot.len() / classes;
    let mut total = 0.0;
    for i in 0..rows {
        for j in 0..classes {
            if one_hot[i * classes + j] == 1.0 {
                let p = probabilities[i * classes + j].clamp(PROB_CLIP, 1.0 - PROB_CLIP);
                total -= p.ln();
            }
        }
    }
    total / rows as f64
}

/// Per-epoch training curves; each vector has one entry per epoch.
#[derive(Debug, Clone, Default)]
pub struct History {
    pub train_loss: Vec<f64>,
    pub train_acc: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub val_acc: Vec<f64>,
}

/// Trains a fresh network: seeded He init, one seeded shuffle per epoch,
/// full passes in `batch_size` chunks. Aborts on a non-finite loss.
pub fn train(
    config: &MlpConfig,
    data: &Dataset,
    train_idx: &[usize],
    val_idx: &[usize],
    seed: u64,
) -> Result<(Network, History), MlpError> {
    config.validate()?;
    assert!(!train_idx.is_empty() && !val_idx.is_empty());
    let mut net = Network::with_classes(data.p, config, data.classes, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SHUFFLE_TAG);
    let mut history = History::default();
    let mut order: Vec<usize> = train_idx.to_vec();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let mut features = Vec::with_capacity(chunk.len() * data.p);
            let mut labels = Vec::with_capacity(chunk.len() * data.classes);
            for &i in chunk {
                features.extend_from_slice(data.feature_row(i));
                labels.extend_from_slice(data.label_row(i));
            }
            let dropout_seed = rng.random::<u64>();
            let cache = net.forward(&features, Mode::Train, dropout_seed)?;
            let grads = net.backward(&cache, &labels);
            net.rmsprop_step(&grads, config.lr, config.rho);
        }
        let (train_loss, train_acc) = net.evaluate(data, train_idx);
        let (val_loss, val_acc) = net.evaluate(data, val_idx);
        if !train_loss.is_finite() || !val_loss.is_finite() {
            return Err(MlpError::Diverged(epoch));
        }
        history.train_loss.push(train_loss);
        history.train_acc.push(train_acc);
        history.val_loss.push(val_loss);
        history.val_acc.push(val_acc);
    }
    Ok((net, history))
}

/// Separates the shuffle stream from the weight-init stream.
const SHUFFLE_TAG: u64 = 0x73687566666c65;

impl MlpConfig {
    /// Binds a typed configuration to the eight tunables by parameter name.
    pub fn from_config(
        space: &crate::space::SearchSpace,
        config: &crate::space::Config,
    ) -> Result<MlpConfig, MlpError> {
        let mut out = MlpConfig::default();
        let mut seen = 0;
        for (spec, value) in space.params.iter().zip(config) {
            let float = || match value {
                crate::space::ParamValue::Float(v) => Ok(*v),
                other => Err(MlpError::InvalidConfig(format!(
                    "{} must be numeric, got {other}",
                    spec.name
                ))),
            };
            let int = || match value {
                crate::space::ParamValue::Int(v) if *v >= 1 => Ok(*v as usize),
                other => Err(MlpError::InvalidConfig(format!(
                    "{} must be a positive integer, got {other}",
                    spec.name
                ))),
            };
            match spec.name.as_str() {
                "dropout1" => out.dropout1 = float()?,
                "dropout2" => out.dropout2 = float()?,
                "units1" => out.units1 = int()?,
                "units2" => out.units2 = int()?,
                "lr" => out.lr = float()?,
                "epochs" => out.epochs = int()?,
                "batch_size" => out.batch_size = int()?,
                "rho" => out.rho = float()?,
                other => {
                    return Err(MlpError::InvalidConfig(format!(
                        "unknown network parameter `{other}`"
                    )))
                }
            }
            seen += 1;
        }
        if seen != 8 {
            return Err(MlpError::InvalidConfig(format!(
                "network space needs all 8 tunables, got {seen}"
            )));
        }
        out.validate()?;
        Ok(out)
    }
}

/// Tuner objective backed by the bundled network: every evaluation trains a
/// fresh model on the fixed train split and reports the final-epoch metrics.
pub struct MlpObjective {
    pub space: crate::space::SearchSpace,
    pub data: Dataset,
    pub train_idx: Vec<usize>,
    pub val_idx: Vec<usize>,
}

impl MlpObjective {
    /// Splits the bundled digits with the given validation fraction.
    pub fn demo(
        space: crate::space::SearchSpace,
        validation_fraction: f64,
        split_seed: u64,
    ) -> Result<MlpObjective, crate::evaluation::EvalError> {
        let data = crate::data::load_demo_digits().expect("bundled dataset");
        let (train_idx, val_idx) = crate::evaluation::split_train_val(
            data.n,
            &crate::evaluation::SplitSpec {
                validation_fraction,
                seed: split_seed,
            },
        )?;
        Ok(MlpObjective {
            space,
            data,
            train_idx,
            val_idx,
        })
    }
}

impl crate::evaluation::Objective for MlpObjective {
    fn evaluate(&self, config: &crate::space::Config, seed: u64) -> crate::evaluation::EvalRecord {
        use crate::evaluation::{EvalRecord, EvalStatus};
        let started = std::time::Instant::now();
        let mlp_config = match MlpConfig::from_config(&self.space, config) {
            Ok(c) => c,
            Err(_) => {
                return EvalRecord::failure(EvalStatus::Failed, started.elapsed().as_secs_f64(), seed)
            }
        };
        match train(&mlp_config, &self.data, &self.train_idx, &self.val_idx, seed) {
            Ok((_, history)) => EvalRecord {
                train_loss: history.train_loss.last().copied(),
                train_acc: history.train_acc.last().copied(),
                val_loss: history.val_loss.last().copied(),
                val_acc: history.val_acc.last().copied(),
                test_loss: None,
                test_acc: None,
                runtime: started.elapsed().as_secs_f64(),
                seed,
                status: EvalStatus::Ok,
            },
            Err(_) => EvalRecord::failure(EvalStatus::Failed, started.elapsed().as_secs_f64(), seed),
        }
    }
}

/// Fixed-configuration trainer for the cross-validation and test protocols.
pub struct MlpTrainer {
    pub config: MlpConfig,
    pub seed: u64,
}

impl crate::evaluation::Trainer for MlpTrainer {
    type Model = Network;

    fn fit(
        &self,
        data: &Dataset,
        train_idx: &[usize],
    ) -> Result<Network, crate::evaluation::EvalError> {
        // Validation metrics are not needed here; evaluate on the training
        // side to keep the history well-formed.
        let (net, _) = train(&self.config, data, train_idx, train_idx, self.seed)
            .map_err(|e| crate::evaluation::EvalError::TrainerFailed(e.to_string()))?;
        Ok(net)
    }

    fn per_sample_loss(&self, model: &Network, data: &Dataset, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .map(|&i| {
                let cache = model
                    .forward(data.feature_row(i), Mode::Infer, 0)
                    .expect("feature width matches");
                loss_cce(&cache.probabilities, data.label_row(i), data.classes)
            })
            .collect()
    }

    fn accuracy(&self, model: &Network, data: &Dataset, idx: &[usize]) -> f64 {
        model.evaluate(data, idx).1
    }
}
