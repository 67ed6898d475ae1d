//! Two-layer graph convolutional network with hand-written gradients, and
//! the GCN → LLE → label propagation pipeline.
//!
//! The network computes
//!
//! ```text
//! H1     = ReLU(P · X · Θ¹)
//! logits = P · H1 · Θ²
//! probs  = softmax(logits)            (row-wise)
//! ```
//!
//! where `P` is a propagation operator built from a [`FilterSpec`]. Training
//! minimizes the masked mean cross-entropy plus an L2 penalty, with dropout on
//! `X` and `H1`.

use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::{self, Graph, LaplacianForm, LaplacianKind};
use crate::labelprop::{self, LabelMatrix};
use crate::linalg::{self, DenseMatrix, SparseMatrix};
use crate::spectral::{ApplyMode, FilterKind, FilterSpec};
use crate::weights::{self, NeighborhoodMap};

/// Linear propagation operator `P` together with its transpose action.
#[derive(Debug, Clone)]
pub enum Propagation {
    /// `M^k` for a sparse `M`.
    Power { m: SparseMatrix, k: usize },
    /// Materialized dense operator.
    Dense(DenseMatrix),
    /// Truncated series `x ↦ s_t / (1+η)` with `s_{i+1} = x + c·M·s_i`,
    /// `s_0 = 0`.
    Series { m: SparseMatrix, c: f64, scale: f64, steps: usize },
}

impl Propagation {
    pub fn apply(&self, x: &DenseMatrix) -> DenseMatrix {
        match self {
            Propagation::Power { m, k } => (0..*k).fold(x.clone(), |y, _| m.mul_dense(&y)),
            Propagation::Dense(p) => p * x,
            Propagation::Series { m, c, scale, steps } => series(m, *c, *scale, *steps, x),
        }
    }

    pub fn apply_transpose(&self, x: &DenseMatrix) -> DenseMatrix {
        match self {
            Propagation::Power { m, k } => {
                let mt = m.transpose();
                (0..*k).fold(x.clone(), |y, _| mt.mul_dense(&y))
            }
            Propagation::Dense(p) => p.tr_mul(x),
            Propagation::Series { m, c, scale, steps } => series(&m.transpose(), *c, *scale, *steps, x),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Propagation::Power { m, .. } | Propagation::Series { m, .. } => m.nrows(),
            Propagation::Dense(p) => p.nrows(),
        }
    }

    /// Dense matrix of the operator, for inspection and tests.
    pub fn to_dense(&self) -> DenseMatrix {
        let n = self.node_count();
        self.apply(&DenseMatrix::identity(n, n))
    }
}

fn series(m: &SparseMatrix, c: f64, scale: f64, steps: usize, x: &DenseMatrix) -> DenseMatrix {
    let mut acc = DenseMatrix::zeros(x.nrows(), x.ncols());
    for _ in 0..steps {
        acc = x + m.mul_dense(&acc) * c;
    }
    acc * scale
}

/// Builds the propagation operator of a filter.
///
/// `ApplyMode::Direct` materializes `(I + ηL)⁻¹` for the AR filter (through
/// Cholesky when `L` is symmetric, LU otherwise); `ApplyMode::Iterative` uses
/// the truncated series instead. Residual and RNM filters stay sparse.
pub fn propagation_matrix(g: &Graph, spec: &FilterSpec, mode: ApplyMode) -> Result<Propagation> {
    spec.validate()?;
    let n = g.node_count();
    let l = graph::laplacian(g, spec.laplacian)?;
    let eye = SparseMatrix::identity(n);
    Ok(match (spec.kind, mode) {
        (FilterKind::Residual { eta }, _) => Propagation::Power {
            m: eye.add_scaled(1.0, &l, -eta),
            k: 1,
        },
        (FilterKind::Renormalized { k }, _) => Propagation::Power {
            m: eye.add_scaled(1.0, &l, -1.0),
            k,
        },
        (FilterKind::AutoRegressive { eta }, ApplyMode::Iterative { steps }) => Propagation::Series {
            m: eye.add_scaled(1.0, &l, -1.0),
            c: eta / (1.0 + eta),
            scale: 1.0 / (1.0 + eta),
            steps: steps.unwrap_or_else(|| FilterSpec::default_ar_steps(eta)),
        },
        (FilterKind::AutoRegressive { eta }, ApplyMode::Direct) => {
            if n > linalg::DENSE_EIGEN_CAP {
                return Err(Error::TooLarge { n, cap: linalg::DENSE_EIGEN_CAP });
            }
            let system = eye.add_scaled(1.0, &l, eta).to_dense();
            if linalg::is_symmetric(&system, 1e-12) {
                let chol = system
                    .cholesky()
                    .ok_or_else(|| Error::NotPositiveDefinite("I + ηL".into()))?;
                Propagation::Dense(chol.inverse())
            } else {
                Propagation::Dense(linalg::solve(&system, &DenseMatrix::identity(n, n), "I + ηL")?)
            }
        }
    })
}

/// Direct operator when it fits the dense limit, the truncated series
/// otherwise.
pub fn default_propagation(g: &Graph, spec: &FilterSpec) -> Result<Propagation> {
    let mode = if g.node_count() <= linalg::DENSE_EIGEN_CAP {
        ApplyMode::Direct
    } else {
        ApplyMode::Iterative { steps: None }
    };
    propagation_matrix(g, spec, mode)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GcnModel {
    /// `d × h`
    pub theta1: DenseMatrix,
    /// `h × c`
    pub theta2: DenseMatrix,
    pub spec: FilterSpec,
    /// Seed of the Glorot initialization.
    pub init_seed: u64,
}

impl GcnModel {
    /// Glorot-uniform initialization, `U(−r, r)` with `r = √(6/(fan_in + fan_out))`.
    pub fn glorot(d: usize, h: usize, c: usize, spec: FilterSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut init = |rows: usize, cols: usize| {
            let r = (6.0 / (rows + cols) as f64).sqrt();
            DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-r..=r))
        };
        let theta1 = init(d, h);
        let theta2 = init(h, c);
        Self {
            theta1,
            theta2,
            spec,
            init_seed: seed,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.theta1.nrows(), self.theta1.ncols(), self.theta2.ncols())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Optimizer {
    Adam,
    Sgd,
}

/// Parameters covered by the L2 penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayScope {
    FirstLayer,
    AllLayers,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub weight_decay: f64,
    pub decay_scope: DecayScope,
    pub dropout: f64,
    pub hidden: usize,
    pub epochs: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            weight_decay: 5e-4,
            decay_scope: DecayScope::FirstLayer,
            dropout: 0.5,
            hidden: 16,
            epochs: 200,
            seed: 0,
            optimizer: Optimizer::Adam,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || !self.lr.is_finite() {
            return Err(Error::param("lr", "must be finite and > 0"));
        }
        if !(self.weight_decay >= 0.0) || !self.weight_decay.is_finite() {
            return Err(Error::param("weight_decay", "must be finite and >= 0"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::param("dropout", "must lie in [0, 1)"));
        }
        if self.hidden == 0 {
            return Err(Error::param("hidden", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Accuracy {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: Accuracy,
    /// Training loss per epoch, including the penalty.
    pub loss_curve: Vec<f64>,
    /// Epoch (0-based) whose parameters were kept.
    pub best_epoch: Option<usize>,
}

/// Fraction of masked nodes whose prediction matches; `0` on an empty mask.
pub fn masked_accuracy(pred: &[usize], labels: &[usize], mask: &[bool]) -> f64 {
    let (hits, total) = pred
        .iter()
        .zip(labels)
        .zip(mask)
        .filter(|(_, &m)| m)
        .fold((0usize, 0usize), |(h, t), ((p, l), _)| (h + usize::from(p == l), t + 1));
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Forward {
    pub h1: DenseMatrix,
    pub logits: DenseMatrix,
    pub probs: DenseMatrix,
}

fn softmax_rows(z: &DenseMatrix) -> DenseMatrix {
    let mut p = z.clone();
    for mut row in p.row_iter_mut() {
        let top = row.max();
        row.apply(|v| *v = (*v - top).exp());
        let total = row.sum();
        row /= total;
    }
    p
}

fn check_shapes(model: &GcnModel, p: &Propagation, x: &DenseMatrix) -> Result<()> {
    if x.ncols() != model.theta1.nrows() || model.theta1.ncols() != model.theta2.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "features have {} columns, Θ¹ is {}x{}, Θ² is {}x{}",
            x.ncols(),
            model.theta1.nrows(),
            model.theta1.ncols(),
            model.theta2.nrows(),
            model.theta2.ncols()
        )));
    }
    if p.node_count() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "operator covers {} nodes, features have {} rows",
            p.node_count(),
            x.nrows()
        )));
    }
    Ok(())
}

/// Inverted dropout mask with keep-scale `1/(1−rate)`.
fn dropout_mask(rows: usize, cols: usize, rate: f64, rng: &mut ChaCha8Rng) -> DenseMatrix {
    let keep = 1.0 / (1.0 - rate);
    DenseMatrix::from_fn(rows, cols, |_, _| if rng.random::<f64>() < rate { 0.0 } else { keep })
}

struct Pass {
    x_used: Option<DenseMatrix>,
    z1: DenseMatrix,
    h1_mask: Option<DenseMatrix>,
    h1_used: DenseMatrix,
    forward: Forward,
}

fn run_forward(model: &GcnModel, p: &Propagation, x: &DenseMatrix, dropout: Option<(f64, &mut ChaCha8Rng)>) -> Pass {
    let (x_used, h1_mask, z1, h1, h1_used);
    match dropout {
        Some((rate, rng)) if rate > 0.0 => {
            let xd = x.component_mul(&dropout_mask(x.nrows(), x.ncols(), rate, rng));
            z1 = p.apply(&(&xd * &model.theta1));
            h1 = z1.map(|v| v.max(0.0));
            let mask = dropout_mask(h1.nrows(), h1.ncols(), rate, rng);
            h1_used = h1.component_mul(&mask);
            x_used = Some(xd);
            h1_mask = Some(mask);
        }
        _ => {
            z1 = p.apply(&(x * &model.theta1));
            h1 = z1.map(|v| v.max(0.0));
            h1_used = h1.clone();
            x_used = None;
            h1_mask = None;
        }
    }
    let logits = p.apply(&(&h1_used * &model.theta2));
    let probs = softmax_rows(&logits);
    Pass {
        x_used,
        z1,
        h1_mask,
        h1_used,
        forward: Forward { h1, logits, probs },
    }
}

/// Forward pass. `dropout = Some((rate, seed))` applies training-mode dropout
/// with a mask drawn from `seed`; `None` is evaluation mode.
pub fn gcn_forward(
    model: &GcnModel,
    p: &Propagation,
    x: &DenseMatrix,
    dropout: Option<(f64, u64)>,
) -> Result<Forward> {
    check_shapes(model, p, x)?;
    Ok(match dropout {
        Some((rate, seed)) => {
            if !(0.0..1.0).contains(&rate) {
                return Err(Error::param("dropout", "must lie in [0, 1)"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            run_forward(model, p, x, Some((rate, &mut rng))).forward
        }
        None => run_forward(model, p, x, None).forward,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub loss: f64,
    pub d_theta1: DenseMatrix,
    pub d_theta2: DenseMatrix,
}

fn penalty(model: &GcnModel, config: &TrainConfig) -> f64 {
    let mut sq = model.theta1.norm_squared();
    if config.decay_scope == DecayScope::AllLayers {
        sq += model.theta2.norm_squared();
    }
    config.weight_decay * sq
}

fn loss_and_grads(
    model: &GcnModel,
    p: &Propagation,
    x: &DenseMatrix,
    y: &DenseMatrix,
    mask: &[bool],
    config: &TrainConfig,
    dropout: Option<(f64, &mut ChaCha8Rng)>,
) -> Result<Gradients> {
    check_shapes(model, p, x)?;
    if y.nrows() != x.nrows() || y.ncols() != model.theta2.ncols() || mask.len() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "labels are {}x{} with a mask of {}, expected {}x{}",
            y.nrows(),
            y.ncols(),
            mask.len(),
            x.nrows(),
            model.theta2.ncols()
        )));
    }
    let count = mask.iter().filter(|&&m| m).count();
    if count == 0 {
        return Err(Error::param("mask", "training mask is empty"));
    }
    let pass = run_forward(model, p, x, dropout);
    let probs = &pass.forward.probs;
    let mut loss = 0.0;
    let mut g2 = DenseMatrix::zeros(probs.nrows(), probs.ncols());
    for (i, _) in mask.iter().enumerate().filter(|(_, &m)| m) {
        for c in 0..probs.ncols() {
            if y[(i, c)] != 0.0 {
                loss -= y[(i, c)] * probs[(i, c)].max(f64::MIN_POSITIVE).ln();
            }
            g2[(i, c)] = (probs[(i, c)] - y[(i, c)]) / count as f64;
        }
    }
    loss = loss / count as f64 + penalty(model, config);

    let back2 = p.apply_transpose(&g2);
    let mut d_theta2 = pass.h1_used.tr_mul(&back2);
    let mut d_h1 = back2 * model.theta2.transpose();
    if let Some(m) = &pass.h1_mask {
        d_h1.component_mul_assign(m);
    }
    d_h1.zip_apply(&pass.z1, |g, z| {
        if z <= 0.0 {
            *g = 0.0
        }
    });
    let back1 = p.apply_transpose(&d_h1);
    let mut d_theta1 = match &pass.x_used {
        Some(xd) => xd.tr_mul(&back1),
        None => x.tr_mul(&back1),
    };
    d_theta1 += &model.theta1 * (2.0 * config.weight_decay);
    if config.decay_scope == DecayScope::AllLayers {
        d_theta2 += &model.theta2 * (2.0 * config.weight_decay);
    }
    Ok(Gradients {
        loss,
        d_theta1,
        d_theta2,
    })
}

/// Masked mean cross-entropy plus `weight_decay·‖Θ¹‖²_F` (and `‖Θ²‖²_F` when
/// the decay scope covers all layers), with exact gradients, without dropout.
pub fn gcn_loss_and_grads(
    model: &GcnModel,
    p: &Propagation,
    x: &DenseMatrix,
    y: &DenseMatrix,
    mask: &[bool],
    config: &TrainConfig,
) -> Result<Gradients> {
    loss_and_grads(model, p, x, y, mask, config, None)
}

struct Adam {
    m: [DenseMatrix; 2],
    v: [DenseMatrix; 2],
    t: i32,
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl Adam {
    fn new(model: &GcnModel) -> Self {
        let z1 = DenseMatrix::zeros(model.theta1.nrows(), model.theta1.ncols());
        let z2 = DenseMatrix::zeros(model.theta2.nrows(), model.theta2.ncols());
        Self {
            m: [z1.clone(), z2.clone()],
            v: [z1, z2],
            t: 0,
        }
    }

    fn step(&mut self, params: [&mut DenseMatrix; 2], grads: [&DenseMatrix; 2], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        for (k, (theta, g)) in params.into_iter().zip(grads).enumerate() {
            self.m[k].zip_apply(g, |m, g| *m = ADAM_BETA1 * *m + (1.0 - ADAM_BETA1) * g);
            self.v[k].zip_apply(g, |v, g| *v = ADAM_BETA2 * *v + (1.0 - ADAM_BETA2) * g * g);
            for ((t, m), v) in theta.iter_mut().zip(self.m[k].iter()).zip(self.v[k].iter()) {
                *t -= lr * (m / c1) / ((v / c2).sqrt() + ADAM_EPS);
            }
        }
    }
}

/// Trains on `dataset.train` with a precomputed operator and keeps the
/// parameters of the epoch with the best validation accuracy (earliest on
/// ties; the last epoch when the validation mask is empty).
pub fn train_gcn_with(
    dataset: &Dataset,
    spec: &FilterSpec,
    p: &Propagation,
    config: &TrainConfig,
) -> Result<(GcnModel, Metrics)> {
    config.validate()?;
    let x = &dataset.features;
    let y = dataset.one_hot();
    let mut model = GcnModel::glorot(x.ncols(), config.hidden, dataset.class_count(), *spec, config.seed);
    check_shapes(&model, p, x)?;
    // Dropout draws from a stream separate from the initialization.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut adam = Adam::new(&model);
    let mut loss_curve = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, usize, GcnModel)> = None;
    let has_val = dataset.val.iter().any(|&m| m);
    for epoch in 0..config.epochs {
        let grads = loss_and_grads(&model, p, x, &y, &dataset.train, config, Some((config.dropout, &mut rng)))?;
        if !grads.loss.is_finite() {
            return Err(Error::NotConverged(format!("GCN training (loss became {} at epoch {epoch})", grads.loss)));
        }
        loss_curve.push(grads.loss);
        match config.optimizer {
            Optimizer::Adam => adam.step(
                [&mut model.theta1, &mut model.theta2],
                [&grads.d_theta1, &grads.d_theta2],
                config.lr,
            ),
            Optimizer::Sgd => {
                model.theta1 -= &grads.d_theta1 * config.lr;
                model.theta2 -= &grads.d_theta2 * config.lr;
            }
        }
        let val = if has_val {
            let pred = labelprop::hard_labels(&run_forward(&model, p, x, None).forward.probs);
            masked_accuracy(&pred, &dataset.labels, &dataset.val)
        } else {
            0.0
        };
        if best.as_ref().is_none_or(|(b, _, _)| val > *b || !has_val) {
            best = Some((val, epoch, model.clone()));
        }
    }
    let (best_epoch, model) = match best {
        Some((_, e, m)) => (Some(e), m),
        None => (None, model),
    };
    let accuracy = evaluate(&model, p, dataset)?;
    Ok((
        model,
        Metrics {
            accuracy,
            loss_curve,
            best_epoch,
        },
    ))
}

/// [`train_gcn_with`] using [`default_propagation`].
pub fn train_gcn(dataset: &Dataset, spec: &FilterSpec, config: &TrainConfig) -> Result<(GcnModel, Metrics)> {
    let p = default_propagation(&dataset.graph, spec)?;
    train_gcn_with(dataset, spec, &p, config)
}

/// Evaluation-mode accuracies on the dataset's three masks.
pub fn evaluate(model: &GcnModel, p: &Propagation, dataset: &Dataset) -> Result<Accuracy> {
    let pred = labelprop::hard_labels(&gcn_forward(model, p, &dataset.features, None)?.probs);
    Ok(accuracy_of(&pred, dataset))
}

fn accuracy_of(pred: &[usize], dataset: &Dataset) -> Accuracy {
    Accuracy {
        train: masked_accuracy(pred, &dataset.labels, &dataset.train),
        val: masked_accuracy(pred, &dataset.labels, &dataset.val),
        test: masked_accuracy(pred, &dataset.labels, &dataset.test),
    }
}

/// How Net1 solves the local reconstruction weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Net1Weights {
    /// Sum-to-one closed form; weights may be negative, so `αW` need not be
    /// a contraction.
    ClosedForm,
    /// Nonnegative sum-to-one weights by multiplicative updates.
    Nonnegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Net1Config {
    pub knn_k: usize,
    pub lp_alpha: f64,
    pub weights: Net1Weights,
    /// Gram regularization of the closed form.
    pub eps_reg: f64,
    /// Multiplicative-update budget of the nonnegative solver.
    pub nmf_iters: usize,
    /// Rescale class scores to equal total mass before the argmax. Without
    /// it, `α` close to 1 pulls every row towards the same score vector.
    pub class_mass_normalization: bool,
}

impl Default for Net1Config {
    fn default() -> Self {
        Self {
            knn_k: 10,
            lp_alpha: 0.99,
            weights: Net1Weights::Nonnegative,
            eps_reg: weights::DEFAULT_GRAM_REGULARIZATION,
            nmf_iters: 500,
            class_mass_normalization: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Net1Output {
    pub predictions: Vec<usize>,
    pub accuracy: Accuracy,
}

/// Label propagation over locally-linear weights of the evaluation-mode
/// hidden layer of a trained model, on its `knn_k` nearest neighbours.
/// Training nodes keep their given labels.
pub fn net1_from_model(
    dataset: &Dataset,
    model: &GcnModel,
    p: &Propagation,
    config: &Net1Config,
) -> Result<Net1Output> {
    let h1 = gcn_forward(model, p, &dataset.features, None)?.h1;
    let n = dataset.node_count();
    let mut predictions = if n > 1 {
        let k = config.knn_k.min(n - 1);
        let nbrs = NeighborhoodMap::knn(&h1, k)?;
        let w = match config.weights {
            Net1Weights::ClosedForm => weights::lle_weights_closed_form(&h1, &nbrs, config.eps_reg)?,
            Net1Weights::Nonnegative => {
                // Penalty on the sum-to-one constraint at the scale of the
                // embedding, so the result does not depend on its units.
                let mu = (h1.norm_squared() / n as f64).max(f64::MIN_POSITIVE);
                weights::lle_weights_nmf(&h1, &nbrs, mu, config.nmf_iters, 1e-9)?.0
            }
        };
        let labels: Vec<Option<usize>> = (0..n)
            .map(|i| dataset.train[i].then_some(dataset.labels[i]))
            .collect();
        let y = LabelMatrix::from_labels(&labels, dataset.class_count())?;
        let f = labelprop::lp_closed_form(&w, &y, config.lp_alpha)?;
        if config.class_mass_normalization {
            labelprop::hard_labels(&labelprop::class_mass_normalize(&f))
        } else {
            labelprop::hard_labels(&f)
        }
    } else {
        vec![0; n]
    };
    for i in 0..n {
        if dataset.train[i] {
            predictions[i] = dataset.labels[i];
        }
    }
    let accuracy = accuracy_of(&predictions, dataset);
    Ok(Net1Output {
        predictions,
        accuracy,
    })
}

/// Trains a GCN, then runs [`net1_from_model`] on it. Returns the GCN metrics
/// alongside the pipeline output.
pub fn net1_pipeline(
    dataset: &Dataset,
    spec: &FilterSpec,
    train: &TrainConfig,
    config: &Net1Config,
) -> Result<(Metrics, Net1Output)> {
    let p = default_propagation(&dataset.graph, spec)?;
    let (model, metrics) = train_gcn_with(dataset, spec, &p, train)?;
    let out = net1_from_model(dataset, &model, &p, config)?;
    Ok((metrics, out))
}

const CHECKPOINT_MAGIC: &[u8; 8] = b"LAPSSLGC";
const CHECKPOINT_VERSION: u32 = 1;
const CHECKPOINT_HEADER: usize = 8 + 4 + 3 * 8 + 1 + 8 + 1 + 8 + 8;
/// Largest parameter count accepted when decoding.
pub const CHECKPOINT_MAX_PARAMS: usize = 1 << 28;

/// Flat little-endian encoding: magic, version, `d, h, c`, filter kind,
/// filter parameter, Laplacian form, γ, init seed, then Θ¹ and Θ² row-major.
pub fn encode_checkpoint(model: &GcnModel) -> Vec<u8> {
    let (d, h, c) = model.dims();
    let mut out = Vec::with_capacity(CHECKPOINT_HEADER + 8 * (d * h + h * c));
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for v in [d, h, c] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    let (kind, param) = match model.spec.kind {
        FilterKind::AutoRegressive { eta } => (0u8, eta),
        FilterKind::Residual { eta } => (1, eta),
        FilterKind::Renormalized { k } => (2, k as f64),
    };
    out.push(kind);
    out.extend_from_slice(&param.to_le_bytes());
    out.push(match model.spec.laplacian.form {
        LaplacianForm::Unnormalized => 0,
        LaplacianForm::SymNormalized => 1,
        LaplacianForm::RandomWalk => 2,
    });
    out.extend_from_slice(&model.spec.laplacian.self_loop_gamma.to_le_bytes());
    out.extend_from_slice(&model.init_seed.to_le_bytes());
    for theta in [&model.theta1, &model.theta2] {
        for row in theta.row_iter() {
            for v in row.iter() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    out
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos.checked_add(N).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let out = self.bytes[self.pos..end].try_into().expect("slice length matches");
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<GcnModel> {
    let mut cur = Cursor { bytes, pos: 0 };
    if &cur.take::<8>()? != CHECKPOINT_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(cur.take()?);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = usize::try_from(cur.u64()?).map_err(|_| Error::Format("dimension overflows usize".into()))?;
    }
    let [d, h, c] = dims;
    let params = d
        .checked_mul(h)
        .and_then(|a| h.checked_mul(c).and_then(|b| a.checked_add(b)))
        .filter(|&p| p <= CHECKPOINT_MAX_PARAMS)
        .ok_or_else(|| Error::Format(format!("implausible dimensions {d}x{h}x{c}")))?;
    let kind = cur.u8()?;
    let param = cur.f64()?;
    let kind = match kind {
        0 => FilterKind::AutoRegressive { eta: param },
        1 => FilterKind::Residual { eta: param },
        2 => {
            if !(param.is_sign_positive() && param.fract() == 0.0 && param <= u32::MAX as f64) {
                return Err(Error::Format(format!("invalid propagation power {param}")));
            }
            FilterKind::Renormalized { k: param as usize }
        }
        other => return Err(Error::Format(format!("unknown filter kind {other}"))),
    };
    let form = match cur.u8()? {
        0 => LaplacianForm::Unnormalized,
        1 => LaplacianForm::SymNormalized,
        2 => LaplacianForm::RandomWalk,
        other => return Err(Error::Format(format!("unknown Laplacian form {other}"))),
    };
    let gamma = cur.f64()?;
    let spec = FilterSpec {
        kind,
        laplacian: LaplacianKind {
            form,
            self_loop_gamma: gamma,
        },
    };
    spec.validate().map_err(|e| Error::Format(e.to_string()))?;
    let init_seed = cur.u64()?;
    if bytes.len() - cur.pos != params * 8 {
        return Err(Error::Format(format!(
            "expected {} parameter bytes, found {}",
            params * 8,
            bytes.len() - cur.pos
        )));
    }
    let mut read = |rows: usize, cols: usize| -> Result<DenseMatrix> {
        let mut m = DenseMatrix::zeros(rows, cols);
        for r in 0..rows {
            for col in 0..cols {
                let v = cur.f64()?;
                if !v.is_finite() {
                    return Err(Error::Format("non-finite parameter".into()));
                }
                m[(r, col)] = v;
            }
        }
        Ok(m)
    };
    let theta1 = read(d, h)?;
    let theta2 = read(h, c)?;
    Ok(GcnModel {
        theta1,
        theta2,
        spec,
        init_seed,
    })
}

pub fn save_checkpoint(model: &GcnModel, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode_checkpoint(model))?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<GcnModel> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_checkpoint(&bytes)
}
