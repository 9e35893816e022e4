//! Position-recovery toy tasks on residue graphs.
//!
//! * APR: classify every residue's 0-based index in its chain (reported as
//!   percent accuracy).
//! * RPE: regress every residue's sequence distance to the nearer terminus,
//!   `min(i, N − 1 − i)` (reported as RMSE in positions).
//!
//! Training is single-threaded Adam with gradients accumulated over
//! `batch_size` graphs in a fixed order, so a run is reproducible from its
//! seeds.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::egnn::{EgnnConfig, EgnnError, EgnnModel, Head, OutputGrad};
use crate::embedio::{synth_positional, EmbedError, PositionalKind};
use crate::graphbuild::{self, attach_features, FusionMode, GraphError, GraphMode, ResidueGraph};
use crate::scalar::Real;
use crate::structio::{Chain, Residue, Structure, AMINO_ACIDS};

/// Class budget of the APR head.
pub const DEFAULT_L_MAX: usize = 1024;
/// Cα–Cα spacing of synthetic chains, Å.
pub const CA_SPACING: f64 = 3.8;
/// Minimum distance between non-consecutive synthetic residues, Å.
pub const MIN_NONBONDED: f64 = 3.0;

/// Desk-scale toy protocol: message-passing layers, hidden width, epochs.
pub const TOY_LAYERS: usize = 1;
pub const TOY_HIDDEN: usize = 32;
pub const TOY_EPOCHS: usize = 10;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("chain of {n} residues exceeds the class budget {l_max}")]
    ChainTooLong { n: usize, l_max: usize },
    #[error("could not grow a self-avoiding chain of {n} residues")]
    GenerationFailed { n: usize },
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] EgnnError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Embedding(#[from] EmbedError),
}

pub type Result<T> = std::result::Result<T, TrainError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TaskKind {
    Apr,
    Rpe,
}

impl std::str::FromStr for TaskKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "apr" => Ok(Self::Apr),
            "rpe" => Ok(Self::Rpe),
            other => Err(format!("unknown task {other:?} (expected apr or rpe)")),
        }
    }
}

/// APR labels: node `i` has class `i`.
pub fn label_apr<T: Real>(g: &ResidueGraph<T>, l_max: usize) -> Result<Vec<usize>> {
    if g.n() > l_max {
        return Err(TrainError::ChainTooLong { n: g.n(), l_max });
    }
    Ok((0..g.n()).collect())
}

/// RPE labels: distance of node `i` to the nearer chain end.
pub fn label_rpe<T: Real>(g: &ResidueGraph<T>) -> Vec<T> {
    let n = g.n();
    (0..n).map(|i| T::from_usize_lossy(i.min(n - 1 - i))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Labels<T> {
    Apr(Vec<Vec<usize>>),
    Rpe(Vec<Vec<T>>),
}

#[derive(Debug, Clone)]
pub struct ToyTask<T> {
    pub kind: TaskKind,
    pub graphs: Vec<ResidueGraph<T>>,
    pub labels: Labels<T>,
    /// Number of input graphs dropped because they were longer than `l_max`.
    pub skipped: usize,
}

impl<T: Real> ToyTask<T> {
    /// Builds labels for every graph; APR drops graphs longer than `l_max`.
    pub fn new(kind: TaskKind, graphs: Vec<ResidueGraph<T>>, l_max: usize) -> Self {
        match kind {
            TaskKind::Apr => {
                let mut kept = Vec::with_capacity(graphs.len());
                let mut labels = Vec::with_capacity(graphs.len());
                let mut skipped = 0;
                for g in graphs {
                    match label_apr(&g, l_max) {
                        Ok(l) => {
                            labels.push(l);
                            kept.push(g);
                        }
                        Err(e) => {
                            log::warn!("skipping graph: {e}");
                            skipped += 1;
                        }
                    }
                }
                Self {
                    kind,
                    graphs: kept,
                    labels: Labels::Apr(labels),
                    skipped,
                }
            }
            TaskKind::Rpe => {
                let labels = graphs.iter().map(label_rpe).collect();
                Self {
                    kind,
                    graphs,
                    labels: Labels::Rpe(labels),
                    skipped: 0,
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Control task: labels permuted independently within each graph.
    pub fn with_shuffled_labels(mut self, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match &mut self.labels {
            Labels::Apr(ls) => ls.iter_mut().for_each(|l| l.shuffle(&mut rng)),
            Labels::Rpe(ls) => ls.iter_mut().for_each(|l| l.shuffle(&mut rng)),
        }
        self
    }

    pub fn mean_chain_length(&self) -> f64 {
        if self.graphs.is_empty() {
            return 0.0;
        }
        self.graphs.iter().map(|g| g.n() as f64).sum::<f64>() / self.graphs.len() as f64
    }
}

/// A self-avoiding random walk of Cα atoms with uniformly random residue types.
pub fn synth_chain(n: usize, seed: u64) -> Result<Structure> {
    if n < 2 {
        return Err(TrainError::Config(format!("synthetic chains need n >= 2, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let min2 = MIN_NONBONDED * MIN_NONBONDED;
    'restart: for _ in 0..64 {
        let mut pts: Vec<[f64; 3]> = vec![[0.0; 3]];
        while pts.len() < n {
            let prev = *pts.last().expect("non-empty");
            let mut placed = false;
            for _ in 0..256 {
                let dir = random_unit(&mut rng);
                let cand = [
                    prev[0] + CA_SPACING * dir[0],
                    prev[1] + CA_SPACING * dir[1],
                    prev[2] + CA_SPACING * dir[2],
                ];
                let clash = pts[..pts.len() - 1]
                    .iter()
                    .any(|p| crate::linalg::dist2(p, &cand) < min2);
                if !clash {
                    pts.push(cand);
                    placed = true;
                    break;
                }
            }
            if !placed {
                continue 'restart;
            }
        }
        let residues = pts
            .into_iter()
            .enumerate()
            .map(|(i, ca)| Residue {
                res_seq: i as i32 + 1,
                icode: None,
                aa: AMINO_ACIDS[rng.gen_range(0..AMINO_ACIDS.len())],
                ca,
            })
            .collect();
        return Ok(Structure {
            id: format!("SYN{seed}"),
            chains: vec![Chain {
                chain_id: 'A',
                residues,
            }],
        });
    }
    Err(TrainError::GenerationFailed { n })
}

fn random_unit(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let r2: f64 = v.iter().map(|x| x * x).sum();
        if r2 > 1e-6 && r2 <= 1.0 {
            let r = r2.sqrt();
            return v.map(|x| x / r);
        }
    }
}

/// How graphs are wired when built from structures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub mode: GraphMode,
    pub k: usize,
    pub cutoff: f64,
}

impl Default for GraphSpec {
    fn default() -> Self {
        Self {
            mode: GraphMode::Knn,
            k: graphbuild::DEFAULT_K,
            cutoff: graphbuild::DEFAULT_CUTOFF,
        }
    }
}

/// `count` synthetic chains of `length` residues, one derived seed per chain.
pub fn synth_dataset<T: Real>(count: usize, length: usize, seed: u64, spec: GraphSpec) -> Result<Vec<ResidueGraph<T>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let s = synth_chain(length, rng.gen())?;
            Ok(graphbuild::build(&s, spec.mode, spec.k, T::lit(spec.cutoff))?)
        })
        .collect()
}

/// Replaces node features with synthetic positional embeddings of width `dim`.
pub fn with_positional_features<T: Real>(graphs: &[ResidueGraph<T>], kind: PositionalKind, dim: usize) -> Result<Vec<ResidueGraph<T>>> {
    graphs
        .iter()
        .map(|g| {
            let e = synth_positional::<T>(g.n(), dim, kind)?;
            Ok(attach_features(g, e.data(), FusionMode::Replace)?)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Graphs per optimizer step.
    pub batch_size: usize,
    pub seed: u64,
    /// Train / validation / test fractions.
    pub split: [f64; 3],
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 50,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            batch_size: 1,
            seed: 0,
            split: [0.8, 0.1, 0.1],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(TrainError::Config("epochs must be >= 1".into()));
        }
        if self.batch_size == 0 {
            return Err(TrainError::Config("batch_size must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0) {
            return Err(TrainError::Config("learning_rate must be positive".into()));
        }
        if self.split.iter().any(|f| !(0.0..=1.0).contains(f)) || (self.split.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(TrainError::Config(format!("split fractions {:?} must be in [0,1] and sum to 1", self.split)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

/// Seeded shuffle of `0..n` cut by the given fractions (rounded; test takes the remainder).
pub fn split_indices(n: usize, fractions: [f64; 3], seed: u64) -> Split {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_train = ((fractions[0] * n as f64).round() as usize).min(n);
    let n_val = ((fractions[1] * n as f64).round() as usize).min(n - n_train);
    let test = idx.split_off(n_train + n_val);
    let val = idx.split_off(n_train);
    Split { train: idx, val, test }
}

/// Adam over every parameter block of a model.
pub struct Adam<T> {
    lr: T,
    beta1: T,
    beta2: T,
    eps: T,
    t: i32,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Real> Adam<T> {
    pub fn new(model: &EgnnModel<T>, cfg: &TrainConfig) -> Self {
        let zeros: Vec<Vec<T>> = model
            .param_blocks()
            .iter()
            .map(|(_, b)| vec![T::zero(); b.len()])
            .collect();
        Self {
            lr: T::lit(cfg.learning_rate),
            beta1: T::lit(cfg.beta1),
            beta2: T::lit(cfg.beta2),
            eps: T::lit(cfg.eps),
            t: 0,
            m: zeros.clone(),
            v: zeros,
        }
    }

    pub fn step(&mut self, model: &mut EgnnModel<T>, grad: &EgnnModel<T>) {
        self.t += 1;
        let bc1 = T::one() - self.beta1.powi(self.t);
        let bc2 = T::one() - self.beta2.powi(self.t);
        let grads = grad.param_blocks();
        for (((p, (_, g)), m), v) in model
            .param_blocks_mut()
            .into_iter()
            .zip(grads)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            for k in 0..p.len() {
                m[k] = self.beta1 * m[k] + (T::one() - self.beta1) * g[k];
                v[k] = self.beta2 * v[k] + (T::one() - self.beta2) * g[k] * g[k];
                let mhat = m[k] / bc1;
                let vhat = v[k] / bc2;
                p[k] -= self.lr * mhat / (vhat.sqrt() + self.eps);
            }
        }
    }
}

/// Affine map applied to regression targets during training.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetScaling {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: TaskKind,
    /// `"accuracy_percent"` for APR, `"rmse"` for RPE.
    pub metric_name: String,
    pub test_metric: f64,
    pub val_metric: Option<f64>,
    pub train_metric: f64,
    /// Chance accuracy (APR, percent) or test-label standard deviation (RPE).
    pub test_baseline: f64,
    pub initial_train_loss: f64,
    pub train_loss: Vec<f64>,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub skipped_graphs: usize,
    pub mean_chain_length: f64,
    pub target_scaling: Option<TargetScaling>,
    pub model_config: EgnnConfig,
    pub train_config: TrainConfig,
    pub split: Split,
    pub wall_clock_seconds: f64,
}

fn log_softmax_masked<T: Real>(logits: &[T], n_classes: usize) -> (Vec<T>, T) {
    let active = &logits[..n_classes];
    let max = active.iter().copied().fold(T::neg_infinity(), T::max);
    let sum: T = active.iter().map(|&z| (z - max).exp()).sum();
    let lse = max + sum.ln();
    (active.iter().map(|&z| z - lse).collect(), lse)
}

struct Objective<'a, T> {
    task: &'a ToyTask<T>,
    scaling: Option<TargetScaling>,
}

impl<T: Real> Objective<'_, T> {
    /// Loss of one graph and its output gradient.
    fn loss_and_grad(&self, gi: usize, head: &[T], out_dim: usize) -> (T, Vec<T>) {
        let n = self.task.graphs[gi].n();
        let inv_n = T::one() / T::from_usize_lossy(n);
        let mut grad = vec![T::zero(); head.len()];
        let mut loss = T::zero();
        match &self.task.labels {
            Labels::Apr(ls) => {
                for (i, &y) in ls[gi].iter().enumerate() {
                    let row = &head[i * out_dim..(i + 1) * out_dim];
                    let (logp, _) = log_softmax_masked(row, n);
                    loss -= logp[y];
                    let g = &mut grad[i * out_dim..(i + 1) * out_dim];
                    for (c, lp) in logp.iter().enumerate() {
                        g[c] = lp.exp() * inv_n;
                    }
                    g[y] -= inv_n;
                }
            }
            Labels::Rpe(ls) => {
                let sc = self.scaling.expect("regression scaling");
                let (mu, sd) = (T::lit(sc.mean), T::lit(sc.std));
                for (i, &y) in ls[gi].iter().enumerate() {
                    let r = head[i] - (y - mu) / sd;
                    loss += r * r;
                    grad[i] = T::lit(2.0) * r * inv_n;
                }
            }
        }
        (loss * inv_n, grad)
    }
}

/// Test-set metric of a model: APR accuracy in percent or RPE RMSE in positions.
pub fn evaluate<T: Real>(model: &EgnnModel<T>, task: &ToyTask<T>, idx: &[usize], scaling: Option<TargetScaling>) -> Result<f64> {
    let mut correct = 0usize;
    let mut total = 0usize;
    let mut sq = 0.0f64;
    for &gi in idx {
        let out = model.predict(&task.graphs[gi])?;
        let n = task.graphs[gi].n();
        match &task.labels {
            Labels::Apr(ls) => {
                for (i, &y) in ls[gi].iter().enumerate() {
                    let row = &out.row(i)[..n];
                    let mut best = 0;
                    for c in 1..n {
                        if row[c] > row[best] {
                            best = c;
                        }
                    }
                    correct += usize::from(best == y);
                    total += 1;
                }
            }
            Labels::Rpe(ls) => {
                let sc = scaling.expect("regression scaling");
                for (i, &y) in ls[gi].iter().enumerate() {
                    let pred = out.head[i].as_f64() * sc.std + sc.mean;
                    let r = pred - y.as_f64();
                    sq += r * r;
                    total += 1;
                }
            }
        }
    }
    if total == 0 {
        return Err(TrainError::Config("evaluation split is empty".into()));
    }
    Ok(match task.kind {
        TaskKind::Apr => 100.0 * correct as f64 / total as f64,
        TaskKind::Rpe => (sq / total as f64).sqrt(),
    })
}

fn baseline<T: Real>(task: &ToyTask<T>, idx: &[usize]) -> f64 {
    match &task.labels {
        Labels::Apr(_) => {
            let total: usize = idx.iter().map(|&g| task.graphs[g].n()).sum();
            // expected accuracy of a uniform guess over each chain's N classes
            100.0 * idx.len() as f64 / total.max(1) as f64
        }
        Labels::Rpe(ls) => {
            let vals: Vec<f64> = idx.iter().flat_map(|&g| ls[g].iter().map(|v| v.as_f64())).collect();
            population_std(&vals)
        }
    }
}

fn population_std(vals: &[f64]) -> f64 {
    if vals.is_empty() {
        return 0.0;
    }
    let mean = vals.iter().sum::<f64>() / vals.len() as f64;
    (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64).sqrt()
}

fn mean_loss<T: Real>(model: &EgnnModel<T>, obj: &Objective<'_, T>, idx: &[usize]) -> Result<f64> {
    let mut total = 0.0;
    for &gi in idx {
        let out = model.predict(&obj.task.graphs[gi])?;
        total += obj.loss_and_grad(gi, &out.head, out.out_dim).0.as_f64();
    }
    Ok(total / idx.len().max(1) as f64)
}

/// Trains a fresh model on `task` and reports the held-out metric.
pub fn train<T: Real>(task: &ToyTask<T>, model_cfg: EgnnConfig, cfg: &TrainConfig) -> Result<(RunReport, EgnnModel<T>)> {
    train_with_split(task, model_cfg, cfg, None)
}

/// As [`train`], with an optional externally supplied split (e.g. from a manifest).
pub fn train_with_split<T: Real>(
    task: &ToyTask<T>,
    model_cfg: EgnnConfig,
    cfg: &TrainConfig,
    split: Option<Split>,
) -> Result<(RunReport, EgnnModel<T>)> {
    let started = Instant::now();
    cfg.validate()?;
    if task.is_empty() {
        return Err(TrainError::Config("task has no graphs".into()));
    }
    let in_dim = task.graphs[0].feat_dim();
    if let Some(g) = task.graphs.iter().find(|g| g.feat_dim() != in_dim) {
        return Err(TrainError::Config(format!(
            "graphs disagree on feature width ({} vs {in_dim})",
            g.feat_dim()
        )));
    }
    if model_cfg.in_dim != in_dim {
        return Err(TrainError::Config(format!(
            "model in_dim {} does not match feature width {in_dim}",
            model_cfg.in_dim
        )));
    }
    match (task.kind, model_cfg.head) {
        (TaskKind::Apr, Head::NodeClass { l_max }) => {
            if let Some(g) = task.graphs.iter().find(|g| g.n() > l_max) {
                return Err(TrainError::ChainTooLong { n: g.n(), l_max });
            }
        }
        (TaskKind::Rpe, Head::NodeRegress) => {}
        (kind, head) => {
            return Err(TrainError::Config(format!("{kind:?} cannot be trained with a {head:?} head")));
        }
    }

    let split = split.unwrap_or_else(|| split_indices(task.len(), cfg.split, cfg.seed));
    if split.train.is_empty() || split.test.is_empty() {
        return Err(TrainError::Config("train and test splits must be non-empty".into()));
    }
    let scaling = match &task.labels {
        Labels::Apr(_) => None,
        Labels::Rpe(ls) => {
            let vals: Vec<f64> = split.train.iter().flat_map(|&g| ls[g].iter().map(|v| v.as_f64())).collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let std = population_std(&vals);
            Some(TargetScaling {
                mean,
                std: if std > 0.0 { std } else { 1.0 },
            })
        }
    };
    let obj = Objective { task, scaling };

    let mut model = EgnnModel::<T>::init(model_cfg)?;
    let mut opt = Adam::new(&model, cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9_7f4a_7c15);
    let initial_train_loss = mean_loss(&model, &obj, &split.train)?;
    let mut train_loss = Vec::with_capacity(cfg.epochs);
    let mut order = split.train.clone();
    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut acc = model.zeros_like();
            for &gi in batch {
                let (out, mut trace) = model.forward(&task.graphs[gi])?;
                let (loss, g) = obj.loss_and_grad(gi, &out.head, out.out_dim);
                epoch_loss += loss.as_f64();
                model.backward_accumulate(&mut trace, &OutputGrad::head_only(g), &mut acc)?;
            }
            let inv = T::one() / T::from_usize_lossy(batch.len());
            let mut avg = model.zeros_like();
            avg.add_scaled(&acc, inv);
            opt.step(&mut model, &avg);
        }
        let mean = epoch_loss / order.len() as f64;
        log::debug!("epoch {epoch}: train loss {mean:.6}");
        train_loss.push(mean);
    }
    if !model.all_finite() {
        return Err(TrainError::Config("training diverged (non-finite parameters)".into()));
    }

    let test_metric = evaluate(&model, task, &split.test, scaling)?;
    let val_metric = if split.val.is_empty() {
        None
    } else {
        Some(evaluate(&model, task, &split.val, scaling)?)
    };
    let train_metric = evaluate(&model, task, &split.train, scaling)?;
    let report = RunReport {
        task: task.kind,
        metric_name: match task.kind {
            TaskKind::Apr => "accuracy_percent".into(),
            TaskKind::Rpe => "rmse".into(),
        },
        test_metric,
        val_metric,
        train_metric,
        test_baseline: baseline(task, &split.test),
        initial_train_loss,
        train_loss,
        n_train: split.train.len(),
        n_val: split.val.len(),
        n_test: split.test.len(),
        skipped_graphs: task.skipped,
        mean_chain_length: task.mean_chain_length(),
        target_scaling: scaling,
        model_config: model_cfg,
        train_config: cfg.clone(),
        split,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    Ok((report, model))
}
