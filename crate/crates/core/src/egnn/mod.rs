//! E(n)-equivariant graph neural network with analytic gradients.
//!
//! Each layer computes, for every edge `(i, j)`,
//!
//! ```text
//! m_ij = φ_e(h_i, h_j, ‖x_i − x_j‖², e_ij)
//! x_i' = x_i + Σ_j (x_i − x_j) · φ_x(m_ij) / (‖x_i − x_j‖ + 1)     (optional)
//! h_i' = h_i + φ_h(h_i, Σ_j m_ij)
//! ```
//!
//! where every φ is a two-layer SiLU perceptron. Scalar outputs depend on
//! coordinates only through squared distances, so they are invariant under
//! rotations, reflections and translations.
//!
//! Messages arriving at a node are summed in a canonical order (by squared
//! distance, then by message value) so that relabelling the nodes reproduces
//! the aggregated sums bit for bit.

mod backward;
mod forward;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use backward::OutputGrad;
pub use forward::{EgnnOutput, ForwardTrace};

use crate::linalg::{gemv_acc, gemv_t_acc, outer_acc};
use crate::scalar::Real;

pub const CHECKPOINT_VERSION: &str = "EGNN1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EgnnError {
    #[error("node features have width {found}, model expects {expected}")]
    DimMismatch { expected: usize, found: usize },
    #[error("forward trace was already consumed by a backward pass")]
    TraceConsumed,
    #[error("output gradient has {found} entries, expected {expected}")]
    GradShape { expected: usize, found: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, EgnnError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Head {
    /// Per-node logits over `l_max` classes.
    NodeClass { l_max: usize },
    NodeRegress,
    /// Mean-pooled node states mapped to one scalar.
    GraphRegress,
}

impl Head {
    pub fn out_dim(&self) -> usize {
        match self {
            Head::NodeClass { l_max } => *l_max,
            Head::NodeRegress | Head::GraphRegress => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EgnnConfig {
    pub n_layers: usize,
    pub hidden_dim: usize,
    pub in_dim: usize,
    pub head: Head,
    pub update_coords: bool,
    pub seed: u64,
}

impl EgnnConfig {
    /// Four layers of width 128, coordinates frozen.
    pub fn new(in_dim: usize, head: Head) -> Self {
        Self {
            n_layers: 4,
            hidden_dim: 128,
            in_dim,
            head,
            update_coords: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_layers == 0 {
            return Err(EgnnError::Config("n_layers must be >= 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(EgnnError::Config("hidden_dim must be >= 1".into()));
        }
        if self.in_dim == 0 {
            return Err(EgnnError::Config("in_dim must be >= 1".into()));
        }
        if let Head::NodeClass { l_max: 0 } = self.head {
            return Err(EgnnError::Config("l_max must be >= 1".into()));
        }
        Ok(())
    }
}

/// Fully connected layer, row-major `out_dim × in_dim` weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense<T> {
    pub in_dim: usize,
    pub out_dim: usize,
    pub w: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Real> Dense<T> {
    fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            w: vec![T::zero(); in_dim * out_dim],
            b: vec![T::zero(); out_dim],
        }
    }

    /// Weights ~ U(−1/√fan_in, 1/√fan_in), biases zero.
    fn init(in_dim: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = 1.0 / (in_dim as f64).sqrt();
        let w = (0..in_dim * out_dim).map(|_| T::lit(rng.gen_range(-bound..bound))).collect();
        Self {
            in_dim,
            out_dim,
            w,
            b: vec![T::zero(); out_dim],
        }
    }

    #[inline]
    pub(crate) fn apply(&self, x: &[T], out: &mut [T]) {
        out.copy_from_slice(&self.b);
        gemv_acc(&self.w, x, out);
    }

    /// Accumulates parameter gradients into `grad` and, if requested, the input gradient into `gx`.
    #[inline]
    pub(crate) fn backprop(&self, grad: &mut Dense<T>, x: &[T], gout: &[T], gx: Option<&mut [T]>) {
        outer_acc(&mut grad.w, gout, x);
        for (b, &g) in grad.b.iter_mut().zip(gout) {
            *b += g;
        }
        if let Some(gx) = gx {
            gemv_t_acc(&self.w, gout, gx);
        }
    }
}

/// `second(silu(first(x)))`, optionally followed by another SiLU.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    pub first: Dense<T>,
    pub second: Dense<T>,
}

impl<T: Real> Mlp<T> {
    fn init(in_dim: usize, hidden: usize, out_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        Self {
            first: Dense::init(in_dim, hidden, rng),
            second: Dense::init(hidden, out_dim, rng),
        }
    }

    fn zeros_like(&self) -> Self {
        Self {
            first: Dense::zeros(self.first.in_dim, self.first.out_dim),
            second: Dense::zeros(self.second.in_dim, self.second.out_dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams<T> {
    /// φ_e: `[h_i, h_j, d², e] → hidden`.
    pub edge: Mlp<T>,
    /// φ_x: `m_ij → scalar`, present only when coordinates are updated.
    pub coord: Option<Mlp<T>>,
    /// φ_h: `[h_i, Σ m_ij] → hidden`.
    pub node: Mlp<T>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EgnnModel<T> {
    pub config: EgnnConfig,
    pub embed: Dense<T>,
    pub layers: Vec<LayerParams<T>>,
    pub head: Mlp<T>,
}

impl<T: Real> EgnnModel<T> {
    /// Deterministic initialisation from `config.seed`.
    pub fn init(config: EgnnConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let h = config.hidden_dim;
        let embed = Dense::init(config.in_dim, h, &mut rng);
        let layers = (0..config.n_layers)
            .map(|_| LayerParams {
                edge: Mlp::init(2 * h + 2, h, h, &mut rng),
                coord: config.update_coords.then(|| Mlp::init(h, h, 1, &mut rng)),
                node: Mlp::init(2 * h, h, h, &mut rng),
            })
            .collect();
        let head = Mlp::init(h, h, config.head.out_dim(), &mut rng);
        Ok(Self {
            config,
            embed,
            layers,
            head,
        })
    }

    /// Same shapes, all parameters zero. Used as a gradient accumulator.
    pub fn zeros_like(&self) -> Self {
        Self {
            config: self.config,
            embed: Dense::zeros(self.embed.in_dim, self.embed.out_dim),
            layers: self
                .layers
                .iter()
                .map(|l| LayerParams {
                    edge: l.edge.zeros_like(),
                    coord: l.coord.as_ref().map(Mlp::zeros_like),
                    node: l.node.zeros_like(),
                })
                .collect(),
            head: self.head.zeros_like(),
        }
    }

    fn dense_blocks(&self) -> Vec<(String, &Dense<T>)> {
        let mut out = vec![("embed".to_string(), &self.embed)];
        for (k, l) in self.layers.iter().enumerate() {
            out.push((format!("layer{k}.edge.0"), &l.edge.first));
            out.push((format!("layer{k}.edge.1"), &l.edge.second));
            if let Some(c) = &l.coord {
                out.push((format!("layer{k}.coord.0"), &c.first));
                out.push((format!("layer{k}.coord.1"), &c.second));
            }
            out.push((format!("layer{k}.node.0"), &l.node.first));
            out.push((format!("layer{k}.node.1"), &l.node.second));
        }
        out.push(("head.0".to_string(), &self.head.first));
        out.push(("head.1".to_string(), &self.head.second));
        out
    }

    fn dense_blocks_mut(&mut self) -> Vec<&mut Dense<T>> {
        let mut out = vec![&mut self.embed];
        for l in &mut self.layers {
            out.push(&mut l.edge.first);
            out.push(&mut l.edge.second);
            if let Some(c) = &mut l.coord {
                out.push(&mut c.first);
                out.push(&mut c.second);
            }
            out.push(&mut l.node.first);
            out.push(&mut l.node.second);
        }
        out.push(&mut self.head.first);
        out.push(&mut self.head.second);
        out
    }

    /// Named parameter blocks (`<layer>.w` / `<layer>.b`) in a fixed order.
    pub fn param_blocks(&self) -> Vec<(String, &[T])> {
        self.dense_blocks()
            .into_iter()
            .flat_map(|(name, d)| [(format!("{name}.w"), d.w.as_slice()), (format!("{name}.b"), d.b.as_slice())])
            .collect()
    }

    /// Mutable parameter blocks in the same order as [`param_blocks`](Self::param_blocks).
    pub fn param_blocks_mut(&mut self) -> Vec<&mut [T]> {
        self.dense_blocks_mut()
            .into_iter()
            .flat_map(|d| [d.w.as_mut_slice(), d.b.as_mut_slice()])
            .collect()
    }

    pub fn bias_blocks(&self) -> Vec<&[T]> {
        self.dense_blocks().into_iter().map(|(_, d)| d.b.as_slice()).collect()
    }

    pub fn n_params(&self) -> usize {
        self.param_blocks().iter().map(|(_, b)| b.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.param_blocks().iter().all(|(_, b)| b.iter().all(|v| v.is_finite()))
    }

    /// `self += scale · other`, block by block.
    pub fn add_scaled(&mut self, other: &Self, scale: T) {
        let src: Vec<Vec<T>> = other.param_blocks().into_iter().map(|(_, b)| b.to_vec()).collect();
        for (dst, s) in self.param_blocks_mut().into_iter().zip(src) {
            for (d, v) in dst.iter_mut().zip(s) {
                *d += scale * v;
            }
        }
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            version: CHECKPOINT_VERSION.to_string(),
            config: self.config,
            blocks: self
                .param_blocks()
                .into_iter()
                .map(|(name, b)| (name, b.iter().map(|v| v.as_f64()).collect()))
                .collect(),
        }
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.version != CHECKPOINT_VERSION {
            return Err(EgnnError::Checkpoint(format!("unsupported version {:?}", ck.version)));
        }
        let mut model = Self::init(ck.config)?;
        let names: Vec<String> = model.param_blocks().into_iter().map(|(n, _)| n).collect();
        if names.len() != ck.blocks.len() {
            return Err(EgnnError::Checkpoint(format!(
                "expected {} blocks, found {}",
                names.len(),
                ck.blocks.len()
            )));
        }
        for (name, dst) in names.iter().zip(model.param_blocks_mut()) {
            let src = ck
                .blocks
                .get(name)
                .ok_or_else(|| EgnnError::Checkpoint(format!("missing block {name}")))?;
            if src.len() != dst.len() {
                return Err(EgnnError::Checkpoint(format!(
                    "block {name} has {} values, expected {}",
                    src.len(),
                    dst.len()
                )));
            }
            for (d, &s) in dst.iter_mut().zip(src) {
                if !s.is_finite() {
                    return Err(EgnnError::Checkpoint(format!("block {name} holds a non-finite value")));
                }
                *d = T::lit(s);
            }
        }
        Ok(model)
    }
}

/// Serialized model: config plus flat parameter arrays per named block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: String,
    pub config: EgnnConfig,
    pub blocks: BTreeMap<String, Vec<f64>>,
}

#[inline]
pub(crate) fn sigmoid<T: Real>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

#[inline]
pub(crate) fn silu<T: Real>(z: T) -> T {
    z * sigmoid(z)
}

#[inline]
pub(crate) fn silu_grad<T: Real>(z: T) -> T {
    let s = sigmoid(z);
    s * (T::one() + z * (T::one() - s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(seed: u64) -> EgnnConfig {
        EgnnConfig {
            n_layers: 2,
            hidden_dim: 8,
            in_dim: 5,
            head: Head::NodeClass { l_max: 7 },
            update_coords: true,
            seed,
        }
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = EgnnModel::<f64>::init(cfg(3)).unwrap();
        let b = EgnnModel::<f64>::init(cfg(3)).unwrap();
        assert_eq!(a, b);
        let c = EgnnModel::<f64>::init(cfg(4)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn biases_start_at_zero_and_weights_are_bounded() {
        let m = EgnnModel::<f64>::init(cfg(1)).unwrap();
        assert!(m.bias_blocks().iter().all(|b| b.iter().all(|&v| v == 0.0)));
        for d in m.dense_blocks().into_iter().map(|(_, d)| d) {
            let bound = 1.0 / (d.in_dim as f64).sqrt();
            assert!(d.w.iter().all(|w| w.abs() <= bound));
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let mut c = cfg(0);
        c.n_layers = 0;
        assert!(EgnnModel::<f64>::init(c).is_err());
        let mut c = cfg(0);
        c.head = Head::NodeClass { l_max: 0 };
        assert!(EgnnModel::<f64>::init(c).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = EgnnModel::<f64>::init(cfg(9)).unwrap();
        let json = serde_json::to_string(&m.to_checkpoint()).unwrap();
        let ck: Checkpoint = serde_json::from_str(&json).unwrap();
        assert_eq!(ck.version, "EGNN1");
        assert_eq!(EgnnModel::<f64>::from_checkpoint(&ck).unwrap(), m);
        let mut bad = ck.clone();
        bad.version = "EGNN0".into();
        assert!(EgnnModel::<f64>::from_checkpoint(&bad).is_err());
    }

    #[test]
    fn silu_derivative_matches_difference_quotient() {
        for z in [-3.0f64, -0.5, 0.0, 0.7, 4.0] {
            let fd = (silu(z + 1e-6) - silu(z - 1e-6)) / 2e-6;
            assert!((fd - silu_grad(z)).abs() < 1e-8);
        }
    }
}
