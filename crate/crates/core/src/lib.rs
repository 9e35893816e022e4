//! Residue graphs from protein structures, protein-language-model embeddings
//! attached as node features, an E(n)-equivariant GNN with a hand-written
//! backward pass, position-recovery toy tasks and structure-quality metrics.
//!
//! Everything numeric is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar to `f64`, which is what the command-line tool uses.

pub mod egnn;
pub mod embedio;
pub mod graphbuild;
pub mod linalg;
pub mod metrics;
pub mod scalar;
pub mod seqalign;
pub mod structio;
pub mod trainer;

pub use scalar::Real;

pub type Graph = graphbuild::ResidueGraph<f64>;
pub type Embedding = embedio::EmbeddingMatrix<f64>;
pub type Model = egnn::EgnnModel<f64>;
pub type Output = egnn::EgnnOutput<f64>;
pub type Trace = egnn::ForwardTrace<f64>;
pub type Task = trainer::ToyTask<f64>;
pub type Points = metrics::PointSet<f64>;

pub type Graph32 = graphbuild::ResidueGraph<f32>;
pub type Model32 = egnn::EgnnModel<f32>;
