//! Residue-level 3D graphs: k-nearest-neighbour, radius ball and fully connected.
//!
//! Edges are directed `(i, j)` pairs meaning node `i` receives from `j`, and
//! are stored sorted by `(i, j)`. Node features start as a 21-way one-hot of
//! the residue type (20 standard amino acids plus `X`).

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dist, dist2, Matrix, Vec3};
use crate::scalar::Real;
use crate::structio::{aa_index, Structure};

/// Neighbour count used for KNN graphs unless configured otherwise.
pub const DEFAULT_K: usize = 10;
/// Radius-ball cutoff in Å.
pub const DEFAULT_CUTOFF: f64 = 8.0;
/// Width of the residue-type one-hot.
pub const ONEHOT_DIM: usize = 21;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("graph construction needs at least 2 residues, got {0}")]
    TooFewResidues(usize),
    #[error("cutoff must be positive, got {0}")]
    NonPositiveCutoff(f64),
    #[error("k must be at least 1")]
    ZeroK,
    #[error("feature matrix has {found} rows, graph has {expected} nodes")]
    RowCountMismatch { expected: usize, found: usize },
    #[error("sum fusion needs equal widths: graph features {graph}, new features {feats}")]
    SumDimMismatch { graph: usize, feats: usize },
    #[error("coordinates must be finite")]
    NonFiniteCoordinate,
    #[error("invalid graph document: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphMode {
    Knn,
    Rball,
    Fc,
}

impl std::str::FromStr for GraphMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "knn" => Ok(Self::Knn),
            "rball" => Ok(Self::Rball),
            "fc" => Ok(Self::Fc),
            other => Err(format!("unknown graph mode {other:?} (expected knn, rball or fc)")),
        }
    }
}

impl std::fmt::Display for GraphMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Knn => "knn",
            Self::Rball => "rball",
            Self::Fc => "fc",
        })
    }
}

/// What the node features currently hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Onehot20,
    Plm,
    Concat,
    Sum,
    Positional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub kind: FeatureKind,
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionMode {
    Replace,
    Concat,
    Sum,
}

impl std::str::FromStr for FusionMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "replace" => Ok(Self::Replace),
            "concat" => Ok(Self::Concat),
            "sum" => Ok(Self::Sum),
            other => Err(format!("unknown fusion mode {other:?} (expected replace, concat or sum)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidueGraph<T> {
    pub coords: Vec<Vec3<T>>,
    pub node_feats: Matrix<T>,
    pub edges: Vec<(usize, usize)>,
    /// Euclidean length of each edge in Å, parallel to `edges`.
    pub edge_scalars: Vec<T>,
    pub mode: GraphMode,
}

impl<T: Real> ResidueGraph<T> {
    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn feat_dim(&self) -> usize {
        self.node_feats.cols()
    }

    /// Out-neighbour lists (node `i` → the `j`s of its edges), ascending.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.n()];
        for &(i, j) in &self.edges {
            out[i].push(j);
        }
        out
    }

    /// Same graph with coordinates replaced (topology and edge scalars kept).
    pub fn with_coords(&self, coords: Vec<Vec3<T>>) -> Self {
        Self {
            coords,
            ..self.clone()
        }
    }
}

/// One-hot residue-type features for a sequence of one-letter codes.
pub fn onehot_features<T: Real>(aa: impl IntoIterator<Item = char>) -> Matrix<T> {
    let idx: Vec<usize> = aa.into_iter().map(aa_index).collect();
    Matrix::from_fn(idx.len(), ONEHOT_DIM, |r, c| if idx[r] == c { T::one() } else { T::zero() })
}

fn structure_inputs<T: Real>(s: &Structure) -> (Vec<Vec3<T>>, Matrix<T>) {
    let coords = s
        .residues()
        .map(|r| [T::lit(r.ca[0]), T::lit(r.ca[1]), T::lit(r.ca[2])])
        .collect();
    (coords, onehot_features(s.residues().map(|r| r.aa)))
}

fn check_points<T: Real>(coords: &[Vec3<T>]) -> Result<()> {
    if coords.len() < 2 {
        return Err(GraphError::TooFewResidues(coords.len()));
    }
    if coords.iter().flatten().any(|v| !v.is_finite()) {
        return Err(GraphError::NonFiniteCoordinate);
    }
    Ok(())
}

fn finish<T: Real>(coords: Vec<Vec3<T>>, node_feats: Matrix<T>, mut edges: Vec<(usize, usize)>, mode: GraphMode) -> ResidueGraph<T> {
    edges.sort_unstable();
    let edge_scalars = edges.iter().map(|&(i, j)| dist(&coords[i], &coords[j])).collect();
    ResidueGraph {
        coords,
        node_feats,
        edges,
        edge_scalars,
        mode,
    }
}

/// `(distance², index)` ordering used for neighbour selection.
#[inline]
fn by_distance<T: Real>(a: &(T, usize), b: &(T, usize)) -> Ordering {
    a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
}

/// k nearest neighbours of every point, sorted by `(i, j)`; ties resolved by lower index.
pub fn knn_edges<T: Real>(coords: &[Vec3<T>], k: usize) -> Vec<(usize, usize)> {
    let n = coords.len();
    let take = k.min(n.saturating_sub(1));
    let mut edges = Vec::with_capacity(n * take);
    let mut cand: Vec<(T, usize)> = Vec::with_capacity(n);
    for i in 0..n {
        cand.clear();
        cand.extend((0..n).filter(|&j| j != i).map(|j| (dist2(&coords[i], &coords[j]), j)));
        if take < cand.len() {
            cand.select_nth_unstable_by(take, by_distance);
            cand.truncate(take);
        }
        let start = edges.len();
        edges.extend(cand.iter().map(|&(_, j)| (i, j)));
        edges[start..].sort_unstable();
    }
    edges
}

/// All ordered pairs with distance ≤ `cutoff`, sorted, found through a uniform cell grid.
pub fn rball_edges<T: Real>(coords: &[Vec3<T>], cutoff: T) -> Vec<(usize, usize)> {
    let cell_of = |p: &Vec3<T>| -> [i64; 3] {
        [0, 1, 2].map(|a| (p[a] / cutoff).floor().to_i64().unwrap_or(0))
    };
    let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
    for (i, p) in coords.iter().enumerate() {
        grid.entry(cell_of(p)).or_default().push(i);
    }
    let c2 = cutoff * cutoff;
    let mut edges = Vec::new();
    for (i, p) in coords.iter().enumerate() {
        let c = cell_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    let Some(bucket) = grid.get(&[c[0] + dx, c[1] + dy, c[2] + dz]) else {
                        continue;
                    };
                    for &j in bucket {
                        if j != i && dist2(p, &coords[j]) <= c2 {
                            edges.push((i, j));
                        }
                    }
                }
            }
        }
    }
    edges.sort_unstable();
    edges
}

pub fn fc_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).collect()
}

pub fn build_knn_from_points<T: Real>(coords: Vec<Vec3<T>>, feats: Matrix<T>, k: usize) -> Result<ResidueGraph<T>> {
    check_points(&coords)?;
    if k == 0 {
        return Err(GraphError::ZeroK);
    }
    let edges = knn_edges(&coords, k);
    Ok(finish(coords, feats, edges, GraphMode::Knn))
}

pub fn build_rball_from_points<T: Real>(coords: Vec<Vec3<T>>, feats: Matrix<T>, cutoff: T) -> Result<ResidueGraph<T>> {
    check_points(&coords)?;
    if !(cutoff > T::zero()) || !cutoff.is_finite() {
        return Err(GraphError::NonPositiveCutoff(cutoff.as_f64()));
    }
    let edges = rball_edges(&coords, cutoff);
    Ok(finish(coords, feats, edges, GraphMode::Rball))
}

pub fn build_fc_from_points<T: Real>(coords: Vec<Vec3<T>>, feats: Matrix<T>) -> Result<ResidueGraph<T>> {
    check_points(&coords)?;
    let edges = fc_edges(coords.len());
    Ok(finish(coords, feats, edges, GraphMode::Fc))
}

pub fn build_knn<T: Real>(s: &Structure, k: usize) -> Result<ResidueGraph<T>> {
    let (coords, feats) = structure_inputs(s);
    build_knn_from_points(coords, feats, k)
}

pub fn build_rball<T: Real>(s: &Structure, cutoff: T) -> Result<ResidueGraph<T>> {
    let (coords, feats) = structure_inputs(s);
    build_rball_from_points(coords, feats, cutoff)
}

pub fn build_fc<T: Real>(s: &Structure) -> Result<ResidueGraph<T>> {
    let (coords, feats) = structure_inputs(s);
    build_fc_from_points(coords, feats)
}

/// Dispatches on `mode`; `k` and `cutoff` apply to their own modes only.
pub fn build<T: Real>(s: &Structure, mode: GraphMode, k: usize, cutoff: T) -> Result<ResidueGraph<T>> {
    match mode {
        GraphMode::Knn => build_knn(s, k),
        GraphMode::Rball => build_rball(s, cutoff),
        GraphMode::Fc => build_fc(s),
    }
}

/// Fuses an `N × d` feature matrix into the graph's node features.
pub fn attach_features<T: Real>(g: &ResidueGraph<T>, feats: &Matrix<T>, mode: FusionMode) -> Result<ResidueGraph<T>> {
    if feats.rows() != g.n() {
        return Err(GraphError::RowCountMismatch {
            expected: g.n(),
            found: feats.rows(),
        });
    }
    let node_feats = match mode {
        FusionMode::Replace => feats.clone(),
        FusionMode::Concat => g.node_feats.hcat(feats).expect("row counts checked"),
        FusionMode::Sum => {
            if feats.cols() != g.feat_dim() {
                return Err(GraphError::SumDimMismatch {
                    graph: g.feat_dim(),
                    feats: feats.cols(),
                });
            }
            let mut out = g.node_feats.clone();
            for (o, &v) in out.as_mut_slice().iter_mut().zip(feats.as_slice()) {
                *o += v;
            }
            out
        }
    };
    Ok(ResidueGraph {
        node_feats,
        ..g.clone()
    })
}

/// JSON form of a [`ResidueGraph`]; `node_feats` is row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub n: usize,
    pub mode: GraphMode,
    pub coords: Vec<[f64; 3]>,
    pub node_feats_dim: usize,
    pub node_feats: Vec<f64>,
    pub edges: Vec<[usize; 2]>,
    pub edge_scalars: Vec<f64>,
}

impl<T: Real> From<&ResidueGraph<T>> for GraphDocument {
    fn from(g: &ResidueGraph<T>) -> Self {
        Self {
            n: g.n(),
            mode: g.mode,
            coords: g.coords.iter().map(|p| p.map(|v| v.as_f64())).collect(),
            node_feats_dim: g.feat_dim(),
            node_feats: g.node_feats.as_slice().iter().map(|v| v.as_f64()).collect(),
            edges: g.edges.iter().map(|&(i, j)| [i, j]).collect(),
            edge_scalars: g.edge_scalars.iter().map(|v| v.as_f64()).collect(),
        }
    }
}

impl GraphDocument {
    pub fn into_graph<T: Real>(self) -> Result<ResidueGraph<T>> {
        let bad = |m: String| Err(GraphError::Invalid(m));
        if self.coords.len() != self.n {
            return bad(format!("n = {} but {} coordinates", self.n, self.coords.len()));
        }
        if self.node_feats.len() != self.n * self.node_feats_dim {
            return bad(format!(
                "node_feats has {} values, expected {} x {}",
                self.node_feats.len(),
                self.n,
                self.node_feats_dim
            ));
        }
        if self.edges.len() != self.edge_scalars.len() {
            return bad("edges and edge_scalars differ in length".into());
        }
        if let Some(e) = self.edges.iter().find(|[i, j]| i == j || *i >= self.n || *j >= self.n) {
            return bad(format!("edge {e:?} is a self-loop or out of range"));
        }
        let t = |v: f64| T::lit(v);
        let mut pairs: Vec<((usize, usize), T)> = self
            .edges
            .iter()
            .zip(&self.edge_scalars)
            .map(|(e, &s)| ((e[0], e[1]), t(s)))
            .collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(ResidueGraph {
            coords: self.coords.iter().map(|p| p.map(t)).collect(),
            node_feats: Matrix::from_vec(self.n, self.node_feats_dim, self.node_feats.iter().map(|&v| t(v)).collect())
                .expect("length checked"),
            edges: pairs.iter().map(|p| p.0).collect(),
            edge_scalars: pairs.iter().map(|p| p.1).collect(),
            mode: self.mode,
        })
    }
}

pub fn graph_to_json<T: Real>(g: &ResidueGraph<T>) -> String {
    serde_json::to_string(&GraphDocument::from(g)).expect("graph serializes")
}

pub fn graph_from_json<T: Real>(text: &str) -> Result<ResidueGraph<T>> {
    let doc: GraphDocument = serde_json::from_str(text).map_err(|e| GraphError::Invalid(e.to_string()))?;
    doc.into_graph()
}
