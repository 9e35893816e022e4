use std::cmp::Ordering;

use super::{silu, EgnnError, EgnnModel, Head, Result};
use crate::graphbuild::ResidueGraph;
use crate::linalg::{dot3, sub3, Matrix, Vec3};
use crate::scalar::Real;

/// Network outputs for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EgnnOutput<T> {
    /// Row-major `rows × out_dim` head values: one row per node for node heads, one row for the graph head.
    pub head: Vec<T>,
    pub out_dim: usize,
    /// Coordinates after the last layer (equal to the input when coordinates are frozen).
    pub coords: Vec<Vec3<T>>,
}

impl<T: Real> EgnnOutput<T> {
    pub fn rows(&self) -> usize {
        self.head.len() / self.out_dim.max(1)
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.head[r * self.out_dim..(r + 1) * self.out_dim]
    }
}

pub(super) struct LayerCache<T> {
    pub h_in: Vec<T>,
    pub diff: Vec<Vec3<T>>,
    pub d2: Vec<T>,
    pub z1: Vec<T>,
    pub z2: Vec<T>,
    pub m: Vec<T>,
    pub z3: Vec<T>,
    pub s: Vec<T>,
    pub agg: Vec<T>,
    pub z5: Vec<T>,
}

pub(super) struct TraceData<T> {
    pub feats: Matrix<T>,
    pub edges: Vec<(usize, usize)>,
    pub edge_scalars: Vec<T>,
    pub layers: Vec<LayerCache<T>>,
    /// Head input rows (final node states, or the pooled state).
    pub head_in: Vec<T>,
    pub head_z: Vec<T>,
    pub n: usize,
}

/// Activations cached by [`EgnnModel::forward`], consumed by one backward pass.
pub struct ForwardTrace<T> {
    pub(super) data: Option<TraceData<T>>,
}

impl<T> ForwardTrace<T> {
    pub fn is_consumed(&self) -> bool {
        self.data.is_none()
    }
}

/// Canonical summation order for the edges arriving at each node.
fn canonical_order<T: Real>(incoming: &mut [Vec<usize>], d2: &[T], m: &[T], h: usize) {
    for list in incoming.iter_mut() {
        list.sort_by(|&a, &b| {
            d2[a].partial_cmp(&d2[b]).unwrap_or(Ordering::Equal).then_with(|| {
                let (ma, mb) = (&m[a * h..(a + 1) * h], &m[b * h..(b + 1) * h]);
                ma.iter()
                    .zip(mb)
                    .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                    .find(|o| *o != Ordering::Equal)
                    .unwrap_or(Ordering::Equal)
            })
        });
    }
}

impl<T: Real> EgnnModel<T> {
    pub fn forward(&self, g: &ResidueGraph<T>) -> Result<(EgnnOutput<T>, ForwardTrace<T>)> {
        let cfg = &self.config;
        if g.feat_dim() != cfg.in_dim {
            return Err(EgnnError::DimMismatch {
                expected: cfg.in_dim,
                found: g.feat_dim(),
            });
        }
        let n = g.n();
        if n == 0 || g.node_feats.rows() != n {
            return Err(EgnnError::Config(format!(
                "graph has {n} nodes and {} feature rows",
                g.node_feats.rows()
            )));
        }
        let hd = cfg.hidden_dim;
        let n_edges = g.edges.len();

        let mut h = vec![T::zero(); n * hd];
        for i in 0..n {
            self.embed.apply(g.node_feats.row(i), &mut h[i * hd..(i + 1) * hd]);
        }
        let mut x = g.coords.clone();

        let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (k, &(i, _)) in g.edges.iter().enumerate() {
            incoming[i].push(k);
        }

        let mut layers = Vec::with_capacity(self.layers.len());
        let mut inp = vec![T::zero(); 2 * hd + 2];
        let mut a = vec![T::zero(); hd];
        let mut u = vec![T::zero(); 2 * hd];
        let mut s_buf = [T::zero()];
        for lp in &self.layers {
            let mut c = LayerCache {
                h_in: h.clone(),
                diff: Vec::with_capacity(n_edges),
                d2: Vec::with_capacity(n_edges),
                z1: vec![T::zero(); n_edges * hd],
                z2: vec![T::zero(); n_edges * hd],
                m: vec![T::zero(); n_edges * hd],
                z3: Vec::new(),
                s: Vec::new(),
                agg: vec![T::zero(); n * hd],
                z5: vec![T::zero(); n * hd],
            };
            for (k, &(i, j)) in g.edges.iter().enumerate() {
                let diff = sub3(&x[i], &x[j]);
                let d2 = dot3(&diff, &diff);
                c.diff.push(diff);
                c.d2.push(d2);
                inp[..hd].copy_from_slice(&h[i * hd..(i + 1) * hd]);
                inp[hd..2 * hd].copy_from_slice(&h[j * hd..(j + 1) * hd]);
                inp[2 * hd] = d2;
                inp[2 * hd + 1] = g.edge_scalars[k];
                let z1 = &mut c.z1[k * hd..(k + 1) * hd];
                lp.edge.first.apply(&inp, z1);
                for (av, &z) in a.iter_mut().zip(z1.iter()) {
                    *av = silu(z);
                }
                let z2 = &mut c.z2[k * hd..(k + 1) * hd];
                lp.edge.second.apply(&a, z2);
                for (mv, &z) in c.m[k * hd..(k + 1) * hd].iter_mut().zip(z2.iter()) {
                    *mv = silu(z);
                }
            }
            if let Some(cp) = &lp.coord {
                c.z3 = vec![T::zero(); n_edges * hd];
                c.s = vec![T::zero(); n_edges];
                for k in 0..n_edges {
                    let z3 = &mut c.z3[k * hd..(k + 1) * hd];
                    cp.first.apply(&c.m[k * hd..(k + 1) * hd], z3);
                    for (av, &z) in a.iter_mut().zip(z3.iter()) {
                        *av = silu(z);
                    }
                    cp.second.apply(&a, &mut s_buf);
                    c.s[k] = s_buf[0];
                }
            }

            canonical_order(&mut incoming, &c.d2, &c.m, hd);

            let mut x_next = x.clone();
            for i in 0..n {
                let agg = &mut c.agg[i * hd..(i + 1) * hd];
                for &k in &incoming[i] {
                    for (g_, &mv) in agg.iter_mut().zip(&c.m[k * hd..(k + 1) * hd]) {
                        *g_ += mv;
                    }
                }
                if lp.coord.is_some() {
                    let mut shift = [T::zero(); 3];
                    for &k in &incoming[i] {
                        let w = c.s[k] / (c.d2[k].sqrt() + T::one());
                        for (sv, &dv) in shift.iter_mut().zip(&c.diff[k]) {
                            *sv += dv * w;
                        }
                    }
                    for (xv, sv) in x_next[i].iter_mut().zip(shift) {
                        *xv += sv;
                    }
                }
            }

            let mut h_next = h.clone();
            for i in 0..n {
                u[..hd].copy_from_slice(&h[i * hd..(i + 1) * hd]);
                u[hd..].copy_from_slice(&c.agg[i * hd..(i + 1) * hd]);
                let z5 = &mut c.z5[i * hd..(i + 1) * hd];
                lp.node.first.apply(&u, z5);
                for (av, &z) in a.iter_mut().zip(z5.iter()) {
                    *av = silu(z);
                }
                let mut t = vec![T::zero(); hd];
                lp.node.second.apply(&a, &mut t);
                for (hv, tv) in h_next[i * hd..(i + 1) * hd].iter_mut().zip(t) {
                    *hv += tv;
                }
            }
            h = h_next;
            x = x_next;
            layers.push(c);
        }

        let od = cfg.head.out_dim();
        let head_in = match cfg.head {
            Head::GraphRegress => {
                // rows summed in sorted order so the pooled state ignores node numbering
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| {
                    let (ra, rb) = (&h[a * hd..(a + 1) * hd], &h[b * hd..(b + 1) * hd]);
                    ra.iter()
                        .zip(rb)
                        .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                        .find(|o| *o != Ordering::Equal)
                        .unwrap_or(Ordering::Equal)
                });
                let mut pooled = vec![T::zero(); hd];
                for i in order {
                    for (p, &v) in pooled.iter_mut().zip(&h[i * hd..(i + 1) * hd]) {
                        *p += v;
                    }
                }
                let inv = T::one() / T::from_usize_lossy(n);
                pooled.iter_mut().for_each(|p| *p *= inv);
                pooled
            }
            Head::NodeClass { .. } | Head::NodeRegress => h,
        };
        let rows = head_in.len() / hd;
        let mut head_z = vec![T::zero(); rows * hd];
        let mut out = vec![T::zero(); rows * od];
        for r in 0..rows {
            let z = &mut head_z[r * hd..(r + 1) * hd];
            self.head.first.apply(&head_in[r * hd..(r + 1) * hd], z);
            for (av, &zv) in a.iter_mut().zip(z.iter()) {
                *av = silu(zv);
            }
            self.head.second.apply(&a, &mut out[r * od..(r + 1) * od]);
        }

        let output = EgnnOutput {
            head: out,
            out_dim: od,
            coords: x,
        };
        let trace = ForwardTrace {
            data: Some(TraceData {
                feats: g.node_feats.clone(),
                edges: g.edges.clone(),
                edge_scalars: g.edge_scalars.clone(),
                layers,
                head_in,
                head_z,
                n,
            }),
        };
        Ok((output, trace))
    }

    /// Forward pass without keeping the trace.
    pub fn predict(&self, g: &ResidueGraph<T>) -> Result<EgnnOutput<T>> {
        self.forward(g).map(|(o, _)| o)
    }
}
