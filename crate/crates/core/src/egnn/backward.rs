use super::forward::TraceData;
use super::{silu, silu_grad, EgnnError, EgnnModel, ForwardTrace, Head, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Gradient of a scalar loss with respect to the network outputs.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputGrad<T> {
    /// Same layout as [`EgnnOutput::head`](super::EgnnOutput::head).
    pub head: Vec<T>,
    /// Gradient with respect to the final coordinates, if the loss uses them.
    pub coords: Option<Vec<Vec3<T>>>,
}

impl<T: Real> OutputGrad<T> {
    pub fn head_only(head: Vec<T>) -> Self {
        Self { head, coords: None }
    }
}

impl<T: Real> EgnnModel<T> {
    /// Exact parameter gradients of the loss whose output gradient is `grad`.
    ///
    /// The returned model holds gradients in place of parameters.
    pub fn backward(&self, trace: &mut ForwardTrace<T>, grad: &OutputGrad<T>) -> Result<EgnnModel<T>> {
        let data = trace.data.take().ok_or(EgnnError::TraceConsumed)?;
        let mut out = self.zeros_like();
        self.backward_into(data, grad, &mut out)?;
        Ok(out)
    }

    /// As [`backward`](Self::backward) but accumulates into an existing gradient set.
    pub fn backward_accumulate(&self, trace: &mut ForwardTrace<T>, grad: &OutputGrad<T>, acc: &mut EgnnModel<T>) -> Result<()> {
        let data = trace.data.take().ok_or(EgnnError::TraceConsumed)?;
        self.backward_into(data, grad, acc)
    }

    fn backward_into(&self, t: TraceData<T>, grad: &OutputGrad<T>, gm: &mut EgnnModel<T>) -> Result<()> {
        let hd = self.config.hidden_dim;
        let od = self.config.head.out_dim();
        let n = t.n;
        let rows = t.head_in.len() / hd;
        if grad.head.len() != rows * od {
            return Err(EgnnError::GradShape {
                expected: rows * od,
                found: grad.head.len(),
            });
        }
        if let Some(gc) = &grad.coords {
            if gc.len() != n {
                return Err(EgnnError::GradShape {
                    expected: n,
                    found: gc.len(),
                });
            }
        }

        // head
        let mut g_head_in = vec![T::zero(); rows * hd];
        let mut a = vec![T::zero(); hd];
        let mut ga = vec![T::zero(); hd];
        for r in 0..rows {
            let z = &t.head_z[r * hd..(r + 1) * hd];
            for (av, &zv) in a.iter_mut().zip(z) {
                *av = silu(zv);
            }
            ga.iter_mut().for_each(|v| *v = T::zero());
            self.head
                .second
                .backprop(&mut gm.head.second, &a, &grad.head[r * od..(r + 1) * od], Some(&mut ga));
            for (g, &zv) in ga.iter_mut().zip(z) {
                *g *= silu_grad(zv);
            }
            self.head.first.backprop(
                &mut gm.head.first,
                &t.head_in[r * hd..(r + 1) * hd],
                &ga,
                Some(&mut g_head_in[r * hd..(r + 1) * hd]),
            );
        }
        let mut gh = match self.config.head {
            Head::GraphRegress => {
                let inv = T::one() / T::from_usize_lossy(n);
                let mut g = vec![T::zero(); n * hd];
                for i in 0..n {
                    for (gv, &p) in g[i * hd..(i + 1) * hd].iter_mut().zip(&g_head_in) {
                        *gv = p * inv;
                    }
                }
                g
            }
            Head::NodeClass { .. } | Head::NodeRegress => g_head_in,
        };
        let mut gx: Vec<Vec3<T>> = grad.coords.clone().unwrap_or_else(|| vec![[T::zero(); 3]; n]);

        let mut u = vec![T::zero(); 2 * hd];
        let mut gu = vec![T::zero(); 2 * hd];
        let mut inp = vec![T::zero(); 2 * hd + 2];
        let mut ginp = vec![T::zero(); 2 * hd + 2];
        let mut gmsg = vec![T::zero(); hd];
        for (lp, (c, glp)) in self
            .layers
            .iter()
            .zip(t.layers.iter().zip(gm.layers.iter_mut()))
            .rev()
        {
            let mut gh_in = gh.clone();
            let mut gx_in = gx.clone();
            let mut gagg = vec![T::zero(); n * hd];

            // node update: h' = h + φ_h([h, agg])
            for i in 0..n {
                let z5 = &c.z5[i * hd..(i + 1) * hd];
                for (av, &zv) in a.iter_mut().zip(z5) {
                    *av = silu(zv);
                }
                ga.iter_mut().for_each(|v| *v = T::zero());
                lp.node
                    .second
                    .backprop(&mut glp.node.second, &a, &gh[i * hd..(i + 1) * hd], Some(&mut ga));
                for (g, &zv) in ga.iter_mut().zip(z5) {
                    *g *= silu_grad(zv);
                }
                u[..hd].copy_from_slice(&c.h_in[i * hd..(i + 1) * hd]);
                u[hd..].copy_from_slice(&c.agg[i * hd..(i + 1) * hd]);
                gu.iter_mut().for_each(|v| *v = T::zero());
                lp.node.first.backprop(&mut glp.node.first, &u, &ga, Some(&mut gu));
                for (g, &v) in gh_in[i * hd..(i + 1) * hd].iter_mut().zip(&gu[..hd]) {
                    *g += v;
                }
                gagg[i * hd..(i + 1) * hd].copy_from_slice(&gu[hd..]);
            }

            for (k, &(i, j)) in t.edges.iter().enumerate() {
                gmsg.copy_from_slice(&gagg[i * hd..(i + 1) * hd]);
                let diff = c.diff[k];
                let d2 = c.d2[k];
                let mut gdiff = [T::zero(); 3];

                if let (Some(cp), Some(gcp)) = (&lp.coord, glp.coord.as_mut()) {
                    let norm = d2.sqrt();
                    let denom = norm + T::one();
                    let s = c.s[k];
                    let w = s / denom;
                    let gxi = gx[i];
                    let mut gw = T::zero();
                    for ax in 0..3 {
                        gdiff[ax] += gxi[ax] * w;
                        gw += gxi[ax] * diff[ax];
                    }
                    let gs = gw / denom;
                    if norm > T::zero() {
                        let gnorm = -gw * s / (denom * denom);
                        for ax in 0..3 {
                            gdiff[ax] += gnorm * diff[ax] / norm;
                        }
                    }
                    let z3 = &c.z3[k * hd..(k + 1) * hd];
                    for (av, &zv) in a.iter_mut().zip(z3) {
                        *av = silu(zv);
                    }
                    ga.iter_mut().for_each(|v| *v = T::zero());
                    cp.second.backprop(&mut gcp.second, &a, &[gs], Some(&mut ga));
                    for (g, &zv) in ga.iter_mut().zip(z3) {
                        *g *= silu_grad(zv);
                    }
                    cp.first
                        .backprop(&mut gcp.first, &c.m[k * hd..(k + 1) * hd], &ga, Some(&mut gmsg));
                }

                // message: m = silu(W2 silu(W1 inp + b1) + b2)
                let z2 = &c.z2[k * hd..(k + 1) * hd];
                for (g, &zv) in gmsg.iter_mut().zip(z2) {
                    *g *= silu_grad(zv);
                }
                let z1 = &c.z1[k * hd..(k + 1) * hd];
                for (av, &zv) in a.iter_mut().zip(z1) {
                    *av = silu(zv);
                }
                ga.iter_mut().for_each(|v| *v = T::zero());
                lp.edge.second.backprop(&mut glp.edge.second, &a, &gmsg, Some(&mut ga));
                for (g, &zv) in ga.iter_mut().zip(z1) {
                    *g *= silu_grad(zv);
                }
                inp[..hd].copy_from_slice(&c.h_in[i * hd..(i + 1) * hd]);
                inp[hd..2 * hd].copy_from_slice(&c.h_in[j * hd..(j + 1) * hd]);
                inp[2 * hd] = d2;
                inp[2 * hd + 1] = t.edge_scalars[k];
                ginp.iter_mut().for_each(|v| *v = T::zero());
                lp.edge.first.backprop(&mut glp.edge.first, &inp, &ga, Some(&mut ginp));
                for (g, &v) in gh_in[i * hd..(i + 1) * hd].iter_mut().zip(&ginp[..hd]) {
                    *g += v;
                }
                for (g, &v) in gh_in[j * hd..(j + 1) * hd].iter_mut().zip(&ginp[hd..2 * hd]) {
                    *g += v;
                }
                let gd2 = ginp[2 * hd];
                let two = T::lit(2.0);
                for ax in 0..3 {
                    gdiff[ax] += two * gd2 * diff[ax];
                    gx_in[i][ax] += gdiff[ax];
                    gx_in[j][ax] -= gdiff[ax];
                }
            }
            gh = gh_in;
            gx = gx_in;
        }

        for i in 0..n {
            self.embed
                .backprop(&mut gm.embed, t.feats.row(i), &gh[i * hd..(i + 1) * hd], None);
        }
        Ok(())
    }
}
