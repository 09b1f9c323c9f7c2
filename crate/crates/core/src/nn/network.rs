use super::params::{init_params, NetworkParams};
use super::spec::{LayerSpec, NetworkSpec, Shape};
use super::NetError;

/// A Q-function approximator: an observation in, one value per action out.
#[derive(Debug, Clone, PartialEq)]
pub struct QNetwork {
    spec: NetworkSpec,
    shapes: Vec<Shape>,
    params: NetworkParams,
}

impl QNetwork {
    pub fn new(spec: NetworkSpec, params: NetworkParams) -> Result<Self, NetError> {
        let shapes = spec.shapes()?;
        params.check_against(&spec)?;
        Ok(Self { spec, shapes, params })
    }

    pub fn init(spec: NetworkSpec, seed: u64) -> Result<Self, NetError> {
        let params = init_params(&spec, seed)?;
        Self::new(spec, params)
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    /// Mutable access to the values; tensor shapes cannot change through it.
    pub fn params_mut(&mut self) -> &mut NetworkParams {
        &mut self.params
    }

    pub fn num_actions(&self) -> usize {
        self.spec.output_units()
    }

    pub fn forward(&self, obs: &[f64]) -> Result<Vec<f64>, NetError> {
        self.check_input(obs)?;
        let mut x = obs.to_vec();
        let mut p = 0;
        for (i, layer) in self.spec.layers.iter().enumerate() {
            x = self.layer_forward(i, *layer, &x, &mut p);
        }
        Ok(x)
    }

    /// Mean action-masked squared Bellman error over the batch and its
    /// gradient. Only the output of the taken action receives error signal.
    pub fn backward(
        &self,
        obs: &[&[f64]],
        actions: &[usize],
        targets: &[f64],
    ) -> Result<(f64, NetworkParams), NetError> {
        let n = self.check_batch(obs, actions, targets)?;
        let mut grads = self.params.zeros_like();
        let mut loss = 0.0;
        for ((x, &a), &y) in obs.iter().zip(actions).zip(targets) {
            let acts = self.forward_cached(x);
            let q = acts.last().unwrap()[a];
            let err = q - y;
            loss += err * err;
            let mut d_out = vec![0.0; self.num_actions()];
            d_out[a] = 2.0 * err / n as f64;
            self.backward_single(&acts, d_out, &mut grads);
        }
        Ok((loss / n as f64, grads))
    }

    /// Loss only, sharing `backward`'s definition.
    pub fn loss(&self, obs: &[&[f64]], actions: &[usize], targets: &[f64]) -> Result<f64, NetError> {
        let n = self.check_batch(obs, actions, targets)?;
        let mut loss = 0.0;
        for ((x, &a), &y) in obs.iter().zip(actions).zip(targets) {
            let err = self.forward(x)?[a] - y;
            loss += err * err;
        }
        Ok(loss / n as f64)
    }

    fn check_input(&self, obs: &[f64]) -> Result<(), NetError> {
        if obs.len() != self.spec.input_len() {
            return Err(NetError::Dimension {
                expected: self.spec.input_len(),
                got: obs.len(),
            });
        }
        Ok(())
    }

    fn check_batch(&self, obs: &[&[f64]], actions: &[usize], targets: &[f64]) -> Result<usize, NetError> {
        if obs.is_empty() {
            return Err(NetError::EmptyBatch);
        }
        if obs.len() != actions.len() || obs.len() != targets.len() {
            return Err(NetError::ShapeMismatch(format!(
                "batch of {} observations, {} actions, {} targets",
                obs.len(),
                actions.len(),
                targets.len()
            )));
        }
        for x in obs {
            self.check_input(x)?;
        }
        if let Some(&a) = actions.iter().find(|&&a| a >= self.num_actions()) {
            return Err(NetError::BadAction {
                action: a,
                actions: self.num_actions(),
            });
        }
        if targets.iter().any(|t| !t.is_finite()) {
            return Err(NetError::NonFinite("targets"));
        }
        Ok(obs.len())
    }

    /// Runs layer `i`, advancing the tensor cursor `p` past its parameters.
    fn layer_forward(&self, i: usize, layer: LayerSpec, x: &[f64], p: &mut usize) -> Vec<f64> {
        match layer {
            LayerSpec::Conv { stride, .. } => {
                let (w, b) = (&self.params.tensors[*p], &self.params.tensors[*p + 1]);
                *p += 2;
                conv_forward(
                    x,
                    self.shapes[i],
                    self.shapes[i + 1],
                    w.data(),
                    b.data(),
                    w.shape()[2],
                    stride,
                )
            }
            LayerSpec::Dense { .. } => {
                let (w, b) = (&self.params.tensors[*p], &self.params.tensors[*p + 1]);
                *p += 2;
                dense_forward(x, w.data(), b.data())
            }
            LayerSpec::Rectifier => x.iter().map(|&v| v.max(0.0)).collect(),
        }
    }

    fn forward_cached(&self, obs: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.spec.layers.len() + 1);
        acts.push(obs.to_vec());
        let mut p = 0;
        for (i, layer) in self.spec.layers.iter().enumerate() {
            let next = self.layer_forward(i, *layer, &acts[i], &mut p);
            acts.push(next);
        }
        acts
    }

    fn backward_single(&self, acts: &[Vec<f64>], mut grad: Vec<f64>, grads: &mut NetworkParams) {
        let mut p = self.params.tensors.len();
        for (i, layer) in self.spec.layers.iter().enumerate().rev() {
            let x = &acts[i];
            grad = match *layer {
                LayerSpec::Rectifier => x
                    .iter()
                    .zip(&grad)
                    .map(|(&xi, &g)| if xi > 0.0 { g } else { 0.0 })
                    .collect(),
                LayerSpec::Dense { .. } => {
                    p -= 2;
                    let w = self.params.tensors[p].data();
                    let (gw, gb) = split_pair(grads, p);
                    dense_backward(x, &grad, w, gw, gb, i > 0)
                }
                LayerSpec::Conv { stride, .. } => {
                    p -= 2;
                    let wt = &self.params.tensors[p];
                    let k = wt.shape()[2];
                    let (gw, gb) = split_pair(grads, p);
                    conv_backward(
                        x,
                        self.shapes[i],
                        self.shapes[i + 1],
                        &grad,
                        wt.data(),
                        gw,
                        gb,
                        k,
                        stride,
                        i > 0,
                    )
                }
            };
        }
    }
}

fn split_pair(grads: &mut NetworkParams, p: usize) -> (&mut [f64], &mut [f64]) {
    let (a, b) = grads.tensors[p..p + 2].split_at_mut(1);
    (a[0].data_mut(), b[0].data_mut())
}

fn dense_forward(x: &[f64], w: &[f64], b: &[f64]) -> Vec<f64> {
    let n = x.len();
    b.iter()
        .enumerate()
        .map(|(u, &bias)| {
            let row = &w[u * n..(u + 1) * n];
            bias + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
        })
        .collect()
}

/// Accumulates weight/bias gradients; returns the input gradient when asked.
fn dense_backward(x: &[f64], dy: &[f64], w: &[f64], gw: &mut [f64], gb: &mut [f64], need_dx: bool) -> Vec<f64> {
    let n = x.len();
    let mut dx = if need_dx { vec![0.0; n] } else { Vec::new() };
    for (u, &g) in dy.iter().enumerate() {
        if g == 0.0 {
            continue;
        }
        gb[u] += g;
        let grow = &mut gw[u * n..(u + 1) * n];
        for (gwj, &xj) in grow.iter_mut().zip(x) {
            *gwj += g * xj;
        }
        if need_dx {
            let row = &w[u * n..(u + 1) * n];
            for (dxj, &wj) in dx.iter_mut().zip(row) {
                *dxj += g * wj;
            }
        }
    }
    dx
}

fn conv_forward(x: &[f64], input: Shape, output: Shape, w: &[f64], b: &[f64], k: usize, stride: usize) -> Vec<f64> {
    let (Shape::Image(c, h, wd), Shape::Image(o, oh, ow)) = (input, output) else {
        unreachable!("conv shapes are validated with the spec")
    };
    let _ = h;
    let mut y = vec![0.0; o * oh * ow];
    for oc in 0..o {
        let wo = &w[oc * c * k * k..(oc + 1) * c * k * k];
        for oy in 0..oh {
            for ox in 0..ow {
                let mut acc = b[oc];
                for ic in 0..c {
                    for ky in 0..k {
                        let xs = ic * h * wd + (oy * stride + ky) * wd + ox * stride;
                        let xr = &x[xs..xs + k];
                        let wr = &wo[(ic * k + ky) * k..(ic * k + ky + 1) * k];
                        acc += xr.iter().zip(wr).map(|(a, b)| a * b).sum::<f64>();
                    }
                }
                y[(oc * oh + oy) * ow + ox] = acc;
            }
        }
    }
    y
}

#[allow(clippy::too_many_arguments)]
fn conv_backward(
    x: &[f64],
    input: Shape,
    output: Shape,
    dy: &[f64],
    w: &[f64],
    gw: &mut [f64],
    gb: &mut [f64],
    k: usize,
    stride: usize,
    need_dx: bool,
) -> Vec<f64> {
    let (Shape::Image(c, h, wd), Shape::Image(o, oh, ow)) = (input, output) else {
        unreachable!("conv shapes are validated with the spec")
    };
    let mut dx = if need_dx { vec![0.0; c * h * wd] } else { Vec::new() };
    for oc in 0..o {
        let base = oc * c * k * k;
        for oy in 0..oh {
            for ox in 0..ow {
                let g = dy[(oc * oh + oy) * ow + ox];
                if g == 0.0 {
                    continue;
                }
                gb[oc] += g;
                for ic in 0..c {
                    for ky in 0..k {
                        let xs = ic * h * wd + (oy * stride + ky) * wd + ox * stride;
                        let ws = base + (ic * k + ky) * k;
                        for kx in 0..k {
                            gw[ws + kx] += g * x[xs + kx];
                        }
                        if need_dx {
                            for kx in 0..k {
                                dx[xs + kx] += g * w[ws + kx];
                            }
                        }
                    }
                }
            }
        }
    }
    dx
}
