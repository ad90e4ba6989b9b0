use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{axpy, Matrix};

pub const MLP_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation output `a = f(z)`.
    #[inline]
    fn derivative_from_output(self, a: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    /// out × in
    pub weights: Matrix,
    pub bias: Vec<f64>,
    pub activation: Activation,
}

impl Layer {
    pub fn new(weights: Matrix, bias: Vec<f64>, activation: Activation) -> Result<Self> {
        Error::check_dim(weights.rows(), bias.len())?;
        Ok(Self {
            weights,
            bias,
            activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn output_dim(&self) -> usize {
        self.weights.rows()
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.weights
            .iter_rows()
            .zip(&self.bias)
            .map(|(w, b)| self.activation.apply(crate::linalg::dot(w, x) + b))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub version: u32,
    pub layers: Vec<Layer>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGradient {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

/// Gradients of `<upstream, f(x)>` with respect to every parameter and the input.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGradients {
    pub layers: Vec<LayerGradient>,
    pub input: Vec<f64>,
}

impl MlpGradients {
    /// Parameters flattened in the same order as [`Mlp::flat_params`].
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for g in &self.layers {
            out.extend_from_slice(g.weights.as_slice());
            out.extend_from_slice(&g.bias);
        }
        out
    }
}

impl Mlp {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::input("network needs at least one layer"));
        }
        for pair in layers.windows(2) {
            Error::check_dim(pair[0].output_dim(), pair[1].input_dim())?;
        }
        Ok(Self {
            version: MLP_FORMAT_VERSION,
            layers,
        })
    }

    /// Glorot-uniform weights, zero biases. `dims` lists layer widths from input
    /// to output; hidden layers use `hidden`, the last layer `output`.
    pub fn random<R: Rng>(
        dims: &[usize],
        hidden: Activation,
        output: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) {
            return Err(Error::input(format!("invalid layer widths {dims:?}")));
        }
        let n = dims.len() - 1;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let data = (0..fan_in * fan_out)
                    .map(|_| rng.random_range(-limit..limit))
                    .collect();
                let act = if i + 1 == n { output } else { hidden };
                Layer::new(Matrix::from_vec(fan_out, fan_in, data)?, vec![0.0; fan_out], act)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].output_dim()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.input_dim(), x.len())?;
        let mut a = x.to_vec();
        for layer in &self.layers {
            a = layer.forward(&a);
        }
        Ok(a)
    }

    /// Activations of every layer, starting with the input itself.
    fn trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        acts.push(x.to_vec());
        for layer in &self.layers {
            let next = layer.forward(acts.last().expect("non-empty"));
            acts.push(next);
        }
        acts
    }

    fn backward(
        &self,
        acts: &[Vec<f64>],
        upstream: &[f64],
        mut param_sink: Option<&mut Vec<LayerGradient>>,
    ) -> Vec<f64> {
        let mut delta = upstream.to_vec();
        for (l, layer) in self.layers.iter().enumerate().rev() {
            let out = &acts[l + 1];
            let input = &acts[l];
            // dL/dz = dL/da * f'(z)
            for (dz, &a) in delta.iter_mut().zip(out) {
                *dz *= layer.activation.derivative_from_output(a);
            }
            if let Some(sink) = param_sink.as_deref_mut() {
                let g = &mut sink[l];
                for (i, &dz) in delta.iter().enumerate() {
                    axpy(dz, input, g.weights.row_mut(i));
                    g.bias[i] += dz;
                }
            }
            delta = layer
                .weights
                .tr_mul_vec(&delta)
                .expect("layer shapes validated at construction");
        }
        delta
    }

    pub fn zero_gradients(&self) -> MlpGradients {
        MlpGradients {
            layers: self
                .layers
                .iter()
                .map(|l| LayerGradient {
                    weights: Matrix::zeros(l.output_dim(), l.input_dim()),
                    bias: vec![0.0; l.output_dim()],
                })
                .collect(),
            input: vec![0.0; self.input_dim()],
        }
    }

    /// Exact gradients of `<upstream, forward(x)>`.
    pub fn grad(&self, x: &[f64], upstream: &[f64]) -> Result<MlpGradients> {
        let mut g = self.zero_gradients();
        g.input = self.accumulate_grad(x, upstream, &mut g.layers)?;
        Ok(g)
    }

    /// Adds the parameter gradient of `<upstream, forward(x)>` into `sink` and
    /// returns the input gradient.
    pub fn accumulate_grad(
        &self,
        x: &[f64],
        upstream: &[f64],
        sink: &mut Vec<LayerGradient>,
    ) -> Result<Vec<f64>> {
        Error::check_dim(self.input_dim(), x.len())?;
        Error::check_dim(self.output_dim(), upstream.len())?;
        Error::check_dim(self.layers.len(), sink.len())?;
        let acts = self.trace(x);
        Ok(self.backward(&acts, upstream, Some(sink)))
    }

    /// Input gradient only; skips parameter accumulation.
    pub fn input_grad(&self, x: &[f64], upstream: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.input_dim(), x.len())?;
        Error::check_dim(self.output_dim(), upstream.len())?;
        let acts = self.trace(x);
        Ok(self.backward(&acts, upstream, None))
    }

    /// Forward pass plus the input gradient of `<upstream(y), y>`, where the
    /// upstream is computed from the output.
    pub fn forward_and_input_grad(
        &self,
        x: &[f64],
        upstream: impl FnOnce(&[f64]) -> Vec<f64>,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        Error::check_dim(self.input_dim(), x.len())?;
        let acts = self.trace(x);
        let y = acts.last().expect("non-empty").clone();
        let up = upstream(&y);
        Error::check_dim(self.output_dim(), up.len())?;
        let gx = self.backward(&acts, &up, None);
        Ok((y, gx))
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.weights.as_slice().len() + l.bias.len())
            .sum()
    }

    pub fn flat_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.as_slice());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        Error::check_dim(self.param_count(), params.len())?;
        let mut off = 0;
        for l in &mut self.layers {
            let w = l.weights.as_mut_slice();
            w.copy_from_slice(&params[off..off + w.len()]);
            off += w.len();
            let nb = l.bias.len();
            l.bias.copy_from_slice(&params[off..off + nb]);
            off += nb;
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.is_finite() && l.bias.iter().all(|v| v.is_finite()))
    }
}

/// Adam on a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    pub lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    /// The update Adam would apply for `grad` (to be subtracted from the params).
    pub fn direction(&mut self, grad: &[f64]) -> Vec<f64> {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        let mut step = vec![0.0; grad.len()];
        for i in 0..grad.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let mh = self.m[i] / c1;
            let vh = self.v[i] / c2;
            step[i] = self.lr * mh / (vh.sqrt() + self.eps);
        }
        step
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        let s = self.direction(grad);
        for (p, d) in params.iter_mut().zip(s) {
            *p -= d;
        }
    }

    pub fn reset_moments(&mut self) {
        self.m.iter_mut().for_each(|v| *v = 0.0);
        self.v.iter_mut().for_each(|v| *v = 0.0);
        self.t = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-4)
    }

    #[allow(clippy::needless_range_loop)]
    fn naive_forward(net: &Mlp, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        for l in &net.layers {
            let mut next = vec![0.0; l.output_dim()];
            for i in 0..l.output_dim() {
                let mut z = l.bias[i];
                for j in 0..l.input_dim() {
                    z += l.weights[(i, j)] * a[j];
                }
                next[i] = match l.activation {
                    Activation::Tanh => z.tanh(),
                    Activation::Identity => z,
                };
            }
            a = next;
        }
        a
    }

    #[test]
    fn trivial_forwards() {
        let id = Mlp::new(vec![Layer::new(Matrix::identity(2), vec![0.0; 2], Activation::Identity).unwrap()]).unwrap();
        assert_eq!(id.forward(&[1.0, 2.0]).unwrap(), vec![1.0, 2.0]);
        let g = id.grad(&[3.0, 4.0], &[1.0, 0.0]).unwrap();
        assert_eq!(g.input, vec![1.0, 0.0]);

        let t = Mlp::new(vec![Layer::new(
            Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap(),
            vec![0.0],
            Activation::Tanh,
        )
        .unwrap()])
        .unwrap();
        assert_eq!(t.forward(&[0.0, 0.0]).unwrap(), vec![0.0]);

        // truncated linear encoder: rows [[2, 0]] of diag(2, 2)
        let enc = Mlp::new(vec![Layer::new(
            Matrix::from_rows(&[vec![2.0, 0.0]]).unwrap(),
            vec![0.0],
            Activation::Identity,
        )
        .unwrap()])
        .unwrap();
        assert_eq!(enc.forward(&[1.0, 1.0]).unwrap(), vec![2.0]);
        assert!(enc.forward(&[1.0]).is_err());
    }

    #[test]
    fn forward_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let net = Mlp::random(&[4, 6, 3], Activation::Tanh, Activation::Identity, &mut rng).unwrap();
        let x = [0.3, -1.2, 0.7, 2.0];
        let got = net.forward(&x).unwrap();
        for (a, b) in got.iter().zip(naive_forward(&net, &x)) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for dims in [vec![3, 2], vec![4, 5, 2], vec![5, 4, 4, 3]] {
            let mut net = Mlp::random(&dims, Activation::Tanh, Activation::Tanh, &mut rng).unwrap();
            let x: Vec<f64> = (0..dims[0]).map(|_| rng.random_range(-1.5..1.5)).collect();
            let up: Vec<f64> = (0..*dims.last().unwrap()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = |n: &Mlp, x: &[f64]| -> f64 {
                n.forward(x).unwrap().iter().zip(&up).map(|(a, b)| a * b).sum()
            };
            let g = net.grad(&x, &up).unwrap();
            let h = 1e-5;
            for j in 0..x.len() {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let fd = (f(&net, &xp) - f(&net, &xm)) / (2.0 * h);
                assert!(rel_err(g.input[j], fd) <= 1e-4, "input {j}: {} vs {fd}", g.input[j]);
            }
            let analytic = g.flatten();
            let p0 = net.flat_params();
            for k in 0..p0.len() {
                let mut p = p0.clone();
                p[k] += h;
                net.set_flat_params(&p).unwrap();
                let fp = f(&net, &x);
                p[k] -= 2.0 * h;
                net.set_flat_params(&p).unwrap();
                let fm = f(&net, &x);
                let fd = (fp - fm) / (2.0 * h);
                assert!(rel_err(analytic[k], fd) <= 1e-4, "param {k}: {} vs {fd}", analytic[k]);
            }
            net.set_flat_params(&p0).unwrap();
        }
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::random(&[3, 4, 2], Activation::Tanh, Activation::Identity, &mut rng).unwrap();
        let g = net.grad(&[0.1, 0.2, 0.3], &[0.0, 0.0]).unwrap();
        assert!(g.input.iter().all(|v| *v == 0.0));
        assert!(g.flatten().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mismatched_layers_rejected() {
        let a = Layer::new(Matrix::zeros(3, 2), vec![0.0; 3], Activation::Tanh).unwrap();
        let b = Layer::new(Matrix::zeros(1, 4), vec![0.0], Activation::Identity).unwrap();
        assert!(Mlp::new(vec![a, b]).is_err());
    }
}
