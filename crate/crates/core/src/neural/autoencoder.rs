use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Adam, Mlp};
use super::NeuralTraining;
use crate::error::{Error, Result};
use crate::linalg::Matrix;

const BATCH_SIZE: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoencoderProjector {
    pub encoder: Mlp,
    pub decoder: Mlp,
    pub training: NeuralTraining,
}

impl AutoencoderProjector {
    pub fn new(encoder: Mlp, decoder: Mlp, training: NeuralTraining) -> Result<Self> {
        Error::check_dim(encoder.output_dim(), decoder.input_dim())?;
        Error::check_dim(encoder.input_dim(), decoder.output_dim())?;
        Ok(Self {
            encoder,
            decoder,
            training,
        })
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.encoder.forward(x)
    }

    pub fn reconstruct(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.decoder.forward(&self.encoder.forward(x)?)
    }

    /// Mean over samples and features of the squared reconstruction error.
    pub fn reconstruction_mse(&self, x: &Matrix) -> Result<f64> {
        reconstruction_mse(&self.encoder, &self.decoder, x)
    }
}

fn reconstruction_mse(enc: &Mlp, dec: &Mlp, x: &Matrix) -> Result<f64> {
    let mut total = 0.0;
    for row in x.iter_rows() {
        let r = dec.forward(&enc.forward(row)?)?;
        total += r.iter().zip(row).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
    }
    Ok(total / (x.rows() * x.cols()).max(1) as f64)
}

/// Trains an autoencoder `d → hidden… → d_out → …hidden → d` with tanh hidden
/// units and linear outputs, by mini-batch Adam on the reconstruction MSE.
pub fn fit_autoencoder(
    x: &Matrix,
    d_out: usize,
    hidden: &[usize],
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<AutoencoderProjector> {
    let (m, d) = (x.rows(), x.cols());
    if m == 0 {
        return Err(Error::input("cannot fit an autoencoder on empty data"));
    }
    if d_out == 0 || d_out >= d {
        return Err(Error::input(format!("output dimension must be in [1, {d})")));
    }
    if hidden.contains(&0) {
        return Err(Error::input("hidden layer sizes must be at least 1"));
    }
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::input("learning rate must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let enc_dims: Vec<usize> = std::iter::once(d)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(d_out))
        .collect();
    let dec_dims: Vec<usize> = enc_dims.iter().rev().copied().collect();
    let mut enc = Mlp::random(&enc_dims, Activation::Tanh, Activation::Identity, &mut rng)?;
    let mut dec = Mlp::random(&dec_dims, Activation::Tanh, Activation::Identity, &mut rng)?;

    let n_enc = enc.param_count();
    let mut params: Vec<f64> = enc.flat_params();
    params.extend(dec.flat_params());
    let mut adam = Adam::new(params.len(), lr);

    let mut history = vec![reconstruction_mse(&enc, &dec, x)?];
    let mut order: Vec<usize> = (0..m).collect();
    let scale = 2.0 / d as f64;
    for epoch in 1..=epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(BATCH_SIZE) {
            let mut ge = enc.zero_gradients().layers;
            let mut gd = dec.zero_gradients().layers;
            for &i in batch {
                let xi = x.row(i);
                let code = enc.forward(xi)?;
                let recon = dec.forward(&code)?;
                // d/d(recon) of |recon - x|² / d
                let up: Vec<f64> = recon.iter().zip(xi).map(|(a, b)| scale * (a - b)).collect();
                let g_code = dec.accumulate_grad(&code, &up, &mut gd)?;
                enc.accumulate_grad(xi, &g_code, &mut ge)?;
            }
            let inv = 1.0 / batch.len() as f64;
            let mut grad = Vec::with_capacity(params.len());
            for g in ge.iter().chain(gd.iter()) {
                grad.extend(g.weights.as_slice().iter().map(|v| v * inv));
                grad.extend(g.bias.iter().map(|v| v * inv));
            }
            adam.step(&mut params, &grad);
            enc.set_flat_params(&params[..n_enc])?;
            dec.set_flat_params(&params[n_enc..])?;
        }
        let loss = reconstruction_mse(&enc, &dec, x)?;
        if !loss.is_finite() || !enc.is_finite() || !dec.is_finite() {
            return Err(Error::Fit(format!("autoencoder diverged at epoch {epoch}")));
        }
        history.push(loss);
    }

    AutoencoderProjector::new(
        enc,
        dec,
        NeuralTraining {
            epochs,
            learning_rate: lr,
            seed,
            loss_history: history,
        },
    )
}
