use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Adam, Mlp};
use super::NeuralTraining;
use crate::error::{Error, Result};
use crate::linalg::{squared_distance, Matrix};

const ENTROPY_TOL: f64 = 1e-5;
const BISECTION_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PtsneProjector {
    pub net: Mlp,
    pub perplexity: f64,
    pub training: NeuralTraining,
}

impl PtsneProjector {
    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.net.forward(x)
    }
}

/// Perplexity 30, clamped to `(m - 1) / 3` for small data sets.
pub fn default_perplexity(m: usize) -> f64 {
    30f64.min((m.saturating_sub(1)) as f64 / 3.0).max(1.0)
}

/// Shannon entropy (bits) and normalized probabilities of
/// `p_j ∝ exp(-beta * (d_j - d_min))`.
fn row_distribution(dists: &[f64], d_min: f64, beta: f64, out: &mut [f64]) -> f64 {
    let mut sum = 0.0;
    for (p, &d) in out.iter_mut().zip(dists) {
        *p = (-beta * (d - d_min)).exp();
        sum += *p;
    }
    let mut h = 0.0;
    for p in out.iter_mut() {
        *p /= sum;
        if *p > 0.0 {
            h -= *p * p.log2();
        }
    }
    h
}

/// Row-conditional Gaussian affinities `p_{j|i}` with per-row bandwidths
/// chosen so that each row has entropy `log2(perplexity)`.
///
/// Rows whose attainable entropy range does not contain the target (for
/// example when all neighbours are equidistant) take the nearest limit.
pub fn conditional_probabilities(x: &Matrix, perplexity: f64) -> Result<Matrix> {
    let m = x.rows();
    if m < 2 {
        return Err(Error::input("need at least two samples"));
    }
    if perplexity.is_nan() || perplexity <= 0.0 || perplexity >= m as f64 {
        return Err(Error::input(format!(
            "perplexity must be in (0, {m}), got {perplexity}"
        )));
    }
    let target = perplexity.log2();
    let mut cond = Matrix::zeros(m, m);
    let mut dists = vec![0.0; m - 1];
    let mut probs = vec![0.0; m - 1];
    for i in 0..m {
        let xi = x.row(i);
        for (k, j) in (0..m).filter(|&j| j != i).enumerate() {
            dists[k] = squared_distance(xi, x.row(j));
        }
        let d_min = dists.iter().copied().fold(f64::INFINITY, f64::min);
        let spread = dists.iter().copied().fold(0.0f64, f64::max) - d_min;

        let h_max = row_distribution(&dists, d_min, 0.0, &mut probs);
        let ties = dists.iter().filter(|&&d| d - d_min <= 1e-12 * (1.0 + d_min)).count();
        let h_min = (ties as f64).log2();
        if target >= h_max - ENTROPY_TOL || spread <= 0.0 {
            // uniform already
        } else if target <= h_min + ENTROPY_TOL {
            for (p, &d) in probs.iter_mut().zip(&dists) {
                *p = if d - d_min <= 1e-12 * (1.0 + d_min) { 1.0 / ties as f64 } else { 0.0 };
            }
        } else {
            // bisection on ln(beta); entropy decreases with beta
            let mut lo = (1e-3 / spread).ln();
            let mut hi = (1e3 / spread).ln();
            let mut expand = 0;
            while row_distribution(&dists, d_min, lo.exp(), &mut probs) < target {
                lo -= 5.0;
                expand += 1;
                if expand > 100 {
                    return Err(Error::Fit(format!("bandwidth search failed to bracket row {i}")));
                }
            }
            while row_distribution(&dists, d_min, hi.exp(), &mut probs) > target {
                hi += 5.0;
                expand += 1;
                if expand > 100 {
                    return Err(Error::Fit(format!("bandwidth search failed to bracket row {i}")));
                }
            }
            let mut h = f64::NAN;
            for _ in 0..BISECTION_STEPS {
                let mid = 0.5 * (lo + hi);
                h = row_distribution(&dists, d_min, mid.exp(), &mut probs);
                if (h - target).abs() <= ENTROPY_TOL * 1e-3 {
                    break;
                }
                if h > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            if (h - target).abs().is_nan() || (h - target).abs() > ENTROPY_TOL {
                return Err(Error::Fit(format!(
                    "bandwidth bisection did not converge for row {i} (entropy {h}, target {target})"
                )));
            }
        }
        for (k, j) in (0..m).filter(|&j| j != i).enumerate() {
            cond[(i, j)] = probs[k];
        }
    }
    Ok(cond)
}

/// Symmetrized joint affinities `p_ij = (p_{j|i} + p_{i|j}) / 2m`.
pub fn compute_p_matrix(x: &Matrix, perplexity: f64) -> Result<Matrix> {
    let cond = conditional_probabilities(x, perplexity)?;
    let m = x.rows();
    let mut p = Matrix::zeros(m, m);
    let denom = 2.0 * m as f64;
    for i in 0..m {
        for j in 0..m {
            if i != j {
                p[(i, j)] = (cond[(i, j)] + cond[(j, i)]) / denom;
            }
        }
    }
    Ok(p)
}

/// KL(P‖Q) with Student-t affinities over the embedding rows of `y`, and its
/// gradient with respect to every embedding point.
pub fn kl_divergence(p: &Matrix, y: &Matrix) -> Result<(f64, Matrix)> {
    let m = y.rows();
    Error::check_dim(m, p.rows())?;
    Error::check_dim(m, p.cols())?;
    let mut w = Matrix::zeros(m, m);
    let mut z = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            let v = 1.0 / (1.0 + squared_distance(y.row(i), y.row(j)));
            w[(i, j)] = v;
            w[(j, i)] = v;
            z += 2.0 * v;
        }
    }
    let ln_z = z.ln();
    let mut loss = 0.0;
    let mut grad = Matrix::zeros(m, y.cols());
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let pij = p[(i, j)];
            let wij = w[(i, j)];
            if pij > 0.0 {
                loss += pij * (pij.ln() - (wij.ln() - ln_z));
            }
            let coeff = 4.0 * (pij - wij / z) * wij;
            let (yi, yj) = (y.row(i), y.row(j));
            for (g, (a, b)) in grad.row_mut(i).iter_mut().zip(yi.iter().zip(yj)) {
                *g += coeff * (a - b);
            }
        }
    }
    Ok((loss, grad))
}

fn embed(net: &Mlp, x: &Matrix) -> Result<Matrix> {
    let mut y = Matrix::zeros(x.rows(), net.output_dim());
    for (i, row) in x.iter_rows().enumerate() {
        y.row_mut(i).copy_from_slice(&net.forward(row)?);
    }
    Ok(y)
}

/// Parametric t-SNE: trains `net: d → hidden… → d_out` on KL(P‖Q) by
/// full-batch Adam steps that are only accepted when the loss does not
/// increase (a rejected step halves the learning rate).
pub fn fit_ptsne(
    x: &Matrix,
    d_out: usize,
    hidden: &[usize],
    perplexity: f64,
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<PtsneProjector> {
    let d = x.cols();
    if d_out == 0 || d_out >= d {
        return Err(Error::input(format!("output dimension must be in [1, {d})")));
    }
    if hidden.contains(&0) {
        return Err(Error::input("hidden layer sizes must be at least 1"));
    }
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::input("learning rate must be positive"));
    }
    let p = compute_p_matrix(x, perplexity)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims: Vec<usize> = std::iter::once(d)
        .chain(hidden.iter().copied())
        .chain(std::iter::once(d_out))
        .collect();
    let mut net = Mlp::random(&dims, Activation::Tanh, Activation::Identity, &mut rng)?;
    let mut params = net.flat_params();
    let mut adam = Adam::new(params.len(), lr);

    let (mut loss, mut dy) = kl_divergence(&p, &embed(&net, x)?)?;
    let mut history = vec![loss];
    for epoch in 1..=epochs {
        let mut sink = net.zero_gradients().layers;
        for (i, row) in x.iter_rows().enumerate() {
            net.accumulate_grad(row, dy.row(i), &mut sink)?;
        }
        let grad: Vec<f64> = sink
            .iter()
            .flat_map(|g| g.weights.as_slice().iter().chain(g.bias.iter()).copied())
            .collect();
        let step = adam.direction(&grad);
        let trial: Vec<f64> = params.iter().zip(&step).map(|(a, s)| a - s).collect();
        net.set_flat_params(&trial)?;
        let (trial_loss, trial_dy) = kl_divergence(&p, &embed(&net, x)?)?;
        if !trial_loss.is_finite() && !loss.is_finite() {
            return Err(Error::Fit(format!("t-SNE loss became non-finite at epoch {epoch}")));
        }
        if trial_loss.is_finite() && trial_loss <= loss {
            params = trial;
            loss = trial_loss;
            dy = trial_dy;
        } else {
            net.set_flat_params(&params)?;
            adam.lr *= 0.5;
            adam.reset_moments();
        }
        history.push(loss);
    }

    Ok(PtsneProjector {
        net,
        perplexity,
        training: NeuralTraining {
            epochs,
            learning_rate: lr,
            seed,
            loss_history: history,
        },
    })
}
