//! Minimal feed-forward networks with exact reverse-mode gradients, and the
//! two neural projectors built on them (autoencoder, parametric t-SNE).

mod autoencoder;
mod mlp;
mod tsne;

pub use autoencoder::{fit_autoencoder, AutoencoderProjector};
pub use mlp::{Activation, Adam, Layer, LayerGradient, Mlp, MlpGradients, MLP_FORMAT_VERSION};
pub use tsne::{compute_p_matrix, default_perplexity, fit_ptsne, kl_divergence, PtsneProjector};

use serde::{Deserialize, Serialize};

/// Bookkeeping recorded by neural fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeuralTraining {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Training loss after each epoch (index 0 is the untrained model).
    pub loss_history: Vec<f64>,
}
