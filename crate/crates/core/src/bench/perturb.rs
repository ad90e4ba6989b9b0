//! Seeded perturbations of a few features, used to plant known changes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationKind {
    None,
    /// add a constant to each picked feature
    Shift,
    /// add independent `N(0, noise_std²)` noise to each picked feature
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub n_features: usize,
    pub shift_const: f64,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self {
            kind: PerturbationKind::None,
            n_features: 3,
            shift_const: 2.0,
            noise_std: 1.0,
            seed: 0,
        }
    }
}

impl PerturbationSpec {
    pub fn shift(shift_const: f64) -> Self {
        Self {
            kind: PerturbationKind::Shift,
            shift_const,
            ..Self::default()
        }
    }

    pub fn gaussian(noise_std: f64) -> Self {
        Self {
            kind: PerturbationKind::Gaussian,
            noise_std,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        if self.kind == PerturbationKind::None {
            return Ok(());
        }
        if self.n_features == 0 || self.n_features >= d {
            return Err(Error::input(format!(
                "perturbation must touch between 1 and {} features, got {}",
                d.saturating_sub(1),
                self.n_features
            )));
        }
        if !self.shift_const.is_finite() || !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::input("perturbation parameters must be finite and noise_std >= 0"));
        }
        Ok(())
    }
}

/// Applies `spec` to `n_features` distinct features picked with `spec.seed`.
/// Returns the perturbed vector and the sorted picked indices.
pub fn perturb(x: &[f64], spec: &PerturbationSpec) -> Result<(Vec<f64>, Vec<usize>)> {
    if spec.kind == PerturbationKind::None {
        return Err(Error::input("perturbation kind is none"));
    }
    spec.validate(x.len())?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut picked = rand::seq::index::sample(&mut rng, x.len(), spec.n_features).into_vec();
    picked.sort_unstable();
    let mut out = x.to_vec();
    match spec.kind {
        PerturbationKind::Shift => {
            for &j in &picked {
                out[j] += spec.shift_const;
            }
        }
        PerturbationKind::Gaussian => {
            let noise = Normal::new(0.0, spec.noise_std).map_err(|e| Error::input(e.to_string()))?;
            for &j in &picked {
                out[j] += noise.sample(&mut rng);
            }
        }
        PerturbationKind::None => unreachable!(),
    }
    Ok((out, picked))
}
