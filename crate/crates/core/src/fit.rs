//! Declarative projector hyperparameters, shared by the benchmark runner and
//! the command-line front end.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::linalg::Matrix;
use crate::linear::fit_pca;
use crate::neural::{default_perplexity, fit_autoencoder, fit_ptsne};
use crate::projector::Projector;
use crate::som::fit_som;

fn two() -> usize {
    2
}

/// Which projector to fit and how. Serialized with a `method` tag
/// (`linear`, `som`, `ae`, `ptsne`); omitted fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ProjectorConfig {
    Linear {
        #[serde(default = "two")]
        d_out: usize,
    },
    Som {
        #[serde(default = "SomDefaults::side")]
        height: usize,
        #[serde(default = "SomDefaults::side")]
        width: usize,
        #[serde(default = "SomDefaults::epochs")]
        epochs: usize,
        #[serde(default = "SomDefaults::learning_rate")]
        learning_rate: f64,
        /// Initial neighborhood radius; half the longer grid side when absent.
        #[serde(default)]
        radius: Option<f64>,
    },
    #[serde(rename = "ae")]
    Autoencoder {
        #[serde(default = "two")]
        d_out: usize,
        #[serde(default = "AeDefaults::hidden")]
        hidden: Vec<usize>,
        #[serde(default = "AeDefaults::epochs")]
        epochs: usize,
        #[serde(default = "NetDefaults::learning_rate")]
        learning_rate: f64,
    },
    #[serde(rename = "ptsne")]
    ParametricTsne {
        #[serde(default = "two")]
        d_out: usize,
        #[serde(default = "TsneDefaults::hidden")]
        hidden: Vec<usize>,
        /// Defaults to 30, clamped for small datasets.
        #[serde(default)]
        perplexity: Option<f64>,
        #[serde(default = "TsneDefaults::epochs")]
        epochs: usize,
        #[serde(default = "NetDefaults::learning_rate")]
        learning_rate: f64,
    },
}

struct SomDefaults;
impl SomDefaults {
    fn side() -> usize {
        8
    }
    fn epochs() -> usize {
        20
    }
    fn learning_rate() -> f64 {
        0.5
    }
}

struct AeDefaults;
impl AeDefaults {
    fn hidden() -> Vec<usize> {
        vec![16]
    }
    fn epochs() -> usize {
        100
    }
}

struct TsneDefaults;
impl TsneDefaults {
    fn hidden() -> Vec<usize> {
        vec![32, 32]
    }
    fn epochs() -> usize {
        200
    }
}

struct NetDefaults;
impl NetDefaults {
    fn learning_rate() -> f64 {
        0.01
    }
}

impl ProjectorConfig {
    /// Default configuration for a method name (`linear`, `som`, `ae`, `ptsne`).
    pub fn from_method(method: &str) -> Option<Self> {
        serde_json::from_value(serde_json::json!({ "method": method })).ok()
    }

    pub fn method(&self) -> &'static str {
        match self {
            ProjectorConfig::Linear { .. } => "linear",
            ProjectorConfig::Som { .. } => "som",
            ProjectorConfig::Autoencoder { .. } => "ae",
            ProjectorConfig::ParametricTsne { .. } => "ptsne",
        }
    }

    /// Fits the configured projector on standardized samples.
    pub fn fit(&self, x: &Matrix, seed: u64) -> Result<Projector> {
        Ok(match self {
            ProjectorConfig::Linear { d_out } => Projector::Linear(fit_pca(x, *d_out)?),
            ProjectorConfig::Som {
                height,
                width,
                epochs,
                learning_rate,
                radius,
            } => {
                let r0 = radius.unwrap_or((*height.max(width) as f64 / 2.0).max(1.0));
                Projector::Som(fit_som(x, *height, *width, *epochs, *learning_rate, r0, seed)?)
            }
            ProjectorConfig::Autoencoder {
                d_out,
                hidden,
                epochs,
                learning_rate,
            } => Projector::Autoencoder(fit_autoencoder(x, *d_out, hidden, *epochs, *learning_rate, seed)?),
            ProjectorConfig::ParametricTsne {
                d_out,
                hidden,
                perplexity,
                epochs,
                learning_rate,
            } => {
                let perp = perplexity.unwrap_or_else(|| default_perplexity(x.rows()));
                Projector::ParametricTsne(fit_ptsne(x, *d_out, hidden, perp, *epochs, *learning_rate, seed)?)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projector::ProjectorKind;

    #[test]
    fn method_names_round_trip() {
        for m in ["linear", "som", "ae", "ptsne"] {
            let cfg = ProjectorConfig::from_method(m).unwrap();
            assert_eq!(cfg.method(), m);
            let back: ProjectorConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
            assert_eq!(back, cfg);
        }
        assert!(ProjectorConfig::from_method("umap").is_none());
    }

    #[test]
    fn defaults_are_filled_in() {
        let cfg: ProjectorConfig = serde_json::from_str(r#"{"method":"som","epochs":3}"#).unwrap();
        assert_eq!(
            cfg,
            ProjectorConfig::Som {
                height: 8,
                width: 8,
                epochs: 3,
                learning_rate: 0.5,
                radius: None
            }
        );
    }

    #[test]
    fn fits_each_kind() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let t = i as f64 / 10.0;
                vec![t, (3.0 * t).sin(), t * t - 1.0, (t + 0.3).cos()]
            })
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let cfgs = [
            (r#"{"method":"linear"}"#, ProjectorKind::Linear),
            (r#"{"method":"som","height":3,"width":3,"epochs":2}"#, ProjectorKind::Som),
            (r#"{"method":"ae","epochs":2}"#, ProjectorKind::Autoencoder),
            (r#"{"method":"ptsne","epochs":2,"hidden":[4]}"#, ProjectorKind::ParametricTsne),
        ];
        for (json, kind) in cfgs {
            let cfg: ProjectorConfig = serde_json::from_str(json).unwrap();
            let p = cfg.fit(&x, 7).unwrap();
            assert_eq!(p.kind(), kind);
            assert_eq!(p.input_dim(), 4);
            assert_eq!(p.output_dim(), 2);
        }
    }
}
