//! Counterfactual explanations for dimensionality-reduction projections.
//!
//! A fitted [`Projector`] maps feature vectors to a low-dimensional view
//! (a point for linear, autoencoder and parametric t-SNE models, a grid cell
//! for self-organizing maps). Given a sample `x` and a target location
//! `y_cf`, [`counterfactual`] finds a sparse change `x_cf − x` whose
//! projection lands at `y_cf`; [`diverse_counterfactuals`] returns several
//! such changes touching disjoint feature sets, and [`aggregate_attribution`]
//! turns many of them into a per-feature importance profile.
//!
//! ```
//! use dimcf::{counterfactual, fit_pca, CfRequest, Mapping, Matrix, Projector};
//!
//! let x = Matrix::from_rows(&[
//!     vec![0.0, 1.0, 0.2],
//!     vec![1.0, 0.1, 0.0],
//!     vec![2.0, 0.9, 0.1],
//!     vec![3.0, 0.0, 0.3],
//! ])?;
//! let pca = Projector::Linear(fit_pca(&x, 1)?);
//! let req = CfRequest::new(vec![0.0, 1.0, 0.2], Mapping::Point(vec![1.0])).with_c(100.0);
//! let cf = counterfactual(&pca, &req)?;
//! assert!(cf.map_error < 0.05);
//! # Ok::<(), dimcf::Error>(())
//! ```

pub mod bench;
pub mod cf;
pub mod dataset;
pub mod diverse;
pub mod error;
pub mod fit;
pub mod linalg;
pub mod linear;
pub mod neural;
pub mod projector;
pub mod som;

pub use cf::{counterfactual, BlacklistMode, CfRequest, Counterfactual, SolverOptions};
pub use dataset::{Dataset, FeatureScale};
pub use diverse::{
    aggregate_attribution, diverse_counterfactuals, diversity, model_agnostic_diverse, Attribution,
    BaselineWeights, ExplanationSet,
};
pub use error::{Error, Result};
pub use fit::ProjectorConfig;
pub use linalg::Matrix;
pub use linear::{fit_pca, LinearProjector};
pub use neural::{
    fit_autoencoder, fit_ptsne, Activation, AutoencoderProjector, Mlp, NeuralTraining, PtsneProjector,
};
pub use projector::{Mapping, Projector, ProjectorKind};
pub use som::{fit_som, GridIndex, Som};
