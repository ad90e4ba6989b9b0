//! The fitted dimensionality-reduction mapping shared by every solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, euclidean_distance};
use crate::linear::LinearProjector;
use crate::neural::{AutoencoderProjector, Mlp, PtsneProjector};
use crate::som::{GridIndex, Som};

/// Output of a projection, or a requested target location.
///
/// Continuous projectors produce points; a SOM produces grid cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Mapping {
    Point(Vec<f64>),
    Cell(GridIndex),
}

impl Mapping {
    /// Euclidean distance between two points, or between two grid cells.
    pub fn distance(&self, other: &Mapping) -> Result<f64> {
        match (self, other) {
            (Mapping::Point(a), Mapping::Point(b)) => {
                Error::check_dim(a.len(), b.len())?;
                Ok(euclidean_distance(a, b))
            }
            (Mapping::Cell(a), Mapping::Cell(b)) => Ok(a.distance(b)),
            _ => Err(Error::input("cannot compare a grid cell with a continuous point")),
        }
    }

    pub fn as_point(&self) -> Option<&[f64]> {
        match self {
            Mapping::Point(p) => Some(p),
            Mapping::Cell(_) => None,
        }
    }

    pub fn as_cell(&self) -> Option<GridIndex> {
        match self {
            Mapping::Cell(c) => Some(*c),
            Mapping::Point(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorKind {
    Linear,
    Som,
    Autoencoder,
    ParametricTsne,
}

impl std::fmt::Display for ProjectorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProjectorKind::Linear => "linear",
            ProjectorKind::Som => "som",
            ProjectorKind::Autoencoder => "autoencoder",
            ProjectorKind::ParametricTsne => "parametric_tsne",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "model", rename_all = "snake_case")]
pub enum Projector {
    Linear(LinearProjector),
    Som(Som),
    Autoencoder(AutoencoderProjector),
    ParametricTsne(PtsneProjector),
}

impl Projector {
    pub fn kind(&self) -> ProjectorKind {
        match self {
            Projector::Linear(_) => ProjectorKind::Linear,
            Projector::Som(_) => ProjectorKind::Som,
            Projector::Autoencoder(_) => ProjectorKind::Autoencoder,
            Projector::ParametricTsne(_) => ProjectorKind::ParametricTsne,
        }
    }

    pub fn input_dim(&self) -> usize {
        match self {
            Projector::Linear(p) => p.input_dim(),
            Projector::Som(s) => s.input_dim(),
            Projector::Autoencoder(a) => a.encoder.input_dim(),
            Projector::ParametricTsne(t) => t.net.input_dim(),
        }
    }

    /// Dimension of the embedding; a SOM's index set is two-dimensional.
    pub fn output_dim(&self) -> usize {
        match self {
            Projector::Linear(p) => p.output_dim(),
            Projector::Som(_) => 2,
            Projector::Autoencoder(a) => a.encoder.output_dim(),
            Projector::ParametricTsne(t) => t.net.output_dim(),
        }
    }

    pub fn project(&self, x: &[f64]) -> Result<Mapping> {
        Error::check_dim(self.input_dim(), x.len())?;
        if !all_finite(x) {
            return Err(Error::input("input contains non-finite entries"));
        }
        Ok(match self {
            Projector::Linear(p) => Mapping::Point(p.project(x)?),
            Projector::Som(s) => Mapping::Cell(s.project(x)?),
            Projector::Autoencoder(a) => Mapping::Point(a.encode(x)?),
            Projector::ParametricTsne(t) => Mapping::Point(t.project(x)?),
        })
    }

    /// The differentiable network behind neural projectors.
    pub fn network(&self) -> Option<&Mlp> {
        match self {
            Projector::Autoencoder(a) => Some(&a.encoder),
            Projector::ParametricTsne(t) => Some(&t.net),
            _ => None,
        }
    }

    /// Checks that `target` has the shape this projector produces.
    pub fn validate_target(&self, target: &Mapping) -> Result<()> {
        match (self, target) {
            (Projector::Som(s), Mapping::Cell(c)) => s.flat_index(*c).map(|_| ()),
            (Projector::Som(_), Mapping::Point(_)) => {
                Err(Error::input("SOM targets must be grid indices"))
            }
            (_, Mapping::Point(p)) => {
                Error::check_dim(self.output_dim(), p.len())?;
                if all_finite(p) {
                    Ok(())
                } else {
                    Err(Error::input("target contains non-finite entries"))
                }
            }
            (_, Mapping::Cell(_)) => Err(Error::input(
                "grid-index targets are only valid for SOM projectors",
            )),
        }
    }
}
