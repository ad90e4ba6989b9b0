//! Single-counterfactual solvers for each projector family.
//!
//! Every solver minimizes an L1 closeness term to the original sample plus a
//! method-specific penalty, through the shared proximal-gradient core in
//! [`prox`]. Black-listed features are honoured bit-exactly.

mod blacklist;
mod linear;
mod neural;
pub mod prox;
mod som;

pub use blacklist::{BlacklistConstraint, BlacklistMode};
pub use linear::{cf_linear, LinearPenalty};
pub use neural::{cf_neural, NeuralPenalty};
pub use prox::{prox_l1, solve_l1_smooth, SmoothTerm, SolveOutcome};
pub use som::{cf_som, HingePenalty};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{all_finite, l0_count};
use crate::projector::{Mapping, Projector};

/// Numerical knobs shared by every solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    /// Stop once accepted steps improve the objective by less than this.
    pub tol_obj: f64,
    pub max_iter: usize,
    /// SOM margin: the target prototype must be closer by at least this much (squared).
    pub epsilon: f64,
    /// Smoothing constant of the 2-norm penalty used by neural solvers.
    pub kappa: f64,
    /// A feature counts as changed when `|delta| > change_tol`.
    pub change_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol_obj: 1e-8,
            max_iter: 5000,
            epsilon: 1e-3,
            kappa: 1e-8,
            change_tol: 1e-6,
        }
    }
}

/// "Why is `x_orig` mapped here and not at `y_cf`?"
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CfRequest {
    pub x_orig: Vec<f64>,
    pub y_cf: Mapping,
    /// Features the counterfactual may not change, in black-listing order.
    #[serde(default)]
    pub blacklist: Vec<usize>,
    /// Regularization strength of the mapping penalty.
    #[serde(default = "default_c")]
    pub c: f64,
    #[serde(default)]
    pub solver: SolverOptions,
}

fn default_c() -> f64 {
    1.0
}

impl CfRequest {
    pub fn new(x_orig: Vec<f64>, y_cf: Mapping) -> Self {
        Self {
            x_orig,
            y_cf,
            blacklist: Vec::new(),
            c: default_c(),
            solver: SolverOptions::default(),
        }
    }

    pub fn with_blacklist(mut self, blacklist: Vec<usize>) -> Self {
        self.blacklist = blacklist;
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_solver(mut self, solver: SolverOptions) -> Self {
        self.solver = solver;
        self
    }

    pub fn dim(&self) -> usize {
        self.x_orig.len()
    }

    /// Checks the request invariants (`C > 0`, distinct in-range black-list
    /// leaving at least one free feature, finite input).
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if d == 0 || !all_finite(&self.x_orig) {
            return Err(Error::input("x_orig must be a non-empty finite vector"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::input(format!("C must be positive, got {}", self.c)));
        }
        let mut seen = vec![false; d];
        for &j in &self.blacklist {
            if j >= d {
                return Err(Error::input(format!("black-listed feature {j} out of range 0..{d}")));
            }
            if std::mem::replace(&mut seen[j], true) {
                return Err(Error::input(format!("feature {j} black-listed twice")));
            }
        }
        if self.blacklist.len() >= d {
            return Err(Error::input("black-list must leave at least one free feature"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counterfactual {
    pub x_cf: Vec<f64>,
    /// `x_cf − x_orig`; `x_orig + delta` reproduces `x_cf` exactly.
    pub delta: Vec<f64>,
    pub y_achieved: Mapping,
    pub map_error: f64,
    pub changed_features: Vec<usize>,
}

impl Counterfactual {
    /// Packages a solver result. Each coordinate of `x_cf` is nudged (by at
    /// most a few ulps) so that the delta round-trips exactly in floating point.
    pub fn new(
        x_orig: &[f64],
        x_cf: Vec<f64>,
        project: impl FnOnce(&[f64]) -> Result<Mapping>,
        target: &Mapping,
        change_tol: f64,
    ) -> Result<Self> {
        Error::check_dim(x_orig.len(), x_cf.len())?;
        let mut x_cf = x_cf;
        let mut delta = vec![0.0; x_cf.len()];
        for j in 0..x_cf.len() {
            let (v, dj) = exact_offset(x_orig[j], x_cf[j]);
            x_cf[j] = v;
            delta[j] = dj;
        }
        let y_achieved = project(&x_cf)?;
        if let Mapping::Point(p) = &y_achieved {
            if !all_finite(p) {
                return Err(Error::Solver {
                    iteration: 0,
                    message: "projection of the counterfactual is not finite".into(),
                });
            }
        }
        let map_error = y_achieved.distance(target)?;
        let changed_features = changed(&delta, change_tol);
        Ok(Self {
            x_cf,
            delta,
            y_achieved,
            map_error,
            changed_features,
        })
    }

    pub fn n_changed(&self) -> usize {
        self.changed_features.len()
    }

    pub fn l0(&self, tol: f64) -> usize {
        l0_count(&self.delta, tol)
    }
}

fn changed(delta: &[f64], tol: f64) -> Vec<usize> {
    delta
        .iter()
        .enumerate()
        .filter(|(_, d)| d.abs() > tol)
        .map(|(j, _)| j)
        .collect()
}

/// Finds `v ≈ target` with `(v − anchor) + anchor == v` in floating point.
fn exact_offset(anchor: f64, target: f64) -> (f64, f64) {
    let mut v = target;
    for _ in 0..8 {
        let next = anchor + (v - anchor);
        if next == v {
            break;
        }
        v = next;
    }
    (v, v - anchor)
}

/// Computes one counterfactual, dispatching on the projector family.
pub fn counterfactual(projector: &Projector, req: &CfRequest) -> Result<Counterfactual> {
    req.validate()?;
    Error::check_dim(projector.input_dim(), req.dim())?;
    projector.validate_target(&req.y_cf)?;
    match projector {
        Projector::Linear(p) => cf_linear(p, req),
        Projector::Som(s) => cf_som(s, req),
        Projector::Autoencoder(a) => cf_neural(&a.encoder, req),
        Projector::ParametricTsne(t) => cf_neural(&t.net, req),
    }
}
