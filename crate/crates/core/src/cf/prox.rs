//! Proximal-gradient core: minimizes `‖x − x_orig‖₁ + smooth(x)`.

use crate::error::{Error, Result};
use crate::linalg::{dot, l1_norm, squared_distance};

use super::SolverOptions;

/// A differentiable penalty added to the L1 closeness term.
pub trait SmoothTerm {
    fn value(&self, x: &[f64]) -> Result<f64>;

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        Ok((self.value(x)?, self.gradient(x)?))
    }

    /// Upper bound on the gradient's Lipschitz constant, used as the first step size.
    fn lipschitz_estimate(&self) -> Option<f64> {
        None
    }
}

/// The zero function; the composite problem then reduces to pure L1 around the anchor.
#[derive(Debug, Clone, Copy)]
pub struct ZeroTerm;

impl SmoothTerm for ZeroTerm {
    fn value(&self, _x: &[f64]) -> Result<f64> {
        Ok(0.0)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(vec![0.0; x.len()])
    }
}

/// Soft-thresholding around `anchor`: the prox of `t‖· − anchor‖₁`.
pub fn prox_l1(v: &[f64], anchor: &[f64], t: f64) -> Vec<f64> {
    v.iter()
        .zip(anchor)
        .map(|(&vi, &ai)| ai + soft_threshold(vi - ai, t))
        .collect()
}

#[inline]
pub fn soft_threshold(u: f64, t: f64) -> f64 {
    if u > t {
        u - t
    } else if u < -t {
        u + t
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub x: Vec<f64>,
    /// Composite objective at `x`.
    pub objective: f64,
    pub iterations: usize,
    /// Composite objective of every accepted iterate, starting with `x0`.
    pub history: Vec<f64>,
    pub converged: bool,
}

fn pin(x: &mut [f64], anchor: &[f64], pinned: &[usize]) {
    for &j in pinned {
        x[j] = anchor[j];
    }
}

/// Accelerated proximal gradient with backtracking and monotone restarts.
///
/// Coordinates listed in `pinned` are held at `x_orig` exactly. An
/// extrapolated step that would increase the objective is discarded and the
/// momentum restarted, so accepted iterates never increase the objective.
/// Stops after three consecutive accepted steps that each decrease the
/// objective by less than `opts.tol_obj`, or after `opts.max_iter` iterations.
pub fn solve_l1_smooth(
    smooth: &dyn SmoothTerm,
    x0: &[f64],
    x_orig: &[f64],
    pinned: &[usize],
    opts: &SolverOptions,
) -> Result<SolveOutcome> {
    Error::check_dim(x_orig.len(), x0.len())?;
    if let Some(&j) = pinned.iter().find(|&&j| j >= x_orig.len()) {
        return Err(Error::input(format!("pinned feature {j} out of range")));
    }
    let composite = |f: f64, x: &[f64]| f + l1_norm_diff(x, x_orig);

    let mut x = x0.to_vec();
    pin(&mut x, x_orig, pinned);
    let f0 = smooth.value(&x)?;
    let mut obj = composite(f0, &x);
    if !obj.is_finite() {
        return Err(Error::Solver {
            iteration: 0,
            message: "objective is not finite at the starting point".into(),
        });
    }
    let mut history = vec![obj];
    let mut lip = smooth
        .lipschitz_estimate()
        .filter(|l| l.is_finite() && *l > 0.0)
        .unwrap_or(1.0);
    let mut y = x.clone();
    let mut momentum: f64 = 1.0;
    let mut small_steps = 0;
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let (fy, mut gy) = smooth.value_and_gradient(&y)?;
        if !fy.is_finite() || gy.iter().any(|g| !g.is_finite()) {
            return Err(Error::Solver {
                iteration: iterations,
                message: "non-finite smooth term or gradient".into(),
            });
        }
        for &j in pinned {
            gy[j] = 0.0;
        }

        let (z, fz) = loop {
            let step = 1.0 / lip;
            let v: Vec<f64> = y.iter().zip(&gy).map(|(yi, gi)| yi - step * gi).collect();
            let mut z = prox_l1(&v, x_orig, step);
            pin(&mut z, x_orig, pinned);
            let fz = smooth.value(&z)?;
            let diff: Vec<f64> = z.iter().zip(&y).map(|(a, b)| a - b).collect();
            let model = fy + dot(&gy, &diff) + 0.5 * lip * squared_distance(&z, &y);
            if fz.is_finite() && fz <= model + 1e-12 * fy.abs().max(1.0) {
                break (z, fz);
            }
            lip *= 2.0;
            if !lip.is_finite() || lip > 1e300 {
                return Err(Error::Solver {
                    iteration: iterations,
                    message: "step size underflow in backtracking".into(),
                });
            }
        };

        let new_obj = composite(fz, &z);
        if !new_obj.is_finite() {
            return Err(Error::Solver {
                iteration: iterations,
                message: "objective became non-finite".into(),
            });
        }
        if new_obj > obj {
            if y != x {
                // extrapolation overshot: restart momentum from the last accepted point
                y.clone_from(&x);
                momentum = 1.0;
                continue;
            }
            // plain step cannot decrease any further
            converged = true;
            break;
        }

        let decrease = obj - new_obj;
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        y = z
            .iter()
            .zip(&x)
            .map(|(zi, xi)| zi + beta * (zi - xi))
            .collect();
        pin(&mut y, x_orig, pinned);
        momentum = next_momentum;
        x = z;
        obj = new_obj;
        history.push(obj);
        lip *= 0.9;

        if decrease < opts.tol_obj {
            small_steps += 1;
            if small_steps >= 3 {
                converged = true;
                break;
            }
        } else {
            small_steps = 0;
        }
    }

    Ok(SolveOutcome {
        x,
        objective: obj,
        iterations,
        history,
        converged,
    })
}

fn l1_norm_diff(x: &[f64], anchor: &[f64]) -> f64 {
    l1_norm(&x.iter().zip(anchor).map(|(a, b)| a - b).collect::<Vec<_>>())
}
