use super::prox::{solve_l1_smooth, SmoothTerm};
use super::{CfRequest, Counterfactual};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::projector::Mapping;
use crate::som::{GridIndex, Som};

const MU_START: f64 = 10.0;
const MU_MAX: f64 = 1e12;

/// `μ · Σ_z max(0, aᵀ_z x − c_z)²` over the half-spaces
/// `2(p_z − p_t)ᵀ x ≤ ‖p_z‖² − ‖p_t‖² − margin`, one per non-target cell.
pub struct HingePenalty {
    normals: Matrix,
    offsets: Vec<f64>,
    pub mu: f64,
}

impl HingePenalty {
    pub fn new(som: &Som, target: GridIndex, margin: f64, mu: f64) -> Result<Self> {
        let t = som.flat_index(target)?;
        let pt = som.prototypes.row(t);
        let pt2 = dot(pt, pt);
        let d = som.input_dim();
        let mut normals = Matrix::zeros(som.n_cells() - 1, d);
        let mut offsets = Vec::with_capacity(som.n_cells() - 1);
        let mut r = 0;
        for (z, pz) in som.prototypes.iter_rows().enumerate() {
            if z == t {
                continue;
            }
            for (n, (a, b)) in normals.row_mut(r).iter_mut().zip(pz.iter().zip(pt)) {
                *n = 2.0 * (a - b);
            }
            offsets.push(dot(pz, pz) - pt2 - margin);
            r += 1;
        }
        Ok(Self {
            normals,
            offsets,
            mu,
        })
    }

    /// Constraint values `aᵀ_z x − c_z`; feasible when all are ≤ 0.
    pub fn violations(&self, x: &[f64]) -> Vec<f64> {
        self.normals
            .iter_rows()
            .zip(&self.offsets)
            .map(|(a, c)| dot(a, x) - c)
            .collect()
    }
}

impl SmoothTerm for HingePenalty {
    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.mu * self.violations(x).iter().map(|v| v.max(0.0).powi(2)).sum::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.value_and_gradient(x).map(|(_, g)| g)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let mut g = vec![0.0; x.len()];
        let mut f = 0.0;
        for (a, c) in self.normals.iter_rows().zip(&self.offsets) {
            let v = dot(a, x) - c;
            if v > 0.0 {
                f += v * v;
                crate::linalg::axpy(2.0 * self.mu * v, a, &mut g);
            }
        }
        Ok((self.mu * f, g))
    }
}

/// `argmin ‖x − x_cf‖₁` subject to the target prototype being closer (by the
/// margin ε) than every other prototype, black-listed features held fixed.
///
/// Solved by a hinge-penalty homotopy: μ doubles from 10 until the iterate
/// satisfies every ε-constraint. The penalty uses a margin of 2ε so that
/// the small residual violation left by any finite μ still lands inside the
/// ε-feasible set.
pub fn cf_som(som: &Som, req: &CfRequest) -> Result<Counterfactual> {
    req.validate()?;
    Error::check_dim(som.input_dim(), req.dim())?;
    let target = req
        .y_cf
        .as_cell()
        .ok_or_else(|| Error::input("SOM counterfactuals need a grid-index target"))?;
    som.flat_index(target)?;
    let eps = req.solver.epsilon;
    if eps.is_nan() || eps <= 0.0 {
        return Err(Error::input("SOM margin epsilon must be positive"));
    }
    let project = |x: &[f64]| som.project(x).map(Mapping::Cell);
    let finish = |x: Vec<f64>| {
        Counterfactual::new(&req.x_orig, x, project, &req.y_cf, req.solver.change_tol)
    };

    if som.project(&req.x_orig)? == target {
        return finish(req.x_orig.clone());
    }

    let check = HingePenalty::new(som, target, eps, 0.0)?;
    let mut penalty = HingePenalty::new(som, target, 2.0 * eps, MU_START)?;
    let mut x = req.x_orig.clone();
    while penalty.mu <= MU_MAX {
        let out = solve_l1_smooth(&penalty, &x, &req.x_orig, &req.blacklist, &req.solver)?;
        x = out.x;
        let feasible = check.violations(&x).iter().all(|&v| v <= 0.0);
        if feasible && som.project(&x)? == target {
            return finish(x);
        }
        penalty.mu *= 2.0;
    }
    let worst = check
        .violations(&x)
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Err(Error::Infeasible {
        message: format!(
            "cannot move sample into cell {target} with the given black-list (worst violation {worst:.3e})"
        ),
        best: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf::SolverOptions;

    fn pair() -> Som {
        Som::from_prototypes(1, 2, Matrix::from_rows(&[vec![0.0, 0.0], vec![10.0, 0.0]]).unwrap()).unwrap()
    }

    #[test]
    fn already_in_target_cell() {
        let req = CfRequest::new(vec![1.0, 0.3], Mapping::Cell(GridIndex::new(0, 0)));
        let cf = cf_som(&pair(), &req).unwrap();
        assert_eq!(cf.x_cf, vec![1.0, 0.3]);
        assert_eq!(cf.map_error, 0.0);
    }

    #[test]
    fn moves_to_the_half_space_boundary() {
        let eps = SolverOptions::default().epsilon;
        let req = CfRequest::new(vec![1.0, 0.0], Mapping::Cell(GridIndex::new(0, 1)));
        let cf = cf_som(&pair(), &req).unwrap();
        // −20 x₁ + 100 ≤ −ε  ⇒  x₁ ≥ 5 + ε/20
        assert!((cf.x_cf[0] - (5.0 + eps / 20.0)).abs() <= 1e-3, "{:?}", cf.x_cf);
        assert_eq!(cf.x_cf[1], 0.0);
        assert_eq!(cf.y_achieved, Mapping::Cell(GridIndex::new(0, 1)));
        assert_eq!(cf.changed_features, vec![0]);
    }

    #[test]
    fn pinning_the_discriminating_feature_is_infeasible() {
        let req = CfRequest::new(vec![1.0, 0.0], Mapping::Cell(GridIndex::new(0, 1))).with_blacklist(vec![0]);
        match cf_som(&pair(), &req) {
            Err(Error::Infeasible { best, .. }) => assert_eq!(best[0], 1.0),
            other => panic!("expected infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn rejects_point_targets() {
        let req = CfRequest::new(vec![1.0, 0.0], Mapping::Point(vec![1.0, 1.0]));
        assert!(cf_som(&pair(), &req).is_err());
    }
}
