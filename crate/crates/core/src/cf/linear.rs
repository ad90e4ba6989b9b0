use super::prox::{solve_l1_smooth, SmoothTerm};
use super::{CfRequest, Counterfactual};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot};
use crate::linear::LinearProjector;
use crate::projector::Mapping;

/// `C · ‖A x + b − y_cf‖₂²`
pub struct LinearPenalty<'a> {
    projector: &'a LinearProjector,
    target: &'a [f64],
    c: f64,
}

impl<'a> LinearPenalty<'a> {
    pub fn new(projector: &'a LinearProjector, target: &'a [f64], c: f64) -> Result<Self> {
        Error::check_dim(projector.output_dim(), target.len())?;
        Ok(Self {
            projector,
            target,
            c,
        })
    }

    fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut r = self.projector.project(x)?;
        for (ri, yi) in r.iter_mut().zip(self.target) {
            *ri -= yi;
        }
        Ok(r)
    }
}

impl SmoothTerm for LinearPenalty<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let r = self.residual(x)?;
        Ok(self.c * dot(&r, &r))
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.value_and_gradient(x).map(|(_, g)| g)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let r = self.residual(x)?;
        let mut g = self.projector.a.tr_mul_vec(&r)?;
        g.iter_mut().for_each(|v| *v *= 2.0 * self.c);
        Ok((self.c * dot(&r, &r), g))
    }

    fn lipschitz_estimate(&self) -> Option<f64> {
        let fro2: f64 = self.projector.a.as_slice().iter().map(|v| v * v).sum();
        Some(2.0 * self.c * fro2)
    }
}

/// `argmin ‖x − x_cf‖₁ + C ‖A x_cf + b − y_cf‖₂²` with black-listed features
/// held fixed.
pub fn cf_linear(p: &LinearProjector, req: &CfRequest) -> Result<Counterfactual> {
    req.validate()?;
    Error::check_dim(p.input_dim(), req.dim())?;
    let target = req
        .y_cf
        .as_point()
        .ok_or_else(|| Error::input("linear projector needs a point target"))?;
    if !all_finite(target) {
        return Err(Error::input("target contains non-finite entries"));
    }
    let penalty = LinearPenalty::new(p, target, req.c)?;
    let out = solve_l1_smooth(&penalty, &req.x_orig, &req.x_orig, &req.blacklist, &req.solver)?;
    Counterfactual::new(
        &req.x_orig,
        out.x,
        |x| p.project(x).map(Mapping::Point),
        &req.y_cf,
        req.solver.change_tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;

    fn first_axis() -> LinearProjector {
        LinearProjector::new(Matrix::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap(), vec![0.0]).unwrap()
    }

    #[test]
    fn already_at_target() {
        let p = LinearProjector::new(
            Matrix::from_rows(&[vec![0.3, -0.2, 0.9], vec![0.5, 0.5, 0.0]]).unwrap(),
            vec![0.1, -0.4],
        )
        .unwrap();
        let x = vec![0.4, -1.1, 2.0];
        let y = p.project(&x).unwrap();
        let cf = cf_linear(&p, &CfRequest::new(x.clone(), Mapping::Point(y))).unwrap();
        assert!(cf.delta.iter().all(|d| d.abs() <= 1e-6));
        assert!(cf.changed_features.is_empty());
    }

    #[test]
    fn moves_only_the_mapped_feature() {
        let c = 1e3;
        let req = CfRequest::new(vec![0.0; 3], Mapping::Point(vec![5.0])).with_c(c);
        let cf = cf_linear(&first_axis(), &req).unwrap();
        // 1-D minimizer of |u| + C (u − 5)²: u = 5 − 1/(2C)
        let u = 5.0 - 1.0 / (2.0 * c);
        assert!((cf.x_cf[0] - u).abs() < 1e-6, "{:?}", cf.x_cf);
        assert_eq!(&cf.x_cf[1..], &[0.0, 0.0]);
        assert!(cf.map_error <= 1e-2);
        assert_eq!(cf.changed_features, vec![0]);
    }

    #[test]
    fn pinned_mapped_feature_leaves_target_unreached() {
        let req = CfRequest::new(vec![0.0; 3], Mapping::Point(vec![5.0]))
            .with_c(1e3)
            .with_blacklist(vec![0]);
        let cf = cf_linear(&first_axis(), &req).unwrap();
        assert_eq!(cf.x_cf, vec![0.0; 3]);
        assert_eq!(cf.map_error, 5.0);
    }

    #[test]
    fn map_error_shrinks_with_c() {
        let p = LinearProjector::new(
            Matrix::from_rows(&[vec![0.6, 0.8, 0.0, 0.0], vec![0.0, 0.0, 0.6, -0.8]]).unwrap(),
            vec![0.0, 0.0],
        )
        .unwrap();
        let mut last = f64::INFINITY;
        for c in [1.0, 10.0, 100.0, 1000.0] {
            let req = CfRequest::new(vec![0.2, -0.1, 0.3, 0.0], Mapping::Point(vec![2.0, -1.5])).with_c(c);
            let cf = cf_linear(&p, &req).unwrap();
            assert!(cf.map_error <= last + 1e-9, "C={c}: {} > {last}", cf.map_error);
            last = cf.map_error;
        }
    }

    #[test]
    fn penalty_gradient_matches_finite_differences() {
        let p = LinearProjector::new(
            Matrix::from_rows(&[vec![0.3, -0.2, 0.9], vec![0.5, 0.5, 0.1]]).unwrap(),
            vec![0.1, -0.4],
        )
        .unwrap();
        let y = [1.0, 2.0];
        let pen = LinearPenalty::new(&p, &y, 3.0).unwrap();
        let x = [0.2, -0.7, 1.3];
        let g = pen.gradient(&x).unwrap();
        for j in 0..3 {
            let (mut a, mut b) = (x, x);
            a[j] += 1e-5;
            b[j] -= 1e-5;
            let fd = (pen.value(&a).unwrap() - pen.value(&b).unwrap()) / 2e-5;
            assert!((g[j] - fd).abs() / fd.abs().max(1e-4) <= 1e-4);
        }
    }
}
