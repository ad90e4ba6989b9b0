use super::blacklist::{BlacklistConstraint, BlacklistMode};
use super::prox::{solve_l1_smooth, SmoothTerm};
use super::{CfRequest, Counterfactual};
use crate::error::{Error, Result};
use crate::linalg::{all_finite, dot};
use crate::neural::Mlp;
use crate::projector::Mapping;

/// `C · sqrt(‖f(M x + m) − y_cf‖² + κ²)` for a differentiable network `f`.
pub struct NeuralPenalty<'a> {
    net: &'a Mlp,
    target: &'a [f64],
    c: f64,
    kappa: f64,
    remap: &'a BlacklistConstraint,
}

impl<'a> NeuralPenalty<'a> {
    pub fn new(
        net: &'a Mlp,
        target: &'a [f64],
        c: f64,
        kappa: f64,
        remap: &'a BlacklistConstraint,
    ) -> Result<Self> {
        Error::check_dim(net.output_dim(), target.len())?;
        Ok(Self {
            net,
            target,
            c,
            kappa,
            remap,
        })
    }
}

impl SmoothTerm for NeuralPenalty<'_> {
    fn value(&self, x: &[f64]) -> Result<f64> {
        let y = self.net.forward(&self.remap.apply_remap(x))?;
        let r2: f64 = y.iter().zip(self.target).map(|(a, b)| (a - b) * (a - b)).sum();
        Ok(self.c * (r2 + self.kappa * self.kappa).sqrt())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.value_and_gradient(x).map(|(_, g)| g)
    }

    fn value_and_gradient(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let u = self.remap.apply_remap(x);
        let mut value = 0.0;
        let (_, mut g) = self.net.forward_and_input_grad(&u, |y| {
            let r: Vec<f64> = y.iter().zip(self.target).map(|(a, b)| a - b).collect();
            let s = (dot(&r, &r) + self.kappa * self.kappa).sqrt();
            value = self.c * s;
            r.into_iter().map(|v| self.c * v / s).collect()
        })?;
        self.remap.mask_gradient(&mut g);
        Ok((value, g))
    }
}

/// `argmin ‖x − x_cf‖₁ + C ‖f(M x_cf + m) − y_cf‖₂` for an encoder or a
/// parametric t-SNE network; the returned point is `M x_cf + m`.
pub fn cf_neural(net: &Mlp, req: &CfRequest) -> Result<Counterfactual> {
    req.validate()?;
    Error::check_dim(net.input_dim(), req.dim())?;
    let target = req
        .y_cf
        .as_point()
        .ok_or_else(|| Error::input("neural projector needs a point target"))?;
    Error::check_dim(net.output_dim(), target.len())?;
    if !all_finite(target) {
        return Err(Error::input("target contains non-finite entries"));
    }
    let remap = BlacklistConstraint::new(&req.blacklist, &req.x_orig, BlacklistMode::AffineRemap)?;
    let penalty = NeuralPenalty::new(net, target, req.c, req.solver.kappa, &remap)?;
    let out = solve_l1_smooth(&penalty, &req.x_orig, &req.x_orig, &[], &req.solver)?;
    let x_cf = remap.apply_remap(&out.x);
    Counterfactual::new(
        &req.x_orig,
        x_cf,
        |x| {
            let y = net.forward(x)?;
            if all_finite(&y) {
                Ok(Mapping::Point(y))
            } else {
                Err(Error::Solver {
                    iteration: out.iterations,
                    message: "network output is not finite".into(),
                })
            }
        },
        &req.y_cf,
        req.solver.change_tol,
    )
}
