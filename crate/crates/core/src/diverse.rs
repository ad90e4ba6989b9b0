//! Sets of diverse counterfactuals: black-list growth, the training-sample
//! baseline, and per-feature attribution aggregated over many targets.

use serde::{Deserialize, Serialize};

use crate::cf::{counterfactual, CfRequest, Counterfactual, SolverOptions};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::l1_norm;
use crate::projector::{Mapping, Projector};

/// Number of features changed by both counterfactuals (`|delta| > change_tol`).
/// Lower means more diverse; 0 means the changed-feature sets are disjoint.
pub fn diversity(a: &Counterfactual, b: &Counterfactual, change_tol: f64) -> Result<usize> {
    Error::check_dim(a.delta.len(), b.delta.len())?;
    Ok(a.delta
        .iter()
        .zip(&b.delta)
        .filter(|(da, db)| da.abs() > change_tol && db.abs() > change_tol)
        .count())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationSet {
    pub request: CfRequest,
    pub members: Vec<Counterfactual>,
    /// Symmetric k × k matrix of [`diversity`] values (diagonal holds each
    /// member's own change count and is not a diversity score).
    pub pairwise_div: Vec<Vec<usize>>,
    /// Set when fewer than the requested number of members could be produced.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shortfall: Option<String>,
}

impl ExplanationSet {
    pub fn new(request: CfRequest, members: Vec<Counterfactual>, shortfall: Option<String>) -> Result<Self> {
        let tol = request.solver.change_tol;
        let k = members.len();
        let mut pairwise_div = vec![vec![0; k]; k];
        for i in 0..k {
            for j in i..k {
                let v = diversity(&members[i], &members[j], tol)?;
                pairwise_div[i][j] = v;
                pairwise_div[j][i] = v;
            }
        }
        Ok(Self {
            request,
            members,
            pairwise_div,
            shortfall,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Off-diagonal diversity values `(i, j, value)` with `i < j`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let k = self.members.len();
        (0..k).flat_map(move |i| ((i + 1)..k).map(move |j| (i, j, self.pairwise_div[i][j])))
    }
}

/// Computes up to `k` counterfactuals, black-listing after each one every
/// feature it changed, so that members change disjoint feature sets.
///
/// A failure in the first iteration is returned as an error; a later failure,
/// or running out of free features, ends the loop early and is recorded as a
/// shortfall.
pub fn diverse_counterfactuals(req: &CfRequest, k: usize, projector: &Projector) -> Result<ExplanationSet> {
    if k < 1 {
        return Err(Error::input("k must be at least 1"));
    }
    req.validate()?;
    let d = req.dim();
    let tol = req.solver.change_tol;
    let mut blacklist = req.blacklist.clone();
    let mut members = Vec::with_capacity(k);
    let mut shortfall = None;
    for i in 0..k {
        if blacklist.len() >= d {
            shortfall = Some(format!("all {d} features black-listed after {i} counterfactuals"));
            break;
        }
        let step = req.clone().with_blacklist(blacklist.clone());
        match counterfactual(projector, &step) {
            Ok(cf) => {
                for j in cf.delta.iter().enumerate().filter(|(_, v)| v.abs() > tol).map(|(j, _)| j) {
                    if !blacklist.contains(&j) {
                        blacklist.push(j);
                    }
                }
                members.push(cf);
            }
            Err(e) if i == 0 => return Err(e),
            Err(e) => {
                shortfall = Some(format!("counterfactual {} failed: {e}", i + 1));
                break;
            }
        }
    }
    ExplanationSet::new(req.clone(), members, shortfall)
}

/// Weights of the training-sample baseline objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineWeights {
    /// closeness `‖x − x_cf‖₁`
    pub c1: f64,
    /// mapping error `‖φ(x_cf) − y_cf‖₂`
    pub c2: f64,
    /// overlap with already selected members
    pub c3: f64,
}

impl Default for BaselineWeights {
    fn default() -> Self {
        Self {
            c1: 1.0,
            c2: 1.0,
            c3: 1.0,
        }
    }
}

impl BaselineWeights {
    pub fn validate(&self) -> Result<()> {
        if [self.c1, self.c2, self.c3].iter().all(|c| *c > 0.0 && c.is_finite()) {
            Ok(())
        } else {
            Err(Error::input("baseline weights must be positive"))
        }
    }
}

/// Model-agnostic baseline: greedily picks `k` training samples minimizing
/// `C1 ‖x − s‖₁ + C2 ‖φ(s) − y_cf‖₂ + C3 Σ diversity(s, selected)`.
///
/// Samples identical to `x_orig` are never candidates; ties go to the
/// earliest row. Members are exact copies of dataset rows.
pub fn model_agnostic_diverse(
    req: &CfRequest,
    k: usize,
    data: &Dataset,
    weights: &BaselineWeights,
    projector: &Projector,
) -> Result<ExplanationSet> {
    if k < 1 {
        return Err(Error::input("k must be at least 1"));
    }
    weights.validate()?;
    let m = data.n_samples();
    if m == 0 {
        return Err(Error::input("dataset is empty"));
    }
    if k > m {
        return Err(Error::input(format!("k = {k} exceeds the {m} available samples")));
    }
    Error::check_dim(data.n_features(), req.dim())?;
    projector.validate_target(&req.y_cf)?;
    let tol = req.solver.change_tol;

    struct Candidate {
        row: usize,
        base_cost: f64,
        cf: Counterfactual,
    }
    let mut pool = Vec::with_capacity(m);
    for row in 0..m {
        let s = data.sample(row);
        if s == req.x_orig.as_slice() {
            continue;
        }
        let cf = sample_counterfactual(projector, &req.x_orig, s, &req.y_cf, tol)?;
        let base_cost = weights.c1 * l1_norm(&cf.delta) + weights.c2 * cf.map_error;
        pool.push(Candidate { row, base_cost, cf });
    }
    if pool.len() < k {
        return Err(Error::input(format!(
            "only {} samples differ from x_orig, cannot select {k}",
            pool.len()
        )));
    }

    let mut selected: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(f64, usize)> = None;
        for (ci, cand) in pool.iter().enumerate() {
            if selected.contains(&ci) {
                continue;
            }
            let mut overlap = 0usize;
            for &si in &selected {
                overlap += diversity(&cand.cf, &pool[si].cf, tol)?;
            }
            let cost = cand.base_cost + weights.c3 * overlap as f64;
            if best.is_none_or(|(b, _)| cost < b) {
                best = Some((cost, ci));
            }
        }
        let (_, ci) = best.expect("pool holds at least k candidates");
        selected.push(ci);
    }
    debug_assert!(selected.windows(2).all(|w| pool[w[0]].row != pool[w[1]].row));
    let members = selected.into_iter().map(|ci| pool[ci].cf.clone()).collect();
    ExplanationSet::new(req.clone(), members, None)
}

/// Wraps an existing sample as a counterfactual without altering it.
fn sample_counterfactual(
    projector: &Projector,
    x_orig: &[f64],
    sample: &[f64],
    target: &Mapping,
    change_tol: f64,
) -> Result<Counterfactual> {
    let delta: Vec<f64> = sample.iter().zip(x_orig).map(|(s, x)| s - x).collect();
    let y_achieved = projector.project(sample)?;
    let map_error = y_achieved.distance(target)?;
    let changed_features = delta
        .iter()
        .enumerate()
        .filter(|(_, d)| d.abs() > change_tol)
        .map(|(j, _)| j)
        .collect();
    Ok(Counterfactual {
        x_cf: sample.to_vec(),
        delta,
        y_achieved,
        map_error,
        changed_features,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    /// Non-negative per-feature weights summing to 1.
    pub weights: Vec<f64>,
    pub solved: usize,
    pub failed: usize,
    /// True when no counterfactual changed anything and uniform weights were returned.
    pub uniform_fallback: bool,
}

/// Sums `|delta|` per feature over one counterfactual per target and
/// normalizes the result to a distribution over features.
pub fn aggregate_attribution(
    projector: &Projector,
    x_orig: &[f64],
    targets: &[Mapping],
    c: f64,
    solver: &SolverOptions,
) -> Result<Attribution> {
    if targets.is_empty() {
        return Err(Error::input("need at least one target"));
    }
    let d = x_orig.len();
    let mut total = vec![0.0; d];
    let (mut solved, mut failed) = (0, 0);
    let mut last_err = None;
    for target in targets {
        let req = CfRequest::new(x_orig.to_vec(), target.clone())
            .with_c(c)
            .with_solver(solver.clone());
        match counterfactual(projector, &req) {
            Ok(cf) => {
                solved += 1;
                for (t, dj) in total.iter_mut().zip(&cf.delta) {
                    *t += dj.abs();
                }
            }
            Err(e) => {
                failed += 1;
                last_err = Some(e);
            }
        }
    }
    if solved == 0 {
        return Err(last_err.unwrap_or_else(|| Error::input("no target could be solved")));
    }
    let sum: f64 = total.iter().sum();
    let (weights, uniform_fallback) = if sum > 0.0 {
        (total.iter().map(|v| v / sum).collect(), false)
    } else {
        (vec![1.0 / d as f64; d], true)
    };
    Ok(Attribution {
        weights,
        solved,
        failed,
        uniform_fallback,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::linear::LinearProjector;
    use crate::som::{GridIndex, Som};

    fn cf_with_delta(delta: Vec<f64>) -> Counterfactual {
        Counterfactual {
            x_cf: delta.clone(),
            delta,
            y_achieved: Mapping::Point(vec![0.0]),
            map_error: 0.0,
            changed_features: vec![],
        }
    }

    #[test]
    fn diversity_examples() {
        let tol = 1e-6;
        let d = |a: Vec<f64>, b: Vec<f64>| diversity(&cf_with_delta(a), &cf_with_delta(b), tol).unwrap();
        assert_eq!(d(vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]), 0);
        assert_eq!(d(vec![1.0, 2.0, 0.0], vec![3.0, 0.0, 1.0]), 1);
        assert_eq!(d(vec![1.0, 2.0, 3.0, 4.0], vec![1.0, 2.0, 3.0, 4.0]), 4);
        assert!(diversity(&cf_with_delta(vec![1.0]), &cf_with_delta(vec![1.0, 2.0]), tol).is_err());
    }

    fn sum_axis() -> Projector {
        Projector::Linear(
            LinearProjector::new(Matrix::from_rows(&[vec![1.0, 1.0, 1.0]]).unwrap(), vec![0.0]).unwrap(),
        )
    }

    // distinct weights give each black-list step a unique sparse optimum
    fn weighted_axis() -> Projector {
        Projector::Linear(
            LinearProjector::new(Matrix::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap(), vec![0.0]).unwrap(),
        )
    }

    #[test]
    fn black_list_rotates_through_coordinates() {
        let req = CfRequest::new(vec![0.0; 3], Mapping::Point(vec![6.0])).with_c(1e4);
        let set = diverse_counterfactuals(&req, 3, &weighted_axis()).unwrap();
        assert_eq!(set.len(), 3);
        let used: Vec<usize> = set.members.iter().map(|cf| {
            assert_eq!(cf.changed_features.len(), 1, "{:?}", cf.delta);
            cf.changed_features[0]
        }).collect();
        assert_eq!(used, vec![2, 1, 0]);
        for (cf, expect) in set.members.iter().zip([2.0, 3.0, 6.0]) {
            let j = cf.changed_features[0];
            assert!((cf.x_cf[j] - expect).abs() < 1e-3, "{:?}", cf.x_cf);
        }
        assert!(set.pairs().all(|(_, _, v)| v == 0));
        assert!(set.shortfall.is_none());
    }

    #[test]
    fn single_member_matches_single_solver() {
        let req = CfRequest::new(vec![0.5, 0.0, -0.5], Mapping::Point(vec![2.0])).with_c(10.0);
        let set = diverse_counterfactuals(&req, 1, &sum_axis()).unwrap();
        let single = counterfactual(&sum_axis(), &req).unwrap();
        assert_eq!(set.members, vec![single]);
        assert!(diverse_counterfactuals(&req, 0, &sum_axis()).is_err());
    }

    #[test]
    fn shortfall_when_features_run_out() {
        let req = CfRequest::new(vec![0.0; 3], Mapping::Point(vec![6.0])).with_c(1e4);
        let set = diverse_counterfactuals(&req, 5, &weighted_axis()).unwrap();
        assert_eq!(set.len(), 3);
        assert!(set.shortfall.is_some());
    }

    #[test]
    fn som_infeasible_later_iteration_is_a_shortfall() {
        // only feature 0 separates the cells
        let som = Projector::Som(
            Som::from_prototypes(1, 2, Matrix::from_rows(&[vec![0.0, 0.0], vec![10.0, 0.0]]).unwrap()).unwrap(),
        );
        let req = CfRequest::new(vec![1.0, 0.0], Mapping::Cell(GridIndex::new(0, 1)));
        let set = diverse_counterfactuals(&req, 2, &som).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.shortfall.as_deref().unwrap().contains("failed"));
    }

    fn tiny_dataset() -> Dataset {
        let x = Matrix::from_rows(&[
            vec![0.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 2.0, 0.0],
            vec![3.0, 3.0, 3.0],
            vec![0.0, 0.0, 0.5],
        ])
        .unwrap();
        Dataset {
            x,
            labels: vec![0, 0, 1, 1, 0],
            feature_names: vec!["a".into(), "b".into(), "c".into()],
            standardization: vec![crate::dataset::FeatureScale { mean: 0.0, std: 1.0 }; 3],
        }
    }

    #[test]
    fn baseline_with_dominant_map_term_picks_nearest_projection() {
        let data = tiny_dataset();
        let p = sum_axis();
        let req = CfRequest::new(vec![0.0, 0.0, 0.0], Mapping::Point(vec![2.1]));
        let w = BaselineWeights { c1: 1e-6, c2: 1e3, c3: 1e-6 };
        let set = model_agnostic_diverse(&req, 1, &data, &w, &p).unwrap();
        assert_eq!(set.members[0].x_cf, data.sample(2).to_vec());
    }

    #[test]
    fn baseline_excludes_the_original_sample() {
        let data = tiny_dataset();
        let p = sum_axis();
        let req = CfRequest::new(data.sample(0).to_vec(), Mapping::Point(vec![0.0]));
        let set = model_agnostic_diverse(&req, 1, &data, &BaselineWeights::default(), &p).unwrap();
        // nearest other sample: row 4 (cost 0.5 + 0.5)
        assert_eq!(set.members[0].x_cf, data.sample(4).to_vec());
        let set = model_agnostic_diverse(&req, 4, &data, &BaselineWeights::default(), &p).unwrap();
        for cf in &set.members {
            assert!(data.x.iter_rows().any(|r| r == cf.x_cf.as_slice()));
            assert_ne!(cf.x_cf, req.x_orig);
        }
        assert!(model_agnostic_diverse(&req, 5, &data, &BaselineWeights::default(), &p).is_err());
        assert!(model_agnostic_diverse(&req, 6, &data, &BaselineWeights::default(), &p).is_err());
    }

    #[test]
    fn attribution_examples() {
        let only_first = Projector::Linear(
            LinearProjector::new(Matrix::from_rows(&[vec![1.0, 0.0, 0.0, 0.0]]).unwrap(), vec![0.0]).unwrap(),
        );
        let opts = SolverOptions::default();
        let targets: Vec<Mapping> = [0.5, -1.0, 2.0, 3.5, -0.7].iter().map(|t| Mapping::Point(vec![*t])).collect();
        let a = aggregate_attribution(&only_first, &[0.1, 0.2, 0.3, 0.4], &targets, 100.0, &opts).unwrap();
        assert_eq!(a.weights, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!((a.solved, a.failed), (5, 0));

        // feature 3 alone moves the map
        let only_last = Projector::Linear(
            LinearProjector::new(Matrix::from_rows(&[vec![0.0, 0.0, 0.0, 1.0]]).unwrap(), vec![0.0]).unwrap(),
        );
        let a = aggregate_attribution(&only_last, &[0.0; 4], &[Mapping::Point(vec![2.0])], 100.0, &opts).unwrap();
        assert_eq!(a.weights, vec![0.0, 0.0, 0.0, 1.0]);

        // two one-feature maps with equal moves: 0.5 / 0.5 after summing both
        let identity = Projector::Linear(
            LinearProjector::new(Matrix::from_rows(&[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap(), vec![0.0; 2])
                .unwrap(),
        );
        let t = [Mapping::Point(vec![1.0, 0.0]), Mapping::Point(vec![0.0, 1.0])];
        let a = aggregate_attribution(&identity, &[0.0; 3], &t, 1e3, &opts).unwrap();
        assert!((a.weights[0] - 0.5).abs() < 1e-9 && (a.weights[1] - 0.5).abs() < 1e-9);
        assert_eq!(a.weights[2], 0.0);

        let own = aggregate_attribution(&identity, &[0.0; 3], &[Mapping::Point(vec![0.0, 0.0])], 1.0, &opts).unwrap();
        assert!(own.uniform_fallback);
        assert!(aggregate_attribution(&identity, &[0.0; 3], &[], 1.0, &opts).is_err());
        assert!(aggregate_attribution(&identity, &[0.0; 3], &[Mapping::Point(vec![1.0])], 1.0, &opts).is_err());
    }
}
