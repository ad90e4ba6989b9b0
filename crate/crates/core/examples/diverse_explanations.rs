// Three explanations that change disjoint feature sets, next to the
// training-sample baseline.

use dimcf::bench::{gen_toy, metric_cf_div, metric_cf_sparse};
use dimcf::{
    diverse_counterfactuals, fit_pca, model_agnostic_diverse, BaselineWeights, CfRequest, ExplanationSet, Projector,
};

pub fn run_example() -> dimcf::Result<(ExplanationSet, ExplanationSet)> {
    let data = gen_toy(500, 10, 0)?;
    let pca = Projector::Linear(fit_pca(&data.x, 2)?);
    let req = CfRequest::new(data.sample(4).to_vec(), pca.project(data.sample(7))?).with_c(100.0);

    let ours = diverse_counterfactuals(&req, 3, &pca)?;
    for (i, cf) in ours.members.iter().enumerate() {
        let names: Vec<&str> = cf.changed_features.iter().map(|j| data.feature_names[*j].as_str()).collect();
        println!("explanation {}: {:?} (mapping error {:.3})", i + 1, names, cf.map_error);
    }
    if let Some(why) = &ours.shortfall {
        println!("stopped early: {why}");
    }

    let baseline = model_agnostic_diverse(&req, 3, &data, &BaselineWeights::default(), &pca)?;
    for (name, set) in [("black-list", &ours), ("baseline", &baseline)] {
        println!(
            "{name:<10} sparsity {:.2}  overlap {:.2}",
            metric_cf_sparse(set),
            metric_cf_div(set)
        );
    }
    Ok((ours, baseline))
}

fn main() -> dimcf::Result<()> {
    run_example().map(|_| ())
}
