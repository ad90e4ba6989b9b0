// "Why is this sample mapped here and not there?" for a PCA projection:
// a sparse change that moves one sample onto another sample's location.

use dimcf::bench::gen_toy;
use dimcf::{counterfactual, fit_pca, CfRequest, Counterfactual, Projector};

pub fn run_example() -> dimcf::Result<Counterfactual> {
    let data = gen_toy(500, 10, 0)?;
    let pca = Projector::Linear(fit_pca(&data.x, 2)?);

    let x = data.sample(0).to_vec();
    let there = pca.project(data.sample(1))?;
    let req = CfRequest::new(x, there).with_c(100.0);
    let cf = counterfactual(&pca, &req)?;

    println!("changed features: {:?}", cf.changed_features);
    for &j in &cf.changed_features {
        println!("  {:>4}: {:+.3}", data.feature_names[j], cf.delta[j]);
    }
    println!("distance to the requested location: {:.4}", cf.map_error);

    // forbid the most-changed feature and ask again
    let top = cf.changed_features.iter().copied().max_by(|a, b| cf.delta[*a].abs().total_cmp(&cf.delta[*b].abs()));
    if let Some(j) = top {
        let again = counterfactual(&pca, &req.clone().with_blacklist(vec![j]))?;
        println!("without {}: changed {:?}", data.feature_names[j], again.changed_features);
    }
    Ok(cf)
}

fn main() -> dimcf::Result<()> {
    run_example().map(|_| ())
}
