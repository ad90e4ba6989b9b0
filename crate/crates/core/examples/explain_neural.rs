// Counterfactuals through neural projectors: an autoencoder's encoder and
// a parametric t-SNE network, both with a black-listed feature.

use dimcf::bench::gen_toy;
use dimcf::{counterfactual, fit_autoencoder, fit_ptsne, CfRequest, Projector};

/// Returns the mapping error reached for each projector.
pub fn run_example() -> dimcf::Result<Vec<f64>> {
    let data = gen_toy(200, 10, 9)?;
    let projectors = [
        Projector::Autoencoder(fit_autoencoder(&data.x, 2, &[16], 60, 0.01, 9)?),
        Projector::ParametricTsne(fit_ptsne(&data.x, 2, &[32, 32], 20.0, 80, 0.01, 9)?),
    ];
    let mut errors = Vec::new();
    for p in &projectors {
        let target = p.project(data.sample(1))?;
        let req = CfRequest::new(data.sample(0).to_vec(), target)
            .with_c(10.0)
            .with_blacklist(vec![0]);
        let cf = counterfactual(p, &req)?;
        assert_eq!(cf.delta[0], 0.0);
        println!(
            "{:<16} changed {:?}, mapping error {:.3}",
            p.kind().to_string(),
            cf.changed_features,
            cf.map_error
        );
        errors.push(cf.map_error);
    }
    Ok(errors)
}

fn main() -> dimcf::Result<()> {
    run_example().map(|_| ())
}
