// Which features matter for moving a sample anywhere else in the view?
// Aggregates counterfactual changes toward many targets.

use dimcf::bench::gen_toy;
use dimcf::{aggregate_attribution, fit_pca, Attribution, Mapping, Projector, SolverOptions};

pub fn run_example() -> dimcf::Result<Attribution> {
    let data = gen_toy(300, 10, 2)?;
    let pca = Projector::Linear(fit_pca(&data.x, 2)?);
    let targets: Vec<Mapping> = (1..=20).map(|i| pca.project(data.sample(i))).collect::<Result<_, _>>()?;

    let attr = aggregate_attribution(&pca, data.sample(0), &targets, 100.0, &SolverOptions::default())?;
    let mut order: Vec<usize> = (0..attr.weights.len()).collect();
    order.sort_by(|a, b| attr.weights[*b].total_cmp(&attr.weights[*a]));
    for j in order {
        let bar = "#".repeat((attr.weights[j] * 60.0).round() as usize);
        println!("{:>4} {:.3} {bar}", data.feature_names[j], attr.weights[j]);
    }
    println!("{} solved, {} failed", attr.solved, attr.failed);
    Ok(attr)
}

fn main() -> dimcf::Result<()> {
    run_example().map(|_| ())
}
