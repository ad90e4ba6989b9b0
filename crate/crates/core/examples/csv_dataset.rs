// Loading a labeled CSV file and explaining one of its rows in the
// original units.

use dimcf::bench::load_csv;
use dimcf::{counterfactual, fit_pca, CfRequest, Projector};

const CSV: &str = "\
age,bmi,bp,glucose,target
59,32.1,101,87,151
48,21.6,87,69,75
72,30.5,93,85,141
24,25.3,84,89,206
50,23.0,101,80,135
23,22.6,89,68,97
36,22.0,90,82,138
66,26.2,114,92,63
60,32.1,83,94,110
29,30.0,85,88,310
";

/// Returns the raw-unit change of each feature.
pub fn run_example() -> dimcf::Result<Vec<f64>> {
    let dir = std::env::temp_dir().join(format!("dimcf-csv-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("patients.csv");
    std::fs::write(&path, CSV)?;
    let data = load_csv(&path, "target")?;
    std::fs::remove_dir_all(&dir)?;

    let pca = Projector::Linear(fit_pca(&data.x, 2)?);
    let req = CfRequest::new(data.sample(0).to_vec(), pca.project(data.sample(3))?).with_c(100.0);
    let cf = counterfactual(&pca, &req)?;

    let before = data.to_raw(&req.x_orig)?;
    let after = data.to_raw(&cf.x_cf)?;
    let change: Vec<f64> = after.iter().zip(&before).map(|(a, b)| a - b).collect();
    for (name, (b, c)) in data.feature_names.iter().zip(before.iter().zip(&change)) {
        println!("{name:>8}: {b:7.1} -> {:7.1}", b + c);
    }
    Ok(change)
}

fn main() -> dimcf::Result<()> {
    run_example().map(|_| ())
}
