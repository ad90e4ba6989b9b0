// A small benchmark comparing black-list explanations with the
// training-sample baseline, rendered as text, JSON and CSV.

use dimcf::bench::{render_report, run_experiment, ExperimentConfig, Report};

const CONFIG: &str = r#"{
    "name": "toy-linear-shift",
    "dataset": { "kind": "toy", "n": 200, "d": 10 },
    "projector": { "method": "linear" },
    "repetitions": 2,
    "samples_per_repetition": 10,
    "perturbation": { "kind": "shift", "shift_const": 2.0 },
    "c": 100.0,
    "seed": 4
}"#;

pub fn run_example() -> dimcf::Result<Report> {
    let cfg: ExperimentConfig = serde_json::from_str(CONFIG)?;
    let table = run_experiment(&cfg)?;
    let report = render_report(&table)?;
    print!("{}", report.text);
    println!();
    print!("{}", report.csv);
    Ok(report)
}

fn main() -> dimcf::Result<()> {
    run_example().map(|_| ())
}
