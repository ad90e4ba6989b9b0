// Fits each of the four projector families on the toy dataset and prints
// where the first sample lands.

use dimcf::bench::gen_toy;
use dimcf::{Mapping, ProjectorConfig, ProjectorKind};

/// Returns each fitted projector's kind and the mapping of sample 0.
pub fn run_example() -> dimcf::Result<Vec<(ProjectorKind, Mapping)>> {
    let data = gen_toy(200, 10, 3)?;
    let configs = [
        r#"{"method": "linear"}"#,
        r#"{"method": "som", "height": 6, "width": 6, "epochs": 10}"#,
        r#"{"method": "ae", "epochs": 40}"#,
        r#"{"method": "ptsne", "epochs": 60}"#,
    ];
    let mut out = Vec::new();
    for json in configs {
        let cfg: ProjectorConfig = serde_json::from_str(json)?;
        let projector = cfg.fit(&data.x, 3)?;
        let y = projector.project(data.sample(0))?;
        println!("{:<16} sample 0 -> {}", projector.kind().to_string(), serde_json::to_string(&y)?);
        out.push((projector.kind(), y));
    }
    Ok(out)
}

fn main() -> dimcf::Result<()> {
    run_example().map(|_| ())
}
