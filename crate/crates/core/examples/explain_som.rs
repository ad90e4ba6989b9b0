// Moving a sample into a different cell of a self-organizing map.

use dimcf::bench::gen_toy;
use dimcf::{counterfactual, fit_som, CfRequest, Error, GridIndex, Mapping, Projector};

/// Returns the requested cell and the cell the counterfactual lands in.
pub fn run_example() -> dimcf::Result<(GridIndex, GridIndex)> {
    let data = gen_toy(300, 10, 5)?;
    let som = fit_som(&data.x, 6, 6, 10, 0.5, 3.0, 5)?;
    let projector = Projector::Som(som);

    let x = data.sample(0).to_vec();
    let here = projector.project(&x)?.as_cell().expect("som maps to cells");
    let there = GridIndex::new((here.row + 2) % 6, (here.col + 3) % 6);
    println!("sample 0 is in cell {here}, asking for {there}");

    match counterfactual(&projector, &CfRequest::new(x, Mapping::Cell(there))) {
        Ok(cf) => {
            let landed = cf.y_achieved.as_cell().expect("cell");
            println!("landed in {landed} changing {} features", cf.changed_features.len());
            Ok((there, landed))
        }
        Err(Error::Infeasible { message, .. }) => {
            println!("unreachable: {message}");
            Ok((there, here))
        }
        Err(e) => Err(e),
    }
}

fn main() -> dimcf::Result<()> {
    run_example().map(|_| ())
}
