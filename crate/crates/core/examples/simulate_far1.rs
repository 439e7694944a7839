//! Functional AR(1) with the parabolic kernel and Brownian-bridge noise.

use fts::fpca::fpca;
use fts::grid::{hs_norm, Grid};
use fts::longrun::lag_one_autocorrelation;
use fts::simulate::{simulate, ModelKind, ModelSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(100)?;
    let model = ModelSpec::parabolic_far1(grid, 0.6)?;
    if let ModelKind::Far1 { kernel } = model.kind() {
        println!("kernel HS norm {:.4}", hs_norm(kernel));
    }
    let x = simulate(&model, 500, 1)?;
    let pcs = fpca(&x, 3)?;
    let first = pcs.scores().column(0).iter().copied().collect::<Vec<_>>();
    println!("{} curves on {} points", x.len(), grid.resolution());
    println!("explained variance {:?}", pcs.explained_variance());
    println!("lag-1 autocorrelation of first score {:.3}", lag_one_autocorrelation(&first));
    let mid = x.data().column(50);
    println!("pointwise mean at t = 0.505: {:.4}", mid.mean());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
