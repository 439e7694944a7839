//! Product, bilinear and functional ARCH recursions with their moment
//! diagnostics.

use fts::grid::{Grid, GridFunction, KernelSurface};
use fts::simulate::{admissibility, simulate, InnovationSpec, ModelKind, ModelSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(40)?;
    let bump = KernelSurface::from_fn(grid, |t, s| 16.0 * t * (1.0 - t) * s * (1.0 - s));

    let product = ModelSpec::new(grid, ModelKind::Product { coefficient: 0.5 }, InnovationSpec::BrownianBridge, 100)?;
    let bilinear = ModelSpec::new(
        grid,
        ModelKind::Bilinear {
            psi: KernelSurface::parabolic(grid).with_hs_norm(0.4)?,
            phi: vec![bump.with_hs_norm(0.3)?; grid.resolution()],
        },
        InnovationSpec::BrownianBridge,
        100,
    )?;
    let farch = ModelSpec::new(
        grid,
        ModelKind::Farch {
            delta: GridFunction::constant(grid, 0.1),
            beta: bump.with_hs_norm(0.5)?,
        },
        InnovationSpec::BrownianBridge,
        100,
    )?;

    for (name, model) in [("product", &product), ("bilinear", &bilinear), ("farch", &farch)] {
        let x = simulate(model, 300, 9)?;
        let norms = x.norms();
        println!("{name:>8}: mean curve norm {:.4}, max {:.4}", norms.mean(), norms.max());
        if let Some(diag) = admissibility(model, 2.0, 1000, 9) {
            println!("          {diag:?}");
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
