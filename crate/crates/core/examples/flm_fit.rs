//! Functional linear regression Y = Ψ(X) + ε with a rank-two kernel.

use fts::flm::{fit, fit_auto, kernel_mse, predict, truncate};
use fts::fpca::fpca;
use fts::grid::{Grid, KernelSurface};
use fts::sample::FunctionSample;
use fts::simulate::{innovation_draws, simulate, InnovationSpec, ModelKind, ModelSpec, Operator};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(60)?;
    let regressor = ModelSpec::parabolic_far1(grid, 0.6)?;
    let noise = ModelSpec::new(
        grid,
        ModelKind::Linear {
            coefficients: vec![Operator::Identity],
        },
        InnovationSpec::WhiteGaussian { sigma: 0.1 },
        0,
    )?;

    let x0 = simulate(&regressor, 2000, 1)?;
    let v = fpca(&x0, 2)?;
    let truth = KernelSurface::outer(&v.eigenfunctions()[0], &v.eigenfunctions()[0])?
        .scale(0.8)
        .add(&KernelSurface::outer(&v.eigenfunctions()[1], &v.eigenfunctions()[1])?.scale(0.5))?;

    for n in [200, 800, 3200] {
        let x = simulate(&regressor, n, 2)?;
        let eps = innovation_draws(&noise, n, 3);
        let y = FunctionSample::new(grid, x.data() * truth.values().transpose() * grid.weight() + eps.data())?;
        let model = fit(&x, &y, 2, 2)?;
        println!("N = {n:>4}: kernel MSE {:.2e}, rate diagnostic {:.3}", kernel_mse(&model.psi_hat, &truth)?, model.rate_diagnostic());
    }

    let x = simulate(&regressor, 500, 4)?;
    let y = FunctionSample::new(
        grid,
        x.data() * truth.values().transpose() * grid.weight() + innovation_draws(&noise, 500, 5).data(),
    )?;
    let auto = fit_auto(&x, &y, 0.85)?;
    println!("automatic truncation K = {}, L = {}", auto.k, auto.l);
    let small = truncate(&auto, 1, 1)?;
    println!("K = L = 1 kernel MSE {:.2e}", kernel_mse(&small.psi_hat, &truth)?);

    let x_new = simulate(&regressor, 5, 6)?;
    let y_hat = predict(&auto, &x_new)?;
    println!("predicted {} response curves, first norm {:.4}", y_hat.len(), y_hat.norms()[0]);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
