//! Distance between a process and its m-dependent coupled version.

use fts::grid::{Grid, KernelSurface};
use fts::simulate::{
    approximability_report, nu_p_estimate, simulate_coupled, Construction, InnovationSpec, ModelKind, ModelSpec,
    Operator,
};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(50)?;
    let far1 = ModelSpec::parabolic_far1(grid, 0.6)?;
    for construction in [Construction::Coupling, Construction::Truncation] {
        let report = approximability_report(&far1, 4.0, 8, 300, 5, construction)?;
        println!("{construction:?}: log-slope {:.3} (log 0.6 = {:.3})", report.log_slope.unwrap_or(f64::NAN), 0.6f64.ln());
        for (m, nu) in &report.curve {
            println!("  m = {m:>2}  nu_4 = {nu:.5}");
        }
    }

    let ma1 = ModelSpec::new(
        grid,
        ModelKind::Linear {
            coefficients: vec![
                Operator::Identity,
                Operator::Integral(KernelSurface::parabolic(grid).with_hs_norm(0.5)?),
            ],
        },
        InnovationSpec::BrownianBridge,
        20,
    )?;
    for m in 1..=3 {
        let pair = simulate_coupled(&ma1, 200, m, 3)?;
        println!("MA(1), m = {m}: nu_2 of the difference {:.3e}", nu_p_estimate(&pair, 2.0)?);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
