//! Principal components of independent Brownian bridges against the
//! eigenpairs 1/(kπ)² and √2 sin(kπt).

use std::f64::consts::PI;

use fts::fpca::{align_signs, fpca};
use fts::grid::{Grid, GridFunction};
use fts::rng::stream;
use fts::sample::FunctionSample;
use fts::simulate::gen_brownian_bridge;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(100)?;
    let mut rng = stream(11, 0, 0);
    let curves: Vec<_> = (0..2000).map(|_| gen_brownian_bridge(grid, &mut rng)).collect();
    let sample = FunctionSample::from_curves(grid, &curves)?;
    let pcs = fpca(&sample, 4)?;
    let truth: Vec<_> = (1..=4)
        .map(|k| GridFunction::from_fn(grid, |t| 2f64.sqrt() * (k as f64 * PI * t).sin()))
        .collect();
    let signs = align_signs(pcs.eigenfunctions(), &truth)?;
    for k in 0..4 {
        let exact = 1.0 / ((k + 1) as f64 * PI).powi(2);
        let err = pcs.eigenfunctions()[k].scale(signs[k]).sub(&truth[k])?.norm();
        println!(
            "k = {}: eigenvalue {:.5} (exact {exact:.5}), eigenfunction error {err:.3}",
            k + 1,
            pcs.eigenvalues()[k]
        );
    }
    println!("gaps {:?}", pcs.gaps());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
