//! Long-run variance of an AR(1) score sequence and the plug-in bandwidth.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use fts::longrun::{bandwidth_from_coefficient, longrun_cov, regularized_inverse, select_bandwidth, WeightKind};
use fts::rng::stream;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let psi = 0.6;
    let n = 20_000;
    let mut rng = stream(21, 0, 0);
    let mut x = 0.0;
    let values: Vec<f64> = (0..n)
        .map(|_| {
            x = psi * x + rng.sample::<f64, _>(StandardNormal);
            x
        })
        .collect();
    let scores = DMatrix::from_column_slice(n, 1, &values);
    println!("exact long-run variance {:.3}", 1.0 / (1.0f64 - psi).powi(2));
    for q in [0, 4, 20, 50] {
        let est = longrun_cov(&scores, q, WeightKind::Bartlett)?;
        println!("Bartlett q = {q:>2}: {:.3}", est.sigma[(0, 0)]);
    }
    let flat = longrun_cov(&scores, 20, WeightKind::Flat)?;
    println!("flat q = 20: {:.3}", flat.sigma[(0, 0)]);

    println!("rule of thumb q(0.6, 200) = {}", bandwidth_from_coefficient(0.6, 200));
    println!("data-driven q = {}", select_bandwidth(&values)?);

    let est = longrun_cov(&scores, 10, WeightKind::Bartlett)?;
    let inv = regularized_inverse(&est)?;
    println!("inverse {:.4}, floor applied: {}", inv.inverse[(0, 0)], inv.floor_applied);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
