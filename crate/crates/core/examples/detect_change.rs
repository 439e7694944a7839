//! Mean-change test on a stationary FAR(1) sample and on the same sample
//! with a shift in its second half.

use std::f64::consts::PI;

use fts::changepoint::{detect, BandwidthPolicy, DetectConfig};
use fts::grid::{Grid, GridFunction};
use fts::simulate::{simulate, ModelSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(100)?;
    let model = ModelSpec::parabolic_far1(grid, 0.6)?;
    let x = simulate(&model, 200, 3)?;
    let config = DetectConfig::new(3, BandwidthPolicy::PlugIn, 0.95);

    let null = detect(&x, &config)?;
    println!(
        "no change: T = {:.3}, q = {}, p = {:.3}, reject = {}",
        null.statistic, null.bandwidth, null.p_value, null.reject
    );

    let shift = GridFunction::from_fn(grid, |t| 0.5 * 2f64.sqrt() * (PI * t).sin());
    let shifted = x.shifted_range(&shift, 100..200)?;
    let alt = detect(&shifted, &config)?;
    println!(
        "shift at 100: T = {:.3}, p = {:.3}, reject = {}, khat = {:?}",
        alt.statistic, alt.p_value, alt.reject, alt.khat
    );
    println!("{}", serde_json::to_string_pretty(&alt)?);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
