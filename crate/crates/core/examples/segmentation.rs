//! Binary segmentation of a sample with two mean changes.

use std::f64::consts::PI;

use fts::changepoint::{segment, BandwidthPolicy, DetectConfig};
use fts::grid::{Grid, GridFunction};
use fts::simulate::{simulate, ModelSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(50)?;
    let model = ModelSpec::parabolic_far1(grid, 0.3)?;
    let bump = GridFunction::from_fn(grid, |t| 2f64.sqrt() * (PI * t).sin());
    let x = simulate(&model, 300, 8)?
        .shifted_range(&bump.scale(0.8), 100..300)?
        .shifted_range(&bump.scale(-1.6), 200..300)?;
    let config = DetectConfig::new(2, BandwidthPolicy::PlugIn, 0.95);
    let breaks = segment(&x, &config, 30)?;
    println!("true breaks [100, 200], estimated {breaks:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
