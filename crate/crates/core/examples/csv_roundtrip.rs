//! Writes simulated curves to wide CSV, reads them back on the same grid
//! and on a coarser one.

use fts::changepoint::{detect, BandwidthPolicy, DetectConfig};
use fts::grid::Grid;
use fts::io::{read_sample, sample_from_csv, sample_to_csv, write_sample};
use fts::simulate::{simulate, ModelSpec};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(100)?;
    let x = simulate(&ModelSpec::parabolic_far1(grid, 0.6)?, 120, 12)?;
    let path = std::env::temp_dir().join(format!("fts-roundtrip-{}.csv", std::process::id()));
    write_sample(&path, &x)?;
    let back = read_sample(&path, grid)?;
    std::fs::remove_file(&path)?;
    println!("lossless round trip: {}", back == x);

    let coarse = sample_from_csv(&sample_to_csv(&x), Grid::new(25)?)?;
    println!("resampled onto {} points", coarse.grid().resolution());

    let config = DetectConfig::new(3, BandwidthPolicy::PlugIn, 0.95);
    let a = detect(&x, &config)?.statistic;
    let b = detect(&back, &config)?.statistic;
    println!("statistic before {a:.6}, after {b:.6}");
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
