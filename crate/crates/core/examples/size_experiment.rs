//! Rejection rates under no change, ignoring dependence (q = 0) and
//! correcting for it (q = 4). Pass a replication count as the first
//! argument; the default is kept small.

use fts::changepoint::{BandwidthPolicy, DetectConfig};
use fts::experiment::Experiment;
use fts::grid::Grid;
use fts::simulate::ModelSpec;

fn rates(replications: usize) -> Result<(), Box<dyn std::error::Error>> {
    let model = ModelSpec::parabolic_far1(Grid::new(100)?, 0.6)?;
    for q in [0, 4] {
        let e = Experiment {
            model: model.clone(),
            n: 200,
            detect: DetectConfig::new(3, BandwidthPolicy::Fixed(q), 0.95),
            replications,
            seed: 2010,
            alternative: None,
        };
        let summary = e.summarize(&e.run()?);
        println!(
            "q = {q}: {} of {} rejected, rate {:.3} ± {:.3}",
            summary.rejections, summary.replications, summary.rejection_rate, summary.standard_error
        );
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    rates(100)
}

#[allow(dead_code)]
fn main() {
    let r = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(100);
    rates(r).unwrap();
}
