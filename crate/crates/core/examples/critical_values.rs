//! Quantiles of the sum of d integrated squared Brownian bridges.

use fts::changepoint::{critical_value, regenerate_table, CriticalTable, DECISION_LEVELS};

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let table = CriticalTable::shipped();
    for d in [1, 2, 3, 6, 12] {
        let row: Vec<String> = DECISION_LEVELS
            .iter()
            .map(|&l| format!("{:.4}", table.quantile(d, l).unwrap()))
            .collect();
        println!("d = {d:>2}: {}", row.join("  "));
    }
    println!("p-value of T = 1.2 with d = 3: {:.3}", table.p_value(3, 1.2)?);
    println!("d = 3, 95%: {:.4}", critical_value(3, 0.95)?);

    let quick = regenerate_table(5_000, 200, 1)?;
    println!(
        "coarse regeneration deviates from the shipped table by at most {:.3} at decision levels",
        quick.max_decision_deviation(table)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
