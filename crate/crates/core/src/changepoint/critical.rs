//! Quantiles of `T(d) = Σ_{ℓ≤d} ∫ B_ℓ²(x) dx` for independent Brownian
//! bridges.
//!
//! Each `∫ B²` is drawn through its Karhunen-Loève series
//! `Σ_k Z_k² / (k²π²)`, truncated at [`DEFAULT_TRUNCATION`] terms. The
//! shipped table was produced by [`regenerate_table`] with the default
//! settings and is embedded from `data/kiefer_quantiles.csv`.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::OnceLock;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::stream;

pub const MAX_D: usize = 12;
pub const DEFAULT_TRUNCATION: usize = 1000;
pub const DEFAULT_REPLICATIONS: usize = 200_000;
pub const DEFAULT_TABLE_SEED: u64 = 20_100_601;

/// Levels available for decisions.
pub const DECISION_LEVELS: [f64; 3] = [0.90, 0.95, 0.99];

/// Levels stored in the table; the finer grid backs p-value interpolation.
pub const TABLE_LEVELS: [f64; 23] = [
    0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85,
    0.90, 0.95, 0.975, 0.99, 0.995, 0.999,
];

const SHIPPED: &str = include_str!("../../data/kiefer_quantiles.csv");

/// Quantiles of `T(d)` for `d = 1..=MAX_D` at [`TABLE_LEVELS`].
#[derive(Debug, Clone, PartialEq)]
pub struct CriticalTable {
    /// `rows[d - 1][k]` is the quantile of `T(d)` at `TABLE_LEVELS[k]`.
    rows: Vec<Vec<f64>>,
}

fn level_index(level: f64) -> Option<usize> {
    TABLE_LEVELS.iter().position(|&l| (l - level).abs() < 1e-9)
}

impl CriticalTable {
    pub fn shipped() -> &'static CriticalTable {
        static TABLE: OnceLock<CriticalTable> = OnceLock::new();
        TABLE.get_or_init(|| CriticalTable::parse(SHIPPED).expect("embedded quantile table is well formed"))
    }

    pub fn quantile(&self, d: usize, level: f64) -> Result<f64> {
        let k = level_index(level).ok_or(Error::UnsupportedQuantile { d, level })?;
        if d == 0 || d > self.rows.len() {
            return Err(Error::UnsupportedQuantile { d, level });
        }
        Ok(self.rows[d - 1][k])
    }

    /// Upper-tail probability `P(T(d) > statistic)` by linear interpolation
    /// of the tabulated distribution function, anchored at `F(0) = 0`.
    /// Values beyond the largest tabulated quantile report that quantile's
    /// tail mass.
    pub fn p_value(&self, d: usize, statistic: f64) -> Result<f64> {
        if d == 0 || d > self.rows.len() {
            return Err(Error::UnsupportedQuantile { d, level: f64::NAN });
        }
        let row = &self.rows[d - 1];
        let last = TABLE_LEVELS.len() - 1;
        if statistic >= row[last] {
            return Ok(1.0 - TABLE_LEVELS[last]);
        }
        let mut prev = (0.0, 0.0);
        for (&q, &l) in row.iter().zip(TABLE_LEVELS.iter()) {
            if statistic < q {
                let w = if q > prev.0 { (statistic.max(0.0) - prev.0) / (q - prev.0) } else { 1.0 };
                let cdf = prev.1 + w * (l - prev.1);
                return Ok((1.0 - cdf).clamp(0.0, 1.0));
            }
            prev = (q, l);
        }
        Ok(1.0 - TABLE_LEVELS[last])
    }

    pub fn max_abs_deviation(&self, other: &CriticalTable) -> f64 {
        self.rows
            .iter()
            .flatten()
            .zip(other.rows.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest deviation restricted to the decision levels.
    pub fn max_decision_deviation(&self, other: &CriticalTable) -> f64 {
        let mut max = 0.0f64;
        for d in 1..=self.rows.len().min(other.rows.len()) {
            for level in DECISION_LEVELS {
                let a = self.quantile(d, level).expect("decision level is tabulated");
                let b = other.quantile(d, level).expect("decision level is tabulated");
                max = max.max((a - b).abs());
            }
        }
        max
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("d");
        for l in TABLE_LEVELS {
            write!(out, ",{l}").unwrap();
        }
        out.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            write!(out, "{}", i + 1).unwrap();
            for q in row {
                write!(out, ",{q:.6}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<CriticalTable> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse {
            location: "quantile table".into(),
            reason: "empty".into(),
        })?;
        let levels: Vec<f64> = header
            .split(',')
            .skip(1)
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                location: "quantile table header".into(),
                reason: e.to_string(),
            })?;
        if levels.len() != TABLE_LEVELS.len() || levels.iter().zip(TABLE_LEVELS).any(|(a, b)| (a - b).abs() > 1e-9) {
            return Err(Error::Parse {
                location: "quantile table header".into(),
                reason: "levels differ from the expected grid".into(),
            });
        }
        let mut rows = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .skip(1)
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse {
                    location: format!("quantile table line {}", lineno + 2),
                    reason: e.to_string(),
                })?;
            if vals.len() != TABLE_LEVELS.len() {
                return Err(Error::Parse {
                    location: format!("quantile table line {}", lineno + 2),
                    reason: format!("expected {} quantiles, found {}", TABLE_LEVELS.len(), vals.len()),
                });
            }
            rows.push(vals);
        }
        Ok(CriticalTable { rows })
    }
}

/// One draw of `∫_0^1 B²(x) dx` from the truncated series.
pub fn integrated_squared_bridge<R: Rng + ?Sized>(rng: &mut R, coefficients: &[f64]) -> f64 {
    coefficients
        .iter()
        .map(|c| {
            let z: f64 = rng.sample(StandardNormal);
            c * z * z
        })
        .sum()
}

/// `1/(k²π²)` for `k = 1..=truncation`.
pub fn series_coefficients(truncation: usize) -> Vec<f64> {
    (1..=truncation).map(|k| 1.0 / ((k * k) as f64 * PI * PI)).collect()
}

/// Linear-interpolation quantile of sorted data.
pub(crate) fn sorted_quantile(sorted: &[f64], level: f64) -> f64 {
    let pos = level * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] * (1.0 - frac) + sorted[hi] * frac
}

/// Monte Carlo table. Replication `r` uses its own stream, so the result
/// does not depend on the thread count.
pub fn regenerate_table(replications: usize, truncation: usize, seed: u64) -> Result<CriticalTable> {
    if replications < 2 {
        return Err(Error::invalid("replications", "need at least 2"));
    }
    if truncation == 0 {
        return Err(Error::invalid("truncation", "need at least one series term"));
    }
    let coefficients = series_coefficients(truncation);
    let draws: Vec<[f64; MAX_D]> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64, 0);
            let mut cum = [0.0; MAX_D];
            let mut acc = 0.0;
            for slot in cum.iter_mut() {
                acc += integrated_squared_bridge(&mut rng, &coefficients);
                *slot = acc;
            }
            cum
        })
        .collect();
    let rows = (0..MAX_D)
        .into_par_iter()
        .map(|d| {
            let mut col: Vec<f64> = draws.iter().map(|c| c[d]).collect();
            col.sort_by(f64::total_cmp);
            TABLE_LEVELS.iter().map(|&l| sorted_quantile(&col, l)).collect()
        })
        .collect();
    Ok(CriticalTable { rows })
}

/// Critical value of `T(d)` at `level ∈ {0.90, 0.95, 0.99}` from the
/// shipped table.
pub fn critical_value(d: usize, level: f64) -> Result<f64> {
    if !DECISION_LEVELS.iter().any(|&l| (l - level).abs() < 1e-9) || d == 0 || d > MAX_D {
        return Err(Error::UnsupportedQuantile { d, level });
    }
    CriticalTable::shipped().quantile(d, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_table_examples() {
        let d3 = critical_value(3, 0.95).unwrap();
        assert!((d3 - 1.00).abs() <= 0.02, "{d3}");
        let d1 = critical_value(1, 0.95).unwrap();
        assert!((d1 - 0.4614).abs() <= 0.01, "{d1}");
        for level in DECISION_LEVELS {
            for d in 1..MAX_D {
                assert!(critical_value(d + 1, level).unwrap() > critical_value(d, level).unwrap());
            }
        }
    }

    #[test]
    fn unsupported_requests() {
        assert!(critical_value(0, 0.95).is_err());
        assert!(critical_value(13, 0.95).is_err());
        assert!(critical_value(2, 0.80).is_err());
    }

    #[test]
    fn table_rows_increase_in_level() {
        let t = CriticalTable::shipped();
        for row in &t.rows {
            assert!(row.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn p_values() {
        let t = CriticalTable::shipped();
        let q95 = t.quantile(2, 0.95).unwrap();
        assert!((t.p_value(2, q95).unwrap() - 0.05).abs() < 1e-12);
        assert_eq!(t.p_value(2, 0.0).unwrap(), 1.0);
        assert!((t.p_value(2, 1e6).unwrap() - 0.001).abs() < 1e-12);
        let mut prev = 1.0;
        for i in 0..200 {
            let p = t.p_value(4, i as f64 * 0.02).unwrap();
            assert!(p <= prev && (0.0..=1.0).contains(&p));
            prev = p;
        }
    }

    #[test]
    fn csv_round_trip() {
        let t = CriticalTable::shipped();
        assert_eq!(&CriticalTable::parse(&t.to_csv()).unwrap(), t);
        assert!(CriticalTable::parse("d,0.5\n1,0.1\n").is_err());
    }

    #[test]
    fn small_regeneration_is_close() {
        let fresh = regenerate_table(20_000, 200, 5).unwrap();
        let dev = fresh.max_decision_deviation(CriticalTable::shipped());
        // 20k replications leave about 0.02 of Monte Carlo spread at d = 12, 99%
        assert!(dev < 0.06, "{dev}");
    }
}
