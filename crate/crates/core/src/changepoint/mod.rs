//! Mean-change test for functional time series.
//!
//! Scores of the centered curves on the leading `d` principal components
//! feed the partial-sum bridge `L_N(x) = S_N(x) − x S_N(1)`; the statistic
//! `T_N(d) = N⁻¹ ∫ L_Nᵀ Σ̂⁻¹ L_N dx` normalizes with the long-run covariance
//! of the scores and is compared with quantiles of `Σ_{ℓ≤d} ∫ B_ℓ²`.

mod critical;

pub use critical::{
    critical_value, integrated_squared_bridge, regenerate_table, series_coefficients, CriticalTable,
    DECISION_LEVELS, DEFAULT_REPLICATIONS, DEFAULT_TABLE_SEED, DEFAULT_TRUNCATION, MAX_D, TABLE_LEVELS,
};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpca::fpca;
use crate::longrun::{longrun_cov, regularized_inverse, select_bandwidth, LongRunEstimate, WeightKind};
use crate::sample::FunctionSample;

/// Smallest sample accepted by [`detect`].
pub const MIN_SAMPLE: usize = 20;

/// `L_N(n/N)` for `n = 1..=N`, one row per evaluation point. The last row is
/// zero.
pub fn bridge_process(scores: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, d) = scores.shape();
    if n < 2 {
        return Err(Error::TooSmall {
            reason: format!("bridge process needs N >= 2, got {n}"),
        });
    }
    // level shifts cancel in L_N; centering first keeps that exact in
    // floating point for the final row
    let mean = scores.row_mean();
    let mut out = DMatrix::zeros(n, d);
    let mut running = nalgebra::RowDVector::zeros(d);
    for i in 0..n {
        running += scores.row(i) - &mean;
        out.row_mut(i).copy_from(&running);
    }
    let total = out.row(n - 1).into_owned();
    for i in 0..n {
        let x = (i + 1) as f64 / n as f64;
        let mut row = out.row_mut(i);
        row -= &total * x;
    }
    out.row_mut(n - 1).fill(0.0);
    Ok(out)
}

fn quadratic_forms(bridge: &DMatrix<f64>, sigma_inv: &DMatrix<f64>) -> Vec<f64> {
    let projected = bridge * sigma_inv;
    projected
        .row_iter()
        .zip(bridge.row_iter())
        .map(|(a, b)| a.dot(&b))
        .collect()
}

fn check_inverse(scores: &DMatrix<f64>, sigma_inv: &DMatrix<f64>) -> Result<()> {
    let d = scores.ncols();
    if sigma_inv.nrows() != d || sigma_inv.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: sigma_inv.nrows(),
        });
    }
    Ok(())
}

/// `N⁻² Σ_{n=1}^{N} L_N(n/N)ᵀ Σ̂⁻¹ L_N(n/N)`, the integral of the step
/// function `L_N` taken exactly.
pub fn statistic(scores: &DMatrix<f64>, sigma_inv: &DMatrix<f64>) -> Result<f64> {
    check_inverse(scores, sigma_inv)?;
    let n = scores.nrows() as f64;
    let bridge = bridge_process(scores)?;
    Ok(quadratic_forms(&bridge, sigma_inv).iter().sum::<f64>() / (n * n))
}

/// Index `k ∈ [1, N−1]` maximizing the quadratic form of `L_N(k/N)`: the
/// first segment is curves `1..=k`.
pub fn break_location(scores: &DMatrix<f64>, sigma_inv: &DMatrix<f64>) -> Result<usize> {
    check_inverse(scores, sigma_inv)?;
    let bridge = bridge_process(scores)?;
    let forms = quadratic_forms(&bridge, sigma_inv);
    let (k, _) = forms[..forms.len() - 1]
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    Ok(k + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "policy", content = "q")]
pub enum BandwidthPolicy {
    Fixed(usize),
    /// Plug-in rule driven by the first score column.
    PlugIn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    pub d: usize,
    pub bandwidth: BandwidthPolicy,
    /// Quantile level of the limit law used for the decision.
    pub level: f64,
    pub weight_kind: WeightKind,
}

impl DetectConfig {
    pub fn new(d: usize, bandwidth: BandwidthPolicy, level: f64) -> Self {
        DetectConfig {
            d,
            bandwidth,
            level,
            weight_kind: WeightKind::Bartlett,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CriticalValues {
    #[serde(rename = "0.90")]
    pub p90: f64,
    #[serde(rename = "0.95")]
    pub p95: f64,
    #[serde(rename = "0.99")]
    pub p99: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DetectionReport {
    pub n: usize,
    pub statistic: f64,
    pub d: usize,
    pub bandwidth: usize,
    pub bandwidth_policy: BandwidthPolicy,
    pub critical_values: CriticalValues,
    pub p_value: f64,
    pub level: f64,
    pub reject: bool,
    pub khat: Option<usize>,
    pub explained_variance: f64,
    pub long_run: LongRunEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub segmentation: Option<Vec<usize>>,
}

/// Full pipeline: principal components, scores, bandwidth, long-run
/// covariance, statistic, decision and break location.
pub fn detect(sample: &FunctionSample, config: &DetectConfig) -> Result<DetectionReport> {
    let n = sample.len();
    if n < MIN_SAMPLE {
        return Err(Error::TooSmall {
            reason: format!("N too small: change-point detection needs N >= {MIN_SAMPLE}, got {n}"),
        });
    }
    let d = config.d;
    if d == 0 || d > MAX_D {
        return Err(Error::invalid("d", format!("need 1 <= d <= {MAX_D}, got {d}")));
    }
    let level_ok = DECISION_LEVELS.iter().any(|&l| (l - config.level).abs() < 1e-9);
    if !level_ok {
        return Err(Error::invalid("level", format!("must be one of 0.90, 0.95, 0.99, got {}", config.level)));
    }
    let pcs = fpca(sample, d)?;
    let scores = pcs.scores();
    let q = match config.bandwidth {
        BandwidthPolicy::Fixed(q) => q,
        BandwidthPolicy::PlugIn => select_bandwidth(scores.column(0).as_slice())?,
    };
    let long_run = longrun_cov(scores, q, config.weight_kind)?;
    let inv = regularized_inverse(&long_run)?;
    let stat = statistic(scores, &inv.inverse)?;
    let table = CriticalTable::shipped();
    let critical_values = CriticalValues {
        p90: table.quantile(d, 0.90)?,
        p95: table.quantile(d, 0.95)?,
        p99: table.quantile(d, 0.99)?,
    };
    let crit = table.quantile(d, config.level)?;
    Ok(DetectionReport {
        n,
        statistic: stat,
        d,
        bandwidth: q,
        bandwidth_policy: config.bandwidth,
        critical_values,
        p_value: table.p_value(d, stat)?,
        level: config.level,
        reject: stat > crit,
        khat: Some(break_location(scores, &inv.inverse)?),
        explained_variance: *pcs.explained_variance().last().expect("d >= 1"),
        long_run: LongRunEstimate {
            eigen_floor_applied: inv.floor_applied,
            ..long_run
        },
        segmentation: None,
    })
}

/// Binary segmentation: test the span, split at the estimated break on
/// rejection and recurse into every piece of at least `min_len` curves.
/// Returns break indices (sizes of the leading pieces) in increasing order.
pub fn segment(sample: &FunctionSample, config: &DetectConfig, min_len: usize) -> Result<Vec<usize>> {
    if min_len < MIN_SAMPLE {
        return Err(Error::invalid("min_len", format!("must be at least {MIN_SAMPLE}, got {min_len}")));
    }
    let mut breaks = Vec::new();
    let mut stack = vec![(0usize, sample.len())];
    while let Some((start, end)) = stack.pop() {
        if end - start < min_len {
            continue;
        }
        let piece = sample.slice(start..end);
        let d = config.d.min(end - start - 1);
        let report = detect(&piece, &DetectConfig { d, ..*config })?;
        if !report.reject {
            continue;
        }
        let k = start + report.khat.expect("detect always locates a break");
        breaks.push(k);
        stack.push((start, k));
        stack.push((k, end));
    }
    breaks.sort_unstable();
    Ok(breaks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridFunction};
    use crate::simulate::{simulate, ModelSpec};
    use proptest::prelude::*;

    #[test]
    fn bridge_examples() {
        let zero = DMatrix::zeros(5, 2);
        assert_eq!(bridge_process(&zero).unwrap(), zero);
        let x = DMatrix::from_column_slice(2, 1, &[1.0, -1.0]);
        let l = bridge_process(&x).unwrap();
        assert_eq!(l[(0, 0)], 1.0);
        assert_eq!(l[(1, 0)], 0.0);
        let c = DMatrix::from_element(7, 3, 2.5);
        assert!(bridge_process(&c).unwrap().amax() == 0.0);
    }

    #[test]
    fn statistic_examples() {
        let id = DMatrix::identity(1, 1);
        assert_eq!(statistic(&DMatrix::zeros(4, 1), &id).unwrap(), 0.0);
        let x = DMatrix::from_column_slice(2, 1, &[1.0, -1.0]);
        assert!((statistic(&x, &id).unwrap() - 0.25).abs() < 1e-15);
        assert!(statistic(&x, &DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn break_location_of_a_step() {
        let mut x = DMatrix::zeros(40, 1);
        for i in 25..40 {
            x[(i, 0)] = 1.0;
        }
        assert_eq!(break_location(&x, &DMatrix::identity(1, 1)).unwrap(), 25);
    }

    fn random_scores(seed: u64, n: usize, d: usize) -> DMatrix<f64> {
        use rand::Rng;
        let mut rng = crate::rng::stream(seed, 0, 0);
        DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0))
    }

    proptest! {
        #[test]
        fn statistic_invariances(seed in 0u64..500, shift in proptest::collection::vec(-5.0f64..5.0, 3), angle in 0.0f64..std::f64::consts::TAU) {
            let x = random_scores(seed, 30, 3);
            let est = longrun_cov(&x, 2, WeightKind::Bartlett).unwrap();
            let inv = regularized_inverse(&est).unwrap().inverse;
            let base = statistic(&x, &inv).unwrap();

            let mut shifted = x.clone();
            for mut row in shifted.row_iter_mut() {
                for j in 0..3 { row[j] += shift[j]; }
            }
            prop_assert!((statistic(&shifted, &inv).unwrap() - base).abs() <= 1e-10 * base.max(1.0));

            let (c, s) = (angle.cos(), angle.sin());
            let rot = nalgebra::dmatrix![c, -s, 0.0; s, c, 0.0; 0.0, 0.0, 1.0];
            let xr = &x * &rot;
            let inv_r = rot.transpose() * &inv * &rot;
            prop_assert!((statistic(&xr, &inv_r).unwrap() - base).abs() <= 1e-10 * base.max(1.0));

            let mut flipped = x.clone();
            flipped.column_mut(1).neg_mut();
            let est_f = longrun_cov(&flipped, 2, WeightKind::Bartlett).unwrap();
            let inv_f = regularized_inverse(&est_f).unwrap().inverse;
            prop_assert!((statistic(&flipped, &inv_f).unwrap() - base).abs() <= 1e-10 * base.max(1.0));
        }
    }

    #[test]
    fn detect_guards() {
        let g = Grid::new(30).unwrap();
        let model = ModelSpec::parabolic_far1(g, 0.6).unwrap();
        let small = simulate(&model, 10, 1).unwrap();
        let err = detect(&small, &DetectConfig::new(3, BandwidthPolicy::PlugIn, 0.95)).unwrap_err();
        assert!(err.to_string().contains("N too small"));
        let x = simulate(&model, 50, 1).unwrap();
        assert!(detect(&x, &DetectConfig::new(13, BandwidthPolicy::PlugIn, 0.95)).is_err());
        assert!(detect(&x, &DetectConfig::new(3, BandwidthPolicy::PlugIn, 0.5)).is_err());
        assert!(segment(&x, &DetectConfig::new(3, BandwidthPolicy::PlugIn, 0.95), 10).is_err());
    }

    #[test]
    fn detect_report_fields() {
        let g = Grid::new(50).unwrap();
        let model = ModelSpec::parabolic_far1(g, 0.6).unwrap();
        let x = simulate(&model, 200, 3).unwrap();
        let shift = GridFunction::from_fn(g, |t| 2f64.sqrt() * (std::f64::consts::PI * t).sin());
        let x = x.shifted_range(&shift, 100..200).unwrap();
        let r = detect(&x, &DetectConfig::new(3, BandwidthPolicy::Fixed(4), 0.95)).unwrap();
        assert!(r.statistic >= 0.0);
        assert!((0.0..=1.0).contains(&r.p_value));
        assert!(r.reject);
        let k = r.khat.unwrap();
        assert!((1..200).contains(&k));
        assert!((k as i64 - 100).abs() <= 20, "{k}");
        assert!(r.critical_values.p90 < r.critical_values.p95 && r.critical_values.p95 < r.critical_values.p99);
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["critical_values"]["0.95"].is_number());
        assert_eq!(json["bandwidth_policy"]["policy"], "fixed");
    }

    #[test]
    fn segmentation_finds_two_breaks() {
        let g = Grid::new(50).unwrap();
        let model = ModelSpec::parabolic_far1(g, 0.6).unwrap();
        let x = simulate(&model, 300, 8).unwrap();
        let shift = GridFunction::from_fn(g, |t| 1.5 * 2f64.sqrt() * (std::f64::consts::PI * t).sin());
        let x = x.shifted_range(&shift, 100..200).unwrap();
        let breaks = segment(&x, &DetectConfig::new(3, BandwidthPolicy::Fixed(4), 0.95), 30).unwrap();
        assert!(breaks.iter().any(|&b| (b as i64 - 100).abs() <= 30), "{breaks:?}");
        assert!(breaks.iter().any(|&b| (b as i64 - 200).abs() <= 30), "{breaks:?}");
    }
}
