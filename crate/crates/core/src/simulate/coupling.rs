use nalgebra::DMatrix;
use serde::Serialize;

use super::innovation::Innovation;
use super::model::{ModelSpec, Recursion};
use super::{primary_innovations, run};
use crate::error::{Error, Result};
use crate::rng::{coupling_copy, stream};
use crate::sample::FunctionSample;

/// How the older innovations of the approximation are replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    /// Independent copy per time index; same marginal law as `X_n`.
    Coupling,
    /// Older innovations set to zero.
    Truncation,
}

/// A trajectory and its `m`-dependent approximation on the same primary
/// innovations.
#[derive(Debug, Clone)]
pub struct PairedSample {
    pub x: FunctionSample,
    pub xm: FunctionSample,
    pub m: usize,
    pub construction: Construction,
}

impl PairedSample {
    pub fn difference(&self) -> FunctionSample {
        self.x
            .sub(&self.xm)
            .expect("paired samples share grid and length")
    }
}

pub fn simulate_coupled(model: &ModelSpec, n: usize, m: usize, seed: u64) -> Result<PairedSample> {
    simulate_coupled_replication(model, n, m, seed, 0, Construction::Coupling)
}

pub fn simulate_truncated(model: &ModelSpec, n: usize, m: usize, seed: u64) -> Result<PairedSample> {
    simulate_coupled_replication(model, n, m, seed, 0, Construction::Truncation)
}

/// Builds `X_1..X_n` and, for every `n`, the approximation that keeps the
/// innovations `ε_n, …, ε_{n-m+1}` and replaces everything older, either by a
/// fresh copy stream private to `(n, m)` or by zeros.
pub fn simulate_coupled_replication(
    model: &ModelSpec,
    n: usize,
    m: usize,
    master: u64,
    replication: u64,
    construction: Construction,
) -> Result<PairedSample> {
    if m == 0 {
        return Err(Error::invalid("m", "approximation depth must be at least 1"));
    }
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let grid = model.grid();
    let burn_in = model.burn_in();
    let mut rng = stream(master, replication, 0);
    let innovations = primary_innovations(model, n, &mut rng);
    let x = run(model, &innovations, n)?;

    let mut xm = DMatrix::zeros(n, grid.resolution());
    for i in 0..n {
        let now = burn_in + i;
        let first_kept = (now + 1).saturating_sub(m);
        let mut rec = Recursion::new(model);
        // truncation keeps the zero start state
        if first_kept > 0 && construction == Construction::Coupling {
            let mut copy = stream(master, replication, coupling_copy(i, m));
            for _ in 0..burn_in {
                rec.step(&Innovation::draw(&model.innovation(), grid, &mut copy))?;
            }
        }
        let mut last = None;
        for eps in &innovations[first_kept..=now] {
            last = Some(rec.step(eps)?.clone());
        }
        let last = last.expect("at least one kept innovation");
        xm.row_mut(i).copy_from(&last.transpose());
    }
    Ok(PairedSample {
        x,
        xm: FunctionSample::from_raw(grid, xm),
        m,
        construction,
    })
}

/// `((1/N) Σ ‖X_n − X_n^{(m)}‖^p)^{1/p}`.
pub fn nu_p_estimate(pair: &PairedSample, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid("p", format!("must be at least 1, got {p}")));
    }
    let norms = pair.x.sub(&pair.xm)?.norms();
    Ok(power_mean(norms.iter().copied(), p))
}

fn power_mean(values: impl Iterator<Item = f64>, p: f64) -> f64 {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v.powf(p), c + 1));
    (sum / count as f64).powf(1.0 / p)
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproximabilityReport {
    pub p: f64,
    pub draws: usize,
    pub construction: Construction,
    /// `(m, ν̂_p)` for `m = 1..=m_max`.
    pub curve: Vec<(usize, f64)>,
    /// Least-squares slope of `log ν̂_p` against `m` over positive entries.
    pub log_slope: Option<f64>,
    /// `Σ_m ν̂_p`, the empirical counterpart of the summability condition.
    pub partial_sum: f64,
}

/// Empirical decay of `ν_p(X_m − X_m^{(m)})` in `m`. Each draw is one
/// replication of length one; the same primary streams are reused across
/// `m`.
pub fn approximability_report(
    model: &ModelSpec,
    p: f64,
    m_max: usize,
    draws: usize,
    seed: u64,
    construction: Construction,
) -> Result<ApproximabilityReport> {
    if m_max < 2 {
        return Err(Error::invalid("m_max", "must be at least 2"));
    }
    if draws == 0 {
        return Err(Error::invalid("draws", "must be at least 1"));
    }
    if !(p >= 1.0) {
        return Err(Error::invalid("p", format!("must be at least 1, got {p}")));
    }
    let mut curve = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let mut norms = Vec::with_capacity(draws);
        for r in 0..draws {
            let pair = simulate_coupled_replication(model, 1, m, seed, r as u64, construction)?;
            norms.push(pair.x.sub(&pair.xm)?.norms()[0]);
        }
        curve.push((m, power_mean(norms.into_iter(), p)));
    }
    let positive: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(_, v)| *v > 0.0)
        .map(|&(m, v)| (m as f64, v.ln()))
        .collect();
    let log_slope = (positive.len() >= 2).then(|| least_squares_slope(&positive));
    let partial_sum = curve.iter().map(|(_, v)| v).sum();
    Ok(ApproximabilityReport {
        p,
        draws,
        construction,
        curve,
        log_slope,
        partial_sum,
    })
}

fn least_squares_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
