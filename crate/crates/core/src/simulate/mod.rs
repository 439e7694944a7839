//! Generators for weakly dependent functional time series and their
//! `m`-dependent approximations.

mod coupling;
mod innovation;
mod model;

pub use coupling::{
    approximability_report, nu_p_estimate, simulate_coupled, simulate_coupled_replication,
    simulate_truncated, ApproximabilityReport, Construction, PairedSample,
};
pub use innovation::{gen_brownian_bridge, InnovationSpec};
pub use model::{ModelKind, ModelSpec, Operator, DEFAULT_BURN_IN, DIVERGENCE_THRESHOLD};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{apply_unchecked, hs_norm, KernelSurface};
use crate::rng::{stream, StreamRng};
use crate::sample::FunctionSample;
use innovation::Innovation;
use model::Recursion;

/// Draws the `burn_in + n` primary innovations of a replication.
pub(crate) fn primary_innovations(model: &ModelSpec, n: usize, rng: &mut StreamRng) -> Vec<Innovation> {
    (0..model.burn_in() + n)
        .map(|_| Innovation::draw(&model.innovation(), model.grid(), rng))
        .collect()
}

fn run(model: &ModelSpec, innovations: &[Innovation], keep: usize) -> Result<FunctionSample> {
    let t = model.grid().resolution();
    let mut data = DMatrix::zeros(keep, t);
    let skip = innovations.len() - keep;
    let mut rec = Recursion::new(model);
    for (k, eps) in innovations.iter().enumerate() {
        let x = rec.step(eps)?;
        if k >= skip {
            data.row_mut(k - skip).copy_from(&x.transpose());
        }
    }
    Ok(FunctionSample::from_raw(model.grid(), data))
}

/// Runs the model recursion from the zero function for `burn_in + n` steps
/// and returns the last `n` curves.
pub fn simulate(model: &ModelSpec, n: usize, seed: u64) -> Result<FunctionSample> {
    simulate_replication(model, n, seed, 0)
}

/// As [`simulate`], on the primary stream of replication `replication`
/// under `master`.
pub fn simulate_replication(model: &ModelSpec, n: usize, master: u64, replication: u64) -> Result<FunctionSample> {
    if n == 0 {
        return Err(Error::invalid("n", "must be at least 1"));
    }
    let mut rng = stream(master, replication, 0);
    let innovations = primary_innovations(model, n, &mut rng);
    run(model, &innovations, n)
}

/// The innovation curves that [`simulate`] would feed into the recursion,
/// last `n` only.
pub fn innovation_draws(model: &ModelSpec, n: usize, seed: u64) -> FunctionSample {
    let mut rng = stream(seed, 0, 0);
    let eps = primary_innovations(model, n, &mut rng);
    let t = model.grid().resolution();
    let skip = model.burn_in();
    let data = DMatrix::from_fn(n, t, |i, j| eps[skip + i].curve[j]);
    FunctionSample::from_raw(model.grid(), data)
}

/// Monte Carlo estimate of the existence conditions for the bilinear and
/// ARCH models. `None` for models whose conditions are structural.
#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityDiagnostic {
    pub model: &'static str,
    /// Estimated expectation, `E log‖ψ+φ₀‖_S` or `E K(ε²)^p`.
    pub statistic: f64,
    /// Condition threshold; the model is admissible when
    /// `statistic < threshold`.
    pub threshold: f64,
    /// `E ‖ψ+φ₀‖_S^p` for the bilinear model.
    pub moment: Option<f64>,
    pub p: f64,
    pub draws: usize,
    pub admissible: bool,
}

pub fn admissibility(model: &ModelSpec, p: f64, draws: usize, seed: u64) -> Option<AdmissibilityDiagnostic> {
    let grid = model.grid();
    let w = grid.weight();
    let mut rng = stream(seed, u64::MAX, 0);
    let diag = match model.kind() {
        ModelKind::Bilinear { psi, phi } => {
            let mut log_sum = 0.0;
            let mut moment = 0.0;
            for _ in 0..draws {
                let eps = model.innovation().draw_values(grid, &mut rng);
                let mut op = psi.values().clone();
                for (slice, &e) in phi.iter().zip(eps.iter()) {
                    op += slice.values() * (e * w);
                }
                let norm = hs_norm(&KernelSurface::from_raw(grid, op));
                log_sum += norm.ln();
                moment += norm.powf(p);
            }
            let moment = moment / draws as f64;
            let statistic = log_sum / draws as f64;
            AdmissibilityDiagnostic {
                model: "bilinear",
                statistic,
                threshold: 0.0,
                moment: Some(moment),
                p,
                draws,
                admissible: statistic < 0.0 && moment < 1.0,
            }
        }
        ModelKind::Farch { beta, .. } => {
            let mut acc = 0.0;
            let beta2 = KernelSurface::from_raw(grid, beta.values().map(|b| b * b));
            for _ in 0..draws {
                let eps = model.innovation().draw_values(grid, &mut rng);
                let e4 = eps.map(|e| e.powi(4));
                // ∫∫ β²(t,s) ε⁴(s) ds dt
                let inner = apply_unchecked(&beta2, &e4).into_values().sum() * w;
                acc += inner.sqrt().powf(p);
            }
            let statistic = acc / draws as f64;
            AdmissibilityDiagnostic {
                model: "farch",
                statistic,
                threshold: 1.0,
                moment: None,
                p,
                draws,
                admissible: statistic < 1.0,
            }
        }
        _ => return None,
    };
    if !diag.admissible {
        log::warn!(
            "{} model may not admit a stationary solution: estimated statistic {:.4} (threshold {})",
            diag.model,
            diag.statistic,
            diag.threshold
        );
    }
    Some(diag)
}
