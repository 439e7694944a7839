//! Fully functional linear model `Y_n(t) = ∫ ψ(t,s) X_n(s) ds + ε_n(t)`.
//!
//! The kernel is estimated by truncating both samples to their leading
//! principal components:
//! `ψ̂(t,s) = Σ_{k≤K} Σ_{ℓ≤L} λ̂_ℓ⁻¹ σ̂_{ℓk} û_k(t) v̂_ℓ(s)` with
//! `σ̂_{ℓk} = N⁻¹ Σ_i ⟨X_i − X̄, v̂_ℓ⟩⟨Y_i − Ȳ, û_k⟩`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpca::{fpca, select_components, FpcaJson, FpcaResult, GridJson};
use crate::grid::{hs_norm, KernelSurface};
use crate::longrun::serialize_matrix;
use crate::sample::FunctionSample;

/// Relative eigenvalue floor for inverting `λ̂_ℓ`.
pub const SPECTRUM_FLOOR: f64 = 1e-10;
pub const DEFAULT_THRESHOLD: f64 = 0.85;
pub const MAX_COMPONENTS: usize = 10;

#[derive(Debug, Clone)]
pub struct FlmFit {
    pub psi_hat: KernelSurface,
    /// Response components.
    pub k: usize,
    /// Regressor components.
    pub l: usize,
    /// `L × K` matrix of `σ̂_{ℓk}`.
    pub sigma_hat: DMatrix<f64>,
    pub regressor: FpcaResult,
    pub response: FpcaResult,
}

impl FlmFit {
    /// `Σ_k Σ_ℓ σ̂²_{ℓk} / λ̂²_ℓ`, the plug-in version of the summability
    /// condition on the kernel.
    pub fn kernel_sum(&self) -> f64 {
        let lambdas = self.regressor.eigenvalues();
        (0..self.l)
            .map(|l| {
                let row = self.sigma_hat.row(l);
                row.iter().map(|s| s * s).sum::<f64>() / (lambdas[l] * lambdas[l])
            })
            .sum()
    }

    /// Plug-in value of `KL / (λ_L min{h_K, h'_L})`, where `h` are the
    /// smallest eigenvalue gaps among the retained components.
    pub fn rate_diagnostic(&self) -> f64 {
        let min_gap = |r: &FpcaResult, m: usize| r.gaps().into_iter().take(m).fold(f64::INFINITY, f64::min);
        let h = min_gap(&self.regressor, self.k.min(self.regressor.d()))
            .min(min_gap(&self.response, self.l.min(self.response.d())));
        let lambda_l = self.regressor.eigenvalues()[self.l - 1];
        (self.k * self.l) as f64 / (lambda_l * h)
    }

    pub fn to_json(&self) -> FlmJson {
        FlmJson {
            grid: GridJson::from(self.psi_hat.grid()),
            k: self.k,
            l: self.l,
            psi_hat: self
                .psi_hat
                .values()
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            sigma_hat: self.sigma_hat.clone(),
            kernel_sum: self.kernel_sum(),
            rate_diagnostic: self.rate_diagnostic(),
            psi_hat_hs_norm: hs_norm(&self.psi_hat),
            regressor: self.regressor.to_json(),
            response: self.response.to_json(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlmJson {
    pub grid: GridJson,
    pub k: usize,
    pub l: usize,
    /// Row-major: `psi_hat[i][j] = ψ̂(t_i, s_j)`.
    pub psi_hat: Vec<Vec<f64>>,
    #[serde(serialize_with = "serialize_matrix")]
    pub sigma_hat: DMatrix<f64>,
    pub kernel_sum: f64,
    pub rate_diagnostic: f64,
    pub psi_hat_hs_norm: f64,
    pub regressor: FpcaJson,
    pub response: FpcaJson,
}

fn check_pair(x: &FunctionSample, y: &FunctionSample) -> Result<()> {
    x.grid().check(&y.grid())?;
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(())
}

/// Assembles `ψ̂` from two decompositions truncated at `k` and `l`.
fn assemble(regressor: &FpcaResult, response: &FpcaResult, k: usize, l: usize) -> (DMatrix<f64>, KernelSurface) {
    let n = regressor.scores().nrows() as f64;
    let xs = regressor.scores().columns(0, l);
    let ys = response.scores().columns(0, k);
    let sigma_hat = xs.transpose() * ys / n;
    // coefficient matrix C[k][ℓ] = σ̂_{ℓk} / λ̂_ℓ so that ψ̂ = U C Vᵀ
    let mut coef = sigma_hat.transpose();
    for (j, lambda) in regressor.eigenvalues().iter().take(l).enumerate() {
        coef.column_mut(j).scale_mut(1.0 / lambda);
    }
    let v = regressor.basis_matrix().columns(0, l).into_owned();
    let u = response.basis_matrix().columns(0, k).into_owned();
    let psi = u * coef * v.transpose();
    (sigma_hat, KernelSurface::from_raw(regressor.grid(), psi))
}

fn check_spectrum(regressor: &FpcaResult, l: usize) -> Result<()> {
    let lambdas = regressor.eigenvalues();
    let floor = SPECTRUM_FLOOR * lambdas[0].max(0.0);
    let lambda_l = lambdas[l - 1];
    if !(lambda_l > floor) {
        return Err(Error::SpectrumTooSmall {
            requested: l,
            eigenvalue: lambda_l,
            floor,
        });
    }
    Ok(())
}

pub fn fit(x: &FunctionSample, y: &FunctionSample, k: usize, l: usize) -> Result<FlmFit> {
    check_pair(x, y)?;
    if k == 0 || l == 0 {
        return Err(Error::invalid("k", "K and L must be at least 1"));
    }
    let regressor = fpca(x, l)?;
    check_spectrum(&regressor, l)?;
    let response = fpca(y, k)?;
    let (sigma_hat, psi_hat) = assemble(&regressor, &response, k, l);
    Ok(FlmFit {
        psi_hat,
        k,
        l,
        sigma_hat,
        regressor,
        response,
    })
}

/// Chooses `K` and `L` by cumulative explained variance, each capped at
/// [`MAX_COMPONENTS`], then fits.
pub fn fit_auto(x: &FunctionSample, y: &FunctionSample, threshold: f64) -> Result<FlmFit> {
    check_pair(x, y)?;
    let l = select_components(x, threshold, MAX_COMPONENTS)?;
    let k = select_components(y, threshold, MAX_COMPONENTS)?;
    fit(x, y, k, l)
}

/// Kernel estimate for a sub-truncation `(k, l)` of an existing fit, reusing
/// its decompositions.
pub fn truncate(fit: &FlmFit, k: usize, l: usize) -> Result<FlmFit> {
    if k == 0 || l == 0 || k > fit.k || l > fit.l {
        return Err(Error::invalid("k", format!("sub-truncation must satisfy 1 <= k <= {}, 1 <= l <= {}", fit.k, fit.l)));
    }
    let (sigma_hat, psi_hat) = assemble(&fit.regressor, &fit.response, k, l);
    Ok(FlmFit {
        psi_hat,
        k,
        l,
        sigma_hat,
        regressor: fit.regressor.clone(),
        response: fit.response.clone(),
    })
}

/// `Ŷ(t) = ∫ ψ̂(t,s) (X(s) − X̄(s)) ds + Ȳ(t)` for every new curve.
pub fn predict(fit: &FlmFit, x_new: &FunctionSample) -> Result<FunctionSample> {
    let grid = fit.psi_hat.grid();
    grid.check(&x_new.grid())?;
    let mut centered = x_new.data().clone();
    let xbar = fit.regressor.mean().values().transpose();
    for mut row in centered.row_iter_mut() {
        row -= &xbar;
    }
    let mut out = centered * fit.psi_hat.values().transpose() * grid.weight();
    let ybar = fit.response.mean().values().transpose();
    for mut row in out.row_iter_mut() {
        row += &ybar;
    }
    FunctionSample::new(grid, out)
}

/// `∫∫ (ψ̂ − ψ)²`.
pub fn kernel_mse(psi_hat: &KernelSurface, psi_true: &KernelSurface) -> Result<f64> {
    Ok(hs_norm(&psi_hat.sub(psi_true)?).powi(2))
}
