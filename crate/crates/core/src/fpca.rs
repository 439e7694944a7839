//! Functional principal components.
//!
//! The empirical covariance kernel is discretized on the grid, the resulting
//! `T × T` symmetric eigenproblem is solved directly, and eigenfunctions are
//! rescaled to unit quadrature norm. Scores are projections of the centered
//! curves onto the retained eigenfunctions.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{inner_product, Grid, GridFunction, KernelSurface};
use crate::sample::FunctionSample;

const NEGATIVE_TOLERANCE: f64 = -1e-10;

pub fn covariance_kernel(sample: &FunctionSample) -> Result<KernelSurface> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::TooSmall {
            reason: format!("covariance needs at least 2 curves, got {n}"),
        });
    }
    let centered = sample.centered();
    let cov = (centered.transpose() * &centered) / n as f64;
    Ok(KernelSurface::from_raw(sample.grid(), cov).symmetrized())
}

#[derive(Debug, Clone)]
pub struct FpcaResult {
    grid: Grid,
    eigenvalues: Vec<f64>,
    eigenfunctions: Vec<GridFunction>,
    mean: GridFunction,
    scores: DMatrix<f64>,
    total_variance: f64,
    spectrum: Vec<f64>,
    clamped: bool,
}

impl FpcaResult {
    pub fn d(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenfunctions(&self) -> &[GridFunction] {
        &self.eigenfunctions
    }

    pub fn mean(&self) -> &GridFunction {
        &self.mean
    }

    /// `N × d` matrix, entry `(i, ℓ) = ⟨X_i − X̄, v̂_ℓ⟩`.
    pub fn scores(&self) -> &DMatrix<f64> {
        &self.scores
    }

    /// Trace of the empirical covariance operator.
    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    /// All eigenvalues of the discretized operator, nonincreasing.
    pub fn spectrum(&self) -> &[f64] {
        &self.spectrum
    }

    /// Whether negative eigenvalues below roundoff were set to zero.
    pub fn clamped(&self) -> bool {
        self.clamped
    }

    /// Cumulative fraction of total variance explained by the first `k`
    /// components, `k = 1..=d`.
    pub fn explained_variance(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.eigenvalues
            .iter()
            .map(|l| {
                acc += l;
                if self.total_variance > 0.0 {
                    acc / self.total_variance
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Eigenvalue gaps `α_j`: `λ_1 − λ_2` for the first, then
    /// `min(λ_{j−1} − λ_j, λ_j − λ_{j+1})`. Zero signals a tie.
    pub fn gaps(&self) -> Vec<f64> {
        let s = &self.spectrum;
        (0..self.d())
            .map(|j| {
                let below = s.get(j + 1).map_or(s[j], |next| s[j] - next);
                if j == 0 {
                    below
                } else {
                    below.min(s[j - 1] - s[j])
                }
            })
            .collect()
    }

    /// Scores of new curves with respect to this basis and mean.
    pub fn project(&self, sample: &FunctionSample) -> Result<DMatrix<f64>> {
        self.grid.check(&sample.grid())?;
        let mut centered = sample.data().clone();
        let mean = self.mean.values().transpose();
        for mut row in centered.row_iter_mut() {
            row -= &mean;
        }
        Ok(centered * self.basis_matrix() * self.grid.weight())
    }

    /// `T × d` matrix whose columns are the eigenfunction values.
    pub fn basis_matrix(&self) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.eigenfunctions.iter().map(|f| f.values().clone()).collect();
        DMatrix::from_columns(&cols)
    }

    /// Copy with eigenfunction `j` and its score column negated.
    pub fn flip_sign(&self, j: usize) -> FpcaResult {
        let mut out = self.clone();
        out.eigenfunctions[j] = out.eigenfunctions[j].scale(-1.0);
        out.scores.column_mut(j).neg_mut();
        out
    }

    /// Copy with eigenfunctions multiplied by `signs`; scores follow.
    pub fn with_signs(&self, signs: &[f64]) -> FpcaResult {
        let mut out = self.clone();
        for (j, &s) in signs.iter().enumerate().take(self.d()) {
            if s < 0.0 {
                out = out.flip_sign(j);
            }
        }
        out
    }

    pub fn to_json(&self) -> FpcaJson {
        FpcaJson {
            grid: GridJson::from(self.grid),
            eigenvalues: self.eigenvalues.clone(),
            explained_variance: self.explained_variance(),
            total_variance: self.total_variance,
            gaps: self.gaps(),
            clamped: self.clamped,
            mean: self.mean.values().iter().copied().collect(),
            eigenfunctions: self
                .eigenfunctions
                .iter()
                .map(|f| f.values().iter().copied().collect())
                .collect(),
            scores: self
                .scores
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridJson {
    pub resolution: usize,
    pub points: Vec<f64>,
}

impl From<Grid> for GridJson {
    fn from(grid: Grid) -> Self {
        GridJson {
            resolution: grid.resolution(),
            points: grid.points(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FpcaJson {
    pub grid: GridJson,
    pub eigenvalues: Vec<f64>,
    pub explained_variance: Vec<f64>,
    pub total_variance: f64,
    pub gaps: Vec<f64>,
    pub clamped: bool,
    pub mean: Vec<f64>,
    pub eigenfunctions: Vec<Vec<f64>>,
    pub scores: Vec<Vec<f64>>,
}

/// Fixes the sign of each eigenfunction so that its largest-magnitude grid
/// value is positive.
fn canonical_sign(f: GridFunction) -> GridFunction {
    let v = f.values();
    let imax = v.iamax();
    if v[imax] < 0.0 {
        f.scale(-1.0)
    } else {
        f
    }
}

pub fn fpca(sample: &FunctionSample, d: usize) -> Result<FpcaResult> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::TooSmall {
            reason: format!("principal components need at least 2 curves, got {n}"),
        });
    }
    let t = sample.grid().resolution();
    if d == 0 || d > n - 1 || d > t {
        return Err(Error::invalid(
            "d",
            format!("need 1 <= d <= min(N-1, T) = {}, got {d}", (n - 1).min(t)),
        ));
    }
    let grid = sample.grid();
    let cov = covariance_kernel(sample)?;
    let (mut spectrum, functions) = cov.operator_eigen()?;
    let mut clamped = false;
    for l in spectrum.iter_mut() {
        if *l < 0.0 {
            if *l < NEGATIVE_TOLERANCE {
                log::warn!("clamping negative covariance eigenvalue {l:.3e} to zero");
                clamped = true;
            }
            *l = 0.0;
        }
    }
    let eigenfunctions: Vec<GridFunction> = functions.into_iter().take(d).map(canonical_sign).collect();
    let total_variance = cov.values().trace() * grid.weight();
    let centered = sample.centered();
    let basis = DMatrix::from_columns(&eigenfunctions.iter().map(|f| f.values().clone()).collect::<Vec<_>>());
    let scores = centered * basis * grid.weight();
    Ok(FpcaResult {
        grid,
        eigenvalues: spectrum[..d].to_vec(),
        eigenfunctions,
        mean: sample.mean(),
        scores,
        total_variance,
        spectrum,
        clamped,
    })
}

/// Smallest `d` whose cumulative explained variance reaches `threshold`,
/// capped at `max_d` and at `N − 1`.
pub fn select_components(sample: &FunctionSample, threshold: f64, max_d: usize) -> Result<usize> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid("threshold", format!("must lie in (0, 1], got {threshold}")));
    }
    let cap = max_d.min(sample.len().saturating_sub(1)).min(sample.grid().resolution());
    if cap == 0 {
        return Err(Error::TooSmall {
            reason: "no components available".into(),
        });
    }
    let res = fpca(sample, cap)?;
    let explained = res.explained_variance();
    Ok(explained
        .iter()
        .position(|&e| e >= threshold)
        .map_or(cap, |k| k + 1))
}

/// `sign(⟨v̂_j, v_j^ref⟩)` with zero mapped to `+1`.
pub fn align_signs(estimated: &[GridFunction], reference: &[GridFunction]) -> Result<Vec<f64>> {
    if estimated.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: estimated.len(),
            found: reference.len(),
        });
    }
    estimated
        .iter()
        .zip(reference)
        .map(|(e, r)| Ok(if inner_product(e, r)? < 0.0 { -1.0 } else { 1.0 }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::simulate::gen_brownian_bridge;
    use std::f64::consts::PI;

    fn bridges(n: usize, t: usize, seed: u64) -> FunctionSample {
        let g = Grid::new(t).unwrap();
        let mut rng = stream(seed, 0, 0);
        let curves: Vec<_> = (0..n).map(|_| gen_brownian_bridge(g, &mut rng)).collect();
        FunctionSample::from_curves(g, &curves).unwrap()
    }

    #[test]
    fn identical_curves_give_zero_covariance() {
        let g = Grid::new(20).unwrap();
        let f = GridFunction::from_fn(g, |t| t.sin());
        let s = FunctionSample::from_curves(g, &[f.clone(), f.clone(), f]).unwrap();
        assert!(covariance_kernel(&s).unwrap().values().amax() < 1e-15);
    }

    #[test]
    fn two_opposite_curves() {
        let g = Grid::new(20).unwrap();
        let f = GridFunction::from_fn(g, |t| 1.0 + t * t);
        let s = FunctionSample::from_curves(g, &[f.clone(), f.scale(-1.0)]).unwrap();
        let c = covariance_kernel(&s).unwrap();
        let expected = KernelSurface::outer(&f, &f).unwrap();
        assert!((c.values() - expected.values()).amax() < 1e-14);
        assert!(covariance_kernel(&s.slice(0..1)).is_err());
    }

    #[test]
    fn bridge_covariance_kernel() {
        let s = bridges(5000, 50, 3);
        let c = covariance_kernel(&s).unwrap();
        let truth = KernelSurface::from_fn(s.grid(), |t, u| t.min(u) - t * u);
        assert!((c.values() - truth.values()).amax() < 0.03);
        assert!(c.is_symmetric());
    }

    #[test]
    fn bridge_eigenpairs() {
        let s = bridges(5000, 100, 4);
        let res = fpca(&s, 3).unwrap();
        for k in 1..=3 {
            let exact = 1.0 / ((k * k) as f64 * PI * PI);
            let rel = (res.eigenvalues()[k - 1] - exact).abs() / exact;
            assert!(rel < 0.1, "k={k}: {rel}");
        }
        let reference: Vec<_> = (1..=3)
            .map(|k| GridFunction::from_fn(s.grid(), move |t| 2f64.sqrt() * (k as f64 * PI * t).sin()))
            .collect();
        let signs = align_signs(res.eigenfunctions(), &reference).unwrap();
        for k in 0..3 {
            let err = res.eigenfunctions()[k].scale(signs[k]).sub(&reference[k]).unwrap().norm();
            assert!(err < 0.15, "k={k}: {err}");
        }
    }

    #[test]
    fn result_invariants() {
        let s = bridges(300, 40, 5);
        let res = fpca(&s, 5).unwrap();
        assert!(res.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        assert!(res.eigenvalues().iter().all(|&l| l >= -1e-10));
        for i in 0..5 {
            for j in 0..5 {
                let ip = inner_product(&res.eigenfunctions()[i], &res.eigenfunctions()[j]).unwrap();
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((ip - target).abs() < 1e-8);
            }
            assert!(res.scores().column(i).mean().abs() < 1e-10);
            let f = res.eigenfunctions()[i].values();
            assert!(f[f.iamax()] > 0.0);
        }
        assert!(res.eigenvalues().iter().sum::<f64>() <= res.total_variance() + 1e-10);
        // scores recover the sample covariance of the projections
        for l in 0..5 {
            let var = res.scores().column(l).map(|v| v * v).mean();
            assert!((var - res.eigenvalues()[l]).abs() < 1e-10);
        }
        assert_eq!(res.project(&s).unwrap().shape(), res.scores().shape());
        assert!((res.project(&s).unwrap() - res.scores()).amax() < 1e-12);
    }

    #[test]
    fn gram_route_agrees() {
        let s = bridges(30, 60, 6);
        let res = fpca(&s, 10).unwrap();
        let xc = s.centered();
        let gram = (&xc * xc.transpose()) / (s.len() as f64 * s.grid().resolution() as f64);
        let mut ev: Vec<f64> = nalgebra::SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        for k in 0..10 {
            assert!((ev[k] - res.eigenvalues()[k]).abs() < 1e-8, "k={k}");
        }
    }

    #[test]
    fn d_out_of_range() {
        let s = bridges(5, 10, 7);
        assert!(fpca(&s, 0).is_err());
        assert!(fpca(&s, 5).is_err());
        assert!(fpca(&s, 4).is_ok());
    }

    #[test]
    fn align_sign_examples() {
        let s = bridges(50, 20, 8);
        let res = fpca(&s, 3).unwrap();
        assert_eq!(align_signs(res.eigenfunctions(), res.eigenfunctions()).unwrap(), vec![1.0; 3]);
        let neg: Vec<_> = res.eigenfunctions().iter().map(|f| f.scale(-1.0)).collect();
        assert_eq!(align_signs(res.eigenfunctions(), &neg).unwrap(), vec![-1.0; 3]);
        let zero = vec![GridFunction::zeros(s.grid()); 3];
        assert_eq!(align_signs(res.eigenfunctions(), &zero).unwrap(), vec![1.0; 3]);
    }

    #[test]
    fn variance_threshold_selector() {
        let s = bridges(500, 50, 9);
        let d = select_components(&s, 0.85, 10).unwrap();
        let res = fpca(&s, d).unwrap();
        let ev = res.explained_variance();
        assert!(ev[d - 1] >= 0.85);
        if d > 1 {
            assert!(ev[d - 2] < 0.85);
        }
        assert!(select_components(&s, 1.5, 10).is_err());
    }
}
