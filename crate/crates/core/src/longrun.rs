//! Long-run covariance of score vectors.
//!
//! `Σ̂ = Σ_{|r| ≤ q} ω_q(r) Γ̂_r` with autocovariances computed with divisor
//! `N` from column-centered scores.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// Andrews' constant for the Bartlett kernel plug-in rule.
pub const ANDREWS_BARTLETT: f64 = 1.1447;
/// Bound applied to the estimated AR(1) coefficient before the plug-in rule.
pub const COEFFICIENT_CLAMP: f64 = 0.97;

fn centered(scores: &DMatrix<f64>) -> DMatrix<f64> {
    let mean = scores.row_mean();
    let mut out = scores.clone();
    for mut row in out.row_iter_mut() {
        row -= &mean;
    }
    out
}

fn lagged_product(x: &DMatrix<f64>, lag: usize) -> DMatrix<f64> {
    let n = x.nrows();
    let rows = n - lag;
    let head = x.rows(0, rows);
    let tail = x.rows(lag, rows);
    (head.transpose() * tail) / n as f64
}

/// `Γ̂_r`, entry `(i, j)` estimating `E[X_{i,0} X_{j,r}]`.
pub fn autocov(scores: &DMatrix<f64>, r: isize) -> Result<DMatrix<f64>> {
    let n = scores.nrows();
    let lag = r.unsigned_abs();
    if lag >= n {
        return Err(Error::invalid("r", format!("lag {r} needs |r| < N = {n}")));
    }
    let x = centered(scores);
    let g = lagged_product(&x, lag);
    Ok(if r >= 0 { g } else { g.transpose() })
}

/// Lag window `j ↦ ω_q(j)`.
pub trait LagWindow {
    fn weight(&self, j: isize) -> f64;
    fn bandwidth(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bartlett {
    pub q: usize,
}

impl LagWindow for Bartlett {
    fn weight(&self, j: isize) -> f64 {
        let j = j.unsigned_abs();
        if j > self.q {
            0.0
        } else {
            1.0 - j as f64 / (self.q as f64 + 1.0)
        }
    }

    fn bandwidth(&self) -> usize {
        self.q
    }
}

/// Unit weights up to lag `q`; with `q = 0` this is the sample covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flat {
    pub q: usize,
}

impl LagWindow for Flat {
    fn weight(&self, j: isize) -> f64 {
        if j.unsigned_abs() > self.q {
            0.0
        } else {
            1.0
        }
    }

    fn bandwidth(&self) -> usize {
        self.q
    }
}

pub fn bartlett_weights(q: usize) -> Bartlett {
    Bartlett { q }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    Bartlett,
    Flat,
}

#[derive(Debug, Clone, Serialize)]
pub struct LongRunEstimate {
    #[serde(serialize_with = "serialize_matrix")]
    pub sigma: DMatrix<f64>,
    pub bandwidth: usize,
    pub weight_kind: WeightKind,
    /// Whether [`regularized_inverse`] has to raise eigenvalues to the floor.
    pub eigen_floor_applied: bool,
}

pub(crate) fn serialize_matrix<S: serde::Serializer>(m: &DMatrix<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for row in m.row_iter() {
        seq.serialize_element(&row.iter().copied().collect::<Vec<f64>>())?;
    }
    seq.end()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let d = m.nrows();
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Weighted autocovariance sum with any lag window.
pub fn longrun_with<W: LagWindow>(scores: &DMatrix<f64>, window: &W) -> Result<DMatrix<f64>> {
    let n = scores.nrows();
    let q = window.bandwidth();
    if q >= n {
        return Err(Error::invalid("q", format!("bandwidth {q} needs q < N = {n}")));
    }
    let x = centered(scores);
    let mut sigma = lagged_product(&x, 0);
    for r in 1..=q {
        let w = window.weight(r as isize);
        if w == 0.0 {
            continue;
        }
        let g = lagged_product(&x, r);
        sigma += (&g + g.transpose()) * w;
    }
    symmetrize(&mut sigma);
    Ok(sigma)
}

pub fn longrun_cov(scores: &DMatrix<f64>, q: usize, weight_kind: WeightKind) -> Result<LongRunEstimate> {
    let sigma = match weight_kind {
        WeightKind::Bartlett => longrun_with(scores, &Bartlett { q })?,
        WeightKind::Flat => longrun_with(scores, &Flat { q })?,
    };
    let eigen_floor_applied = match eigen_floor(&sigma) {
        Some((values, floor)) => values.iter().any(|&l| l < floor),
        None => true,
    };
    Ok(LongRunEstimate {
        sigma,
        bandwidth: q,
        weight_kind,
        eigen_floor_applied,
    })
}

/// Lag-one sample autocorrelation with the usual `Σ(x−x̄)²` normalization.
pub fn lag_one_autocorrelation(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n as f64;
    let denom: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    if denom == 0.0 {
        return 0.0;
    }
    let num: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    num / denom
}

/// `round(1.1447 (a N)^{1/3})` with `a = 4ψ²/(1+ψ)⁴`; `ψ` is clamped into
/// `[−0.97, 0.97]`.
pub fn bandwidth_from_coefficient(psi: f64, n: usize) -> usize {
    let psi = psi.clamp(-COEFFICIENT_CLAMP, COEFFICIENT_CLAMP);
    let a = 4.0 * psi * psi / (1.0 + psi).powi(4);
    (ANDREWS_BARTLETT * (a * n as f64).cbrt()).round() as usize
}

/// Plug-in bandwidth driven by the lag-one autocorrelation of `column`.
pub fn select_bandwidth(column: &[f64]) -> Result<usize> {
    let n = column.len();
    if n < 3 {
        return Err(Error::TooSmall {
            reason: format!("bandwidth selection needs N >= 3, got {n}"),
        });
    }
    let q = bandwidth_from_coefficient(lag_one_autocorrelation(column), n);
    Ok(q.min(n - 1))
}

#[derive(Debug, Clone)]
pub struct RegularizedInverse {
    pub inverse: DMatrix<f64>,
    pub floor: f64,
    pub floor_applied: bool,
}

fn eigen_floor(sigma: &DMatrix<f64>) -> Option<(Vec<f64>, f64)> {
    let eig = SymmetricEigen::new(sigma.clone());
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return None;
    }
    Some((values, (1e-8 * max).max(1e-10)))
}

/// Inverse in the eigenbasis with eigenvalues floored at
/// `max(1e-10, 1e-8 λ_max)`.
pub fn regularized_inverse(est: &LongRunEstimate) -> Result<RegularizedInverse> {
    invert_floored(&est.sigma)
}

pub fn invert_floored(sigma: &DMatrix<f64>) -> Result<RegularizedInverse> {
    if sigma.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateCovariance);
    }
    let mut sym = sigma.clone();
    symmetrize(&mut sym);
    let eig = SymmetricEigen::new(sym);
    let max = eig.eigenvalues.max();
    if !(max > 0.0) {
        return Err(Error::DegenerateCovariance);
    }
    let floor = (1e-8 * max).max(1e-10);
    let mut floor_applied = false;
    let inv_vals = eig.eigenvalues.map(|l| {
        if l < floor {
            floor_applied = true;
            1.0 / floor
        } else {
            1.0 / l
        }
    });
    let v = &eig.eigenvectors;
    let mut inverse = v * DMatrix::from_diagonal(&inv_vals) * v.transpose();
    symmetrize(&mut inverse);
    Ok(RegularizedInverse {
        inverse,
        floor,
        floor_applied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use proptest::prelude::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn normal_scores(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = stream(seed, 0, 0);
        DMatrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))
    }

    #[test]
    fn autocov_hand_example() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, -1.0]);
        assert_eq!(autocov(&x, 0).unwrap()[(0, 0)], 1.0);
        assert!(autocov(&x, 2).is_err());
        assert!(autocov(&x, -2).is_err());
    }

    #[test]
    fn autocov_negative_lag_is_transpose() {
        let x = normal_scores(50, 3, 1);
        for r in 1..5 {
            let pos = autocov(&x, r).unwrap();
            let neg = autocov(&x, -r).unwrap();
            assert_eq!(neg, pos.transpose());
        }
    }

    #[test]
    fn autocov_of_white_noise_is_small() {
        let n = 10_000;
        let x = normal_scores(n, 2, 2);
        let g = autocov(&x, 1).unwrap();
        assert!(g.amax() < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn bartlett_examples() {
        let w0 = bartlett_weights(0);
        assert_eq!(w0.weight(0), 1.0);
        assert_eq!(w0.weight(1), 0.0);
        let w4 = bartlett_weights(4);
        let expected = [1.0, 0.8, 0.6, 0.4, 0.2, 0.0];
        for (j, e) in expected.iter().enumerate() {
            assert!((w4.weight(j as isize) - e).abs() < 1e-15);
            assert_eq!(w4.weight(j as isize), w4.weight(-(j as isize)));
        }
        for q in 0..20 {
            let w = bartlett_weights(q);
            let ws: Vec<f64> = (0..30).map(|j| w.weight(j)).collect();
            assert!(ws.iter().all(|&v| (0.0..=1.0).contains(&v)));
            assert!(ws.windows(2).all(|p| p[0] >= p[1]));
        }
    }

    #[test]
    fn q_zero_is_sample_covariance() {
        let x = normal_scores(40, 3, 3);
        let est = longrun_cov(&x, 0, WeightKind::Bartlett).unwrap();
        let c = centered(&x);
        let cov = c.transpose() * &c / 40.0;
        assert!((est.sigma - cov).amax() < 1e-14);
        assert!(longrun_cov(&x, 40, WeightKind::Bartlett).is_err());
    }

    #[test]
    fn iid_bandwidth_difference_is_small() {
        let n = 20_000;
        let x = normal_scores(n, 3, 4);
        let a = longrun_cov(&x, 0, WeightKind::Bartlett).unwrap().sigma;
        let b = longrun_cov(&x, 4, WeightKind::Bartlett).unwrap().sigma;
        assert!((a - b).norm() < 3.0 * 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn bandwidth_rule_examples() {
        assert_eq!(bandwidth_from_coefficient(0.6, 200), 4);
        assert_eq!(bandwidth_from_coefficient(0.70, 151), 4);
        assert_eq!(bandwidth_from_coefficient(0.0, 500), 0);
        // clamping keeps the rule finite near a unit root
        assert_eq!(bandwidth_from_coefficient(1.5, 200), bandwidth_from_coefficient(0.97, 200));
        let white: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(select_bandwidth(&white).is_ok());
        assert!(select_bandwidth(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn inverse_examples() {
        let est = |m: DMatrix<f64>| LongRunEstimate {
            sigma: m,
            bandwidth: 0,
            weight_kind: WeightKind::Bartlett,
            eigen_floor_applied: false,
        };
        let id = regularized_inverse(&est(DMatrix::identity(3, 3))).unwrap();
        assert!((id.inverse - DMatrix::<f64>::identity(3, 3)).amax() < 1e-14);
        assert!(!id.floor_applied);
        let diag = regularized_inverse(&est(DMatrix::from_diagonal(&nalgebra::dvector![4.0, 1.0]))).unwrap();
        assert!((diag.inverse - DMatrix::from_diagonal(&nalgebra::dvector![0.25, 1.0])).amax() < 1e-14);
        let singular = regularized_inverse(&est(DMatrix::from_element(2, 2, 1.0))).unwrap();
        assert!(singular.floor_applied);
        assert!(singular.inverse.iter().all(|v| v.is_finite()));
        assert!(matches!(
            regularized_inverse(&est(DMatrix::zeros(2, 2))),
            Err(Error::DegenerateCovariance)
        ));
        let flagged = longrun_cov(&DMatrix::from_fn(10, 2, |i, _| i as f64), 0, WeightKind::Bartlett).unwrap();
        assert!(flagged.eigen_floor_applied);
    }

    proptest! {
        #[test]
        fn bartlett_estimate_is_psd(seed in 0u64..1000, q in 0usize..12, d in 1usize..5) {
            let x = normal_scores(30, d, seed).map(|v| v.powi(3));
            let sigma = longrun_cov(&x, q, WeightKind::Bartlett).unwrap().sigma;
            prop_assert_eq!(&sigma, &sigma.transpose());
            let min = SymmetricEigen::new(sigma).eigenvalues.min();
            prop_assert!(min >= -1e-10, "{}", min);
        }
    }
}
