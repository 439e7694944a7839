use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Law of the i.i.d. curve innovations.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum InnovationSpec {
    #[default]
    BrownianBridge,
    /// Independent `N(0, σ²)` values at every grid point.
    WhiteGaussian { sigma: f64 },
    ScaledBrownianBridge { sigma: f64 },
}

impl InnovationSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InnovationSpec::BrownianBridge => Ok(()),
            InnovationSpec::WhiteGaussian { sigma } | InnovationSpec::ScaledBrownianBridge { sigma } => {
                if sigma > 0.0 && sigma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid("sigma", format!("must be positive, got {sigma}")))
                }
            }
        }
    }

    pub(crate) fn draw_values<R: Rng + ?Sized>(&self, grid: Grid, rng: &mut R) -> DVector<f64> {
        match *self {
            InnovationSpec::BrownianBridge => bridge_values(grid, rng),
            InnovationSpec::ScaledBrownianBridge { sigma } => bridge_values(grid, rng) * sigma,
            InnovationSpec::WhiteGaussian { sigma } => DVector::from_iterator(
                grid.resolution(),
                (0..grid.resolution()).map(|_| sigma * rng.sample::<f64, _>(StandardNormal)),
            ),
        }
    }
}

/// One innovation: a curve plus the scalar shock that drives the amplitude
/// series of the product model. Both are always drawn so that every model
/// consumes its stream identically.
#[derive(Debug, Clone)]
pub(crate) struct Innovation {
    pub curve: DVector<f64>,
    pub scalar: f64,
}

impl Innovation {
    pub fn draw<R: Rng + ?Sized>(spec: &InnovationSpec, grid: Grid, rng: &mut R) -> Self {
        let curve = spec.draw_values(grid, rng);
        let scalar = rng.sample(StandardNormal);
        Innovation { curve, scalar }
    }
}

fn bridge_values<R: Rng + ?Sized>(grid: Grid, rng: &mut R) -> DVector<f64> {
    let t = grid.resolution();
    let h = grid.weight();
    let mut w = DVector::zeros(t);
    let mut acc = grid.point(0).sqrt() * rng.sample::<f64, _>(StandardNormal);
    w[0] = acc;
    for i in 1..t {
        acc += h.sqrt() * rng.sample::<f64, _>(StandardNormal);
        w[i] = acc;
    }
    let w1 = acc + (1.0 - grid.point(t - 1)).sqrt() * rng.sample::<f64, _>(StandardNormal);
    for i in 0..t {
        w[i] -= grid.point(i) * w1;
    }
    w
}

/// Standard Brownian bridge `B(t) = W(t) - t W(1)` at the grid points, built
/// from independent Gaussian increments of the underlying Wiener process.
pub fn gen_brownian_bridge<R: Rng + ?Sized>(grid: Grid, rng: &mut R) -> GridFunction {
    GridFunction::from_raw(grid, bridge_values(grid, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn bridge_is_pinned_at_endpoints() {
        let g = Grid::new(100).unwrap();
        let mut rng = stream(1, 0, 0);
        for _ in 0..20 {
            let b = gen_brownian_bridge(g, &mut rng);
            // one grid step of a path with local scale sqrt(1/T)
            let bound = 4.0 * g.weight().sqrt() * 1.5;
            assert!(b.interpolate(0.0).abs() < bound);
            assert!(b.interpolate(1.0).abs() < bound);
        }
    }

    #[test]
    fn bridge_midpoint_moments() {
        let g = Grid::new(100).unwrap();
        let mut rng = stream(2, 0, 0);
        let n = 100_000;
        let mid = |b: &GridFunction| 0.5 * (b.values()[49] + b.values()[50]);
        let draws: Vec<f64> = (0..n).map(|_| mid(&gen_brownian_bridge(g, &mut rng))).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 3.0 * (0.25f64 * 0.5 / n as f64).sqrt(), "{mean}");
        // averaging the two neighbours of t = 0.5 removes a variance of h/4
        let expected = 0.25 - g.weight() / 4.0;
        assert!((var / expected - 1.0).abs() < 0.05, "{var}");
    }

    #[test]
    fn invalid_sigma_rejected() {
        assert!(InnovationSpec::WhiteGaussian { sigma: 0.0 }.validate().is_err());
        assert!(InnovationSpec::ScaledBrownianBridge { sigma: -1.0 }.validate().is_err());
        assert!(InnovationSpec::ScaledBrownianBridge { sigma: 0.5 }.validate().is_ok());
    }
}
