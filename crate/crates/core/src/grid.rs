//! Discretized `L²([0,1])` arithmetic.
//!
//! Curves live on a uniform midpoint grid `t_i = (i - 0.5) / T` with constant
//! quadrature weight `1/T`, so every inner product is a dot product scaled by
//! `1/T` and the discretized covariance operator is a symmetric matrix.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub const DEFAULT_RESOLUTION: usize = 100;

/// Uniform midpoint grid on `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    resolution: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            resolution: DEFAULT_RESOLUTION,
        }
    }
}

impl Grid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::invalid("resolution", "must be positive"));
        }
        Ok(Grid { resolution })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.resolution as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.resolution as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.resolution).map(|i| self.point(i)).collect()
    }

    pub(crate) fn check(&self, other: &Grid) -> Result<()> {
        if self.resolution != other.resolution {
            return Err(Error::GridMismatch {
                left: self.resolution,
                right: other.resolution,
            });
        }
        Ok(())
    }
}

/// One curve sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: DVector<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: DVector<f64>) -> Result<Self> {
        if values.len() != grid.resolution() {
            return Err(Error::DimensionMismatch {
                expected: grid.resolution(),
                found: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "curve contains non-finite values"));
        }
        Ok(GridFunction { grid, values })
    }

    pub fn from_vec(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, DVector::from_vec(values))
    }

    /// Samples `f` at the grid points.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = DVector::from_iterator(grid.resolution(), grid.points().into_iter().map(f));
        GridFunction { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        GridFunction {
            grid,
            values: DVector::zeros(grid.resolution()),
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        GridFunction {
            grid,
            values: DVector::from_element(grid.resolution(), c),
        }
    }

    /// Wraps values without the finiteness check; used on hot paths where the
    /// caller guards divergence separately.
    pub(crate) fn from_raw(grid: Grid, values: DVector<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.resolution());
        GridFunction { grid, values }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        (self.values.norm_squared() * self.grid.weight()).sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.amax()
    }

    pub fn scale(&self, a: f64) -> Self {
        GridFunction::from_raw(self.grid, &self.values * a)
    }

    pub fn add(&self, other: &GridFunction) -> Result<Self> {
        self.grid.check(&other.grid)?;
        Ok(GridFunction::from_raw(self.grid, &self.values + &other.values))
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.grid.check(&other.grid)?;
        Ok(GridFunction::from_raw(self.grid, &self.values - &other.values))
    }

    /// Linear interpolation of the grid values at `x`, extrapolating linearly
    /// from the two outermost points.
    pub fn interpolate(&self, x: f64) -> f64 {
        let pos = x * self.grid.resolution() as f64 - 0.5;
        let n = self.values.len();
        if n == 1 {
            return self.values[0];
        }
        let i = (pos.floor() as isize).clamp(0, n as isize - 2) as usize;
        let frac = pos - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }
}

/// Linearly resamples values observed at increasing `points` onto `grid`,
/// holding the end values constant outside the observed range.
pub fn resample(points: &[f64], values: &[f64], grid: Grid) -> Result<GridFunction> {
    if points.len() != values.len() || points.is_empty() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: values.len(),
        });
    }
    if points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("points", "observation points must be strictly increasing"));
    }
    let out = grid.points().into_iter().map(|t| {
        if t <= points[0] {
            return values[0];
        }
        let last = points.len() - 1;
        if t >= points[last] {
            return values[last];
        }
        let j = points.partition_point(|&p| p <= t);
        let (x0, x1) = (points[j - 1], points[j]);
        let w = (t - x0) / (x1 - x0);
        values[j - 1] * (1.0 - w) + values[j] * w
    });
    GridFunction::new(grid, DVector::from_iterator(grid.resolution(), out))
}

pub fn inner_product(f: &GridFunction, g: &GridFunction) -> Result<f64> {
    f.grid.check(&g.grid)?;
    Ok(f.values.dot(&g.values) * f.grid.weight())
}

/// Bivariate function on the grid's tensor square; entry `(i, j)` is
/// `k(t_i, t_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelSurface {
    grid: Grid,
    values: DMatrix<f64>,
}

impl KernelSurface {
    pub fn new(grid: Grid, values: DMatrix<f64>) -> Result<Self> {
        let t = grid.resolution();
        if values.nrows() != t || values.ncols() != t {
            return Err(Error::DimensionMismatch {
                expected: t,
                found: values.nrows().max(values.ncols()),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "kernel contains non-finite values"));
        }
        Ok(KernelSurface { grid, values })
    }

    pub fn from_fn(grid: Grid, k: impl Fn(f64, f64) -> f64) -> Self {
        let pts = grid.points();
        let t = grid.resolution();
        KernelSurface {
            grid,
            values: DMatrix::from_fn(t, t, |i, j| k(pts[i], pts[j])),
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        let t = grid.resolution();
        KernelSurface {
            grid,
            values: DMatrix::zeros(t, t),
        }
    }

    /// `f(t) g(s)`.
    pub fn outer(f: &GridFunction, g: &GridFunction) -> Result<Self> {
        f.grid.check(&g.grid)?;
        Ok(KernelSurface {
            grid: f.grid,
            values: f.values() * g.values().transpose(),
        })
    }

    pub(crate) fn from_raw(grid: Grid, values: DMatrix<f64>) -> Self {
        KernelSurface { grid, values }
    }

    /// `2 - (2t-1)² - (2s-1)²`, the parabolic kernel of the standard FAR(1)
    /// benchmark.
    pub fn parabolic(grid: Grid) -> Self {
        Self::from_fn(grid, |t, s| 2.0 - (2.0 * t - 1.0).powi(2) - (2.0 * s - 1.0).powi(2))
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn scale(&self, a: f64) -> Self {
        KernelSurface::from_raw(self.grid, &self.values * a)
    }

    /// Rescales so that [`hs_norm`] equals `target`. Fails on the zero kernel.
    pub fn with_hs_norm(&self, target: f64) -> Result<Self> {
        let current = hs_norm(self);
        if current == 0.0 {
            if target == 0.0 {
                return Ok(self.clone());
            }
            return Err(Error::invalid("kernel", "cannot rescale the zero kernel"));
        }
        Ok(self.scale(target / current))
    }

    pub fn add(&self, other: &KernelSurface) -> Result<Self> {
        self.grid.check(&other.grid)?;
        Ok(KernelSurface::from_raw(self.grid, &self.values + &other.values))
    }

    pub fn sub(&self, other: &KernelSurface) -> Result<Self> {
        self.grid.check(&other.grid)?;
        Ok(KernelSurface::from_raw(self.grid, &self.values - &other.values))
    }

    pub fn transpose(&self) -> Self {
        KernelSurface::from_raw(self.grid, self.values.transpose())
    }

    /// Replaces the values by `(K + Kᵀ)/2`; the result is exactly symmetric.
    pub fn symmetrized(&self) -> Self {
        let t = self.grid.resolution();
        let mut values = self.values.clone();
        for i in 0..t {
            for j in (i + 1)..t {
                let avg = 0.5 * (values[(i, j)] + values[(j, i)]);
                values[(i, j)] = avg;
                values[(j, i)] = avg;
            }
        }
        KernelSurface::from_raw(self.grid, values)
    }

    pub fn is_symmetric(&self) -> bool {
        self.values == self.values.transpose()
    }

    /// Composition `(A ∘ B)`, i.e. the kernel `∫ a(t,u) b(u,s) du`.
    pub fn compose(&self, other: &KernelSurface) -> Result<Self> {
        self.grid.check(&other.grid)?;
        Ok(KernelSurface::from_raw(
            self.grid,
            (&self.values * &other.values) * self.grid.weight(),
        ))
    }

    /// Eigenpairs of the integral operator, assuming a symmetric kernel.
    /// Eigenvalues are returned in nonincreasing order with eigenfunctions
    /// of unit quadrature norm.
    pub fn operator_eigen(&self) -> Result<(Vec<f64>, Vec<GridFunction>)> {
        let w = self.grid.weight();
        let matrix = self.symmetrized().values * w;
        let eig = SymmetricEigen::try_new(matrix, f64::EPSILON, 0)
            .ok_or_else(|| Error::Numeric("symmetric eigen-solver did not converge".into()))?;
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let scale = w.sqrt().recip();
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let functions = order
            .iter()
            .map(|&k| GridFunction::from_raw(self.grid, eig.eigenvectors.column(k) * scale))
            .collect();
        Ok((values, functions))
    }
}

/// `g(t_i) = (1/T) Σ_j K(t_i, t_j) f(t_j)`.
pub fn apply_operator(kernel: &KernelSurface, f: &GridFunction) -> Result<GridFunction> {
    kernel.grid.check(&f.grid)?;
    Ok(apply_unchecked(kernel, f.values()))
}

pub(crate) fn apply_unchecked(kernel: &KernelSurface, f: &DVector<f64>) -> GridFunction {
    let mut out = kernel.values() * f;
    out *= kernel.grid.weight();
    GridFunction::from_raw(kernel.grid, out)
}

pub fn hs_norm(kernel: &KernelSurface) -> f64 {
    kernel.values.norm() * kernel.grid.weight()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid(t: usize) -> Grid {
        Grid::new(t).unwrap()
    }

    #[test]
    fn grid_points_and_weights() {
        let g = grid(7);
        let pts = g.points();
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert!(pts[0] > 0.0 && pts[6] < 1.0);
        assert_abs_diff_eq!(g.weight() * 7.0, 1.0, epsilon = 1e-15);
        assert!(Grid::new(0).is_err());
    }

    #[test]
    fn inner_product_examples() {
        let g = grid(100);
        let one = GridFunction::constant(g, 1.0);
        assert_eq!(inner_product(&one, &one).unwrap(), 1.0);

        let id = GridFunction::from_fn(g, |t| t);
        let ip = inner_product(&id, &id).unwrap();
        assert!((ip - 1.0 / 3.0).abs() <= 2.0 / 100f64.powi(2));

        let s = GridFunction::from_fn(g, |t| 2f64.sqrt() * (std::f64::consts::PI * t).sin());
        assert_abs_diff_eq!(inner_product(&s, &s).unwrap(), 1.0, epsilon = 1e-3);
    }

    #[test]
    fn grid_mismatch_names_both_resolutions() {
        let f = GridFunction::zeros(grid(10));
        let g = GridFunction::zeros(grid(12));
        let msg = inner_product(&f, &g).unwrap_err().to_string();
        assert!(msg.contains("10") && msg.contains("12"), "{msg}");
        assert!(apply_operator(&KernelSurface::zeros(grid(10)), &g).is_err());
    }

    #[test]
    fn apply_operator_examples() {
        let g = grid(100);
        let f = GridFunction::from_fn(g, |t| (3.0 * t).cos());
        let zero = apply_operator(&KernelSurface::zeros(g), &f).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);

        let avg = KernelSurface::from_fn(g, |_, _| 1.0);
        let c = apply_operator(&avg, &GridFunction::constant(g, 2.5)).unwrap();
        for v in c.values().iter() {
            assert_abs_diff_eq!(*v, 2.5, epsilon = 1e-12);
        }

        let p = apply_operator(&KernelSurface::parabolic(g), &GridFunction::constant(g, 1.0)).unwrap();
        for (i, t) in g.points().into_iter().enumerate() {
            let exact = 2.0 - (2.0 * t - 1.0).powi(2) - 1.0 / 3.0;
            assert!((p.values()[i] - exact).abs() <= 2.0 / 1e4);
        }
    }

    #[test]
    fn hs_norm_examples() {
        let g = grid(100);
        assert_eq!(hs_norm(&KernelSurface::zeros(g)), 0.0);
        let p = KernelSurface::parabolic(g);
        let exact = (88.0f64 / 45.0).sqrt();
        assert_abs_diff_eq!(hs_norm(&p), exact, epsilon = 1e-3);
        let gamma = 0.6 / exact;
        assert_abs_diff_eq!(hs_norm(&p.scale(gamma)), 0.6, epsilon = 1e-3);
        assert_abs_diff_eq!(hs_norm(&p.with_hs_norm(0.6).unwrap()), 0.6, epsilon = 1e-12);
    }

    #[test]
    fn quadrature_error_shrinks_quadratically() {
        let err = |t: usize| {
            let g = grid(t);
            let id = GridFunction::from_fn(g, |x| x);
            let e1 = (inner_product(&id, &id).unwrap() - 1.0 / 3.0).abs();
            let e2 = (hs_norm(&KernelSurface::parabolic(g)) - (88.0f64 / 45.0).sqrt()).abs();
            (e1, e2)
        };
        let (a1, a2) = err(50);
        let (b1, b2) = err(100);
        assert!((a1 / b1 - 4.0).abs() < 0.1, "{}", a1 / b1);
        assert!((a2 / b2 - 4.0).abs() < 0.2, "{}", a2 / b2);
    }

    #[test]
    fn resample_maps_coarse_grid() {
        let pts: Vec<f64> = (0..48).map(|i| (i as f64 + 0.5) / 48.0).collect();
        let vals: Vec<f64> = pts.iter().map(|t| 3.0 * t - 1.0).collect();
        let f = resample(&pts, &vals, grid(100)).unwrap();
        for (i, t) in grid(100).points().into_iter().enumerate() {
            let expected = 3.0 * t.clamp(pts[0], pts[47]) - 1.0;
            assert_abs_diff_eq!(f.values()[i], expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn operator_eigen_of_rank_one_kernel() {
        let g = grid(64);
        let v = GridFunction::from_fn(g, |t| 2f64.sqrt() * (std::f64::consts::PI * t).sin());
        let v = v.scale(1.0 / v.norm());
        let k = KernelSurface::outer(&v, &v).unwrap().scale(0.7);
        let (vals, funcs) = k.operator_eigen().unwrap();
        assert_abs_diff_eq!(vals[0], 0.7, epsilon = 1e-12);
        assert!(vals[1].abs() < 1e-12);
        assert_abs_diff_eq!(inner_product(&funcs[0], &v).unwrap().abs(), 1.0, epsilon = 1e-10);
    }

    fn arb_fn(t: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, t)
    }

    proptest! {
        #[test]
        fn cauchy_schwarz(a in arb_fn(16), b in arb_fn(16)) {
            let g = grid(16);
            let f = GridFunction::from_vec(g, a).unwrap();
            let h = GridFunction::from_vec(g, b).unwrap();
            prop_assert!(inner_product(&f, &h).unwrap().abs() <= f.norm() * h.norm() + 1e-12);
        }

        #[test]
        fn operator_is_linear_and_bounded(
            k in proptest::collection::vec(-3.0f64..3.0, 256),
            a in arb_fn(16), b in arb_fn(16), x in -2.0f64..2.0, y in -2.0f64..2.0,
        ) {
            let g = grid(16);
            let kern = KernelSurface::new(g, DMatrix::from_vec(16, 16, k)).unwrap();
            let f = GridFunction::from_vec(g, a).unwrap();
            let h = GridFunction::from_vec(g, b).unwrap();
            let lhs = apply_operator(&kern, &f.scale(x).add(&h.scale(y)).unwrap()).unwrap();
            let rhs = apply_operator(&kern, &f).unwrap().scale(x)
                .add(&apply_operator(&kern, &h).unwrap().scale(y)).unwrap();
            prop_assert!(lhs.sub(&rhs).unwrap().sup_norm() <= 1e-12 * (1.0 + rhs.sup_norm()));
            let kf = apply_operator(&kern, &f).unwrap();
            prop_assert!(kf.norm() <= hs_norm(&kern) * f.norm() + 1e-9);
        }
    }
}
