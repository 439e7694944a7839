#![allow(clippy::neg_cmp_op_on_partial_ord)]
//! Weakly dependent functional time series on a discretized unit interval.
//!
//! Curves live on the midpoint grid `t_i = (i − 1/2)/T` with equal weights
//! `1/T`. The crate covers simulation of functional autoregressive and
//! nonlinear models together with their `m`-dependent approximations,
//! functional principal components, long-run covariance estimation of the
//! scores, a mean-change test, and functional linear regression.
//!
//! ```
//! use fts::{grid::Grid, simulate::{simulate, ModelSpec}, changepoint::{detect, DetectConfig, BandwidthPolicy}};
//!
//! let grid = Grid::new(50).unwrap();
//! let model = ModelSpec::parabolic_far1(grid, 0.6).unwrap();
//! let x = simulate(&model, 100, 7).unwrap();
//! let report = detect(&x, &DetectConfig::new(3, BandwidthPolicy::PlugIn, 0.95)).unwrap();
//! assert!(report.statistic >= 0.0);
//! ```

pub mod changepoint;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod flm;
pub mod fpca;
pub mod grid;
pub mod io;
pub mod longrun;
pub mod rng;
pub mod sample;
pub mod simulate;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction, KernelSurface};
pub use sample::FunctionSample;
