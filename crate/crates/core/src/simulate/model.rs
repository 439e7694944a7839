use std::collections::VecDeque;

use nalgebra::DVector;

use super::innovation::{Innovation, InnovationSpec};
use crate::error::{Error, Result};
use crate::grid::{apply_unchecked, hs_norm, Grid, GridFunction, KernelSurface};

pub const DEFAULT_BURN_IN: usize = 200;
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;

/// Coefficient operator of a linear process.
#[derive(Debug, Clone, PartialEq)]
pub enum Operator {
    Identity,
    Integral(KernelSurface),
}

impl Operator {
    fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Operator::Identity => x.clone(),
            Operator::Integral(k) => apply_unchecked(k, x).into_values(),
        }
    }

    fn grid(&self) -> Option<Grid> {
        match self {
            Operator::Identity => None,
            Operator::Integral(k) => Some(k.grid()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// `X_n = Ψ(X_{n-1}) + ε_n`.
    Far1 { kernel: KernelSurface },
    /// `X_n = Σ_j Ψ_j(ε_{n-j})` over the listed coefficients.
    Linear { coefficients: Vec<Operator> },
    /// `X_n = U_n ε_n` with the scalar amplitude `U_n = a U_{n-1} + γ_n`.
    Product { coefficient: f64 },
    /// `X_{n+1} = (ψ + φ_n)(X_n) + ε_{n+1}` with
    /// `φ_n(t,s) = ∫ φ(t,s,u) ε_n(u) du`; `phi[u]` is the slice at grid
    /// point `u`.
    Bilinear {
        psi: KernelSurface,
        phi: Vec<KernelSurface>,
    },
    /// `y_k = ε_k σ_k`, `σ_k²(t) = δ(t) + ∫ β(t,s) y_{k-1}²(s) ds`.
    Farch {
        delta: GridFunction,
        beta: KernelSurface,
    },
}

/// A validated model together with its innovation law and burn-in length.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    grid: Grid,
    kind: ModelKind,
    innovation: InnovationSpec,
    burn_in: usize,
}

impl ModelSpec {
    pub fn new(grid: Grid, kind: ModelKind, innovation: InnovationSpec, burn_in: usize) -> Result<Self> {
        innovation.validate()?;
        match &kind {
            ModelKind::Far1 { kernel } => {
                grid.check(&kernel.grid())?;
                let norm = hs_norm(kernel);
                if norm >= 1.0 - 1e-12 {
                    return Err(Error::invalid(
                        "kernel_norm",
                        format!("FAR(1) requires a Hilbert-Schmidt norm below 1, got {norm:.6}"),
                    ));
                }
            }
            ModelKind::Linear { coefficients } => {
                if coefficients.is_empty() {
                    return Err(Error::invalid("coefficients", "linear process needs at least one coefficient"));
                }
                for g in coefficients.iter().filter_map(Operator::grid) {
                    grid.check(&g)?;
                }
            }
            ModelKind::Product { coefficient } => {
                if !(coefficient.abs() < 1.0) {
                    return Err(Error::invalid(
                        "coefficient",
                        format!("amplitude recursion needs |a| < 1, got {coefficient}"),
                    ));
                }
            }
            ModelKind::Bilinear { psi, phi } => {
                grid.check(&psi.grid())?;
                if phi.len() != grid.resolution() {
                    return Err(Error::DimensionMismatch {
                        expected: grid.resolution(),
                        found: phi.len(),
                    });
                }
                for slice in phi {
                    grid.check(&slice.grid())?;
                }
            }
            ModelKind::Farch { delta, beta } => {
                grid.check(&delta.grid())?;
                grid.check(&beta.grid())?;
                if delta.values().iter().any(|&d| d <= 0.0) {
                    return Err(Error::invalid("delta", "must be strictly positive"));
                }
                if beta.values().iter().any(|&b| b < 0.0) {
                    return Err(Error::invalid("beta", "must be nonnegative"));
                }
            }
        }
        Ok(ModelSpec {
            grid,
            kind,
            innovation,
            burn_in,
        })
    }

    /// FAR(1) with the given kernel, Brownian-bridge innovations and the
    /// default burn-in.
    pub fn far1(kernel: KernelSurface) -> Result<Self> {
        let grid = kernel.grid();
        Self::new(grid, ModelKind::Far1 { kernel }, InnovationSpec::BrownianBridge, DEFAULT_BURN_IN)
    }

    /// FAR(1) with the parabolic kernel scaled to Hilbert-Schmidt norm
    /// `norm` and Brownian-bridge innovations.
    pub fn parabolic_far1(grid: Grid, norm: f64) -> Result<Self> {
        Self::far1(KernelSurface::parabolic(grid).with_hs_norm(norm)?)
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn innovation(&self) -> InnovationSpec {
        self.innovation
    }

    pub fn burn_in(&self) -> usize {
        self.burn_in
    }
}

/// Running state of one realization of a model recursion.
pub(crate) struct Recursion<'a> {
    spec: &'a ModelSpec,
    prev: DVector<f64>,
    prev_innovation: DVector<f64>,
    history: VecDeque<DVector<f64>>,
    amplitude: f64,
    step: usize,
}

impl<'a> Recursion<'a> {
    pub fn new(spec: &'a ModelSpec) -> Self {
        let t = spec.grid.resolution();
        Recursion {
            spec,
            prev: DVector::zeros(t),
            prev_innovation: DVector::zeros(t),
            history: VecDeque::new(),
            amplitude: 0.0,
            step: 0,
        }
    }

    /// Advances one step and returns the new curve.
    pub fn step(&mut self, innovation: &Innovation) -> Result<&DVector<f64>> {
        let grid = self.spec.grid;
        let next = match &self.spec.kind {
            ModelKind::Far1 { kernel } => {
                let mut x = apply_unchecked(kernel, &self.prev).into_values();
                x += &innovation.curve;
                x
            }
            ModelKind::Linear { coefficients } => {
                self.history.push_front(innovation.curve.clone());
                self.history.truncate(coefficients.len());
                let mut x = DVector::zeros(grid.resolution());
                for (op, eps) in coefficients.iter().zip(self.history.iter()) {
                    x += op.apply(eps);
                }
                x
            }
            ModelKind::Product { coefficient } => {
                self.amplitude = coefficient * self.amplitude + innovation.scalar;
                &innovation.curve * self.amplitude
            }
            ModelKind::Bilinear { psi, phi } => {
                let mut x = apply_unchecked(psi, &self.prev).into_values();
                let w = grid.weight();
                for (slice, &e) in phi.iter().zip(self.prev_innovation.iter()) {
                    if e != 0.0 {
                        x += apply_unchecked(slice, &self.prev).into_values() * (e * w);
                    }
                }
                x += &innovation.curve;
                self.prev_innovation.copy_from(&innovation.curve);
                x
            }
            ModelKind::Farch { delta, beta } => {
                let squared = self.prev.map(|v| v * v);
                let mut sigma2 = apply_unchecked(beta, &squared).into_values();
                sigma2 += delta.values();
                innovation.curve.zip_map(&sigma2, |e, s| e * s.max(0.0).sqrt())
            }
        };
        self.step += 1;
        let sup = next.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
        if sup > DIVERGENCE_THRESHOLD {
            return Err(Error::Nonstationary {
                step: self.step,
                sup_norm: sup,
            });
        }
        self.prev = next;
        Ok(&self.prev)
    }
}
