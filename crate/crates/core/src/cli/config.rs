//! Flat `key = value` configuration with `[section]` headers.
//!
//! ```text
//! [grid]
//! resolution = 100
//!
//! [model]
//! kind = far1
//! kernel = parabolic:0.6
//! innovation = brownian_bridge
//! burn_in = 200
//!
//! [run]
//! n = 200
//! d = 3
//! bandwidth = plugin
//! level = 0.95
//! ```

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use crate::changepoint::BandwidthPolicy;
use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, KernelSurface};
use crate::simulate::{InnovationSpec, ModelKind, ModelSpec, Operator, DEFAULT_BURN_IN};

const GRID_KEYS: &[&str] = &["resolution"];
const MODEL_KEYS: &[&str] = &[
    "kind",
    "kernel",
    "innovation",
    "sigma",
    "burn_in",
    "lags",
    "coefficient",
    "psi",
    "phi",
    "phi_weight",
    "delta",
    "beta",
];
const RUN_KEYS: &[&str] = &[
    "n",
    "d",
    "bandwidth",
    "level",
    "replications",
    "seed",
    "threads",
    "input",
    "response",
    "k",
    "l",
    "threshold",
    "predict",
    "predictions",
    "segment",
    "min_len",
    "theta",
    "shift",
    "summary",
];
const TABLE_KEYS: &[&str] = &["replications", "truncation", "seed"];

fn allowed(section: &str) -> Option<&'static [&'static str]> {
    match section {
        "grid" => Some(GRID_KEYS),
        "model" => Some(MODEL_KEYS),
        "run" => Some(RUN_KEYS),
        "table" => Some(TABLE_KEYS),
        _ => None,
    }
}

#[derive(Debug, Clone, Default)]
pub struct ConfigFile {
    entries: BTreeMap<(String, String), String>,
}

fn bad(section: &str, key: &str, reason: impl Into<String>) -> Error {
    Error::Parse {
        location: format!("[{section}] {key}"),
        reason: reason.into(),
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile> {
        let mut entries = BTreeMap::new();
        let mut section = String::from("run");
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim().to_string();
                if allowed(&name).is_none() {
                    return Err(Error::Parse {
                        location: format!("line {}", i + 1),
                        reason: format!("unknown section [{name}]"),
                    });
                }
                section = name;
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                location: format!("line {}", i + 1),
                reason: "expected `key = value`".into(),
            })?;
            let key = key.trim().to_string();
            if !allowed(&section).is_some_and(|keys| keys.contains(&key.as_str())) {
                return Err(bad(&section, &key, "unknown key"));
            }
            entries.insert((section.clone(), key), value.trim().to_string());
        }
        Ok(ConfigFile { entries })
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(String::as_str)
    }

    pub fn set(&mut self, section: &str, key: &str, value: impl Into<String>) {
        self.entries.insert((section.into(), key.into()), value.into());
    }

    pub fn parsed<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.get(section, key)
            .map(|v| v.parse::<T>().map_err(|e| bad(section, key, format!("`{v}`: {e}"))))
            .transpose()
    }

    pub fn parsed_or<T: std::str::FromStr>(&self, section: &str, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        Ok(self.parsed(section, key)?.unwrap_or(default))
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get("run", key).map(PathBuf::from)
    }

    pub fn grid(&self) -> Result<Grid> {
        let t = self.parsed_or("grid", "resolution", crate::grid::DEFAULT_RESOLUTION)?;
        Grid::new(t).map_err(|e| bad("grid", "resolution", e.to_string()))
    }

    pub fn bandwidth(&self) -> Result<BandwidthPolicy> {
        match self.get("run", "bandwidth") {
            None | Some("plugin") | Some("plug-in") => Ok(BandwidthPolicy::PlugIn),
            Some(v) => v
                .parse::<usize>()
                .map(BandwidthPolicy::Fixed)
                .map_err(|e| bad("run", "bandwidth", format!("`{v}`: expected `plugin` or an integer ({e})"))),
        }
    }

    pub fn level(&self) -> Result<f64> {
        let level: f64 = self.parsed_or("run", "level", 0.95)?;
        if crate::changepoint::DECISION_LEVELS.iter().any(|l| (l - level).abs() < 1e-9) {
            Ok(level)
        } else {
            Err(bad("run", "level", format!("must be 0.90, 0.95 or 0.99, got {level}")))
        }
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let grid = self.grid()?;
        let m = "model";
        let innovation = match self.get(m, "innovation").unwrap_or("brownian_bridge") {
            "brownian_bridge" => InnovationSpec::BrownianBridge,
            "white_gaussian" => InnovationSpec::WhiteGaussian {
                sigma: self.parsed_or(m, "sigma", 1.0)?,
            },
            "scaled_brownian_bridge" => InnovationSpec::ScaledBrownianBridge {
                sigma: self.parsed_or(m, "sigma", 1.0)?,
            },
            other => return Err(bad(m, "innovation", format!("unknown innovation `{other}`"))),
        };
        let burn_in = self.parsed_or(m, "burn_in", DEFAULT_BURN_IN)?;
        let kernel_key = |key: &str, default: &str| -> Result<KernelSurface> {
            parse_kernel(grid, self.get(m, key).unwrap_or(default)).map_err(|reason| bad(m, key, reason))
        };
        let kind = match self.get(m, "kind").unwrap_or("far1") {
            "far1" => {
                let kernel = kernel_key("kernel", "parabolic:0.6")?;
                ModelKind::Far1 { kernel }
            }
            "linear" => {
                let lags = self.get(m, "lags").unwrap_or("identity, parabolic:0.5");
                let coefficients = lags
                    .split(',')
                    .map(|s| match s.trim() {
                        "identity" => Ok(Operator::Identity),
                        spec => parse_kernel(grid, spec).map(Operator::Integral),
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|reason| bad(m, "lags", reason))?;
                ModelKind::Linear { coefficients }
            }
            "product" => ModelKind::Product {
                coefficient: self.parsed_or(m, "coefficient", 0.5)?,
            },
            "bilinear" => {
                let psi = kernel_key("psi", "parabolic:0.4")?;
                let base = kernel_key("phi", "parabolic:0.3")?;
                let weight = parse_function(grid, self.get(m, "phi_weight").unwrap_or("constant:1"))
                    .map_err(|reason| bad(m, "phi_weight", reason))?;
                let phi = weight.values().iter().map(|&w| base.scale(w)).collect();
                ModelKind::Bilinear { psi, phi }
            }
            "farch" => {
                let delta = parse_function(grid, self.get(m, "delta").unwrap_or("constant:0.1"))
                    .map_err(|reason| bad(m, "delta", reason))?;
                let beta = kernel_key("beta", "bump:0.5")?;
                ModelKind::Farch { delta, beta }
            }
            other => return Err(bad(m, "kind", format!("unknown model `{other}`"))),
        };
        let key = match &kind {
            ModelKind::Far1 { .. } => "kernel",
            ModelKind::Linear { .. } => "lags",
            ModelKind::Product { .. } => "coefficient",
            ModelKind::Bilinear { .. } => "phi",
            ModelKind::Farch { .. } => "beta",
        };
        ModelSpec::new(grid, kind, innovation, burn_in).map_err(|e| match e {
            Error::InvalidParameter { name: "sigma", reason } => bad(m, "sigma", reason),
            Error::InvalidParameter { name: "delta", reason } => bad(m, "delta", reason),
            other => bad(m, key, other.to_string()),
        })
    }
}

/// `family[:hs_norm]` with families `zero`, `constant`, `parabolic`,
/// `sine` (`2 sin πt sin πs`), `gaussian` (`exp(−(t−s)²/0.1)`) and `bump`
/// (`16 t(1−t) s(1−s)`). The optional number rescales to that
/// Hilbert-Schmidt norm.
pub fn parse_kernel(grid: Grid, spec: &str) -> std::result::Result<KernelSurface, String> {
    let (family, norm) = match spec.split_once(':') {
        Some((f, n)) => {
            let n: f64 = n.trim().parse().map_err(|e| format!("`{spec}`: bad norm ({e})"))?;
            (f.trim(), Some(n))
        }
        None => (spec.trim(), None),
    };
    let kernel = match family {
        "zero" => KernelSurface::zeros(grid),
        "constant" => KernelSurface::from_fn(grid, |_, _| 1.0),
        "parabolic" => KernelSurface::parabolic(grid),
        "sine" => KernelSurface::from_fn(grid, |t, s| 2.0 * (PI * t).sin() * (PI * s).sin()),
        "gaussian" => KernelSurface::from_fn(grid, |t, s| (-(t - s).powi(2) / 0.1).exp()),
        "bump" => KernelSurface::from_fn(grid, |t, s| 16.0 * t * (1.0 - t) * s * (1.0 - s)),
        other => return Err(format!("unknown kernel family `{other}`")),
    };
    match norm {
        Some(n) => kernel.with_hs_norm(n).map_err(|e| e.to_string()),
        None => Ok(kernel),
    }
}

/// `constant:c`, `sine:c` (`c √2 sin πt`) or `linear:c` (`c t`).
pub fn parse_function(grid: Grid, spec: &str) -> std::result::Result<GridFunction, String> {
    let (family, c) = spec
        .split_once(':')
        .ok_or_else(|| format!("`{spec}`: expected `family:value`"))?;
    let c: f64 = c.trim().parse().map_err(|e| format!("`{spec}`: {e}"))?;
    match family.trim() {
        "constant" => Ok(GridFunction::constant(grid, c)),
        "sine" => Ok(GridFunction::from_fn(grid, |t| c * 2f64.sqrt() * (PI * t).sin())),
        "linear" => Ok(GridFunction::from_fn(grid, |t| c * t)),
        other => Err(format!("unknown function family `{other}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::hs_norm;

    #[test]
    fn parses_sections_and_comments() {
        let c = ConfigFile::parse("# top\n[grid]\nresolution = 40\n[model]\nkind = far1 # inline\nkernel = parabolic:0.5\n[run]\nn=30\n").unwrap();
        assert_eq!(c.grid().unwrap().resolution(), 40);
        assert_eq!(c.parsed::<usize>("run", "n").unwrap(), Some(30));
        let model = c.model().unwrap();
        match model.kind() {
            ModelKind::Far1 { kernel } => assert!((hs_norm(kernel) - 0.5).abs() < 1e-12),
            _ => panic!(),
        }
    }

    #[test]
    fn errors_name_the_key() {
        let err = ConfigFile::parse("[model]\ncolour = red\n").unwrap_err();
        assert!(err.to_string().contains("colour"));
        let c = ConfigFile::parse("[model]\nkernel = parabolic:1.2\n").unwrap();
        let err = c.model().unwrap_err().to_string();
        assert!(err.contains("kernel"), "{err}");
        let c = ConfigFile::parse("[run]\nlevel = 0.8\n").unwrap();
        assert!(c.level().unwrap_err().to_string().contains("level"));
        let c = ConfigFile::parse("[run]\nn = many\n").unwrap();
        assert!(c.parsed::<usize>("run", "n").unwrap_err().to_string().contains("[run] n"));
        assert!(ConfigFile::parse("[nowhere]\n").is_err());
        let c = ConfigFile::parse("[model]\ninnovation = white_gaussian\nsigma = -1\n").unwrap();
        assert!(c.model().unwrap_err().to_string().contains("sigma"));
    }

    #[test]
    fn every_model_kind_builds() {
        for kind in ["far1", "linear", "product", "bilinear", "farch"] {
            let c = ConfigFile::parse(&format!("[grid]\nresolution = 16\n[model]\nkind = {kind}\n")).unwrap();
            c.model().unwrap();
        }
    }

    #[test]
    fn bandwidth_policies() {
        let c = ConfigFile::parse("[run]\nbandwidth = 4\n").unwrap();
        assert_eq!(c.bandwidth().unwrap(), BandwidthPolicy::Fixed(4));
        let c = ConfigFile::parse("[run]\nbandwidth = plugin\n").unwrap();
        assert_eq!(c.bandwidth().unwrap(), BandwidthPolicy::PlugIn);
        let c = ConfigFile::parse("[run]\nbandwidth = wide\n").unwrap();
        assert!(c.bandwidth().is_err());
    }
}
