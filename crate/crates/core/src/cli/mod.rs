//! Batch front end.
//!
//! ```text
//! fts <simulate|fpca|detect|experiment|table|flm> [--config PATH] [--seed U64] [--threads N] [--out PATH]
//! ```
//!
//! Recognised configuration keys (see [`config`] for the file format):
//!
//! | section   | key            | meaning                                              |
//! |-----------|----------------|------------------------------------------------------|
//! | `[grid]`  | `resolution`   | grid size `T` (default 100)                          |
//! | `[model]` | `kind`         | `far1`, `linear`, `product`, `bilinear`, `farch`     |
//! |           | `kernel`       | FAR(1) kernel, `family[:hs_norm]` (default `parabolic:0.6`) |
//! |           | `lags`         | linear model operators, e.g. `identity, parabolic:0.5` |
//! |           | `coefficient`  | product model AR coefficient                         |
//! |           | `psi`, `phi`, `phi_weight` | bilinear kernels and the `u`-profile of φ |
//! |           | `delta`, `beta`| FARCH intercept function and kernel                  |
//! |           | `innovation`   | `brownian_bridge`, `white_gaussian`, `scaled_brownian_bridge` |
//! |           | `sigma`        | innovation scale                                     |
//! |           | `burn_in`      | discarded warm-up steps (default 200)                |
//! | `[run]`   | `n`            | sample size for `simulate` and `experiment`          |
//! |           | `d`            | number of principal components                       |
//! |           | `threshold`    | explained-variance target when `d`/`k`/`l` is absent |
//! |           | `bandwidth`    | `plugin` or an integer `q`                           |
//! |           | `level`        | `0.90`, `0.95` or `0.99`                             |
//! |           | `replications` | Monte Carlo replications `R`                         |
//! |           | `seed`         | master seed (overridden by `--seed`)                 |
//! |           | `threads`      | worker count (overridden by `--threads`)             |
//! |           | `input`        | CSV of curves for `fpca`, `detect`, `flm`            |
//! |           | `response`     | response CSV for `flm`                               |
//! |           | `k`, `l`       | regressor/response components for `flm`             |
//! |           | `predict`, `predictions` | new regressors and output path for `flm`   |
//! |           | `segment`, `min_len` | binary segmentation in `detect`                |
//! |           | `theta`, `shift` | break fraction and mean shift for `experiment`     |
//! |           | `summary`      | path for the `experiment` summary JSON               |
//! | `[table]` | `replications`, `truncation`, `seed` | critical-value table regeneration |

pub mod config;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::changepoint::{
    detect, regenerate_table, segment, CriticalTable, DetectConfig, DEFAULT_REPLICATIONS, DEFAULT_TABLE_SEED,
    DEFAULT_TRUNCATION, MIN_SAMPLE,
};
use crate::error::{Error, Result};
use crate::experiment::{rows_to_csv, Alternative, Experiment};
use crate::flm;
use crate::fpca::{fpca, select_components};
use crate::io::{read_sample, sample_to_csv};
use crate::simulate::{admissibility, simulate};

pub use config::ConfigFile;

#[derive(Debug, Parser)]
#[command(name = "fts", version, about = "Functional time series toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Simulate curves from the `[model]` section to wide CSV.
    Simulate,
    /// Principal components of `[run] input` as JSON.
    Fpca,
    /// Mean-change test on `[run] input` as JSON.
    Detect,
    /// Replicated size or power experiment.
    Experiment,
    /// Regenerate the critical-value table.
    Table,
    /// Fit the functional linear model.
    Flm,
}

/// Parses arguments, runs the command and maps errors to exit codes.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                2
            } else {
                3
            }
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ConfigFile::parse(&std::fs::read_to_string(path)?)?,
        None => ConfigFile::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.set("run", "seed", seed.to_string());
    }
    let threads = match cli.threads {
        Some(t) => t,
        None => cfg.parsed_or("run", "threads", 1)?,
    };
    if threads == 0 {
        return Err(Error::Parse {
            location: "--threads".into(),
            reason: "must be at least 1".into(),
        });
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Numeric(format!("could not start worker pool: {e}")))?;
    let out = cli.out.as_deref();
    pool.install(|| match cli.command {
        Command::Simulate => cmd_simulate(&cfg, out),
        Command::Fpca => cmd_fpca(&cfg, out),
        Command::Detect => cmd_detect(&cfg, out),
        Command::Experiment => cmd_experiment(&cfg, out),
        Command::Table => cmd_table(&cfg, out),
        Command::Flm => cmd_flm(&cfg, out),
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn required_path(cfg: &ConfigFile, key: &str) -> Result<PathBuf> {
    match cfg.path(key) {
        Some(p) if !p.as_os_str().is_empty() => Ok(p),
        _ => Err(Error::Parse {
            location: format!("[run] {key}"),
            reason: "a path is required for this command".into(),
        }),
    }
}

fn seed(cfg: &ConfigFile) -> Result<u64> {
    cfg.parsed_or("run", "seed", 1)
}

fn positive(cfg: &ConfigFile, key: &str, default: usize) -> Result<usize> {
    let v = cfg.parsed_or("run", key, default)?;
    if v == 0 {
        return Err(Error::Parse {
            location: format!("[run] {key}"),
            reason: "must be at least 1".into(),
        });
    }
    Ok(v)
}

fn detect_config(cfg: &ConfigFile) -> Result<DetectConfig> {
    Ok(DetectConfig::new(
        positive(cfg, "d", 3)?,
        cfg.bandwidth()?,
        cfg.level()?,
    ))
}

fn cmd_simulate(cfg: &ConfigFile, out: Option<&Path>) -> Result<()> {
    let model = cfg.model()?;
    let n = positive(cfg, "n", 200)?;
    let seed = seed(cfg)?;
    if let Some(diag) = admissibility(&model, 2.0, 2000, seed) {
        log::info!("admissibility: {diag:?}");
    }
    let sample = simulate(&model, n, seed)?;
    emit(out, &sample_to_csv(&sample))
}

fn cmd_fpca(cfg: &ConfigFile, out: Option<&Path>) -> Result<()> {
    let grid = cfg.grid()?;
    let sample = read_sample(&required_path(cfg, "input")?, grid)?;
    let d = match cfg.parsed::<usize>("run", "d")? {
        Some(d) => d,
        None => {
            let threshold = cfg.parsed_or("run", "threshold", flm::DEFAULT_THRESHOLD)?;
            select_components(&sample, threshold, flm::MAX_COMPONENTS)?
        }
    };
    let result = fpca(&sample, d)?;
    emit(out, &to_json(&result.to_json())?)
}

fn cmd_detect(cfg: &ConfigFile, out: Option<&Path>) -> Result<()> {
    let grid = cfg.grid()?;
    let sample = read_sample(&required_path(cfg, "input")?, grid)?;
    let config = detect_config(cfg)?;
    let mut report = detect(&sample, &config)?;
    if cfg.parsed_or("run", "segment", false)? {
        let min_len = cfg.parsed_or("run", "min_len", MIN_SAMPLE)?;
        report.segmentation = Some(segment(&sample, &config, min_len)?);
    }
    emit(out, &to_json(&report)?)
}

fn cmd_experiment(cfg: &ConfigFile, out: Option<&Path>) -> Result<()> {
    let model = cfg.model()?;
    let grid = model.grid();
    let replications = positive(cfg, "replications", 1000)?;
    if replications < 100 {
        log::warn!("R = {replications} < 100: the binomial standard error is unreliable");
    }
    let alternative = match cfg.get("run", "shift") {
        Some(spec) => {
            let shift = config::parse_function(grid, spec).map_err(|reason| Error::Parse {
                location: "[run] shift".into(),
                reason,
            })?;
            let theta: f64 = cfg.parsed_or("run", "theta", 0.5)?;
            if !(theta > 0.0 && theta < 1.0) {
                return Err(Error::Parse {
                    location: "[run] theta".into(),
                    reason: format!("must lie in (0, 1), got {theta}"),
                });
            }
            Some(Alternative { theta, shift })
        }
        None => None,
    };
    let experiment = Experiment {
        model,
        n: positive(cfg, "n", 200)?,
        detect: detect_config(cfg)?,
        replications,
        seed: seed(cfg)?,
        alternative,
    };
    let rows = experiment.run()?;
    let summary = to_json(&experiment.summarize(&rows))?;
    emit(out, &rows_to_csv(&rows))?;
    match (cfg.path("summary"), out) {
        (Some(path), _) => std::fs::write(path, summary)?,
        (None, Some(_)) => std::io::stdout().write_all(summary.as_bytes())?,
        (None, None) => eprint!("{summary}"),
    }
    Ok(())
}

fn cmd_table(cfg: &ConfigFile, out: Option<&Path>) -> Result<()> {
    let replications = cfg.parsed_or("table", "replications", DEFAULT_REPLICATIONS)?;
    let truncation = cfg.parsed_or("table", "truncation", DEFAULT_TRUNCATION)?;
    let seed = match cfg.get("run", "seed") {
        Some(_) => seed(cfg)?,
        None => cfg.parsed_or("table", "seed", DEFAULT_TABLE_SEED)?,
    };
    let table = regenerate_table(replications, truncation, seed)?;
    let shipped = CriticalTable::shipped();
    emit(out, &table.to_csv())?;
    let line = format!(
        "max deviation from shipped table: {:.6} (decision levels: {:.6})\n",
        table.max_abs_deviation(shipped),
        table.max_decision_deviation(shipped)
    );
    match out {
        Some(_) => print!("{line}"),
        None => eprint!("{line}"),
    }
    Ok(())
}

fn cmd_flm(cfg: &ConfigFile, out: Option<&Path>) -> Result<()> {
    let grid = cfg.grid()?;
    let x = read_sample(&required_path(cfg, "input")?, grid)?;
    let y = read_sample(&required_path(cfg, "response")?, grid)?;
    let k = cfg.parsed::<usize>("run", "k")?;
    let l = cfg.parsed::<usize>("run", "l")?;
    let fit = match (k, l) {
        (Some(k), Some(l)) => flm::fit(&x, &y, k, l)?,
        (None, None) => flm::fit_auto(&x, &y, cfg.parsed_or("run", "threshold", flm::DEFAULT_THRESHOLD)?)?,
        _ => {
            return Err(Error::Parse {
                location: if k.is_none() { "[run] k" } else { "[run] l" }.into(),
                reason: "set both k and l, or neither".into(),
            })
        }
    };
    if let Some(path) = cfg.path("predict") {
        let x_new = read_sample(&path, grid)?;
        let pred = flm::predict(&fit, &x_new)?;
        let target = required_path(cfg, "predictions")?;
        std::fs::write(target, sample_to_csv(&pred))?;
    }
    emit(out, &to_json(&fit.to_json())?)
}
