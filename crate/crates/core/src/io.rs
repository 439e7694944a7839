//! Wide CSV interchange: a header row of grid points followed by one row per
//! curve in temporal order.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{resample, Grid};
use crate::sample::FunctionSample;

pub fn sample_to_csv(sample: &FunctionSample) -> String {
    let mut out = String::new();
    let pts = sample.grid().points();
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{p}").unwrap();
    }
    out.push('\n');
    for row in sample.data().row_iter() {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            write!(out, "{v:.16e}").unwrap();
        }
        out.push('\n');
    }
    out
}

fn parse_row(line: &str, lineno: usize) -> Result<Vec<f64>> {
    line.split(',')
        .map(|cell| {
            cell.trim().parse::<f64>().map_err(|e| Error::Parse {
                location: format!("line {lineno}"),
                reason: format!("`{}`: {e}", cell.trim()),
            })
        })
        .collect()
}

/// Reads curves onto `grid`. Numeric headers give the observation points and
/// trigger linear resampling when they differ from the grid; a
/// non-numeric header (e.g. `t_1,…,t_T`) means a midpoint grid with that many
/// points.
pub fn sample_from_csv(text: &str, grid: Grid) -> Result<FunctionSample> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        location: "line 1".into(),
        reason: "empty input".into(),
    })?;
    let width = header.split(',').count();
    let points = match parse_row(header, 1) {
        Ok(p) => p,
        Err(_) => Grid::new(width)?.points(),
    };
    let native = Grid::new(width)?;
    let same_grid = width == grid.resolution()
        && points
            .iter()
            .zip(native.points())
            .all(|(a, b)| (a - b).abs() <= 1e-9);

    let mut rows = Vec::new();
    for (lineno, line) in lines {
        let row = parse_row(line, lineno)?;
        if row.len() != width {
            return Err(Error::Parse {
                location: format!("line {lineno}"),
                reason: format!("expected {width} values, found {}", row.len()),
            });
        }
        rows.push(row);
    }
    let t = grid.resolution();
    let mut data = DMatrix::zeros(rows.len(), t);
    for (n, row) in rows.iter().enumerate() {
        if same_grid {
            data.row_mut(n).copy_from_slice(row);
        } else {
            let f = resample(&points, row, grid)?;
            data.row_mut(n).copy_from(&f.values().transpose());
        }
    }
    FunctionSample::new(grid, data)
}

pub fn read_sample(path: &Path, grid: Grid) -> Result<FunctionSample> {
    let text = std::fs::read_to_string(path)?;
    sample_from_csv(&text, grid)
}

pub fn write_sample(path: &Path, sample: &FunctionSample) -> Result<()> {
    std::fs::write(path, sample_to_csv(sample))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{simulate, ModelSpec};
    use proptest::prelude::*;

    #[test]
    fn round_trip_is_lossless() {
        let g = Grid::new(25).unwrap();
        let model = ModelSpec::parabolic_far1(g, 0.6).unwrap();
        let x = simulate(&model, 15, 3).unwrap();
        let text = sample_to_csv(&x);
        assert_eq!(sample_from_csv(&text, g).unwrap(), x);
        assert_eq!(text.lines().count(), 16);
    }

    #[test]
    fn coarse_input_is_resampled() {
        let text = "0.25,0.75\n1.0,3.0\n-2.0,-2.0\n";
        let g = Grid::new(4).unwrap();
        let s = sample_from_csv(text, g).unwrap();
        let row: Vec<f64> = s.data().row(0).iter().copied().collect();
        assert_eq!(row, vec![1.0, 1.5, 2.5, 3.0]);
        assert!(s.data().row(1).iter().all(|&v| v == -2.0));
    }

    #[test]
    fn symbolic_header_and_errors() {
        let g = Grid::new(3).unwrap();
        let s = sample_from_csv("t_1,t_2,t_3\n1,2,3\n", g).unwrap();
        assert_eq!(s.len(), 1);
        let err = sample_from_csv("t_1,t_2,t_3\n1,2\n", g).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        assert!(sample_from_csv("a,b,c\n1,x,3\n", g).is_err());
        assert!(sample_from_csv("", g).is_err());
    }

    proptest! {
        #[test]
        fn arbitrary_values_round_trip(vals in proptest::collection::vec(-1e12f64..1e12, 12)) {
            let g = Grid::new(4).unwrap();
            let s = FunctionSample::new(g, DMatrix::from_row_slice(3, 4, &vals)).unwrap();
            prop_assert_eq!(sample_from_csv(&sample_to_csv(&s), g).unwrap(), s);
        }
    }
}
