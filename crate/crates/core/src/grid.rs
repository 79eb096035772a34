//! Rectangular lattices and density samples on them.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Window for the normalization claim on a [`DensityField`].
pub const NORMALIZATION_TOL: f64 = 1e-3;
pub const DEFAULT_NEGATIVITY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize) -> Result<Self> {
        let axis = Axis { min, max, count };
        axis.validate()?;
        Ok(axis)
    }

    fn validate(&self) -> Result<()> {
        ensure!(
            self.min.is_finite() && self.max.is_finite() && self.max > self.min,
            "grid axis needs finite max > min, got [{}, {}]",
            self.min,
            self.max
        );
        ensure!(self.count >= 2, "grid axis needs at least 2 points, got {}", self.count);
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    /// Lattice coordinate `i`; both endpoints are reproduced exactly.
    pub fn coord(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.coord(i)).collect()
    }
}

/// Uniform tensor lattice; flat indices are row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        ensure!(!axes.is_empty(), "grid needs at least one axis");
        for a in &axes {
            a.validate()?;
        }
        Ok(Grid { axes })
    }

    /// Same lattice on every one of `d` axes.
    pub fn cube(min: f64, max: f64, count: usize, d: usize) -> Result<Self> {
        Grid::new(vec![Axis::new(min, max, count)?; d])
    }

    /// Parses `"min:max:count[,min:max:count...]"`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.replace('\u{2212}', "-");
        let axes = text
            .split(',')
            .map(|part| {
                let fields: Vec<&str> = part.trim().split(':').collect();
                ensure!(
                    fields.len() == 3,
                    "grid axis `{part}` must have the form min:max:count"
                );
                let min = fields[0]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::validation(format!("grid min `{}`: {e}", fields[0])))?;
                let max = fields[1]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::validation(format!("grid max `{}`: {e}", fields[1])))?;
                let count = fields[2]
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::validation(format!("grid count `{}`: {e}", fields[2])))?;
                Axis::new(min, max, count)
            })
            .collect::<Result<Vec<_>>>()?;
        Grid::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacings(&self) -> Vec<f64> {
        self.axes.iter().map(Axis::spacing).collect()
    }

    /// Π h_j, the Riemann weight of every lattice point.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for (j, axis) in self.axes.iter().enumerate().rev() {
            idx[j] = flat % axis.count;
            flat /= axis.count;
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .into_iter()
            .zip(&self.axes)
            .map(|(i, a)| a.coord(i))
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(move |k| self.point(k))
    }

    /// Largest |coordinate| reachable on any axis.
    pub fn max_abs_coord(&self) -> f64 {
        self.axes
            .iter()
            .map(|a| a.min.abs().max(a.max.abs()))
            .fold(0.0, f64::max)
    }

    /// Flat index of the lattice point nearest to `z`, if `z` lies inside the
    /// grid's closed cells (half a spacing beyond the outermost points).
    pub fn nearest_index(&self, z: &[f64]) -> Option<usize> {
        let mut flat = 0usize;
        for (axis, &x) in self.axes.iter().zip(z) {
            let pos = ((x - axis.min) / axis.spacing()).round();
            if !(pos >= 0.0 && pos <= (axis.count - 1) as f64) {
                return None;
            }
            flat = flat * axis.count + pos as usize;
        }
        Some(flat)
    }
}

/// Density samples on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityField {
    pub grid: Grid,
    pub values: Vec<f64>,
    /// Claim that the Riemann sum lies in 1 ± [`NORMALIZATION_TOL`].
    pub normalized: bool,
}

impl DensityField {
    pub fn new(grid: Grid, values: Vec<f64>, normalized: bool) -> Result<Self> {
        ensure!(
            values.len() == grid.len(),
            "density field has {} values for a grid of {} points",
            values.len(),
            grid.len()
        );
        Ok(DensityField {
            grid,
            values,
            normalized,
        })
    }

    pub fn riemann_sum(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn normalization_residual(&self) -> f64 {
        self.riemann_sum() - 1.0
    }

    /// Checks the sign constraint and, if claimed, the normalization window.
    pub fn validate(&self, negativity_tol: f64) -> Result<()> {
        if let Some((k, v)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < -negativity_tol)
        {
            return Err(Error::numeric(format!(
                "density value {v:e} at {:?} is below -{negativity_tol:e}",
                self.grid.point(k)
            )));
        }
        if self.normalized {
            let residual = self.normalization_residual();
            if residual.abs() > NORMALIZATION_TOL {
                return Err(Error::numeric(format!(
                    "field claims normalization but Riemann sum is {:.6} (residual {residual:e})",
                    self.riemann_sum()
                )));
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let d = self.grid.dim();
        let mut out = String::new();
        for j in 1..=d {
            let _ = write!(out, "z{j},");
        }
        out.push_str("density\n");
        for (k, v) in self.values.iter().enumerate() {
            for x in self.grid.point(k) {
                out.push_str(&fmt17(x));
                out.push(',');
            }
            out.push_str(&fmt17(*v));
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_csv_string().as_bytes())?;
        f.flush()?;
        Ok(())
    }

    /// Grid metadata, normalization residual and caller-supplied parameters.
    pub fn sidecar(&self, params: serde_json::Value) -> serde_json::Value {
        serde_json::json!({
            "grid": self.grid,
            "normalized": self.normalized,
            "riemann_sum": self.riemann_sum(),
            "normalization_residual": self.normalization_residual(),
            "params": params,
        })
    }

    /// Reads a CSV written by [`DensityField::write_csv`], reconstructing the
    /// grid from the coordinate columns and re-checking the field invariants.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let reader = BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::validation("density csv is empty"))??;
        let cols: Vec<&str> = header.trim().split(',').collect();
        ensure!(
            cols.len() >= 2 && cols.last() == Some(&"density"),
            "density csv header must be z1,...,zd,density"
        );
        let d = cols.len() - 1;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::validation(format!("density csv row {}: {e}", lineno + 2)))?;
            ensure!(row.len() == d + 1, "density csv row {} has {} columns", lineno + 2, row.len());
            rows.push(row);
        }
        let mut axes = Vec::with_capacity(d);
        for j in 0..d {
            let mut xs: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            xs.sort_by(f64::total_cmp);
            xs.dedup();
            ensure!(xs.len() >= 2, "density csv axis {} has fewer than 2 distinct points", j + 1);
            axes.push(Axis::new(xs[0], xs[xs.len() - 1], xs.len())?);
        }
        let grid = Grid::new(axes)?;
        ensure!(rows.len() == grid.len(), "density csv rows do not form a full lattice");
        for (k, row) in rows.iter().enumerate() {
            let expected = grid.point(k);
            let scale = grid.max_abs_coord().max(1.0);
            ensure!(
                expected.iter().zip(row).all(|(e, x)| (e - x).abs() <= 1e-9 * scale),
                "density csv row {} is not in row-major lattice order",
                k + 2
            );
        }
        let values: Vec<f64> = rows.iter().map(|r| r[d]).collect();
        let mut field = DensityField::new(grid, values, false)?;
        field.normalized = field.normalization_residual().abs() <= NORMALIZATION_TOL;
        field.validate(DEFAULT_NEGATIVITY_TOL)?;
        Ok(field)
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
