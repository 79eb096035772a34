//! Quantitative weak-convergence diagnostics.
//!
//! A certificate for χ_n → χ has three numeric ingredients: the pointwise
//! CF error, the L¹ distance between the σ-mollified densities of χ_n and χ,
//! and the smoothing remainder P(‖σZ‖∞ > ε) that bounds how far
//! mollification moves a law. The max norm is used throughout.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::CharFn;
use crate::error::{ensure, Error, Result};
use crate::grid::{fmt17, DensityField, Grid};
use crate::mollify::{mollified_density_grid, MollificationParams};
use crate::special::erfc;

pub const REPORT_SCHEMA: &str = "cfmoll.convergence_report";
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Default probe set: 129 points per axis on [−5, 5]^d.
pub const DEFAULT_PROBES_PER_AXIS: usize = 129;
pub const DEFAULT_PROBE_HALF_WIDTH: f64 = 5.0;

fn check_same_grid(a: &DensityField, b: &DensityField) -> Result<()> {
    ensure!(a.grid == b.grid, "density fields live on different grids");
    Ok(())
}

/// ∫|a − b| dλ^d as a Riemann sum on the shared lattice.
pub fn l1_distance(a: &DensityField, b: &DensityField) -> Result<f64> {
    check_same_grid(a, b)?;
    let sum: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).sum();
    Ok(sum * a.grid.cell_volume())
}

/// Total variation distance: half the L¹ distance.
pub fn tv_distance(a: &DensityField, b: &DensityField) -> Result<f64> {
    Ok(0.5 * l1_distance(a, b)?)
}

/// Uniform probe lattice with `per_axis` points on [−half_width, half_width]^d.
pub fn probe_lattice(d: usize, per_axis: usize, half_width: f64) -> Result<Vec<Vec<f64>>> {
    let grid = Grid::cube(-half_width, half_width, per_axis, d)?;
    Ok(grid.points().collect())
}

pub fn default_probes(d: usize) -> Vec<Vec<f64>> {
    probe_lattice(d, DEFAULT_PROBES_PER_AXIS, DEFAULT_PROBE_HALF_WIDTH).expect("default probe grid is valid")
}

/// max over probes of |χ_n(t) − χ(t)|.
pub fn cf_sup_error(cf_n: &CharFn, cf_target: &CharFn, probes: &[Vec<f64>]) -> Result<f64> {
    ensure!(
        cf_n.dim() == cf_target.dim(),
        "cf_sup_error: dimension mismatch ({} vs {})",
        cf_n.dim(),
        cf_target.dim()
    );
    ensure!(!probes.is_empty(), "cf_sup_error: probe set is empty");
    let mut worst = 0.0_f64;
    for t in probes {
        worst = worst.max((cf_n.try_eval(t)? - cf_target.try_eval(t)?).norm());
    }
    Ok(worst)
}

/// P(‖Z‖∞ > x) for Z ~ N(0, I_d), computed as 1 − (1 − p)^d without cancellation.
fn max_norm_gaussian_tail(x: f64, d: usize) -> f64 {
    let p = erfc(x / std::f64::consts::SQRT_2);
    if p >= 1.0 {
        return 1.0;
    }
    -(d as f64 * (-p).ln_1p()).exp_m1()
}

/// Smoothing remainder P(‖Z‖∞ > kε) for a standard d-dimensional normal Z.
pub fn gaussian_tail_prob(k: u64, epsilon: f64, d: usize) -> Result<f64> {
    ensure!(k >= 1, "gaussian_tail_prob: k must be at least 1");
    ensure!(epsilon.is_finite() && epsilon > 0.0, "gaussian_tail_prob: epsilon must be positive");
    ensure!(d >= 1, "gaussian_tail_prob: d must be at least 1");
    Ok(max_norm_gaussian_tail(k as f64 * epsilon, d))
}

/// Riemann mass of the lattice points inside the box ‖z‖∞ ≤ R.
pub fn mass_in_box(field: &DensityField, radius: f64) -> Result<f64> {
    ensure!(radius.is_finite() && radius >= 0.0, "mass_in_box: R must be nonnegative");
    let extent = field.grid.max_abs_coord();
    ensure!(
        radius <= extent,
        "mass_in_box: R = {radius} exceeds the grid extent {extent}"
    );
    let slack = 1e-12 * radius.max(1.0);
    let sum: f64 = field
        .values
        .iter()
        .enumerate()
        .filter(|(k, _)| field.grid.point(*k).iter().all(|x| x.abs() <= radius + slack))
        .map(|(_, v)| v)
        .sum();
    Ok(sum * field.grid.cell_volume())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub schema: String,
    pub schema_version: u32,
    pub dim: usize,
    pub epsilon: f64,
    /// Label of each sequence element (1-based position unless relabelled).
    pub n: Vec<u64>,
    pub k_schedule: Vec<u64>,
    pub sigma_schedule: Vec<f64>,
    /// Indexed by n.
    pub cf_sup_error: Vec<f64>,
    /// Indexed by [n][k].
    pub l1_mollified: Vec<Vec<f64>>,
    /// Indexed by k.
    pub smoothing_remainder: Vec<f64>,
    /// Per k: l1_mollified is nonincreasing along n (1e-12 slack).
    pub monotone_flags: Vec<bool>,
    /// Per k: l1_mollified at the last n.
    pub final_l1: Vec<f64>,
}

impl ConvergenceReport {
    pub fn with_labels(mut self, labels: &[u64]) -> Result<Self> {
        ensure!(labels.len() == self.n.len(), "expected {} labels, got {}", self.n.len(), labels.len());
        self.n = labels.to_vec();
        Ok(self)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }

    /// One row per (n, k): `n,k,l1,remainder`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("n,k,l1,remainder\n");
        for (i, n) in self.n.iter().enumerate() {
            for (j, k) in self.k_schedule.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{n},{k},{},{}",
                    fmt17(self.l1_mollified[i][j]),
                    fmt17(self.smoothing_remainder[j])
                );
            }
        }
        out
    }

    pub fn write(&self, json_path: &Path, csv_path: &Path) -> Result<()> {
        std::fs::write(json_path, self.to_json_string())?;
        std::fs::write(csv_path, self.to_csv_string())?;
        Ok(())
    }
}

/// Assembles the report for χ_n → χ with σ_k = 1/k.
pub fn convergence_certificate(
    seq: &[CharFn],
    target: &CharFn,
    k_schedule: &[u64],
    grid: &Grid,
    epsilon: f64,
    params: &MollificationParams,
) -> Result<ConvergenceReport> {
    let sigmas: Vec<f64> = k_schedule.iter().map(|&k| 1.0 / k as f64).collect();
    certificate_impl(seq, target, k_schedule, &sigmas, grid, epsilon, params, None)
}

/// Like [`convergence_certificate`] with an explicit σ per k and probe set.
/// The remainder for σ is P(‖Z‖∞ > ε/σ).
#[allow(clippy::too_many_arguments)]
pub fn convergence_certificate_with(
    seq: &[CharFn],
    target: &CharFn,
    k_schedule: &[u64],
    sigma_schedule: &[f64],
    grid: &Grid,
    epsilon: f64,
    params: &MollificationParams,
    probes: &[Vec<f64>],
) -> Result<ConvergenceReport> {
    certificate_impl(seq, target, k_schedule, sigma_schedule, grid, epsilon, params, Some(probes))
}

#[allow(clippy::too_many_arguments)]
fn certificate_impl(
    seq: &[CharFn],
    target: &CharFn,
    k_schedule: &[u64],
    sigmas: &[f64],
    grid: &Grid,
    epsilon: f64,
    params: &MollificationParams,
    probes: Option<&[Vec<f64>]>,
) -> Result<ConvergenceReport> {
    let d = target.dim();
    ensure!(!seq.is_empty(), "certificate: sequence is empty");
    ensure!(
        seq.iter().all(|c| c.dim() == d) && grid.dim() == d,
        "certificate: all characteristic functions and the grid must share dimension {d}"
    );
    ensure!(!k_schedule.is_empty(), "certificate: k schedule is empty");
    ensure!(k_schedule[0] >= 1, "certificate: k must be at least 1");
    ensure!(
        k_schedule.windows(2).all(|w| w[0] < w[1]),
        "certificate: k schedule must be strictly increasing"
    );
    ensure!(sigmas.len() == k_schedule.len(), "certificate: one sigma per k required");
    ensure!(
        sigmas.iter().all(|s| s.is_finite() && *s > 0.0),
        "certificate: sigmas must be positive"
    );
    ensure!(epsilon.is_finite() && epsilon > 0.0, "certificate: epsilon must be positive");

    let owned_probes;
    let probes = match probes {
        Some(p) => p,
        None => {
            owned_probes = default_probes(d);
            &owned_probes
        }
    };
    let cf_errors = seq
        .iter()
        .map(|c| cf_sup_error(c, target, probes))
        .collect::<Result<Vec<f64>>>()?;

    let target_fields = sigmas
        .par_iter()
        .map(|&s| mollified_density_grid(target, s, grid, params))
        .collect::<Result<Vec<DensityField>>>()?;

    let cells: Vec<(usize, usize)> = (0..seq.len())
        .flat_map(|i| (0..k_schedule.len()).map(move |j| (i, j)))
        .collect();
    let l1_flat = cells
        .par_iter()
        .map(|&(i, j)| {
            let field = mollified_density_grid(&seq[i], sigmas[j], grid, params)?;
            l1_distance(&field, &target_fields[j])
        })
        .collect::<Result<Vec<f64>>>()?;
    let l1: Vec<Vec<f64>> = l1_flat.chunks(k_schedule.len()).map(<[f64]>::to_vec).collect();

    let remainder = k_schedule
        .iter()
        .zip(sigmas)
        .map(|(&k, &s)| {
            if (s - 1.0 / k as f64).abs() <= f64::EPSILON * s {
                gaussian_tail_prob(k, epsilon, d)
            } else {
                Ok(max_norm_gaussian_tail(epsilon / s, d))
            }
        })
        .collect::<Result<Vec<f64>>>()?;

    let monotone_flags = (0..k_schedule.len())
        .map(|j| l1.windows(2).all(|w| w[1][j] <= w[0][j] + 1e-12))
        .collect();
    let final_l1 = l1.last().cloned().unwrap_or_default();

    if let Some(bad) = l1.iter().flatten().find(|v| !(**v >= 0.0 && **v <= 2.0 + 1e-9)) {
        return Err(Error::numeric(format!("L1 distance {bad} outside [0, 2]")));
    }

    Ok(ConvergenceReport {
        schema: REPORT_SCHEMA.to_string(),
        schema_version: REPORT_SCHEMA_VERSION,
        dim: d,
        epsilon,
        n: (1..=seq.len() as u64).collect(),
        k_schedule: k_schedule.to_vec(),
        sigma_schedule: sigmas.to_vec(),
        cf_sup_error: cf_errors,
        l1_mollified: l1,
        smoothing_remainder: remainder,
        monotone_flags,
        final_l1,
    })
}
