//! Declarative description of probability laws on R^d.
//!
//! The JSON form is internally tagged by `"type"`:
//!
//! ```json
//! {"type": "gaussian", "mean": [0.0], "cov": [[1.0]]}
//! {"type": "point_mass", "location": [0.0, 1.0]}
//! {"type": "uniform_box", "lo": [-1.0], "hi": [1.0]}
//! {"type": "laplace1d", "scale": 1.0}
//! {"type": "empirical", "points": [[-1.0], [1.0]], "weights": [0.5, 0.5]}
//! {"type": "convolution", "parts": [ ... ]}
//! {"type": "affine_map", "matrix": [[2.0]], "shift": [1.0], "inner": { ... }}
//! {"type": "standardized_iid_sum", "base": { ... }, "n": 16}
//! {"type": "product", "factors": [ ... ]}
//! ```

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Gaussian {
        mean: Vec<f64>,
        cov: Vec<Vec<f64>>,
    },
    PointMass {
        location: Vec<f64>,
    },
    UniformBox {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    #[serde(rename = "laplace1d")]
    Laplace1D {
        scale: f64,
    },
    /// Finite discrete law. Missing weights mean equal weights.
    Empirical {
        points: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
    Convolution {
        parts: Vec<DistributionSpec>,
    },
    /// Law of `matrix · X + shift` for `X ~ inner`.
    AffineMap {
        matrix: Vec<Vec<f64>>,
        shift: Vec<f64>,
        inner: Box<DistributionSpec>,
    },
    /// Law of (X₁ + … + Xₙ)/√n for i.i.d. Xᵢ ~ base.
    ///
    /// The base is *declared* by the caller to be centered with unit
    /// variance; this is not checked.
    #[serde(rename = "standardized_iid_sum")]
    StandardizedIIDSum {
        base: Box<DistributionSpec>,
        n: u64,
    },
    /// Independent product of one-dimensional laws.
    Product {
        factors: Vec<DistributionSpec>,
    },
}

impl DistributionSpec {
    pub fn standard_normal(d: usize) -> Self {
        let cov = (0..d)
            .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        DistributionSpec::Gaussian {
            mean: vec![0.0; d],
            cov,
        }
    }

    pub fn normal_1d(mean: f64, variance: f64) -> Self {
        DistributionSpec::Gaussian {
            mean: vec![mean],
            cov: vec![vec![variance]],
        }
    }

    pub fn point_mass(location: Vec<f64>) -> Self {
        DistributionSpec::PointMass { location }
    }

    pub fn uniform_1d(lo: f64, hi: f64) -> Self {
        DistributionSpec::UniformBox {
            lo: vec![lo],
            hi: vec![hi],
        }
    }

    /// Symmetric ±1 coin: the standardized centered Bernoulli(½) law.
    pub fn rademacher() -> Self {
        DistributionSpec::Empirical {
            points: vec![vec![-1.0], vec![1.0]],
            weights: Some(vec![0.5, 0.5]),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DistributionSpec::Gaussian { mean, .. } => mean.len(),
            DistributionSpec::PointMass { location } => location.len(),
            DistributionSpec::UniformBox { lo, .. } => lo.len(),
            DistributionSpec::Laplace1D { .. } => 1,
            DistributionSpec::Empirical { points, .. } => points.first().map_or(0, Vec::len),
            DistributionSpec::Convolution { parts } => parts.first().map_or(0, Self::dim),
            DistributionSpec::AffineMap { shift, .. } => shift.len(),
            DistributionSpec::StandardizedIIDSum { .. } => 1,
            DistributionSpec::Product { factors } => factors.len(),
        }
    }

    /// Normalized weights of an `Empirical` law (equal weights when absent).
    pub(crate) fn empirical_weights(points: &[Vec<f64>], weights: &Option<Vec<f64>>) -> Vec<f64> {
        match weights {
            Some(w) => w.clone(),
            None => vec![1.0 / points.len() as f64; points.len()],
        }
    }

    /// Checks every structural invariant, recursively.
    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::Gaussian { mean, cov } => {
                let d = mean.len();
                ensure!(d >= 1, "gaussian: mean must be nonempty");
                ensure!(all_finite(mean), "gaussian: mean must be finite");
                ensure!(
                    cov.len() == d && cov.iter().all(|row| row.len() == d),
                    "gaussian: covariance must be {d}x{d}"
                );
                ensure!(cov.iter().all(|r| all_finite(r)), "gaussian: covariance must be finite");
                let scale = cov.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
                #[allow(clippy::needless_range_loop)]
                for i in 0..d {
                    for j in 0..i {
                        ensure!(
                            (cov[i][j] - cov[j][i]).abs() <= 1e-12 * scale,
                            "gaussian: covariance is not symmetric at ({i},{j})"
                        );
                    }
                }
                let trace: f64 = (0..d).map(|i| cov[i][i]).sum();
                let min_eig = min_eigenvalue(cov);
                ensure!(
                    min_eig >= -1e-12 * trace.abs(),
                    "gaussian: covariance is not positive semidefinite (min eigenvalue {min_eig:e})"
                );
            }
            DistributionSpec::PointMass { location } => {
                ensure!(!location.is_empty(), "point_mass: location must be nonempty");
                ensure!(all_finite(location), "point_mass: location must be finite");
            }
            DistributionSpec::UniformBox { lo, hi } => {
                ensure!(!lo.is_empty(), "uniform_box: bounds must be nonempty");
                ensure!(lo.len() == hi.len(), "uniform_box: lo and hi differ in length");
                ensure!(all_finite(lo) && all_finite(hi), "uniform_box: bounds must be finite");
                ensure!(
                    lo.iter().zip(hi).all(|(l, h)| h > l),
                    "uniform_box: hi must exceed lo on every axis"
                );
            }
            DistributionSpec::Laplace1D { scale } => {
                ensure!(scale.is_finite() && *scale > 0.0, "laplace1d: scale must be positive");
            }
            DistributionSpec::Empirical { points, weights } => {
                ensure!(!points.is_empty(), "empirical: needs at least one point");
                let d = points[0].len();
                ensure!(d >= 1, "empirical: points must be nonempty vectors");
                ensure!(
                    points.iter().all(|p| p.len() == d && all_finite(p)),
                    "empirical: points must share dimension {d} and be finite"
                );
                if let Some(w) = weights {
                    ensure!(w.len() == points.len(), "empirical: one weight per point required");
                    ensure!(
                        w.iter().all(|x| x.is_finite() && *x >= 0.0),
                        "empirical: weights must be nonnegative"
                    );
                    let total: f64 = w.iter().sum();
                    ensure!(
                        (total - 1.0).abs() <= 1e-12,
                        "empirical: weights sum to {total}, expected 1"
                    );
                }
            }
            DistributionSpec::Convolution { parts } => {
                ensure!(!parts.is_empty(), "convolution: needs at least one part");
                for p in parts {
                    p.validate()?;
                }
                let d = parts[0].dim();
                ensure!(
                    parts.iter().all(|p| p.dim() == d),
                    "convolution: parts must share dimension"
                );
            }
            DistributionSpec::AffineMap {
                matrix,
                shift,
                inner,
            } => {
                inner.validate()?;
                let d_in = inner.dim();
                let d_out = shift.len();
                ensure!(d_out >= 1, "affine_map: shift must be nonempty");
                ensure!(
                    matrix.len() == d_out && matrix.iter().all(|r| r.len() == d_in),
                    "affine_map: matrix must be {d_out}x{d_in} to match shift and inner dimension"
                );
                ensure!(
                    all_finite(shift) && matrix.iter().all(|r| all_finite(r)),
                    "affine_map: entries must be finite"
                );
            }
            DistributionSpec::StandardizedIIDSum { base, n } => {
                base.validate()?;
                ensure!(base.dim() == 1, "standardized_iid_sum: base must be one-dimensional");
                ensure!(*n >= 1, "standardized_iid_sum: n must be at least 1");
            }
            DistributionSpec::Product { factors } => {
                ensure!(!factors.is_empty(), "product: needs at least one factor");
                for f in factors {
                    f.validate()?;
                    ensure!(f.dim() == 1, "product: every factor must be one-dimensional");
                }
            }
        }
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: DistributionSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serialization is infallible")
    }

    /// Loads a single spec, or a JSON array of specs, from `path`.
    pub fn load_many(path: &Path) -> Result<Vec<Self>> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::validation(format!("cannot read spec file {}: {e}", path.display()))
        })?;
        let value: serde_json::Value = serde_json::from_str(&text)?;
        let specs: Vec<DistributionSpec> = match value {
            serde_json::Value::Array(_) => serde_json::from_value(value)?,
            other => vec![serde_json::from_value(other)?],
        };
        for s in &specs {
            s.validate()?;
        }
        Ok(specs)
    }
}

fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub(crate) fn to_matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(nr, nc, |i, j| rows[i][j])
}

/// Smallest eigenvalue of a symmetric matrix given by rows.
pub(crate) fn min_eigenvalue(rows: &[Vec<f64>]) -> f64 {
    let m = to_matrix(rows);
    SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}
