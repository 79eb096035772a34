//! Monte Carlo references: seeded samplers for every [`DistributionSpec`]
//! constructor and the estimators built on them.
//!
//! Draws are produced in fixed-size chunks; chunk `c` uses a ChaCha8 stream
//! keyed by `(seed, c)`, so the output does not depend on how chunks are
//! scheduled across threads.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::{to_matrix, DistributionSpec};
use crate::error::{ensure, Error, Result};
use crate::grid::{fmt17, DensityField, Grid, NORMALIZATION_TOL};

const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub spec: DistributionSpec,
    pub seed: u64,
    pub points: Vec<Vec<f64>>,
}

impl SampleBatch {
    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_csv_string(&self) -> String {
        let mut out = (1..=self.dim()).map(|j| format!("x{j}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for p in &self.points {
            let row: Vec<String> = p.iter().map(|&x| fmt17(x)).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({ "spec": self.spec, "seed": self.seed, "n": self.points.len() })
    }

    pub fn write(&self, csv_path: &Path, json_path: &Path) -> Result<()> {
        std::fs::write(csv_path, self.to_csv_string())?;
        std::fs::write(json_path, serde_json::to_string_pretty(&self.sidecar())?)?;
        Ok(())
    }
}

/// Spec compiled into a form that can be drawn from cheaply.
enum Sampler {
    Gaussian { mean: Vec<f64>, factor: DMatrix<f64> },
    PointMass(Vec<f64>),
    UniformBox { lo: Vec<f64>, width: Vec<f64> },
    Laplace(f64),
    Empirical { points: Vec<Vec<f64>>, index: WeightedIndex<f64> },
    Convolution(Vec<Sampler>),
    Affine { matrix: DMatrix<f64>, shift: Vec<f64>, inner: Box<Sampler> },
    IidSum { base: Box<Sampler>, n: u64 },
    Product(Vec<Sampler>),
}

impl Sampler {
    fn new(spec: &DistributionSpec) -> Result<Self> {
        Ok(match spec {
            DistributionSpec::Gaussian { mean, cov } => {
                // C = V Λ Vᵀ; V √Λ⁺ works for singular covariances too.
                let eig = SymmetricEigen::new(to_matrix(cov));
                let sqrt_l = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
                Sampler::Gaussian {
                    mean: mean.clone(),
                    factor: eig.eigenvectors * sqrt_l,
                }
            }
            DistributionSpec::PointMass { location } => Sampler::PointMass(location.clone()),
            DistributionSpec::UniformBox { lo, hi } => Sampler::UniformBox {
                lo: lo.clone(),
                width: lo.iter().zip(hi).map(|(l, h)| h - l).collect(),
            },
            DistributionSpec::Laplace1D { scale } => Sampler::Laplace(*scale),
            DistributionSpec::Empirical { points, weights } => {
                let w = DistributionSpec::empirical_weights(points, weights);
                let index = WeightedIndex::new(&w)
                    .map_err(|e| Error::validation(format!("empirical weights unusable for sampling: {e}")))?;
                Sampler::Empirical {
                    points: points.clone(),
                    index,
                }
            }
            DistributionSpec::Convolution { parts } => {
                Sampler::Convolution(parts.iter().map(Sampler::new).collect::<Result<_>>()?)
            }
            DistributionSpec::AffineMap { matrix, shift, inner } => Sampler::Affine {
                matrix: to_matrix(matrix),
                shift: shift.clone(),
                inner: Box::new(Sampler::new(inner)?),
            },
            DistributionSpec::StandardizedIIDSum { base, n } => Sampler::IidSum {
                base: Box::new(Sampler::new(base)?),
                n: *n,
            },
            DistributionSpec::Product { factors } => {
                Sampler::Product(factors.iter().map(Sampler::new).collect::<Result<_>>()?)
            }
        })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            Sampler::Gaussian { mean, factor } => {
                let z: Vec<f64> = (0..mean.len()).map(|_| rng.sample(StandardNormal)).collect();
                mean.iter()
                    .enumerate()
                    .map(|(i, m)| m + (0..z.len()).map(|j| factor[(i, j)] * z[j]).sum::<f64>())
                    .collect()
            }
            Sampler::PointMass(x) => x.clone(),
            Sampler::UniformBox { lo, width } => lo
                .iter()
                .zip(width)
                .map(|(l, w)| l + w * rng.random::<f64>())
                .collect(),
            Sampler::Laplace(b) => {
                let e: f64 = rng.sample(Exp1);
                vec![if rng.random::<bool>() { b * e } else { -b * e }]
            }
            Sampler::Empirical { points, index } => points[index.sample(rng)].clone(),
            Sampler::Convolution(parts) => {
                let mut acc = parts[0].draw(rng);
                for p in &parts[1..] {
                    for (a, x) in acc.iter_mut().zip(p.draw(rng)) {
                        *a += x;
                    }
                }
                acc
            }
            Sampler::Affine { matrix, shift, inner } => {
                let x = inner.draw(rng);
                shift
                    .iter()
                    .enumerate()
                    .map(|(i, b)| b + x.iter().enumerate().map(|(j, xj)| matrix[(i, j)] * xj).sum::<f64>())
                    .collect()
            }
            Sampler::IidSum { base, n } => {
                let total: f64 = (0..*n).map(|_| base.draw(rng)[0]).sum();
                vec![total / (*n as f64).sqrt()]
            }
            Sampler::Product(factors) => factors.iter().map(|f| f.draw(rng)[0]).collect(),
        }
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// Runs `per_draw` for `n` draws in deterministic chunks and returns the
/// per-chunk outputs in chunk order.
fn chunked<T, F>(n: usize, seed: u64, per_chunk: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(n - c * CHUNK);
            per_chunk(&mut chunk_rng(seed, c), len)
        })
        .collect()
}

/// `n` i.i.d. draws from `spec`, reproducible from `seed`.
pub fn sample(spec: &DistributionSpec, n: usize, seed: u64) -> Result<SampleBatch> {
    spec.validate()?;
    ensure!(n >= 1, "sample: n must be at least 1");
    let sampler = Sampler::new(spec)?;
    let points = chunked(n, seed, |rng, len| (0..len).map(|_| sampler.draw(rng)).collect::<Vec<_>>())
        .into_iter()
        .flatten()
        .collect();
    Ok(SampleBatch {
        spec: spec.clone(),
        seed,
        points,
    })
}

/// (1/n) Σ exp(i⟨t, X_j⟩).
pub fn empirical_cf(batch: &SampleBatch, t: &[f64]) -> Result<Complex64> {
    ensure!(!batch.is_empty(), "empirical_cf: batch is empty");
    ensure!(
        t.len() == batch.dim(),
        "empirical_cf: t has length {} but samples have d={}",
        t.len(),
        batch.dim()
    );
    if t.iter().all(|&x| x == 0.0) {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let sum: Complex64 = batch
        .points
        .iter()
        .map(|x| Complex64::from_polar(1.0, x.iter().zip(t).map(|(a, b)| a * b).sum()))
        .sum();
    let mean = sum / batch.len() as f64;
    let r = mean.norm();
    Ok(if r > 1.0 { mean / r } else { mean })
}

/// Fraction of `n` draws with ‖X‖∞ > R.
pub fn mc_tail_prob(spec: &DistributionSpec, radius: f64, n: usize, seed: u64) -> Result<f64> {
    ensure!(radius.is_finite() && radius >= 0.0, "mc_tail_prob: R must be nonnegative");
    let batch = sample(spec, n, seed)?;
    let outside = batch
        .points
        .iter()
        .filter(|p| p.iter().any(|x| x.abs() > radius))
        .count();
    Ok(outside as f64 / n as f64)
}

/// Histogram density of X + σZ binned on cells centred at the lattice points.
///
/// Draws falling outside the outermost cells are dropped, so the field is
/// flagged `normalized` only if its Riemann sum stays within 1 ± 1e-3.
pub fn mollified_histogram(
    spec: &DistributionSpec,
    sigma: f64,
    grid: &Grid,
    n: usize,
    seed: u64,
) -> Result<DensityField> {
    spec.validate()?;
    ensure!(sigma.is_finite() && sigma > 0.0, "mollified_histogram: sigma must be positive");
    ensure!(n >= 1, "mollified_histogram: n must be at least 1");
    ensure!(
        grid.dim() == spec.dim(),
        "mollified_histogram: grid has d={} but the law has d={}",
        grid.dim(),
        spec.dim()
    );
    let sampler = Sampler::new(spec)?;
    let partial: Vec<Vec<u64>> = chunked(n, seed, |rng, len| {
        let mut counts = vec![0u64; grid.len()];
        for _ in 0..len {
            let mut x = sampler.draw(rng);
            for xi in x.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *xi += sigma * z;
            }
            if let Some(k) = grid.nearest_index(&x) {
                counts[k] += 1;
            }
        }
        counts
    });
    let mut counts = vec![0u64; grid.len()];
    for part in partial {
        for (c, p) in counts.iter_mut().zip(part) {
            *c += p;
        }
    }
    let scale = 1.0 / (n as f64 * grid.cell_volume());
    let values = counts.into_iter().map(|c| c as f64 * scale).collect();
    let mut field = DensityField::new(grid.clone(), values, false)?;
    field.normalized = field.normalization_residual().abs() <= NORMALIZATION_TOL;
    Ok(field)
}
