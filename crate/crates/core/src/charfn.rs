//! Characteristic functions: closed forms for every [`DistributionSpec`]
//! constructor plus the two algebraic operations the rest of the crate
//! needs (convolution and Gaussian mollification).

use std::fmt;
use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::distribution::{min_eigenvalue, to_matrix, DistributionSpec};
use crate::error::{ensure, Error, Result};

/// Whether ∫|χ| dλ^d is known to be finite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrability {
    Yes,
    No,
    Unknown,
}

type Eval = dyn Fn(&[f64]) -> Complex64 + Send + Sync;

/// An evaluable characteristic function t ↦ E[exp(i⟨t, X⟩)] on R^d.
///
/// Besides the integrability flag, a `CharFn` may carry a Gaussian envelope
/// `s`: a certificate that |χ(t)| ≤ exp(−s²⟨t,t⟩/2) everywhere. The
/// quadrature code uses it to pick truncation radii analytically.
#[derive(Clone)]
pub struct CharFn {
    dim: usize,
    integrable: Integrability,
    envelope: Option<f64>,
    provenance: Option<String>,
    eval: Arc<Eval>,
}

impl fmt::Debug for CharFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CharFn")
            .field("dim", &self.dim)
            .field("integrable", &self.integrable)
            .field("envelope", &self.envelope)
            .field("provenance", &self.provenance)
            .finish()
    }
}

impl CharFn {
    /// Wraps an arbitrary function. The caller vouches that it is a
    /// characteristic function and that `integrable` is truthful.
    pub fn from_fn<F>(dim: usize, integrable: Integrability, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        CharFn {
            dim,
            integrable,
            envelope: None,
            provenance: None,
            eval: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn integrable(&self) -> Integrability {
        self.integrable
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    /// Gaussian domination scale `s` with |χ(t)| ≤ exp(−s²|t|²/2), if known.
    pub fn gaussian_envelope(&self) -> Option<f64> {
        self.envelope
    }

    /// Evaluates χ(t). Panics if `t.len()` differs from the dimension.
    pub fn eval(&self, t: &[f64]) -> Complex64 {
        assert_eq!(t.len(), self.dim, "CharFn of dimension {} evaluated at a {}-vector", self.dim, t.len());
        (self.eval)(t)
    }

    pub fn try_eval(&self, t: &[f64]) -> Result<Complex64> {
        ensure!(
            t.len() == self.dim,
            "dimension mismatch: CharFn has d={}, argument has length {}",
            self.dim,
            t.len()
        );
        Ok((self.eval)(t))
    }

    pub fn with_provenance(mut self, tag: impl Into<String>) -> Self {
        self.provenance = Some(tag.into());
        self
    }

    /// Overrides the integrability flag (e.g. a user asserting integrability).
    pub fn with_integrability(mut self, flag: Integrability) -> Self {
        self.integrable = flag;
        self
    }

    fn new(dim: usize, integrable: Integrability, envelope: Option<f64>, tag: &str, eval: Arc<Eval>) -> Self {
        CharFn {
            dim,
            integrable,
            envelope,
            provenance: Some(tag.to_string()),
            eval,
        }
    }
}

/// Builds the characteristic function of a validated spec.
pub fn make_cf(spec: &DistributionSpec) -> Result<CharFn> {
    spec.validate()?;
    Ok(build(spec))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn is_origin(t: &[f64]) -> bool {
    t.iter().all(|&x| x == 0.0)
}

/// sin(u)/u with a Taylor branch near the removable singularity.
fn sinc_half_width(t: f64, width: f64) -> f64 {
    if (t * width).abs() < 1e-8 {
        let u = 0.5 * t * width;
        1.0 - u * u / 6.0
    } else {
        let u = 0.5 * t * width;
        u.sin() / u
    }
}

fn build(spec: &DistributionSpec) -> CharFn {
    match spec {
        DistributionSpec::Gaussian { mean, cov } => {
            let d = mean.len();
            let trace: f64 = (0..d).map(|i| cov[i][i]).sum();
            let lambda_min = min_eigenvalue(cov);
            let definite = lambda_min > 1e-12 * trace.abs() && lambda_min > 0.0;
            let mean = mean.clone();
            let cov = cov.clone();
            let eval = move |t: &[f64]| {
                let quad: f64 = cov.iter().zip(t).map(|(row, ti)| ti * dot(row, t)).sum();
                Complex64::from_polar((-0.5 * quad).exp(), dot(&mean, t))
            };
            CharFn::new(
                d,
                if definite { Integrability::Yes } else { Integrability::Unknown },
                definite.then(|| lambda_min.sqrt()),
                "gaussian",
                Arc::new(eval),
            )
        }
        DistributionSpec::PointMass { location } => {
            let x = location.clone();
            CharFn::new(
                x.len(),
                Integrability::No,
                None,
                "point_mass",
                Arc::new(move |t: &[f64]| Complex64::from_polar(1.0, dot(&x, t))),
            )
        }
        DistributionSpec::UniformBox { lo, hi } => {
            let center: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| 0.5 * (l + h)).collect();
            let width: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| h - l).collect();
            let eval = move |t: &[f64]| {
                let modulus: f64 = t.iter().zip(&width).map(|(&tj, &w)| sinc_half_width(tj, w)).product();
                Complex64::from_polar(modulus, dot(&center, t))
            };
            CharFn::new(lo.len(), Integrability::Unknown, None, "uniform_box", Arc::new(eval))
        }
        DistributionSpec::Laplace1D { scale } => {
            let b2 = scale * scale;
            CharFn::new(
                1,
                Integrability::Yes,
                None,
                "laplace1d",
                Arc::new(move |t: &[f64]| Complex64::new(1.0 / (1.0 + b2 * t[0] * t[0]), 0.0)),
            )
        }
        DistributionSpec::Empirical { points, weights } => {
            let w = DistributionSpec::empirical_weights(points, weights);
            let pts = points.clone();
            let eval = move |t: &[f64]| {
                if is_origin(t) {
                    return Complex64::new(1.0, 0.0);
                }
                pts.iter()
                    .zip(&w)
                    .map(|(x, &wj)| Complex64::from_polar(wj, dot(x, t)))
                    .sum()
            };
            CharFn::new(points[0].len(), Integrability::No, None, "empirical", Arc::new(eval))
        }
        DistributionSpec::Convolution { parts } => {
            let mut acc = build(&parts[0]);
            for p in &parts[1..] {
                acc = convolve(&acc, &build(p)).expect("dimensions validated");
            }
            acc
        }
        DistributionSpec::AffineMap {
            matrix,
            shift,
            inner,
        } => {
            let inner_cf = build(inner);
            let d_in = inner_cf.dim();
            let d_out = shift.len();
            let a = to_matrix(matrix);
            let aat = &a * a.transpose();
            let lambda_min = SymmetricEigen::new(aat).eigenvalues.min();
            let invertible = d_in == d_out && a.clone().try_inverse().is_some() && lambda_min > 0.0;
            let integrable = match inner_cf.integrable() {
                Integrability::Yes if invertible => Integrability::Yes,
                _ => Integrability::Unknown,
            };
            let envelope = inner_cf
                .gaussian_envelope()
                .filter(|_| lambda_min > 0.0)
                .map(|s| s * lambda_min.sqrt());
            let matrix = matrix.clone();
            let shift = shift.clone();
            let eval = move |t: &[f64]| {
                // Aᵀt
                let mut at = vec![0.0; d_in];
                for (row, ti) in matrix.iter().zip(t) {
                    for (acc, aij) in at.iter_mut().zip(row) {
                        *acc += aij * ti;
                    }
                }
                inner_cf.eval(&at) * Complex64::from_polar(1.0, dot(&shift, t))
            };
            CharFn::new(d_out, integrable, envelope, "affine_map", Arc::new(eval))
        }
        DistributionSpec::StandardizedIIDSum { base, n } => {
            let base_cf = build(base);
            let integrable = match base_cf.integrable() {
                Integrability::Yes => Integrability::Yes,
                _ => Integrability::Unknown,
            };
            let envelope = base_cf.gaussian_envelope();
            let n = *n;
            let scale = 1.0 / (n as f64).sqrt();
            let eval = move |t: &[f64]| {
                let c = base_cf.eval(&[t[0] * scale]);
                complex_powu(c, n)
            };
            CharFn::new(1, integrable, envelope, "standardized_iid_sum", Arc::new(eval))
        }
        DistributionSpec::Product { factors } => {
            let cfs: Vec<CharFn> = factors.iter().map(build).collect();
            let integrable = if cfs.iter().all(|c| c.integrable() == Integrability::Yes) {
                Integrability::Yes
            } else if cfs.iter().any(|c| c.integrable() == Integrability::No) {
                Integrability::No
            } else {
                Integrability::Unknown
            };
            let envelope = cfs
                .iter()
                .map(CharFn::gaussian_envelope)
                .collect::<Option<Vec<f64>>>()
                .map(|v| v.into_iter().fold(f64::INFINITY, f64::min));
            let d = cfs.len();
            let eval = move |t: &[f64]| {
                cfs.iter()
                    .zip(t)
                    .map(|(c, &tj)| c.eval(&[tj]))
                    .fold(Complex64::new(1.0, 0.0), |acc, v| acc * v)
            };
            CharFn::new(d, integrable, envelope, "product", Arc::new(eval))
        }
    }
}

fn complex_powu(mut base: Complex64, mut exp: u64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        exp >>= 1;
    }
    acc
}

/// Characteristic function of the convolution of the two laws: the pointwise product.
pub fn convolve(a: &CharFn, b: &CharFn) -> Result<CharFn> {
    ensure!(
        a.dim() == b.dim(),
        "convolve: dimension mismatch ({} vs {})",
        a.dim(),
        b.dim()
    );
    let integrable = if a.integrable() == Integrability::Yes || b.integrable() == Integrability::Yes {
        Integrability::Yes
    } else {
        Integrability::Unknown
    };
    let envelope = match (a.gaussian_envelope(), b.gaussian_envelope()) {
        (None, None) => None,
        (sa, sb) => Some(sa.unwrap_or(0.0).hypot(sb.unwrap_or(0.0))),
    };
    let (fa, fb) = (a.eval.clone(), b.eval.clone());
    Ok(CharFn::new(
        a.dim(),
        integrable,
        envelope,
        "convolution",
        Arc::new(move |t: &[f64]| fa(t) * fb(t)),
    ))
}

/// χ(t)·exp(−σ²⟨t,t⟩/2): the law convolved with N(0, σ²I).
pub fn gaussian_mollify_cf(cf: &CharFn, sigma: f64) -> Result<CharFn> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::validation(format!(
            "gaussian_mollify_cf: sigma must be positive and finite, got {sigma}"
        )));
    }
    let inner = cf.eval.clone();
    let half_var = 0.5 * sigma * sigma;
    let envelope = cf.gaussian_envelope().unwrap_or(0.0).hypot(sigma);
    Ok(CharFn::new(
        cf.dim(),
        Integrability::Yes,
        Some(envelope),
        "mollified",
        Arc::new(move |t: &[f64]| inner(t) * (-half_var * dot(t, t)).exp()),
    ))
}
