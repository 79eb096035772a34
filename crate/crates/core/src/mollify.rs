//! Density evaluation from characteristic functions.
//!
//! Two integrals share one engine:
//!
//! * the mollified density g_σ(z) = (2π)^{-d} ∫ χ(y) exp(−i⟨z,y⟩ − σ²⟨y,y⟩/2) dy,
//! * the inversion density g(z) = (2π)^{-d} ∫ χ(y) exp(−i⟨z,y⟩) dy for integrable χ.
//!
//! Both are approximated by a tensor trapezoid rule on [−R, R]^d. The
//! exponential factor is separable, so grids are evaluated by contracting
//! one axis at a time; a single point is the one-point special case of the
//! same contraction, which makes the grid and pointwise paths agree to
//! rounding.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charfn::{gaussian_mollify_cf, CharFn, Integrability};
use crate::error::{ensure, Error, Result};
use crate::grid::{DensityField, Grid, DEFAULT_NEGATIVITY_TOL, NORMALIZATION_TOL};
use crate::special::erfc;

pub const DEFAULT_TAIL_TOL: f64 = 1e-8;
pub const MAX_DEFAULT_DIM: usize = 3;
/// Upper bound on m^d; beyond this the tensor no longer fits comfortably in memory.
pub const MAX_TENSOR_NODES: usize = 1 << 24;

/// Probe range for the decay scan used when χ has no Gaussian envelope.
const SCAN_START: f64 = 1e-3;
const SCAN_LIMIT: f64 = 1e7;
const SCAN_STEPS_PER_OCTAVE: usize = 8;
/// Aliasing allowance, in units of 1/t_half, added to the trapezoid period.
const ALIAS_WIDTH: f64 = 40.0;

pub fn default_nodes_per_axis(d: usize) -> usize {
    if d <= 2 {
        512
    } else {
        64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MollificationParams {
    /// Half-width R of the integration cube; chosen automatically when `None`.
    pub truncation_radius: Option<f64>,
    /// Trapezoid nodes per axis (even, ≥ 16); defaults depend on d.
    pub nodes_per_axis: Option<usize>,
    pub tail_tol: f64,
    pub negativity_tol: f64,
    /// Permit direct inversion of a CF whose integrability is unknown.
    pub allow_unknown_integrability: bool,
    /// Permit d > 3.
    pub allow_high_dim: bool,
    /// Fail mollified grids whose Riemann sum leaves 1 ± 1e-3.
    pub check_normalization: bool,
}

impl Default for MollificationParams {
    fn default() -> Self {
        MollificationParams {
            truncation_radius: None,
            nodes_per_axis: None,
            tail_tol: DEFAULT_TAIL_TOL,
            negativity_tol: DEFAULT_NEGATIVITY_TOL,
            allow_unknown_integrability: false,
            allow_high_dim: false,
            check_normalization: true,
        }
    }
}

impl MollificationParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(r) = self.truncation_radius {
            ensure!(r.is_finite() && r > 0.0, "truncation_radius must be positive, got {r}");
        }
        if let Some(m) = self.nodes_per_axis {
            ensure!(m >= 16 && m % 2 == 0, "nodes_per_axis must be even and at least 16, got {m}");
        }
        ensure!(self.tail_tol.is_finite() && self.tail_tol > 0.0, "tail_tol must be positive");
        ensure!(
            self.negativity_tol.is_finite() && self.negativity_tol > 0.0,
            "negativity_tol must be positive"
        );
        Ok(())
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        ensure!(d >= 1, "dimension must be at least 1");
        ensure!(
            d <= MAX_DEFAULT_DIM || self.allow_high_dim,
            "dimension {d} exceeds {MAX_DEFAULT_DIM}; set allow_high_dim to proceed (cost grows as m^d)"
        );
        Ok(())
    }

    fn combined_tol(&self) -> f64 {
        self.tail_tol + self.negativity_tol
    }
}

/// Symmetric trapezoid rule on [−R, R] with `nodes` points, used on every axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub radius: f64,
    pub nodes: usize,
}

impl QuadratureRule {
    pub fn step(&self) -> f64 {
        2.0 * self.radius / (self.nodes - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        if k + 1 == self.nodes {
            self.radius
        } else {
            -self.radius + k as f64 * self.step()
        }
    }

    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.nodes {
            0.5 * self.step()
        } else {
            self.step()
        }
    }

    /// Aliasing period 2π/h of the rule.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.step()
    }
}

/// Smallest R with (2π)^{-d} ∫_{‖y‖∞>R} exp(−σ²|y|²/2) dy ≤ `tail_tol`.
///
/// The tail is bounded by a union over axes of one-axis erfc tails times
/// full Gaussian integrals on the remaining axes. When `tail_tol` already
/// exceeds the whole integral the bound is vacuous and 1.0 is returned.
pub fn truncation_radius(sigma: f64, tail_tol: f64, d: usize) -> Result<f64> {
    ensure!(sigma.is_finite() && sigma > 0.0, "truncation_radius: sigma must be positive, got {sigma}");
    ensure!(tail_tol.is_finite() && tail_tol > 0.0, "truncation_radius: tail_tol must be positive");
    ensure!(d >= 1, "truncation_radius: d must be at least 1");
    // Sentinel for the vacuous case; also a floor so R stays monotone in sigma.
    let floor = 1.0;
    let full = (sigma * (2.0 * PI).sqrt()).powi(-(d as i32));
    if tail_tol >= full {
        return Ok(floor);
    }
    // erfc(σR/√2) ≤ q
    let q = tail_tol / (d as f64 * full);
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    if erfc(hi) > q {
        return Err(Error::validation(format!("truncation_radius: tail_tol {tail_tol:e} is below f64 resolution")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if erfc(mid) > q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok((hi * std::f64::consts::SQRT_2 / sigma).max(floor))
}

fn phase_factors(z: f64, rule: &QuadratureRule) -> Vec<Complex64> {
    const ANCHOR_EVERY: usize = 64;
    let rot = Complex64::from_polar(1.0, -z * rule.step());
    let mut out = Vec::with_capacity(rule.nodes);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..rule.nodes {
        if k % ANCHOR_EVERY == 0 || k + 1 == rule.nodes {
            cur = Complex64::from_polar(1.0, -z * rule.node(k));
        } else {
            cur *= rot;
        }
        out.push(cur);
    }
    out
}

/// Weighted integrand samples w_k·f(y_k) on the tensor rule, row-major.
fn weighted_samples(f: &CharFn, rule: &QuadratureRule, d: usize) -> Result<Vec<Complex64>> {
    let m = rule.nodes;
    let total = m
        .checked_pow(d as u32)
        .filter(|&n| n <= MAX_TENSOR_NODES)
        .ok_or_else(|| {
            Error::numeric(format!(
                "quadrature tensor of {m}^{d} nodes exceeds {MAX_TENSOR_NODES}; \
                 supply a smaller truncation_radius or nodes_per_axis"
            ))
        })?;
    let nodes: Vec<f64> = (0..m).map(|k| rule.node(k)).collect();
    let weights: Vec<f64> = (0..m).map(|k| rule.weight(k)).collect();
    Ok((0..total)
        .into_par_iter()
        .map_init(
            || vec![0.0; d],
            |y, mut flat| {
                let mut w = 1.0;
                for j in (0..d).rev() {
                    let k = flat % m;
                    flat /= m;
                    y[j] = nodes[k];
                    w *= weights[k];
                }
                f.eval(y) * w
            },
        )
        .collect())
}

/// Replaces axis `j` (length m, stride `inner`) by the transform at `zs`.
fn contract_axis(
    t: &[Complex64],
    outer: usize,
    inner: usize,
    rule: &QuadratureRule,
    zs: &[f64],
) -> Vec<Complex64> {
    let m = rule.nodes;
    let n = zs.len();
    let blocks: Vec<Vec<Complex64>> = zs
        .par_iter()
        .map(|&z| {
            let f = phase_factors(z, rule);
            let mut block = vec![Complex64::new(0.0, 0.0); outer * inner];
            for o in 0..outer {
                let dst = &mut block[o * inner..(o + 1) * inner];
                for (k, fk) in f.iter().enumerate() {
                    let src = &t[(o * m + k) * inner..(o * m + k + 1) * inner];
                    for (acc, s) in dst.iter_mut().zip(src) {
                        *acc += s * fk;
                    }
                }
            }
            block
        })
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * n * inner];
    for (a, block) in blocks.iter().enumerate() {
        for o in 0..outer {
            out[(o * n + a) * inner..(o * n + a + 1) * inner]
                .copy_from_slice(&block[o * inner..(o + 1) * inner]);
        }
    }
    out
}

/// (2π)^{-d} Σ_k w_k f(y_k) exp(−i⟨z, y_k⟩) for z on the lattice `axes`.
fn fourier_sum(samples: Vec<Complex64>, rule: &QuadratureRule, axes: &[Vec<f64>]) -> Vec<Complex64> {
    let d = axes.len();
    let m = rule.nodes;
    let mut t = samples;
    let mut inner = 1usize;
    for j in (0..d).rev() {
        let outer = m.pow(j as u32);
        t = contract_axis(&t, outer, inner, rule, &axes[j]);
        inner *= axes[j].len();
    }
    let norm = (2.0 * PI).powi(-(d as i32));
    t.into_iter().map(|v| v * norm).collect()
}

fn real_density(value: Complex64, params: &MollificationParams, at: &dyn Fn() -> Vec<f64>) -> Result<f64> {
    let limit = 100.0 * params.combined_tol();
    if value.im.abs() > limit || !value.re.is_finite() {
        return Err(Error::numeric(format!(
            "imaginary part {:e} at {:?} exceeds {limit:e}; the characteristic function is \
             probably not Hermitian",
            value.im,
            at()
        )));
    }
    if value.re < -params.negativity_tol {
        return Err(Error::numeric(format!(
            "density {:e} at {:?} is below -{:e}; increase truncation_radius or nodes_per_axis",
            value.re,
            at(),
            params.negativity_tol
        )));
    }
    Ok(value.re.max(0.0))
}

/// Quadrature configuration used by the mollified-density operations.
pub fn mollified_rule(cf: &CharFn, sigma: f64, params: &MollificationParams) -> Result<QuadratureRule> {
    params.validate()?;
    params.check_dim(cf.dim())?;
    ensure!(sigma.is_finite() && sigma > 0.0, "sigma must be positive, got {sigma}");
    let envelope = cf.gaussian_envelope().unwrap_or(0.0).hypot(sigma);
    let radius = match params.truncation_radius {
        Some(r) => r,
        None => truncation_radius(envelope, params.tail_tol, cf.dim())?,
    };
    let nodes = params.nodes_per_axis.unwrap_or_else(|| default_nodes_per_axis(cf.dim()));
    Ok(QuadratureRule { radius, nodes })
}

fn check_integrable(cf: &CharFn, params: &MollificationParams) -> Result<()> {
    match cf.integrable() {
        Integrability::Yes => Ok(()),
        Integrability::No => Err(Error::validation(format!(
            "characteristic function ({}) is not integrable, so the law has no density to invert \
             (e.g. point masses and discrete laws); use the mollified density instead",
            cf.provenance().unwrap_or("custom")
        ))),
        Integrability::Unknown if params.allow_unknown_integrability => Ok(()),
        Integrability::Unknown => Err(Error::validation(format!(
            "integrability of the characteristic function ({}) is unknown; declare it or set \
             allow_unknown_integrability",
            cf.provenance().unwrap_or("custom")
        ))),
    }
}

/// Result of probing |χ| along the coordinate axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayScan {
    /// |χ| stays below the tail tolerance for a full octave from here on.
    pub decay_radius: f64,
    /// Smallest |t| at which |χ| first falls to 1/2; sets the density's scale.
    pub half_width: f64,
}

/// Geometric probe of |χ(±t e_j)| for every axis j.
pub fn decay_scan(cf: &CharFn, tail_tol: f64) -> Result<DecayScan> {
    let d = cf.dim();
    let ratio = 2f64.powf(1.0 / SCAN_STEPS_PER_OCTAVE as f64);
    let mut probes = Vec::new();
    let mut t = SCAN_START;
    while t <= SCAN_LIMIT {
        probes.push(t);
        t *= ratio;
    }
    let mut decay_radius = 0.0_f64;
    let mut half_width = f64::INFINITY;
    let mut e = vec![0.0; d];
    for j in 0..d {
        let modulus: Vec<f64> = probes
            .iter()
            .map(|&t| {
                e[j] = t;
                let plus = cf.eval(&e).norm();
                e[j] = -t;
                let minus = cf.eval(&e).norm();
                e[j] = 0.0;
                plus.max(minus)
            })
            .collect();
        if let Some(i) = modulus.iter().position(|&v| v <= 0.5) {
            half_width = half_width.min(probes[i]);
        }
        let start = modulus
            .windows(SCAN_STEPS_PER_OCTAVE)
            .position(|w| w.iter().all(|&v| v < tail_tol))
            .ok_or_else(|| {
                Error::numeric(format!(
                    "|χ| does not fall below tail_tol {tail_tol:e} along axis {} for |t| ≤ {SCAN_LIMIT:e}; \
                     supply truncation_radius explicitly",
                    j + 1
                ))
            })?;
        decay_radius = decay_radius.max(probes[start]);
    }
    Ok(DecayScan {
        decay_radius,
        half_width,
    })
}

/// Quadrature configuration for direct inversion at points with ‖z‖∞ ≤ `z_extent`.
///
/// With a Gaussian envelope the mollifier recipe applies unchanged. Otherwise
/// R is twice the radius where |χ| drops below `tail_tol`, and, unless fixed by
/// the caller, the node count is raised until the trapezoid period 2π/h
/// clears 2·z_extent plus an aliasing margin of 40/t_half.
pub fn inversion_rule(cf: &CharFn, params: &MollificationParams, z_extent: f64) -> Result<QuadratureRule> {
    params.validate()?;
    params.check_dim(cf.dim())?;
    check_integrable(cf, params)?;
    let d = cf.dim();
    if let Some(s) = cf.gaussian_envelope() {
        let radius = match params.truncation_radius {
            Some(r) => r,
            None => truncation_radius(s, params.tail_tol, d)?,
        };
        let nodes = params.nodes_per_axis.unwrap_or_else(|| default_nodes_per_axis(d));
        return Ok(QuadratureRule { radius, nodes });
    }
    let scan = match (params.truncation_radius, params.nodes_per_axis) {
        (Some(_), Some(_)) => None,
        _ => Some(decay_scan(cf, params.tail_tol)?),
    };
    let radius = params
        .truncation_radius
        .unwrap_or_else(|| 2.0 * scan.expect("scan ran").decay_radius);
    let nodes = match params.nodes_per_axis {
        Some(m) => m,
        None => {
            let scan = scan.expect("scan ran");
            let period = 2.0 * z_extent + ALIAS_WIDTH / scan.half_width;
            let h = 2.0 * PI / period;
            let needed = (2.0 * radius / h).ceil() as usize + 1;
            let needed = needed + needed % 2;
            needed.max(default_nodes_per_axis(d))
        }
    };
    Ok(QuadratureRule { radius, nodes })
}

fn check_point(cf: &CharFn, z: &[f64]) -> Result<()> {
    ensure!(
        z.len() == cf.dim(),
        "point has length {} but the characteristic function has d={}",
        z.len(),
        cf.dim()
    );
    ensure!(z.iter().all(|x| x.is_finite()), "point must be finite");
    Ok(())
}

fn singleton_axes(z: &[f64]) -> Vec<Vec<f64>> {
    z.iter().map(|&x| vec![x]).collect()
}

/// g_σ(z): density at `z` of the law convolved with N(0, σ²I).
pub fn mollified_density_at(cf: &CharFn, sigma: f64, z: &[f64], params: &MollificationParams) -> Result<f64> {
    check_point(cf, z)?;
    let rule = mollified_rule(cf, sigma, params)?;
    let integrand = gaussian_mollify_cf(cf, sigma)?;
    let samples = weighted_samples(&integrand, &rule, cf.dim())?;
    let value = fourier_sum(samples, &rule, &singleton_axes(z))[0];
    real_density(value, params, &|| z.to_vec())
}

fn density_field(
    integrand: &CharFn,
    rule: &QuadratureRule,
    grid: &Grid,
    params: &MollificationParams,
) -> Result<DensityField> {
    let samples = weighted_samples(integrand, rule, grid.dim())?;
    let axes: Vec<Vec<f64>> = grid.axes.iter().map(|a| a.coords()).collect();
    let raw = fourier_sum(samples, rule, &axes);
    let values = raw
        .into_iter()
        .enumerate()
        .map(|(k, v)| real_density(v, params, &|| grid.point(k)))
        .collect::<Result<Vec<f64>>>()?;
    DensityField::new(grid.clone(), values, false)
}

/// g_σ on every lattice point of `grid`; fails if the Riemann sum leaves
/// 1 ± 1e-3 (unless `check_normalization` is off).
pub fn mollified_density_grid(
    cf: &CharFn,
    sigma: f64,
    grid: &Grid,
    params: &MollificationParams,
) -> Result<DensityField> {
    ensure!(
        grid.dim() == cf.dim(),
        "grid has d={} but the characteristic function has d={}",
        grid.dim(),
        cf.dim()
    );
    let rule = mollified_rule(cf, sigma, params)?;
    let integrand = gaussian_mollify_cf(cf, sigma)?;
    let mut field = density_field(&integrand, &rule, grid, params)?;
    let residual = field.normalization_residual();
    if residual.abs() <= NORMALIZATION_TOL {
        field.normalized = true;
    } else if params.check_normalization {
        return Err(Error::numeric(format!(
            "mollified field has Riemann sum {:.6} (residual {residual:e}, window ±{NORMALIZATION_TOL:e}); \
             widen the grid to cover the mass, or raise truncation_radius/nodes_per_axis \
             (current R={:.4}, m={}, alias period {:.3})",
            field.riemann_sum(),
            rule.radius,
            rule.nodes,
            rule.period()
        )));
    }
    Ok(field)
}

/// g(z) = (2π)^{-d} ∫ χ(y) exp(−i⟨z,y⟩) dy for an integrable χ.
pub fn invert_density_at(cf: &CharFn, z: &[f64], params: &MollificationParams) -> Result<f64> {
    check_point(cf, z)?;
    let extent = z.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let rule = inversion_rule(cf, params, extent)?;
    let samples = weighted_samples(cf, &rule, cf.dim())?;
    let bound = l1_of_samples(&samples, cf.dim());
    let value = fourier_sum(samples, &rule, &singleton_axes(z))[0];
    let g = real_density(value, params, &|| z.to_vec())?;
    check_sup_bound(g, bound, z)?;
    Ok(g)
}

/// Inversion density on a lattice; the node set is shared by all points.
///
/// The field's `normalized` flag reports whether its Riemann sum lands in
/// 1 ± 1e-3; a grid that does not cover the mass is not an error here.
pub fn invert_density_grid(cf: &CharFn, grid: &Grid, params: &MollificationParams) -> Result<DensityField> {
    ensure!(
        grid.dim() == cf.dim(),
        "grid has d={} but the characteristic function has d={}",
        grid.dim(),
        cf.dim()
    );
    let rule = inversion_rule(cf, params, grid.max_abs_coord())?;
    let samples = weighted_samples(cf, &rule, cf.dim())?;
    let bound = l1_of_samples(&samples, cf.dim());
    let mut field = density_field(cf, &rule, grid, params)?;
    for (k, &g) in field.values.iter().enumerate() {
        check_sup_bound(g, bound, &grid.point(k))?;
    }
    field.normalized = field.normalization_residual().abs() <= NORMALIZATION_TOL;
    Ok(field)
}

fn l1_of_samples(samples: &[Complex64], d: usize) -> f64 {
    samples.iter().map(|v| v.norm()).sum::<f64>() * (2.0 * PI).powi(-(d as i32))
}

fn check_sup_bound(g: f64, bound: f64, z: &[f64]) -> Result<()> {
    if g > bound + 1e-6 {
        return Err(Error::numeric(format!(
            "density {g} at {z:?} exceeds the L1 bound {bound} of the characteristic function"
        )));
    }
    Ok(())
}

/// C = (2π)^{-d} ∫ |χ| dλ^d, truncated like the inversion at z = 0.
pub fn cf_l1_bound(cf: &CharFn, params: &MollificationParams) -> Result<f64> {
    let rule = inversion_rule(cf, params, 0.0)?;
    let samples = weighted_samples(cf, &rule, cf.dim())?;
    Ok(l1_of_samples(&samples, cf.dim()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::make_cf;
    use crate::distribution::DistributionSpec;

    fn cf(spec: DistributionSpec) -> CharFn {
        make_cf(&spec).unwrap()
    }

    #[test]
    fn truncation_radius_examples() {
        // Vacuous bound.
        assert_eq!(truncation_radius(1.0, 1.0, 1).unwrap(), 1.0);
        assert_eq!(truncation_radius(2.0, 0.3, 1).unwrap(), 1.0);
        assert_eq!(truncation_radius(4.147, 7.97e-4, 3).unwrap(), 1.0);
        let r = truncation_radius(1.0, 1e-6, 1).unwrap();
        assert!((r - 4.71).abs() < 0.01, "{r}");
        assert!(truncation_radius(2.0, 1e-6, 1).unwrap() <= r);
        assert!(truncation_radius(1.0, 1e-9, 1).unwrap() >= r);
        assert!(truncation_radius(0.0, 1e-6, 1).is_err());
        assert!(truncation_radius(-1.0, 1e-6, 1).is_err());
    }

    #[test]
    fn params_validation() {
        let mut p = MollificationParams {
            nodes_per_axis: Some(15),
            ..MollificationParams::default()
        };
        assert!(p.validate().is_err());
        p.nodes_per_axis = Some(17);
        assert!(p.validate().is_err());
        p.nodes_per_axis = Some(64);
        p.truncation_radius = Some(0.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn mollified_point_examples() {
        let p = MollificationParams::default();
        let delta = cf(DistributionSpec::point_mass(vec![0.0]));
        let v = mollified_density_at(&delta, 1.0, &[0.0], &p).unwrap();
        assert!((v - 0.3989422804014327).abs() <= 1.01 * DEFAULT_TAIL_TOL, "{v}");
        let n = cf(DistributionSpec::standard_normal(1));
        let v = mollified_density_at(&n, 1.0, &[0.0], &p).unwrap();
        assert!((v - 1.0 / (4.0 * PI).sqrt()).abs() <= 1.01 * DEFAULT_TAIL_TOL, "{v}");
        let u = cf(DistributionSpec::uniform_1d(-1.0, 1.0));
        let v = mollified_density_at(&u, 0.5, &[0.0], &p).unwrap();
        assert!((v - 0.477_249_868_051_820_8).abs() < 1e-7, "{v}");
        assert!(mollified_density_at(&u, 0.0, &[0.0], &p).is_err());
        assert!(mollified_density_at(&u, 0.5, &[0.0, 1.0], &p).is_err());
    }

    #[test]
    fn inversion_examples() {
        let p = MollificationParams::default();
        let lap = cf(DistributionSpec::Laplace1D { scale: 1.0 });
        let v = invert_density_at(&lap, &[0.0], &p).unwrap();
        assert!((v - 0.5).abs() < 1e-4, "{v}");
        let n = cf(DistributionSpec::standard_normal(1));
        let v = invert_density_at(&n, &[0.0], &p).unwrap();
        assert!((v - 0.3989422804014327).abs() <= 1.01 * DEFAULT_TAIL_TOL, "{v}");
        let delta = cf(DistributionSpec::point_mass(vec![0.0]));
        assert!(matches!(invert_density_at(&delta, &[0.0], &p), Err(Error::Validation(_))));
    }

    #[test]
    fn unknown_integrability_needs_override() {
        let u = cf(DistributionSpec::uniform_1d(-1.0, 1.0));
        let p = MollificationParams::default();
        assert!(matches!(invert_density_at(&u, &[0.0], &p), Err(Error::Validation(_))));
        let conv = crate::charfn::convolve(&u, &u).unwrap();
        let p = MollificationParams {
            allow_unknown_integrability: true,
            truncation_radius: Some(4000.0),
            ..MollificationParams::default()
        };
        // triangular density on [-2, 2], peak 1/2
        let v = invert_density_at(&conv, &[0.0], &p).unwrap();
        assert!((v - 0.5).abs() < 1e-4, "{v}");
    }

    #[test]
    fn l1_bound_examples() {
        let p = MollificationParams::default();
        let lap = cf(DistributionSpec::Laplace1D { scale: 1.0 });
        assert!((cf_l1_bound(&lap, &p).unwrap() - 0.5).abs() < 1e-4);
        let n = cf(DistributionSpec::standard_normal(1));
        assert!((cf_l1_bound(&n, &p).unwrap() - 0.3989422804014327).abs() < 1e-7);
        let m = gaussian_mollify_cf(&cf(DistributionSpec::point_mass(vec![0.0])), 1.0).unwrap();
        assert!((cf_l1_bound(&m, &p).unwrap() - 0.3989422804014327).abs() < 1e-7);
    }

    #[test]
    fn grid_matches_pointwise() {
        let p = MollificationParams::default();
        let spec = DistributionSpec::Convolution {
            parts: vec![DistributionSpec::uniform_1d(-1.0, 2.0), DistributionSpec::Laplace1D { scale: 0.3 }],
        };
        let c = cf(spec);
        let grid = Grid::parse("-8:8:161").unwrap();
        let field = mollified_density_grid(&c, 0.4, &grid, &p).unwrap();
        assert!(field.normalized);
        for k in (0..grid.len()).step_by(7) {
            let z = grid.point(k);
            let v = mollified_density_at(&c, 0.4, &z, &p).unwrap();
            assert!((v - field.values[k]).abs() <= 1e-10);
        }
    }

    #[test]
    fn grid_that_misses_mass_fails() {
        let p = MollificationParams::default();
        let delta = cf(DistributionSpec::point_mass(vec![0.0]));
        let grid = Grid::parse("0:8:101").unwrap();
        assert!(matches!(mollified_density_grid(&delta, 1.0, &grid, &p), Err(Error::Numeric(_))));
        let mut lax = p.clone();
        lax.check_normalization = false;
        let field = mollified_density_grid(&delta, 1.0, &grid, &lax).unwrap();
        assert!(!field.normalized);
    }

    #[test]
    fn dimension_cap() {
        let c = cf(DistributionSpec::standard_normal(4));
        let p = MollificationParams::default();
        assert!(mollified_density_at(&c, 1.0, &[0.0; 4], &p).is_err());
    }

    #[test]
    fn non_decaying_cf_scan_fails() {
        let c = cf(DistributionSpec::uniform_1d(-1.0, 1.0));
        assert!(matches!(decay_scan(&c, 1e-8), Err(Error::Numeric(_))));
    }
}
