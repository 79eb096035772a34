//! Independent reference computations for the integration tests.
//!
//! Nothing here calls into the crate's quadrature or special-function code:
//! normal probabilities come from Simpson quadrature of the Gaussian density,
//! and the CLT reference densities are explicit Gaussian mixtures.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Composite Simpson rule with `intervals` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    assert!(intervals.is_multiple_of(2));
    let h = (b - a) / intervals as f64;
    let mut acc = f(a) + f(b);
    for i in 1..intervals {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

pub fn gauss_pdf(x: f64, mean: f64, var: f64) -> f64 {
    (-(x - mean) * (x - mean) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// P(Z > x) for standard normal Z, x ≥ 0, by Simpson quadrature.
pub fn upper_tail(x: f64) -> f64 {
    assert!(x >= 0.0);
    simpson(|t| gauss_pdf(t, 0.0, 1.0), x, x + 40.0, 40_000)
}

/// Φ(x) by quadrature.
pub fn cdf(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 - upper_tail(x)
    } else {
        upper_tail(-x)
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Density of (ε₁+…+εₙ)/√n + σZ for Rademacher εᵢ: a Gaussian mixture on the lattice.
pub fn mollified_rademacher_sum(z: f64, n: u64, sigma: f64) -> f64 {
    let scale = 0.5f64.powi(n as i32);
    (0..=n)
        .map(|j| {
            let loc = (2.0 * j as f64 - n as f64) / (n as f64).sqrt();
            binomial(n, j) * scale * gauss_pdf(z, loc, sigma * sigma)
        })
        .sum()
}

/// ∫|mixture − N(0, 1+σ²)| by fine Simpson quadrature.
pub fn clt_l1_oracle(n: u64, sigma: f64) -> f64 {
    let var = 1.0 + sigma * sigma;
    simpson(
        |z| (mollified_rademacher_sum(z, n, sigma) - gauss_pdf(z, 0.0, var)).abs(),
        -14.0,
        14.0,
        400_000,
    )
}

/// Exact L¹ between N(0, v) (v > 1) and N(0, 1): 4[Φ(x*) − Φ(x*/√v)],
/// with x* the positive crossing point of the two densities.
pub fn centered_gaussian_l1(v: f64) -> f64 {
    let crossing = (v.ln() * v / (v - 1.0)).sqrt();
    4.0 * (cdf(crossing) - cdf(crossing / v.sqrt()))
}

/// Values computed with scipy before the implementation existed.
pub mod frozen {
    /// ∫|g − N(0,1.25)| for Rademacher sums mollified with σ = 0.5.
    pub const CLT_L1_N4: f64 = 0.049086908003115624;
    pub const CLT_L1_N16: f64 = 0.009565767426753278;
    pub const CLT_L1_N64: f64 = 0.002347925545006613;
    /// Exact L¹ between N(0, 1 + 1/100²) and N(0, 1).
    pub const SCHEFFE_L1_N100: f64 = 4.8391725347762815e-05;
    /// ½(Φ(2) − Φ(−2)).
    pub const UNIFORM_MOLLIFIED_AT_0: f64 = 0.4772498680518208;
    /// Root of 2Φ(−R)/√(2π) = 1e-6.
    pub const RADIUS_SIGMA1_TOL1E6: f64 = 4.707589832900272;
    /// 2Φ(−1.95996) and 1 − (1 − 2Φ(−1.95996))².
    pub const TAIL_D1: f64 = 0.05000046575526186;
    pub const TAIL_D2: f64 = 0.0975008849347806;
    /// 1/√(2.5π).
    pub const N125_AT_0: f64 = 0.3568248232305542;
}
