//! Normal-distribution helpers on top of `libm`'s erf/erfc.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal CDF Φ(x), accurate in both tails.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail 1 − Φ(x) without cancellation.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Two-sided tail P(|Z| > x) for a standard normal Z.
pub fn normal_two_sided_tail(x: f64) -> f64 {
    erfc(x.abs() * FRAC_1_SQRT_2)
}

pub fn normal_pdf(x: f64, variance: f64) -> f64 {
    (-0.5 * x * x / variance).exp() / (2.0 * PI * variance).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        assert!((normal_cdf(1.959963984540054) - 0.975).abs() < 1e-15);
        assert!((normal_two_sided_tail(1.959963984540054) - 0.05).abs() < 1e-15);
        assert!((normal_sf(0.0) - 0.5).abs() < 1e-16);
        assert!(normal_sf(30.0) > 0.0);
    }

    #[test]
    fn pdf_at_zero() {
        assert!((normal_pdf(0.0, 1.0) - 0.3989422804014327).abs() < 1e-16);
    }
}
