//! Closed-form invariant suite run by `cfmoll selfcheck`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::charfn::{gaussian_mollify_cf, make_cf, CharFn};
use crate::converge::{gaussian_tail_prob, l1_distance};
use crate::distribution::DistributionSpec;
use crate::error::Result;
use crate::grid::Grid;
use crate::mollify::{
    cf_l1_bound, invert_density_at, invert_density_grid, mollified_density_at, mollified_density_grid,
    MollificationParams,
};
use crate::special::normal_pdf;

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn fixture_cfs() -> Vec<CharFn> {
    let specs = [
        DistributionSpec::standard_normal(1),
        DistributionSpec::Gaussian {
            mean: vec![0.5, -1.0],
            cov: vec![vec![1.0, 0.3], vec![0.3, 0.5]],
        },
        DistributionSpec::point_mass(vec![0.3, -2.0]),
        DistributionSpec::UniformBox {
            lo: vec![-1.0, 0.0],
            hi: vec![1.0, 3.0],
        },
        DistributionSpec::Laplace1D { scale: 0.7 },
        DistributionSpec::rademacher(),
        DistributionSpec::StandardizedIIDSum {
            base: Box::new(DistributionSpec::rademacher()),
            n: 25,
        },
        DistributionSpec::AffineMap {
            matrix: vec![vec![1.0, 2.0], vec![0.0, -1.0]],
            shift: vec![0.2, 0.1],
            inner: Box::new(DistributionSpec::Product {
                factors: vec![DistributionSpec::Laplace1D { scale: 1.0 }, DistributionSpec::uniform_1d(0.0, 1.0)],
            }),
        },
    ];
    specs.iter().map(|s| make_cf(s).expect("fixture specs are valid")).collect()
}

fn cf_invariants() -> (bool, String) {
    let mut worst_mod = 0.0_f64;
    let mut worst_herm = 0.0_f64;
    let mut origin_ok = true;
    for cf in fixture_cfs() {
        let d = cf.dim();
        origin_ok &= cf.eval(&vec![0.0; d]) == num_complex::Complex64::new(1.0, 0.0);
        for i in 0..40 {
            let t: Vec<f64> = (0..d).map(|j| ((i * 7 + j * 3) as f64 * 0.37).sin() * 6.0).collect();
            let neg: Vec<f64> = t.iter().map(|x| -x).collect();
            let v = cf.eval(&t);
            worst_mod = worst_mod.max(v.norm() - 1.0);
            worst_herm = worst_herm.max((cf.eval(&neg) - v.conj()).norm());
        }
    }
    (
        origin_ok && worst_mod <= 1e-12 && worst_herm <= 1e-12,
        format!("chi(0)=1: {origin_ok}, max |chi|-1 = {worst_mod:e}, max hermitian defect = {worst_herm:e}"),
    )
}

fn run_all() -> Result<Vec<CheckOutcome>> {
    let params = MollificationParams::default();
    let mut out = Vec::new();
    let mut push = |name, passed, detail: String| out.push(CheckOutcome { name, passed, detail });

    let (ok, detail) = cf_invariants();
    push("cf invariants (chi(0)=1, |chi|<=1, hermitian)", ok, detail);

    let normal = make_cf(&DistributionSpec::standard_normal(1))?;
    let grid = Grid::parse("-5:5:101")?;
    let mut worst = 0.0_f64;
    for z in grid.points() {
        worst = worst.max((invert_density_at(&normal, &z, &params)? - normal_pdf(z[0], 1.0)).abs());
    }
    push("gaussian inversion identity", worst <= 1e-6, format!("sup error {worst:e}"));

    let grid = Grid::parse("-8:8:512")?;
    let field = mollified_density_grid(&normal, 0.5, &grid, &params)?;
    let worst = grid
        .points()
        .zip(&field.values)
        .map(|(z, v)| (v - normal_pdf(z[0], 1.25)).abs())
        .fold(0.0, f64::max);
    push("mollified N(0,1) equals N(0,1.25)", worst <= 1e-6, format!("sup error {worst:e}"));

    let laplace = make_cf(&DistributionSpec::Laplace1D { scale: 1.0 })?;
    let mut worst = 0.0_f64;
    for z in [-1.0, 0.0, 1.0_f64] {
        worst = worst.max((invert_density_at(&laplace, &[z], &params)? - 0.5 * (-z.abs()).exp()).abs());
    }
    push("laplace inversion", worst <= 1e-4, format!("max error {worst:e}"));

    let c = cf_l1_bound(&laplace, &params)?;
    push("laplace L1 bound C = 1/2", (c - 0.5).abs() <= 1e-4, format!("C = {c}"));

    let mut worst = 0.0_f64;
    for (cf, sigma, z) in [
        (&laplace, 0.3, 0.4),
        (&normal, 0.7, -1.2),
        (&make_cf(&DistributionSpec::rademacher())?, 0.5, 0.9),
    ] {
        let a = mollified_density_at(cf, sigma, &[z], &params)?;
        let b = invert_density_at(&gaussian_mollify_cf(cf, sigma)?, &[z], &params)?;
        worst = worst.max((a - b).abs());
    }
    push("mollified vs inversion of mollified CF", worst <= 1e-9, format!("max difference {worst:e}"));

    let (s1, s2) = (0.3, 0.4);
    let twice = gaussian_mollify_cf(&gaussian_mollify_cf(&laplace, s1)?, s2)?;
    let once = gaussian_mollify_cf(&laplace, f64::hypot(s1, s2))?;
    let worst = (0..50)
        .map(|i| {
            let t = -5.0 + 0.2 * i as f64;
            (twice.eval(&[t]) - once.eval(&[t])).norm()
        })
        .fold(0.0, f64::max);
    push("mollification semigroup", worst <= 1e-14, format!("max difference {worst:e}"));

    let p = gaussian_tail_prob(1, 1.959963984540054, 1)?;
    push("tail probability at the 97.5% quantile", (p - 0.05).abs() <= 1e-9, format!("P = {p}"));

    let grid = Grid::parse("-10:10:2001")?;
    let base = invert_density_grid(&normal, &grid, &params)?;
    let mut previous = f64::INFINITY;
    let mut monotone = true;
    for n in [1u32, 2, 4, 8, 16] {
        let field = mollified_density_grid(&normal, 1.0 / n as f64, &grid, &params)?;
        let l1 = l1_distance(&field, &base)?;
        monotone &= l1 <= previous;
        previous = l1;
    }
    push("scheffe: L1 to N(0,1) shrinks as sigma = 1/n", monotone, format!("final L1 {previous:e}"));

    let delta = make_cf(&DistributionSpec::point_mass(vec![0.0]))?;
    let v = mollified_density_at(&delta, 1.0, &[0.0], &params)?;
    let exact = 1.0 / (2.0 * PI).sqrt();
    push("point mass mollified to N(0,1)", (v - exact).abs() <= 1e-7, format!("g(0) = {v}"));

    Ok(out)
}

/// Runs every check; a numeric or validation error counts as a failed check.
pub fn run() -> Vec<CheckOutcome> {
    match run_all() {
        Ok(v) => v,
        Err(e) => vec![CheckOutcome {
            name: "selfcheck",
            passed: false,
            detail: e.to_string(),
        }],
    }
}

#[cfg(test)]
mod tests {
    #[test]
    fn all_checks_pass() {
        for c in super::run() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
