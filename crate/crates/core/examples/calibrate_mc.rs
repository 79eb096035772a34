//! One-off calibration of the Monte Carlo fixtures; prints the values that
//! are pinned in tests/fixtures/mc_pins.json.

use cfmoll::*;

fn main() -> Result<()> {
    let params = MollificationParams::default();
    let grid = Grid::parse("-8:8:401")?;
    let n = 1_000_000;
    let seed = 20_240_601;
    let fixtures = [
        ("point_mass", DistributionSpec::point_mass(vec![0.0]), 1.0),
        ("uniform", DistributionSpec::uniform_1d(-1.0, 1.0), 0.5),
        ("gaussian", DistributionSpec::standard_normal(1), 0.5),
    ];
    for (name, spec, sigma) in &fixtures {
        let hist = mollified_histogram(spec, *sigma, &grid, n, seed)?;
        let quad = mollified_density_grid(&make_cf(spec)?, *sigma, &grid, &params)?;
        println!("histogram_l1 {name}: {:.17e}", l1_distance(&hist, &quad)?);
    }
    let base = DistributionSpec::uniform_1d(-1.0, 1.0);
    let two_stage = DistributionSpec::Convolution {
        parts: vec![base.clone(), DistributionSpec::normal_1d(0.0, 0.25)],
    };
    let a = mollified_histogram(&base, 0.5f64.hypot(0.5), &grid, n, seed)?;
    let b = mollified_histogram(&two_stage, 0.5, &grid, n, seed + 1)?;
    println!("semigroup_l1: {:.17e}", l1_distance(&a, &b)?);

    let batch = sample(&DistributionSpec::standard_normal(1), 100_000, seed)?;
    let mean: f64 = batch.points.iter().map(|p| p[0]).sum::<f64>() / 1e5;
    println!("gaussian_mean: {mean:.17e}");
    let ecf = empirical_cf(&batch, &[1.0])?;
    println!("ecf_t1: {:.17e} {:.17e}", ecf.re, ecf.im);
    for (d, r) in [(1usize, 1.96), (1, 1.0), (2, 1.96), (2, 2.5)] {
        let mc = mc_tail_prob(&DistributionSpec::standard_normal(d), r, 100_000, seed)?;
        println!("mc_tail d={d} R={r}: {mc:.17e} exact {:.6e}", gaussian_tail_prob(1, r, d)?);
    }
    for (name, spec) in constructor_fixtures() {
        let cf = make_cf(&spec)?;
        let batch = sample(&spec, 100_000, seed)?;
        let mut worst = 0.0_f64;
        for i in 0..20 {
            let t: Vec<f64> = (0..cf.dim()).map(|j| -3.0 + 0.3 * i as f64 + 0.1 * j as f64).collect();
            worst = worst.max((empirical_cf(&batch, &t)? - cf.eval(&t)).norm());
        }
        println!("ecf_max_error {name}: {worst:.17e}");
    }
    Ok(())
}

fn constructor_fixtures() -> Vec<(&'static str, DistributionSpec)> {
    let laplace = DistributionSpec::Laplace1D { scale: 0.8 };
    vec![
        (
            "gaussian",
            DistributionSpec::Gaussian {
                mean: vec![0.5, -0.5],
                cov: vec![vec![1.0, 0.4], vec![0.4, 0.7]],
            },
        ),
        ("point_mass", DistributionSpec::point_mass(vec![0.3, -1.2])),
        (
            "uniform_box",
            DistributionSpec::UniformBox {
                lo: vec![-1.0, 0.0],
                hi: vec![1.0, 2.0],
            },
        ),
        ("laplace1d", laplace.clone()),
        (
            "empirical",
            DistributionSpec::Empirical {
                points: vec![vec![-1.0], vec![0.5], vec![2.0]],
                weights: Some(vec![0.25, 0.5, 0.25]),
            },
        ),
        (
            "convolution",
            DistributionSpec::Convolution {
                parts: vec![laplace.clone(), DistributionSpec::uniform_1d(-1.0, 1.0)],
            },
        ),
        (
            "affine_map",
            DistributionSpec::AffineMap {
                matrix: vec![vec![2.0], vec![-1.0]],
                shift: vec![0.1, 0.2],
                inner: Box::new(laplace.clone()),
            },
        ),
        (
            "standardized_iid_sum",
            DistributionSpec::StandardizedIIDSum {
                base: Box::new(DistributionSpec::rademacher()),
                n: 9,
            },
        ),
        (
            "product",
            DistributionSpec::Product {
                factors: vec![laplace, DistributionSpec::uniform_1d(0.0, 1.0)],
            },
        ),
    ]
}
