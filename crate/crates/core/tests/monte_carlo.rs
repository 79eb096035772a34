//! Sampling-based checks against the pinned calibration in fixtures/mc_pins.json.

mod common;

use cfmoll::*;
use num_complex::Complex64;
use serde_json::Value;

fn pins() -> Value {
    serde_json::from_str(include_str!("fixtures/mc_pins.json")).unwrap()
}

fn seed() -> u64 {
    pins()["seed"].as_u64().unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

/// Calibrated values are reproduced up to libm differences across platforms.
fn assert_reproduces(observed: f64, calibrated: f64) {
    assert!((observed - calibrated).abs() <= 1e-9, "observed {observed}, calibrated {calibrated}");
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

#[test]
fn gaussian_sample_mean() {
    let p = pins();
    let n = p["sample_n"].as_u64().unwrap() as usize;
    let batch = sample(&DistributionSpec::standard_normal(1), n, seed()).unwrap();
    let mean = batch.points.iter().map(|x| x[0]).sum::<f64>() / n as f64;
    assert!(mean.abs() <= 5.0 / (n as f64).sqrt());
    assert!(mean.abs() <= num(&p["gaussian_mean"]["tolerance"]));
    assert_reproduces(mean, num(&p["gaussian_mean"]["calibrated"]));
}

#[test]
fn empirical_cf_of_normal_sample() {
    let p = pins();
    let n = p["sample_n"].as_u64().unwrap() as usize;
    let batch = sample(&DistributionSpec::standard_normal(1), n, seed()).unwrap();
    let v = empirical_cf(&batch, &[1.0]).unwrap();
    assert!((v - Complex64::new((-0.5f64).exp(), 0.0)).norm() <= num(&p["ecf_t1"]["tolerance"]));
    assert_reproduces(v.re, num(&p["ecf_t1"]["calibrated_re"]));
    assert_eq!(empirical_cf(&batch, &[0.0]).unwrap(), Complex64::new(1.0, 0.0));
}

#[test]
fn empirical_cf_matches_closed_forms() {
    let p = pins();
    let tol = num(&p["ecf_constructors"]["tolerance"]);
    for (name, spec) in constructor_fixtures() {
        let cf = make_cf(&spec).unwrap();
        let batch = sample(&spec, 100_000, seed()).unwrap();
        let mut worst = 0.0_f64;
        for i in 0..20 {
            let t: Vec<f64> = (0..cf.dim()).map(|j| -3.0 + 0.3 * i as f64 + 0.1 * j as f64).collect();
            let e = empirical_cf(&batch, &t).unwrap();
            assert!(e.norm() <= 1.0);
            worst = worst.max((e - cf.eval(&t)).norm());
        }
        assert!(worst <= tol, "{name}: {worst}");
        assert_reproduces(worst, num(&p["ecf_constructors"]["calibrated_max_error"][name]));
    }
}

#[test]
fn mc_tail_matches_gaussian_tail() {
    let p = pins();
    let tol = num(&p["tail"]["tolerance"]);
    for (d, r, key) in [(1usize, 1.96, "d1_R1.96"), (1, 1.0, "d1_R1"), (2, 1.96, "d2_R1.96"), (2, 2.5, "d2_R2.5")] {
        let mc = mc_tail_prob(&DistributionSpec::standard_normal(d), r, 100_000, seed()).unwrap();
        let exact = gaussian_tail_prob(1, r, d).unwrap();
        assert!((mc - exact).abs() <= tol, "d={d} R={r}: {mc} vs {exact}");
        assert_reproduces(mc, num(&p["tail"]["calibrated"][key]));
    }
    assert!(mc_tail_prob(&DistributionSpec::uniform_1d(-1.0, 1.0), 0.0, 1000, 1).unwrap() > 0.999);
    assert_eq!(mc_tail_prob(&DistributionSpec::point_mass(vec![0.0]), 1.0, 1000, 1).unwrap(), 0.0);
}

fn histogram_fixture(name: &str) -> (DistributionSpec, f64) {
    match name {
        "point_mass" => (DistributionSpec::point_mass(vec![0.0]), 1.0),
        "uniform" => (DistributionSpec::uniform_1d(-1.0, 1.0), 0.5),
        "gaussian" => (DistributionSpec::standard_normal(1), 0.5),
        other => panic!("unknown fixture {other}"),
    }
}

#[test]
fn histograms_agree_with_quadrature() {
    let p = pins();
    let h = &p["histogram"];
    let grid = Grid::parse(h["grid"].as_str().unwrap()).unwrap();
    let n = h["n"].as_u64().unwrap() as usize;
    for (name, pin) in h["fixtures"].as_object().unwrap() {
        let (spec, sigma) = histogram_fixture(name);
        assert_eq!(sigma, num(&pin["sigma"]));
        let hist = mollified_histogram(&spec, sigma, &grid, n, seed()).unwrap();
        let quad = mollified_density_grid(&make_cf(&spec).unwrap(), sigma, &grid, &MollificationParams::default()).unwrap();
        let l1 = l1_distance(&hist, &quad).unwrap();
        assert!(l1 <= num(&pin["tolerance"]), "{name}: {l1}");
        assert_reproduces(l1, num(&pin["calibrated_l1"]));
        assert!(hist.normalized);
    }
}

#[test]
fn histogram_semigroup() {
    let p = pins();
    let h = &p["histogram"];
    let grid = Grid::parse(h["grid"].as_str().unwrap()).unwrap();
    let n = h["n"].as_u64().unwrap() as usize;
    let base = DistributionSpec::uniform_1d(-1.0, 1.0);
    let two_stage = DistributionSpec::Convolution {
        parts: vec![base.clone(), DistributionSpec::normal_1d(0.0, 0.25)],
    };
    let once = mollified_histogram(&base, 0.5f64.hypot(0.5), &grid, n, seed()).unwrap();
    let twice = mollified_histogram(&two_stage, 0.5, &grid, n, seed() + 1).unwrap();
    let l1 = l1_distance(&once, &twice).unwrap();
    assert!(l1 <= num(&h["semigroup"]["tolerance"]));
    assert_reproduces(l1, num(&h["semigroup"]["calibrated_l1"]));
}

#[test]
fn gaussian_sample_moments_2d() {
    let batch = sample(&DistributionSpec::standard_normal(3), 100_000, seed()).unwrap();
    let n = batch.len() as f64;
    for j in 0..3 {
        let mean = batch.points.iter().map(|x| x[j]).sum::<f64>() / n;
        assert!(mean.abs() <= 5.0 / n.sqrt());
    }
}
