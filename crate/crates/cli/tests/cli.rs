use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cfmoll::grid::DEFAULT_NEGATIVITY_TOL;
use cfmoll::DensityField;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn cfmoll(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfmoll")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn invert_laplace_center_row() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("laplace");
    let out = cfmoll(&["invert", "--spec", p(&fixture("laplace.json")), "--grid", "-6:6:1201", "--out", p(&prefix)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let csv = std::fs::read_to_string(dir.path().join("laplace.csv")).unwrap();
    let row = csv
        .lines()
        .skip(1)
        .find(|l| l.split(',').next().unwrap().parse::<f64>().unwrap() == 0.0)
        .expect("z=0 row");
    let g: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((g - 0.5).abs() <= 1e-4, "{g}");
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("laplace.json")).unwrap()).unwrap();
    assert_eq!(sidecar["params"]["command"], "invert");
    assert_eq!(sidecar["grid"]["axes"][0]["count"], 1201);
}

#[test]
fn invert_rejects_point_mass() {
    let out = cfmoll(&["invert", "--spec", p(&fixture("point_mass.json")), "--grid", "-1:1:11"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("integrab"), "{}", stderr(&out));
}

#[test]
fn mollify_with_zero_sigma_exits_2() {
    let out = cfmoll(&["mollify", "--spec", p(&fixture("point_mass.json")), "--grid", "-5:5:101", "--sigma", "0"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn validation_failures_exit_2() {
    let grid = ["--grid", "-5:5:101", "--sigma", "1"];
    let bad_cov = cfmoll(&[&["mollify", "--spec", p(&fixture("bad_cov.json"))][..], &grid].concat());
    assert_eq!(code(&bad_cov), 2);
    let missing = cfmoll(&[&["mollify", "--spec", "/nonexistent/spec.json"][..], &grid].concat());
    assert_eq!(code(&missing), 2);
    let bad_grid = cfmoll(&["mollify", "--spec", p(&fixture("normal.json")), "--grid", "5:-5:x", "--sigma", "1"]);
    assert_eq!(code(&bad_grid), 2);
    let wrong_dim = cfmoll(&["mollify", "--spec", p(&fixture("normal_2d_narrow.json")), "--grid", "-5:5:11", "--sigma", "1"]);
    assert_eq!(code(&wrong_dim), 2);
    let no_spec = cfmoll(&["invert", "--grid", "-5:5:11"]);
    assert_eq!(code(&no_spec), 2);
    let unknown_flag = cfmoll(&["invert", "--bogus"]);
    assert_eq!(code(&unknown_flag), 2);
}

#[test]
fn grid_missing_mass_exits_3() {
    // The mollified N(0, 2) density has about 16% of its mass outside [-2, 2].
    let out = cfmoll(&["mollify", "--spec", p(&fixture("normal.json")), "--grid", "-2:2:201", "--sigma", "1"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("Riemann sum"), "{}", stderr(&out));
}

#[test]
fn converge_identical_sequence() {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("rep");
    let normal = fixture("normal.json");
    let out = cfmoll(&[
        "converge", "--spec", p(&normal), "--spec", p(&normal), "--target", p(&normal), "--grid", "-8:8:321",
        "--k-schedule", "1,2", "--epsilon", "0.2", "--out", p(&prefix),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rep.json")).unwrap()).unwrap();
    for e in report["cf_sup_error"].as_array().unwrap() {
        assert_eq!(e.as_f64().unwrap(), 0.0);
    }
    for row in report["l1_mollified"].as_array().unwrap() {
        for v in row.as_array().unwrap() {
            assert_eq!(v.as_f64().unwrap(), 0.0);
        }
    }
    assert_eq!(report["sigma_schedule"], serde_json::json!([1.0, 0.5]));
    let csv = std::fs::read_to_string(dir.path().join("rep.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "n,k,l1,remainder");
    assert_eq!(csv.lines().count(), 1 + 2 * 2);
}

#[test]
fn converge_reads_spec_arrays() {
    let out = cfmoll(&[
        "converge", "--spec", p(&fixture("rademacher_sums.json")), "--target", p(&fixture("normal.json")),
        "--grid", "-10:10:801", "--k-schedule", "2",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let l1: Vec<f64> = report["l1_mollified"].as_array().unwrap().iter().map(|r| r[0].as_f64().unwrap()).collect();
    assert_eq!(l1.len(), 2);
    assert!(l1[1] < l1[0]);
}

#[test]
fn outputs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let prefix = dir.path().join(name);
        let out = cfmoll(&[
            "mollify", "--spec", p(&fixture("uniform.json")), "--grid", "-4:4:161", "--sigma", "0.5",
            "--mc-samples", "20000", "--seed", "7", "--out", p(&prefix),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        ["csv", "json", "mc.csv"].map(|ext| std::fs::read(dir.path().join(format!("{name}.{ext}"))).unwrap())
    };
    assert_eq!(run("a"), run("b"));
    let single = cfmoll(&["clt-demo", "--threads", "1"]);
    let default = cfmoll(&["clt-demo"]);
    assert_eq!(code(&single), 0, "{}", stderr(&single));
    assert_eq!(single.stdout, default.stdout);
}

#[test]
fn emitted_csv_reingests() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&str, &[&str]); 3] = [
        ("inv", &["invert", "--spec", "laplace.json", "--grid", "-6:6:241"]),
        ("mol", &["mollify", "--spec", "uniform.json", "--grid", "-5:5:201", "--sigma", "0.3"]),
        ("mol2", &["mollify", "--spec", "normal_2d_narrow.json", "--grid", "-6:6:49,-6:6:61", "--sigma", "0.5"]),
    ];
    for (name, args) in cases {
        let args: Vec<String> = args
            .iter()
            .map(|a| if a.ends_with(".json") { p(&fixture(a)).to_string() } else { a.to_string() })
            .collect();
        let prefix = dir.path().join(name);
        let mut all: Vec<&str> = args.iter().map(String::as_str).collect();
        all.extend(["--out", p(&prefix)]);
        let out = cfmoll(&all);
        assert_eq!(code(&out), 0, "{name}: {}", stderr(&out));
        let path = dir.path().join(format!("{name}.csv"));
        let field = DensityField::read_csv(&path).unwrap();
        field.validate(DEFAULT_NEGATIVITY_TOL).unwrap();
        assert_eq!(field.to_csv_string(), std::fs::read_to_string(&path).unwrap());
        let sidecar: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join(format!("{name}.json"))).unwrap()).unwrap();
        assert_eq!(sidecar["normalized"].as_bool().unwrap(), field.normalized);
    }
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("uniform.json"), dir.path().join("u.json")).unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"spec": ["u.json"], "grid": "-4:4:81", "sigma": 0.25, "out": "from_config",
            "params": {"tail_tol": 1e-9}}"#,
    )
    .unwrap();
    let out = cfmoll(&["mollify", "--config", p(&config)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("from_config.json")).unwrap()).unwrap();
    assert_eq!(sidecar["params"]["sigma"], 0.25);
    assert_eq!(sidecar["params"]["mollification"]["tail_tol"], 1e-9);

    let flag_prefix = dir.path().join("from_flags");
    let out = cfmoll(&["mollify", "--config", p(&config), "--sigma", "0.5", "--tail-tol", "1e-7", "--out", p(&flag_prefix)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("from_flags.json")).unwrap()).unwrap();
    assert_eq!(sidecar["params"]["sigma"], 0.5);
    assert_eq!(sidecar["params"]["mollification"]["tail_tol"], 1e-7);

    std::fs::write(&config, r#"{"sigmaa": 1.0}"#).unwrap();
    assert_eq!(code(&cfmoll(&["mollify", "--config", p(&config)])), 2);
}

#[test]
fn selfcheck_passes() {
    let out = cfmoll(&["selfcheck"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().count() >= 8);
    assert!(text.lines().all(|l| l.starts_with("PASS ")), "{text}");
}
