mod common;

use std::io::Write;

use common::{complex_of, euler_series, random_operator_text, run_json};
use gevrey_cli::parse::{parse_operator, print_operator};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::NamedTempFile;

fn series_file(a: &gevrey_core::FormalPowerSeries) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(serde_json::to_string(a).unwrap().as_bytes())
        .unwrap();
    f
}

fn path(f: &NamedTempFile) -> &str {
    f.path().to_str().unwrap()
}

#[test]
fn polygon_of_euler_operator() {
    let (code, v) = run_json(&["polygon", "z^2*D + 1"]);
    assert_eq!(code, 0);
    assert_eq!(v["finite_slopes"], serde_json::json!(["1/1"]));
    assert_eq!(v["gevrey_candidates"], serde_json::json!([1.0, 2.0]));
}

#[test]
fn polygon_csv() {
    let out = gevrey_cli::run(["gevrey", "polygon", "z^2*D + 1", "--csv"]);
    assert_eq!(out.code, 0);
    assert!(out.stdout.lines().count() >= 3, "{}", out.stdout);
}

#[test]
fn solve_euler_with_rhs_z() {
    let (code, v) = run_json(&["solve", "z^2*D + 1", "--rhs", "[[0,0],[1,0]]", "-N", "8"]);
    assert_eq!(code, 0);
    let got: Vec<f64> = v["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p[0].as_f64().unwrap())
        .collect();
    assert_eq!(
        got,
        vec![0.0, 1.0, -1.0, 2.0, -6.0, 24.0, -120.0, 720.0, -5040.0]
    );
    assert_eq!(v["free_indices"], serde_json::json!([]));
    assert!(v["residual"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn solve_uses_initial_data() {
    // u'' = 0 with u(0) = 2, u'(0) = 3 - i
    let (code, v) = run_json(&[
        "solve", "D^2", "--rhs", "[[0,0]]", "-N", "4", "--init", "0=2", "--init", "1=3-i",
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(
        complex_of(&v["coefficients"][1]),
        gevrey_core::Complex64::new(3.0, -1.0)
    );
    assert_eq!(v["free_indices"], serde_json::json!([0, 1]));
    let (code, v) = run_json(&["solve", "D^2", "--rhs", "[[0,0]]", "-N", "4"]);
    assert_eq!(code, 2, "{v}");
}

#[test]
fn sum_of_euler_series() {
    let f = series_file(&euler_series(24));
    let (code, v) = run_json(&[
        "sum",
        path(&f),
        "-s",
        "2",
        "--eta",
        "0",
        "--at",
        "1,0",
        "--continuation",
        r#"{"type":"closed_form","expr":"log(1+u)"}"#,
    ]);
    assert_eq!(code, 0, "{v}");
    let value = complex_of(&v["value"]);
    assert!((value.re - 0.596347).abs() < 1e-6, "{value}");
    assert!(v["est_error"].as_f64().unwrap() <= 1e-8);
    assert_eq!(v["domain_ok"], true);
}

#[test]
fn quadrature_tolerance_from_environment() {
    let f = series_file(&euler_series(24));
    let args = [
        "gevrey",
        "sum",
        path(&f),
        "-s",
        "2",
        "--eta",
        "0",
        "--at",
        "1,0",
    ];
    let out = gevrey_cli::run_with_env(args, Some("1e-6".into()));
    assert_eq!(out.code, 0, "{}", out.stderr);
    let v: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
    assert_eq!(v["quad_rel_tol"], 1e-6);
    let out = gevrey_cli::run_with_env(args, Some("fast".into()));
    assert_eq!(out.code, 1);
    serde_json::from_str::<serde_json::Value>(&out.stderr).unwrap();
}

#[test]
fn classify_and_gevrey() {
    let (code, v) = run_json(&[
        "classify-euler",
        "--rhs",
        "[[0,0],[1,0],[1,0]]",
        "--growth",
        "1,1",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "convergent");
    assert_eq!(v["heuristic"], false);
    let (_, v) = run_json(&["classify-euler", "--rhs", "[[0,0],[1,0]]"]);
    assert_eq!(v["verdict"], "gevrey2_sharp");
    assert_eq!(v["heuristic"], true);

    let f = series_file(&euler_series(40));
    let (code, v) = run_json(&["gevrey", path(&f)]);
    assert_eq!(code, 0);
    let s = v["s_hat"].as_f64().unwrap();
    assert!((1.9..=2.1).contains(&s), "{s}");
}

#[test]
fn check_subcommands_with_csv() {
    let a = series_file(
        &gevrey_core::FormalPowerSeries::from_real(&[1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0])
            .unwrap(),
    );
    let csv = NamedTempFile::new().unwrap();
    let (code, v) = run_json(&[
        "check",
        "fit",
        path(&a),
        "-s",
        "1",
        "--sector",
        "0,1,1",
        "--oracle",
        "exp(z)",
        "--n-max",
        "4",
        "--csv",
        path(&csv),
    ]);
    assert_eq!(code, 0, "{v}");
    assert_eq!(v["ok"], true);
    let text = std::fs::read_to_string(csv.path()).unwrap();
    assert!(text.starts_with("n,re,im,remainder\n"));

    let (code, v) = run_json(&[
        "check",
        "flat",
        "-s",
        "2",
        "--sector",
        "0,1,1",
        "--oracle",
        "exp(-1/z)",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["ok"], true);
    let (code, v) = run_json(&[
        "check", "flat", "-s", "2", "--sector", "0,1,1", "--oracle", "z^3",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["ok"], false);

    let (code, v) = run_json(&[
        "check",
        "derivatives",
        "-s",
        "1",
        "--sector",
        "0,1,1",
        "--oracle",
        "exp(z)",
        "--k-max",
        "4",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["bounded"], true);
}

#[test]
fn every_subcommand_emits_json_on_failure() {
    let euler = series_file(&euler_series(24));
    let e = path(&euler);
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["polygon", "z^2*D +"], 1),
        (vec!["polygon", "D^-1"], 1),
        (vec!["polygon", ""], 1),
        (vec!["polygon", "z^2"], 1),
        (
            vec!["solve", "z^2*D + 1", "--rhs", "[[0,0],[1]]", "-N", "4"],
            1,
        ),
        (
            vec![
                "solve",
                "z^2*D + 1",
                "--rhs",
                "/nonexistent.json",
                "-N",
                "4",
            ],
            1,
        ),
        (
            vec![
                "solve",
                "z*D + 1",
                "--rhs",
                "[[0,0],[1,0]]",
                "-N",
                "4",
                "--init",
                "x",
            ],
            1,
        ),
        (
            vec!["classify-euler", "--rhs", "[[1,0]]", "--growth", "1"],
            1,
        ),
        (
            vec!["classify-euler", "--rhs", "[[1,0]]", "--growth", "-1,1"],
            2,
        ),
        (vec!["gevrey", "/nonexistent.json"], 1),
        (vec!["gevrey", e, "-s", "1"], 2),
        (vec!["sum", e, "-s", "4", "--eta", "0", "--at", "1,0"], 2),
        (vec!["sum", e, "-s", "2", "--eta", "0", "--at", "1"], 1),
        (vec!["sum", e, "-s", "2", "--eta", "0", "--at", "-1,0"], 2),
        (
            vec![
                "sum",
                e,
                "-s",
                "2",
                "--eta",
                "0",
                "--at",
                "1,0",
                "--continuation",
                "pade:20,20",
            ],
            1,
        ),
        (
            vec![
                "sum",
                e,
                "-s",
                "2",
                "--eta",
                "0",
                "--at",
                "1,0",
                "--continuation",
                r#"{"type":"closed_form","expr":"log(1+"}"#,
            ],
            1,
        ),
        (
            vec![
                "check", "flat", "-s", "2", "--sector", "0,1", "--oracle", "z",
            ],
            1,
        ),
        (
            vec![
                "check", "flat", "-s", "2", "--sector", "0,7,1", "--oracle", "z",
            ],
            1,
        ),
        (
            vec![
                "check", "flat", "-s", "2", "--sector", "0,1,1", "--oracle", "1/(z-z)",
            ],
            3,
        ),
        (
            vec![
                "check", "fit", e, "-s", "2", "--sector", "0,1,1", "--oracle", "z", "--n-max", "40",
            ],
            1,
        ),
        (
            vec![
                "check",
                "derivatives",
                "-s",
                "2",
                "--sector",
                "0,1,1",
                "--oracle",
                "z",
                "--k-max",
                "9",
            ],
            1,
        ),
        (vec!["frobnicate"], 1),
        (vec![], 1),
    ];
    for (args, expected) in cases {
        let (code, v) = run_json(&args);
        assert_eq!(code, expected, "{args:?}: {v}");
        assert_eq!(v["exit_code"], expected);
        assert!(v["error"]["message"].is_string(), "{args:?}");
    }
}

#[test]
fn parse_errors_carry_positions() {
    let (code, v) = run_json(&["polygon", "z^2*D + "]);
    assert_eq!(code, 1);
    assert_eq!(v["error"]["position"], 9);
    assert!(v["error"]["message"]
        .as_str()
        .unwrap()
        .contains("position 9"));
}

#[test]
fn identical_invocations_are_byte_identical() {
    let euler = series_file(&euler_series(24));
    let e = path(&euler);
    let commands: Vec<Vec<&str>> = vec![
        vec!["gevrey", "polygon", "D^2 + z*D + z^3"],
        vec![
            "gevrey",
            "solve",
            "z^2*D + i",
            "--rhs",
            "[[0,0],[0,1]]",
            "-N",
            "12",
        ],
        vec!["gevrey", "sum", e, "-s", "2", "--eta", "0", "--at", "1,0"],
        vec!["gevrey", "gevrey", e],
        vec![
            "gevrey",
            "check",
            "flat",
            "-s",
            "2",
            "--sector",
            "0,1,0.5",
            "--oracle",
            "exp(-1/z)",
        ],
        vec!["gevrey", "polygon", "D^"],
    ];
    for args in commands {
        let a = gevrey_cli::run_with_env(args.clone(), None);
        let b = gevrey_cli::run_with_env(args.clone(), None);
        assert_eq!(a, b, "{args:?}");
    }
}

#[test]
fn operator_corpus_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let text = random_operator_text(&mut rng);
        let op = parse_operator(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        let printed = print_operator(&op);
        let again = parse_operator(&printed).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert_eq!(op, again, "{text} -> {printed}");
        assert_eq!(print_operator(&again), printed);
    }
}
