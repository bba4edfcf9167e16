//! Behavioral contract of the executable: exit codes, stream discipline,
//! CSV shapes, and flag/environment precedence.

use std::path::PathBuf;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_visidx");

fn shape(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../shapes")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("VISIDX_SEED")
        .env_remove("VISIDX_THREADS")
        .output()
        .expect("spawn visidx")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 csv")
}

/// Splits a CSV body into (header fields, data rows of fields).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("header row")
        .split(',')
        .map(String::from)
        .collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect::<Vec<_>>())
        .collect::<Vec<_>>();
    (header, rows)
}

fn field<'a>(header: &[String], row: &'a [String], name: &str) -> &'a str {
    let idx = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    &row[idx]
}

#[test]
fn bad_inputs_exit_2_with_silent_stdout() {
    let tmp = std::env::temp_dir().join(format!("visidx-bad-{}.json", std::process::id()));
    std::fs::write(&tmp, "{not json").unwrap();
    let bad = tmp.display().to_string();
    let disc = shape("disc.json");
    let ball = shape("ball.json");

    let cases: Vec<Vec<&str>> = vec![
        vec!["estimate", "--shape", &bad],
        vec!["estimate", "--shape", "/definitely/not/there.json"],
        vec![
            "estimate",
            "--shape",
            &disc,
            "--f",
            "gibberish",
            "--n",
            "10",
        ],
        vec![
            "estimate",
            "--shape",
            &disc,
            "--law",
            "gibberish",
            "--n",
            "10",
        ],
        vec!["estimate", "--shape", &ball, "--law", "negate", "--n", "10"],
        vec![
            "estimate", "--shape", &ball, "--radius", "0.25", "--n", "10",
        ],
        vec!["scan", "--family", "nonesuch", "--kappa", "0.5"],
        vec!["scan", "--family", "disc", "--kappa", "0.5", "--at", "1.0"],
        vec!["scan", "--family", "disc"],
        vec!["constants", "--d", "1"],
    ];
    for args in &cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
        assert!(out.stdout.is_empty(), "stdout not silent for {args:?}");
        assert!(!out.stderr.is_empty(), "no diagnostic for {args:?}");
    }
    std::fs::remove_file(&tmp).ok();
}

#[test]
fn unknown_flags_exit_2() {
    let out = run(&["estimate", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn estimate_emits_one_row_matching_the_closed_form() {
    let out = run(&[
        "estimate",
        "--shape",
        &shape("disc.json"),
        "--n",
        "200000",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    let (header, rows) = parse_csv(&text);
    assert_eq!(
        header,
        [
            "mean",
            "stderr",
            "n_total",
            "n_effective",
            "trapped_fraction",
            "discarded_fraction",
            "seed"
        ]
    );
    assert_eq!(rows.len(), 1);
    let mean: f64 = field(&header, &rows[0], "mean").parse().unwrap();
    let exact = 16.0 * std::f64::consts::PI / 3.0;
    assert!((mean - exact).abs() / exact < 0.01, "mean {mean}");
    assert_eq!(field(&header, &rows[0], "seed"), "1");
    assert_eq!(field(&header, &rows[0], "n_total"), "200000");
}

#[test]
fn retro_disc_weight_is_constant_and_exact() {
    let out = run(&[
        "estimate",
        "--shape",
        &shape("disc.json"),
        "--n",
        "1000",
        "--seed",
        "3",
        "--law",
        "retro",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout_str(&out));
    let row = &rows[0];
    // This invocation loses no sample to tangential hits, so every ray is
    // reversed through a full half-turn and the estimate has zero variance.
    assert_eq!(
        field(&header, row, "n_effective"),
        field(&header, row, "n_total")
    );
    let mean: f64 = field(&header, row, "mean").parse().unwrap();
    let stderr: f64 = field(&header, row, "stderr").parse().unwrap();
    assert!((mean - 8.0 * std::f64::consts::PI).abs() < 1e-9);
    assert!(stderr == 0.0);
}

#[test]
fn verify_reports_every_bound_holds_on_the_disc() {
    let out = run(&[
        "verify",
        "--shape",
        &shape("disc.json"),
        "--n",
        "100000",
        "--seed",
        "1",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = parse_csv(&stdout_str(&out));
    assert!(
        rows.len() >= 7,
        "suite unexpectedly small: {} rows",
        rows.len()
    );
    for row in &rows {
        assert_eq!(field(&header, row, "verdict"), "holds", "row {row:?}");
        assert_eq!(field(&header, row, "seed"), "1");
    }
}

#[test]
fn constants_table_contains_the_textbook_values() {
    let out = run(&["constants", "--d", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    let (header, rows) = parse_csv(&text);
    assert_eq!(header, ["quantity", "argument", "value"]);
    let lookup = |q: &str, a: &str| -> f64 {
        rows.iter()
            .find(|r| r[0] == q && r[1] == a)
            .unwrap_or_else(|| panic!("no row {q},{a}"))[2]
            .parse()
            .unwrap()
    };
    let pi = std::f64::consts::PI;
    assert!(lookup("sphere_area", "2") == 4.0 * pi);
    assert!(lookup("ball_volume", "3") == 4.0 * pi / 3.0);
    assert!(
        (lookup("asymptotic_coefficient", "d=3;c=0.5;kappa=2") - 1.0 / (27.0 * pi)).abs() < 1e-12
    );
}

#[test]
fn scan_grid_covers_the_disc_family_examples() {
    let out = run(&[
        "scan", "--family", "disc", "--at", "0.5", "--at", "1.0", "--n", "100000", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout_str(&out));
    assert_eq!(rows.len(), 2);
    for row in &rows {
        assert_eq!(field(&header, row, "family"), "disc");
        assert_eq!(field(&header, row, "seed"), "7");
        assert!(!field(&header, row, "build").is_empty());
        let kappa: f64 = field(&header, row, "kappa").parse().unwrap();
        assert!(
            kappa == 1.0,
            "a lone disc fills its enclosing ball, got {kappa}"
        );
    }
    let f_hat: f64 = field(&header, &rows[1], "f_hat").parse().unwrap();
    assert!(
        (f_hat - 1.0).abs() < 0.01,
        "unit disc normalized resistance {f_hat}"
    );
}

#[test]
fn scan_concentric_area_arithmetic_is_exact() {
    let out = run(&[
        "scan",
        "--family",
        "concentric",
        "--at",
        "0.0",
        "--at",
        "0.5",
        "--n",
        "20000",
        "--seed",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout_str(&out));
    let k0: f64 = field(&header, &rows[0], "kappa").parse().unwrap();
    let k1: f64 = field(&header, &rows[1], "kappa").parse().unwrap();
    assert!(k0 == 1.0);
    assert!((k1 - 0.75).abs() < 1e-12);
}

#[test]
fn environment_seed_applies_and_the_flag_wins() {
    let args = ["estimate", "--shape", &shape("disc.json"), "--n", "100"];
    let from_env = Command::new(BIN)
        .args(args)
        .env("VISIDX_SEED", "5")
        .output()
        .unwrap();
    let (header, rows) = parse_csv(&stdout_str(&from_env));
    assert_eq!(field(&header, &rows[0], "seed"), "5");

    let flag_wins = Command::new(BIN)
        .args(args)
        .arg("--seed")
        .arg("9")
        .env("VISIDX_SEED", "5")
        .output()
        .unwrap();
    let (header, rows) = parse_csv(&stdout_str(&flag_wins));
    assert_eq!(field(&header, &rows[0], "seed"), "9");

    let bad_env = Command::new(BIN)
        .args(args)
        .env("VISIDX_SEED", "pony")
        .output()
        .unwrap();
    assert_eq!(bad_env.status.code(), Some(2));
    assert!(bad_env.stdout.is_empty());
}

#[test]
fn out_flag_redirects_the_csv() {
    let tmp = std::env::temp_dir().join(format!("visidx-out-{}.csv", std::process::id()));
    let path = tmp.display().to_string();
    let direct = run(&[
        "estimate",
        "--shape",
        &shape("disc.json"),
        "--n",
        "1000",
        "--seed",
        "2",
    ]);
    let redirected = run(&[
        "estimate",
        "--shape",
        &shape("disc.json"),
        "--n",
        "1000",
        "--seed",
        "2",
        "--out",
        &path,
    ]);
    assert_eq!(redirected.status.code(), Some(0));
    assert!(
        redirected.stdout.is_empty(),
        "CSV leaked to stdout despite --out"
    );
    let written = std::fs::read(&tmp).unwrap();
    assert_eq!(written, direct.stdout);
    std::fs::remove_file(&tmp).ok();
}

#[test]
fn trace_prints_a_polyline_on_the_sphere() {
    let out = run(&[
        "trace",
        "--shape",
        &shape("annulus.json"),
        "--radius",
        "2.0",
        "--index",
        "4",
        "--seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout_str(&out));
    assert_eq!(header, ["x", "y"]);
    assert!(rows.len() >= 2, "polyline needs at least entry and exit");
    for row in &rows {
        let x: f64 = row[0].parse().unwrap();
        let y: f64 = row[1].parse().unwrap();
        assert!(x.hypot(y) <= 2.0 + 1e-9);
    }
    let first: Vec<f64> = rows[0].iter().map(|v| v.parse().unwrap()).collect();
    assert!(
        (first[0].hypot(first[1]) - 2.0).abs() < 1e-9,
        "entry point sits on the sphere"
    );
    // The summary goes to the error stream, not into the CSV.
    assert!(String::from_utf8_lossy(&out.stderr).contains("status="));
}

#[test]
fn trace_in_three_dimensions_has_three_columns() {
    let out = run(&[
        "trace",
        "--shape",
        &shape("ball.json"),
        "--radius",
        "3.0",
        "--seed",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout_str(&out));
    assert_eq!(header, ["x", "y", "z"]);
    assert!(!rows.is_empty());
}

#[test]
fn search_row_respects_the_floor_and_embeds_metadata() {
    let out = run(&[
        "search",
        "--family",
        "concentric",
        "--kappa",
        "0.5",
        "--n",
        "20000",
        "--budget",
        "10",
        "--seed",
        "7",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let (header, rows) = parse_csv(&stdout_str(&out));
    assert_eq!(rows.len(), 1);
    let row = &rows[0];
    assert_eq!(field(&header, row, "family"), "concentric");
    assert_eq!(field(&header, row, "seed"), "7");
    assert!(!field(&header, row, "build").is_empty());
    let f_hat: f64 = field(&header, row, "f_hat").parse().unwrap();
    let floor: f64 = field(&header, row, "floor").parse().unwrap();
    let margin: f64 = field(&header, row, "margin_sigmas").parse().unwrap();
    assert!(f_hat > floor, "estimate below the proven floor");
    assert!(margin > -4.0);
}
