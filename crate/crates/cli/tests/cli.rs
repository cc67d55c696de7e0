use std::path::Path;
use std::process::{Command, Output};

fn takagi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_takagi"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = takagi(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn ratio(num: &str, den: &str) -> f64 {
    num.parse::<f64>().unwrap() / den.parse::<f64>().unwrap()
}

/// Checks that `value_decimal` agrees with `a + b√2` rebuilt from the exact columns.
fn decimals_reparse(text: &str) {
    let rows = csv_rows(text);
    let h = &rows[0];
    let (an, ad, bn, bd, dec) = (
        column(h, "value_a_num"),
        column(h, "value_a_den"),
        column(h, "value_b_num"),
        column(h, "value_b_den"),
        column(h, "value_decimal"),
    );
    for r in &rows[1..] {
        let exact = ratio(&r[an], &r[ad]) + ratio(&r[bn], &r[bd]) * 2f64.sqrt();
        let printed: f64 = r[dec].parse().unwrap();
        assert!((exact - printed).abs() < 1e-8, "{r:?}");
    }
}

#[test]
fn eval_all_plus_at_five_sixteenths() {
    let rows = csv_rows(&stdout(&["eval", "--scheme", "all_plus", "--t", "5/16"]));
    assert_eq!(rows[1][..4], ["5", "16", "dyadic", "7/16 + 5/16*sqrt2"]);
    let m4 = 7.0 / 16.0 + 5.0 / 16.0 * 2f64.sqrt();
    let dec: f64 = rows[1][column(&rows[0], "value_decimal")].parse().unwrap();
    assert!((dec - m4).abs() < 1e-11);
}

#[test]
fn eval_routes() {
    let thirds = csv_rows(&stdout(&["eval", "--t", "1/3"]));
    assert_eq!(thirds[1][2], "thirds");
    let approx = csv_rows(&stdout(&["eval", "--t", "1/5", "--tol", "1/1000000"]));
    assert_eq!(approx[1][2], "approx");
    let bound: f64 = approx[1][column(&approx[0], "bound_decimal")].parse().unwrap();
    assert!(bound <= 1e-6);
}

#[test]
fn sample_bernoulli_grid_has_every_point() {
    let text = stdout(&["sample", "--scheme", "bernoulli:1/4:42", "--grid", "10"]);
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 1 + 1025);
    assert_eq!(rows[0].join(","), "t_num,t_den,value_decimal,value_a_num,value_a_den,value_b_num,value_b_den");
    assert_eq!(rows[1][..2], ["0", "1"]);
    assert_eq!(rows[1025][..2], ["1", "1"]);
    decimals_reparse(&text);
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<Vec<u8>> = (0..2)
        .map(|i| {
            let path = dir.path().join(format!("run{i}.csv"));
            let p = path.to_str().unwrap();
            stdout(&["sample", "--scheme", "bernoulli:1/2:7", "--grid", "9", "--out", p]);
            std::fs::read(&path).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);

    let a = stdout(&["modulus", "--scheme", "bernoulli:1/3:5", "--grid", "7"]);
    let b = stdout(&["modulus", "--scheme", "bernoulli:1/3:5", "--grid", "7"]);
    assert_eq!(a, b);
}

#[test]
fn thread_count_does_not_change_output() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_takagi"))
            .args(["extrema", "--scheme", "bernoulli:1/2:3", "--grid", "14"])
            .env("TAKAGI_THREADS", threads)
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}

#[test]
fn counterexample_even_covariation_approaches_minus_one_third() {
    let text = stdout(&["counterexample", "--levels", "12", "--t", "1"]);
    let rows = csv_rows(&text);
    let last = rows.iter().rfind(|r| r[0] == "even_cov").unwrap();
    assert_eq!(last[1], "12");
    let v: f64 = last[column(&rows[0], "value_decimal")].parse().unwrap();
    assert!((v + 1.0 / 3.0).abs() < 1e-3);
    decimals_reparse(&text);
}

#[test]
fn csv_decimals_reparse() {
    for args in [
        &["extrema", "--scheme", "half_split", "--grid", "8"][..],
        &["qv", "--scheme", "alt_m", "--levels", "8"],
        &["qv", "--level", "6", "--stride", "8"],
        &["cov", "--scheme", "all_plus", "--with", "alt_mk", "--levels", "6"],
        &["modulus", "--grid", "6"],
        &["witness", "--levels", "10"],
        &["ito", "--poly", "1,-2,0,3", "--levels", "8"],
    ] {
        decimals_reparse(&stdout(args));
    }
}

#[test]
fn qv_row_count_and_values() {
    let rows = csv_rows(&stdout(&["qv", "--levels", "6"]));
    assert_eq!(rows.len(), 1 + 6);
    assert_eq!(rows[6][..5], ["6", "1", "1", "63", "64"]);
}

#[test]
fn json_output_parses() {
    let text = stdout(&["extrema", "--grid", "5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["scheme"], "all_plus");
    let text = stdout(&["witness", "--kind", "part_b", "--levels", "4", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}

fn exit_code(args: &[&str]) -> i32 {
    takagi(args).status.code().unwrap()
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(exit_code(&["eval", "--t", "abc"]), 2);
    assert_eq!(exit_code(&["eval", "--scheme", "nonsense", "--t", "1/2"]), 2);
    assert_eq!(exit_code(&["qv", "--level", "3", "--t", "1/16"]), 2);
    assert_eq!(exit_code(&["sample", "--grid", "40"]), 2);
    assert_eq!(exit_code(&["witness", "--kind", "part_c"]), 2);
    assert_eq!(exit_code(&["frobnicate"]), 2);
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_takagi"))
        .args(["eval", "--t", "1/2"])
        .env("TAKAGI_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(2));
}

fn write_table(dir: &Path) -> String {
    let path = dir.join("alt.txt");
    std::fs::write(&path, "# alternating by generation\ndepth 3\n0 0 +1\n1 0 -1\n1 1 -1\n2 0 +1\n2 1 +1\n2 2 +1\n2 3 +1\n").unwrap();
    format!("file:{}", path.display())
}

#[test]
fn explicit_table_depth() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_table(dir.path());
    let within = csv_rows(&stdout(&["sample", "--scheme", &spec, "--grid", "3"]));
    let reference = csv_rows(&stdout(&["sample", "--scheme", "alt_m", "--grid", "3"]));
    assert_eq!(within, reference);
    assert_eq!(exit_code(&["sample", "--scheme", &spec, "--grid", "4"]), 3);
    assert_eq!(exit_code(&["eval", "--scheme", &spec, "--t", "1/32"]), 3);
}

#[test]
fn unwritable_output_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    assert_eq!(exit_code(&["eval", "--t", "1/2", "--out", path.to_str().unwrap()]), 1);
}
