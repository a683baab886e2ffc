use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const LN2: f64 = std::f64::consts::LN_2;

fn locc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locc"))
        .args(args)
        .output()
        .expect("locc runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

/// Parse `n,epsilon,underline,overline` rows.
fn rate_rows(csv: &str) -> Vec<(u32, f64, f64, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,epsilon,underline_H,overline_H"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn schmidt_bell_and_product() {
    let dir = tempfile::tempdir().unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bell = write(
        dir.path(),
        "bell.json",
        &format!("[[[{h},0],[0,0]],[[0,0],[{h},0]]]"),
    );
    let out = locc(&["schmidt", &bell]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), r#"{"atoms":[[0.5,2]]}"#);
    assert!(String::from_utf8_lossy(&out.stderr).contains("entropy 0.693147"));

    let product = write(dir.path(), "product.json", "[[1, 0], [0, 0]]");
    let out = locc(&["schmidt", &product]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), r#"{"atoms":[[1.0,1]]}"#);
    assert!(String::from_utf8_lossy(&out.stderr).contains("entropy 0.000000"));
}

#[test]
fn schmidt_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = write(dir.path(), "bad.json", "[[[0.5, 0]");
    let out = locc(&["schmidt", &malformed]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let unnormalized = write(dir.path(), "big.json", "[[1, 1], [1, 1]]");
    assert_eq!(locc(&["schmidt", &unnormalized]).status.code(), Some(2));
    assert_eq!(
        locc(&["schmidt", "/nonexistent/file.json"]).status.code(),
        Some(2)
    );
}

#[test]
fn schmidt_writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let product = write(dir.path(), "product.json", "[[1]]");
    let target = dir.path().join("spectrum.json");
    let out = locc(&["schmidt", &product, "--out", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(&target).unwrap().trim(),
        r#"{"atoms":[[1.0,1]]}"#
    );
    assert!(stdout(&out).contains("entropy"));
}

#[test]
fn rates_examples() {
    let out = locc(&["rates", "iid:0.5,0.5", "--n", "10", "--eps", "0.25"]);
    assert!(out.status.success());
    let rows = rate_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    let (n, eps, u, o) = rows[0];
    assert_eq!((n, eps), (10, 0.25));
    assert!((u - LN2).abs() < 1e-6 && (o - LN2).abs() < 1e-6);

    let out = locc(&["rates", "maxent:R=0.2", "--n", "10"]);
    let (_, _, u, o) = rate_rows(&stdout(&out))[0];
    assert!((u - 8f64.ln() / 10.0).abs() < 1e-12);
    assert!((o - 0.207944).abs() < 1e-6);
}

#[test]
fn rates_grid_order_and_units() {
    let out = locc(&["rates", "iid:0.9,0.1", "--n", "20,10", "--eps", "0.2,0.1"]);
    let rows = rate_rows(&stdout(&out));
    let keys: Vec<(u32, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    assert_eq!(keys, vec![(10, 0.1), (10, 0.2), (20, 0.1), (20, 0.2)]);

    let out = locc(&["--units", "bits", "rates", "iid:0.5,0.5", "--n", "4"]);
    let (_, _, u, o) = rate_rows(&stdout(&out))[0];
    assert_eq!((u, o), (1.0, 1.0));
}

#[test]
fn rates_mixture_splits() {
    let out = locc(&[
        "rates",
        "mix:0.5*iid:0.9,0.1+0.5*iid:0.5,0.5",
        "--n",
        "400",
        "--eps",
        "0.25",
    ]);
    assert!(out.status.success());
    let (_, _, u, o) = rate_rows(&stdout(&out))[0];
    assert!((u - 0.325083).abs() < 0.05);
    assert!((o - LN2).abs() < 0.05);
}

#[test]
fn rates_json_output() {
    let out = locc(&["--format", "json", "rates", "iid:0.5,0.5", "--n", "3"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["units"], "nats");
    assert_eq!(v["rows"][0]["n"], 3);
}

#[test]
fn budget_overrun_gives_partial_output() {
    let out = locc(&["rates", "iid:0.5,0.5", "--n", "10,3000"]);
    assert_eq!(out.status.code(), Some(3));
    let rows = rate_rows(&stdout(&out));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].0, 10);
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));

    let out = locc(&[
        "concentrate",
        "iid:0.5,0.5",
        "--rate",
        "0.3",
        "--n",
        "10,3000",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn conversion_commands() {
    let out = locc(&["convert", "iid:0.5,0.5", "iid:0.8,0.2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "1");
    assert!((row[2].parse::<f64>().unwrap() - 0.8f64.sqrt()).abs() < 1e-12);
    assert_eq!(row[3], "true");

    // Analysis commands exit 0 even when the conversion fails badly.
    let out = locc(&["dilute", "iid:0.9,0.1", "--rate", "0.2", "--n", "100"]);
    assert!(out.status.success());
    let out = locc(&[
        "--format",
        "json",
        "concentrate",
        "iid:0.9,0.1",
        "--rate",
        "0.2",
        "--n",
        "50,100",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["series"].as_array().unwrap().len(), 2);
}

#[test]
fn verify_exit_codes() {
    let out = locc(&["verify", "np", "--trials", "1000", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["suites"][0]["instances"], 1000);

    assert_eq!(locc(&["verify", "nosuch"]).status.code(), Some(2));

    let out = locc(&[
        "--format", "csv", "verify", "kh", "transfer", "--trials", "20",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 3);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(
        locc(&["rates", "gauss:1", "--n", "10"]).status.code(),
        Some(2)
    );
    assert_eq!(locc(&["rates", "iid:0.5,0.5"]).status.code(), Some(2));
    assert_eq!(locc(&["nosuch"]).status.code(), Some(2));
    assert_eq!(
        locc(&["--budget-type-classes", "0", "rates", "iid:1", "--n", "1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn model_files() {
    let dir = tempfile::tempdir().unwrap();
    let text = write(dir.path(), "base.txt", "0.5 2\n");
    let out = locc(&["rates", &format!("file:{text}"), "--n", "5"]);
    assert!(out.status.success());
    assert!((rate_rows(&stdout(&out))[0].2 - LN2).abs() < 1e-12);

    let json = write(
        dir.path(),
        "model.json",
        r#"{"kind": "max_ent", "rate": 0.2}"#,
    );
    let out = locc(&["rates", &format!("file:{json}"), "--n", "10"]);
    assert!((rate_rows(&stdout(&out))[0].2 - 0.207944).abs() < 1e-6);
}

#[test]
fn runs_are_deterministic() {
    let args = ["verify", "bd", "kh", "--trials", "50", "--seed", "3"];
    let a = locc(&args);
    let b = locc(&args);
    assert_eq!(a.stdout, b.stdout);
    let c = locc(&["verify", "bd", "kh", "--trials", "50", "--seed", "4"]);
    assert_ne!(a.stdout, c.stdout);
}
