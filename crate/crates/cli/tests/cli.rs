use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn ringcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringcat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Header lines, column names and parsed data rows.
fn parse_csv(text: &str) -> (Vec<String>, Vec<String>, Vec<Vec<f64>>) {
    let header: Vec<String> = text.lines().take_while(|l| l.starts_with("# ")).map(String::from).collect();
    let mut rest = text.lines().skip(header.len());
    let columns = rest.next().unwrap().split(',').map(String::from).collect();
    let rows = rest
        .map(|l| l.split(',').map(|c| c.parse::<f64>().unwrap()).collect())
        .collect();
    (header, columns, rows)
}

#[test]
fn spectrum_scan_example() {
    let text = stdout(&ringcat(&[
        "spectrum-scan",
        "--atoms",
        "3",
        "--u-over-j",
        "0.5",
        "--levels",
        "4",
        "--phi-grid",
        "0:2pi/3:241",
    ]));
    let (header, cols, rows) = parse_csv(&text);
    assert!(header[0].starts_with("# ringcat "));
    assert!(header.iter().any(|h| h == "# u-over-j = 5.0000000000000000e-1"));
    assert_eq!(cols, ["phi_rad", "phi_in_2pi_over_3", "E0", "E1", "E2", "E3"]);
    assert_eq!(rows.len(), 241);
    let (i_min, gap) = rows
        .iter()
        .map(|r| r[3] - r[2])
        .enumerate()
        .fold((0, f64::INFINITY), |a, (i, g)| if g < a.1 { (i, g) } else { a });
    assert!((rows[i_min][0] - PI / 3.0).abs() < 1e-3);
    assert!((rows[i_min][1] - 0.5).abs() < 1e-12);
    assert!(gap > 1e-6);
}

#[test]
fn flow_dist_example() {
    let text = stdout(&ringcat(&["flow-dist", "--atoms", "30", "--u-over-j", "1000", "--phi", "pi/3"]));
    let (_, cols, rows) = parse_csv(&text);
    assert_eq!(cols, ["n_beta", "n_gamma", "probability"]);
    assert_eq!(rows.len(), 31 * 32 / 2);
    let total: f64 = rows.iter().map(|r| r[2]).sum();
    assert!((total - 1.0).abs() < 1e-10);
    let keys: Vec<(u64, u64)> = rows.iter().map(|r| (r[0] as u64, r[1] as u64)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    // all three corners carry more weight than the centre of the triangle
    let p = |b: u64, g: u64| rows.iter().find(|r| r[0] as u64 == b && r[1] as u64 == g).unwrap()[2];
    for corner in [p(0, 0), p(30, 0), p(0, 30)] {
        assert!(corner > p(10, 10));
    }
}

#[test]
fn witness_example() {
    let text = stdout(&ringcat(&[
        "witness",
        "--atoms",
        "3",
        "--u-over-j",
        "0.5",
        "--phi",
        "pi/3",
        "--restarts",
        "32",
        "--seed",
        "7",
    ]));
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in [
        "e_ground",
        "e_sep_min",
        "margin",
        "certified",
        "argmin_amplitudes",
        "seed",
        "restarts_converged",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["margin"].as_f64().unwrap() > 0.0);
    assert_eq!(v["certified"], serde_json::Value::Bool(true));
    assert_eq!(v["seed"], 7);
    assert_eq!(v["argmin_amplitudes"].as_array().unwrap().len(), 3);
    assert!(v["header"]["version"].as_str().unwrap().starts_with("ringcat "));
}

#[test]
fn cat_scan_and_anticrossing_columns() {
    let text = stdout(&ringcat(&["cat-scan", "--atoms", "4", "--j-over-u-grid", "log:0.1:10:3"]));
    let (_, cols, rows) = parse_csv(&text);
    assert_eq!(cols, ["j_over_u", "cat_fidelity", "theta_opt", "gap"]);
    assert_eq!(rows.len(), 3);
    assert!((rows[2][1] - 0.4942).abs() < 5e-4);

    let text = stdout(&ringcat(&["anticrossing", "--atoms", "3", "--u-over-j", "0.5"]));
    let (_, cols, rows) = parse_csv(&text);
    assert_eq!(cols, ["phi_star_rad", "phi_star_in_2pi_over_3", "gap"]);
    assert!((rows[0][0] - PI / 3.0).abs() < 1e-5);
}

#[test]
fn ramp_trace() {
    let text = stdout(&ringcat(&[
        "ramp",
        "--atoms",
        "3",
        "--target-j-over-u",
        "2",
        "--durations",
        "5,5,5",
        "--time-step",
        "0.05",
    ]));
    let (header, cols, rows) = parse_csv(&text);
    assert_eq!(cols, ["t", "norm_error", "gs_overlap", "cat_fidelity", "energy"]);
    assert_eq!(rows.len(), 301);
    assert!(header.iter().any(|h| h.starts_with("# shape = smooth")));
    assert!(rows.iter().all(|r| r[1] <= 1e-8));
    assert!((rows[300][0] - 15.0).abs() < 1e-12);
}

#[test]
fn output_is_deterministic_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let path = dir.path().join(name);
        let out = ringcat(&[
            "spectrum-scan",
            "--atoms",
            "4",
            "--u-over-j",
            "0.3",
            "--phi-grid",
            "0:pi:40",
            "--workers",
            workers,
            "-o",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success());
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "4");
    let c = run("c.csv", "4");
    assert_eq!(a, b);
    assert_eq!(b, c);

    let w = |seed: &str| stdout(&ringcat(&["witness", "--atoms", "4", "--u-over-j", "0.7", "--seed", seed]));
    assert_eq!(w("3"), w("3"));
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "run.toml",
        "atoms = 3\nu-over-j = 0.5\nlevels = 2\nphi-grid = \"0:2pi/3:5\"\n",
    );
    let from_file = stdout(&ringcat(&["spectrum-scan", "--config", &cfg]));
    let from_flags = stdout(&ringcat(&[
        "spectrum-scan",
        "--atoms",
        "3",
        "--u-over-j",
        "0.5",
        "--levels",
        "2",
        "--phi-grid",
        "0:2pi/3:5",
    ]));
    assert_eq!(from_file, from_flags);

    let overridden = stdout(&ringcat(&["spectrum-scan", "--config", &cfg, "--atoms", "4"]));
    assert!(overridden.contains("# atoms = 4"));
    assert_ne!(overridden, from_file);
}

fn failure(args: &[&str]) -> (i32, String) {
    let out = ringcat(args);
    (out.status.code().unwrap(), String::from_utf8(out.stderr).unwrap())
}

#[test]
fn config_errors_are_aggregated() {
    let (code, err) = failure(&["spectrum-scan", "--atoms", "three", "--phi-grid", "0:1", "--levels", "0"]);
    assert_eq!(code, 2);
    let lines: Vec<&str> = err.lines().filter(|l| l.contains("error[config]")).collect();
    assert!(lines.len() >= 3, "{err}");
    assert!(err.contains("atoms"));
    assert!(err.contains("phi-grid"));
    assert!(err.contains("u-over-j is required"));
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "atoms = 3\nu-over-j = 0.5\nrestarts = 4\n");
    let (code, err) = failure(&["spectrum-scan", "--config", &cfg]);
    assert_eq!(code, 2);
    assert!(err.contains("restarts"), "{err}");
}

#[test]
fn dimension_cap_is_a_config_error() {
    let (code, err) = failure(&["cat-scan", "--atoms", "30", "--dimension-cap", "100"]);
    assert_eq!(code, 2);
    assert!(err.contains("496"), "{err}");
}

#[test]
fn bad_bracket_is_numerical() {
    let (code, err) = failure(&["anticrossing", "--atoms", "3", "--u-over-j", "0.5", "--bracket", "0:0.5"]);
    assert_eq!(code, 3);
    assert!(err.contains("error[numerical]"), "{err}");
}

#[test]
fn unwritable_output_is_io() {
    let (code, err) = failure(&[
        "anticrossing",
        "--atoms",
        "3",
        "--u-over-j",
        "0.5",
        "-o",
        "/nonexistent-dir/out.csv",
    ]);
    assert_eq!(code, 4);
    assert!(err.contains("error[io]"), "{err}");
}
