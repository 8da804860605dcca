use std::path::Path;
use std::process::{Command, Output};

const DESIGN: &str = "[design]\ncase = \"PP\"\np = 2.0\na = 1.0\nJ = 4\nr = 1.0\nsigma_eps = 0.5\nc_endo = 0.3\n";

fn npiv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_npiv")).args(args).output().unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("exp.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn simulate_then_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("seed = 4\nreplications = 1\nn_grid = [3000]\n{DESIGN}"));
    let data = dir.path().join("sample.csv");
    let out = npiv(&["simulate", &cfg, "--output", data.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&data).unwrap();
    assert!(text.starts_with("y,z,w\n"));
    assert_eq!(text.lines().count(), 3001);

    let trace = dir.path().join("trace.csv");
    let out = npiv(&["estimate", data.to_str().unwrap(), "--kappa", "144", "--trace", trace.to_str().unwrap()]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("m_hat = "));
    assert!(stdout.contains("theta = ["));
    let trace = std::fs::read_to_string(trace).unwrap();
    assert!(trace.starts_with("m,delta_hat,lambda_hat,small_delta_hat,sigma_hat_sq,pen_hat,contrast,selected\n"));
    assert_eq!(trace.lines().filter(|l| l.ends_with(",1")).count(), 1);

    // the same sample is printed when no output file is given
    let out = npiv(&["simulate", &cfg]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
}

#[test]
fn experiment_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("seed = 4\nreplications = 1\nn_grid = [500]\noutputs = \"res\"\n{DESIGN}"),
    );
    let out = npiv(&["experiment", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = std::fs::read_to_string(dir.path().join("res/records.csv")).unwrap();
    let lines: Vec<&str> = records.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "n,rep,m_hat,M_cap,mise_adaptive,m_star,mise_oracle,minimax_rate,thresholded_frac");
    assert!(lines[1].starts_with("500,0,"));
    assert!(dir.path().join("res/summary.csv").exists());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("dependence = iid (absolutely continuous pair laws: yes)\n"), "{stdout}");
}

#[test]
fn summary_mean_matches_reparsed_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        &format!("seed = 9\nreplications = 7\nn_grid = [200, 300]\noutputs = \"res\"\n{DESIGN}"),
    );
    assert!(npiv(&["experiment", &cfg]).status.success());
    let mut rdr = csv::Reader::from_path(dir.path().join("res/records.csv")).unwrap();
    let mut sums = std::collections::BTreeMap::<String, (f64, usize)>::new();
    for row in rdr.records() {
        let row = row.unwrap();
        let e = sums.entry(row[0].to_owned()).or_default();
        e.0 += row[4].parse::<f64>().unwrap();
        e.1 += 1;
    }
    let mut rdr = csv::Reader::from_path(dir.path().join("res/summary.csv")).unwrap();
    for row in rdr.records() {
        let row = row.unwrap();
        let (sum, count) = sums[&row[0]];
        let reported: f64 = row[2].parse().unwrap();
        assert!((reported - sum / count as f64).abs() <= 1e-15 * reported.abs().max(1.0));
    }
}

#[test]
fn rates_reports_slopes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("seed = 2\nreplications = 3\nn_grid = [200, 400, 800]\n{DESIGN}"));
    let out = npiv(&["rates", &cfg]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let minimax = stdout.lines().find(|l| l.starts_with("slope_minimax")).unwrap();
    assert!(minimax.ends_with("-0.5714"), "{minimax}");
    assert!(stdout.contains("slope_oracle = "));
}

#[test]
fn errors_carry_paths() {
    let out = npiv(&["estimate", "/no/such/file.csv"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("/no/such/file.csv"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 1\nreplications = 1\nn_grid = [100, 50]\n");
    let out = npiv(&["experiment", &cfg]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("exp.toml"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "y,z,w\n1.0,0.5,1.5\n").unwrap();
    let out = npiv(&["estimate", bad.to_str().unwrap()]);
    assert!(!out.status.success());
}
