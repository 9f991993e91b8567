use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn corrmine(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corrmine")).args(args).arg("--out").arg(out).output().unwrap()
}

fn ok(out: &Path, args: &[&str]) {
    let o = corrmine(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(Result::unwrap).collect()
}

#[test]
fn poisson_field_screen_recovers_stencil() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("gen");
    ok(&gen, &["generate", "poisson", "--n1", "30", "--n2", "30", "--samples", "1500", "--seed", "4"]);
    let data = gen.join("data.csv");
    let model = gen.join("model.triplets");
    let scr = tmp.path().join("screen");
    ok(&scr, &["screen", "--data", data.to_str().unwrap(), "--rho", "0.26114", "--truth", model.to_str().unwrap()]);
    let found: BTreeSet<(usize, usize)> =
        csv_rows(&scr.join("edges.csv")).iter().map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap())).collect();
    let mut stencil = BTreeSet::new();
    for a in 0..30 {
        for b in 0..30 {
            let k = a * 30 + b;
            if b + 1 < 30 {
                stencil.insert((k, k + 1));
            }
            if a + 1 < 30 {
                stencil.insert((k, k + 30));
            }
        }
    }
    let diff = found.symmetric_difference(&stencil).count();
    assert!(diff as f64 <= 0.01 * stencil.len() as f64, "{diff} of {}", stencil.len());
    let report = json(&scr.join("report.json"));
    assert_eq!(report["path"], "strict-inverse");
    assert_eq!(report["rank"], 900);
    let manifest = json(&scr.join("manifest.json"));
    assert_eq!(manifest["command"], "screen");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(manifest["constants"]["rho_c"].as_f64().unwrap() > 0.0);
}

#[test]
fn fast_and_dense_screens_write_identical_edges() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("gen");
    ok(&gen, &["generate", "sparse", "--p", "300", "--s", "3", "--samples", "40"]);
    let data = gen.join("data.csv");
    for statistic in ["partial", "correlation"] {
        let dense = tmp.path().join(format!("dense-{statistic}"));
        let fast = tmp.path().join(format!("fast-{statistic}"));
        let base = ["screen", "--data", data.to_str().unwrap(), "--rho", "0.6", "--statistic", statistic, "--hub-degree", "2"];
        ok(&dense, &base);
        ok(&fast, &[&base[..], &["--fast"]].concat());
        for file in ["edges.csv", "hubs.csv"] {
            assert_eq!(fs::read(dense.join(file)).unwrap(), fs::read(fast.join(file)).unwrap(), "{statistic} {file}");
        }
    }
}

#[test]
fn design_curve_has_one_row_per_grid_point() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["design-curve", "--p", "1e4,1e10", "--rho", "0.6"]);
    let rows = csv_rows(&tmp.path().join("curve.csv"));
    let n: Vec<u64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert_eq!(n, vec![112, 234]);
}

#[test]
fn phase_summary_reports_both_crossings() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["phase", "--n", "20", "--p", "300", "--trials", "60", "--rho", "0.7:0.95:11"]);
    let summary = json(&tmp.path().join("summary.json"));
    let analytic = summary["analytic_half_rho"].as_f64().unwrap();
    let empirical = summary["empirical_half_crossing"].as_f64().unwrap();
    assert!((analytic - empirical).abs() < 0.05, "{summary}");
    assert_eq!(csv_rows(&tmp.path().join("phase.csv")).len(), 11);
}

#[test]
fn regimes_task_table_orders_the_ladder() {
    let tmp = tempfile::tempdir().unwrap();
    ok(tmp.path(), &["regimes", "--table", "tasks", "--p", "1e6", "--format", "json"]);
    let rows = json(&tmp.path().join("regimes.json"));
    let log_n: Vec<f64> = rows.as_array().unwrap().iter().map(|r| r["log_n"].as_f64().unwrap()).collect();
    assert_eq!(log_n.len(), 5);
    assert!(log_n.windows(2).all(|w| w[0] <= w[1]), "{log_n:?}");
}

#[test]
fn concord_selects_best_f1_with_truth() {
    let tmp = tempfile::tempdir().unwrap();
    let gen = tmp.path().join("gen");
    ok(&gen, &["generate", "sparse", "--p", "20", "--s", "2", "--samples", "800"]);
    let fit = tmp.path().join("fit");
    let data = gen.join("data.csv");
    let model = gen.join("model.triplets");
    ok(&fit, &["concord", "--data", data.to_str().unwrap(), "--path-len", "15", "--truth", model.to_str().unwrap()]);
    let metrics = json(&fit.join("metrics.json"));
    assert_eq!(metrics["selection"], "best-f1");
    assert!(metrics["best_f1"].as_f64().unwrap() > 0.9, "{metrics}");
    assert_eq!(csv_rows(&fit.join("path.csv")).len(), 15);
    assert!(fit.join("omega.triplets").exists());
}

#[test]
fn invalid_configuration_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = [
        vec!["generate", "sparse", "--p", "5", "--s", "5"],
        vec!["screen", "--data", "/nonexistent/data.csv", "--rho", "0.5"],
        vec!["phase", "--n", "20", "--p", "50", "--rho", "0.5,1.5"],
        vec!["design-curve", "--p", "1e4", "--rho", "0.5", "--fwer", "2"],
    ];
    for args in bad {
        let o = corrmine(tmp.path(), &args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn singular_statistics_exit_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("dup.csv");
    let mut text = String::from("a,b,c\n");
    for k in 0..12 {
        let x = (k as f64 * 0.7).sin();
        text.push_str(&format!("{x},{x},{}\n", (k as f64).cos()));
    }
    fs::write(&data, text).unwrap();
    let o = corrmine(&tmp.path().join("out"), &["screen", "--data", data.to_str().unwrap(), "--rho", "0.5"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
