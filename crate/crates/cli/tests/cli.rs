//! End-to-end checks of the command-line surface: record files, exit codes,
//! determinism across worker counts, and rendering formats.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_repdec")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("spawn repdec")
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("repdec-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Record lines with the volatile timestamp field removed.
fn stable_lines(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .map(|l| {
            let mut v: serde_json::Value = serde_json::from_str(l).unwrap();
            if let Some(obj) = v.as_object_mut() {
                obj.remove("created");
            }
            serde_json::to_string(&v).unwrap()
        })
        .collect()
}

#[test]
fn simulate_is_deterministic_across_worker_counts() {
    let out1 = tmp("det1.jsonl");
    let out8 = tmp("det8.jsonl");
    for (path, workers) in [(&out1, "1"), (&out8, "8")] {
        let o = run(&[
            "simulate", "--rule", "ssr", "--n", "9", "--eps", "0.05", "--tau", "80",
            "--budget-flips", "50", "--seed", "3", "--workers", workers, "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    }
    let a = stable_lines(&out1);
    let b = stable_lines(&out8);
    // Headers differ in the workers field by construction; counts must not.
    let pa: serde_json::Value = serde_json::from_str(&a[1]).unwrap();
    let pb: serde_json::Value = serde_json::from_str(&b[1]).unwrap();
    for key in ["trials", "flips", "eps_l", "stack_hist", "max_stack"] {
        assert_eq!(pa[key], pb[key], "field {key} differs between worker counts");
    }
}

#[test]
fn rerunning_reproduces_records_byte_identically() {
    let out_a = tmp("rerun_a.jsonl");
    let out_b = tmp("rerun_b.jsonl");
    for path in [&out_a, &out_b] {
        let o = run(&[
            "simulate", "--rule", "asr", "--n", "7", "--eps", "0.04", "--tau", "60",
            "--trials", "3000", "--seed", "11", "--workers", "4", "--out",
            path.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(stable_lines(&out_a), stable_lines(&out_b));
}

#[test]
fn config_errors_exit_2() {
    // Speed constraint violated upstream as a configuration error.
    let o = run(&["simulate", "--rule", "asr", "--n", "9", "--eps", "0.03", "--ka", "1"]);
    assert_eq!(o.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["sweep", "--rule", "ssr", "--eps", "0.03"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["simulate", "--rule", "shearing", "--n", "9", "--eps", "0.03"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_passes_and_reports() {
    let report = tmp("verify.json");
    let o = run(&[
        "verify", "--suite", "erasure,chunks", "--cases", "120", "--seed", "5", "--out",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(text.contains("suite=erasure"));
    assert!(text.contains("PASS"));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert!(json.as_array().unwrap().iter().all(|r| r["passed"].as_bool().unwrap()));
}

#[test]
fn trace_and_renders_round_trip() {
    let trace = tmp("trace.json");
    let o = run(&["simulate", "--rule", "asr", "--defects", "2,8", "--trace-out",
        trace.to_str().unwrap()]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));

    let ppm = tmp("trace.ppm");
    let o = run(&["render", "--trace", trace.to_str().unwrap(), "--format", "ppm", "--out",
        ppm.to_str().unwrap()]);
    assert!(o.status.success());
    let bytes = std::fs::read(&ppm).unwrap();
    assert!(bytes.starts_with(b"P6\n"));

    let o = run(&["render", "--trace", trace.to_str().unwrap(), "--format", "text"]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(text.lines().next().unwrap().contains('#'));

    let svg = tmp("trace.svg");
    let o = run(&["render", "--trace", trace.to_str().unwrap(), "--format", "svg", "--out",
        svg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
}

#[test]
fn sweep_writes_records_table_and_fit() {
    let dir = tmp("sweepdir");
    let _ = std::fs::remove_dir_all(&dir);
    let o = run(&[
        "sweep", "--rule", "ssr", "--n", "5,9", "--eps", "0.05,0.08", "--tau", "60",
        "--trials", "4000", "--seed", "2", "--out", dir.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let records = std::fs::read_to_string(dir.join("records.jsonl")).unwrap();
    assert_eq!(records.lines().count(), 1 + 4);
    let csv = std::fs::read_to_string(dir.join("points.csv")).unwrap();
    assert!(csv.starts_with("rule,n,"));
    assert_eq!(csv.lines().count(), 1 + 4);
    assert!(dir.join("fit.json").exists());
}

#[test]
fn config_file_with_flag_overrides() {
    let conf = tmp("exp.conf");
    std::fs::write(&conf, "rule = ssr\nn = 9\neps = 0.05\ntau = 50\ntrials = 2000\nseed = 9\n")
        .unwrap();
    let out = tmp("from_config.jsonl");
    let o = run(&[
        "simulate", "--config", conf.to_str().unwrap(), "--seed", "10", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let header: serde_json::Value =
        serde_json::from_str(stable_lines(&out)[0].as_str()).unwrap();
    assert_eq!(header["config"]["seed"], 10);
    assert_eq!(header["config"]["tau"], 50);
}

#[test]
fn two_noise_sweep_fits_with_supplied_exponents() {
    // First a symmetric sweep to produce exponents, then an asymmetric grid
    // fitted against them.
    let dir1 = tmp("sweep_sym");
    let _ = std::fs::remove_dir_all(&dir1);
    let o = run(&[
        "sweep", "--rule", "ssr", "--n", "5,9", "--eps", "0.06,0.09", "--tau", "50",
        "--trials", "6000", "--seed", "4", "--out", dir1.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let fit_path = dir1.join("fit.json");
    assert!(fit_path.exists());
    let fit_json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&fit_path).unwrap()).unwrap();
    assert!(fit_json["plans"].is_array());

    let dir2 = tmp("sweep_grid");
    let _ = std::fs::remove_dir_all(&dir2);
    let o = run(&[
        "sweep", "--rule", "ssr", "--n", "5,9", "--eps-d", "0.04,0.08", "--eps-m",
        "0.04,0.08", "--tau", "50", "--trials", "6000", "--seed", "4", "--gamma-from",
        fit_path.to_str().unwrap(), "--out", dir2.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    let tn: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir2.join("two_noise.json")).unwrap())
            .unwrap();
    assert!(tn["meas_weight"].as_f64().unwrap() > 0.0);
}
