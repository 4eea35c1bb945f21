use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rowsketch")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad report ({e}): {}\nstderr: {}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn gen(dir: &Path, name: &str, extra: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut args = vec!["gen", "--out", &path];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn budget_examples() {
    let cases: [(&[&str], u64); 4] = [
        (&["--kind", "symmetric", "--rho", "2", "--d", "4"], 141),
        (&["--kind", "asymmetric", "--rho", "1", "--rho2", "1", "--d", "2", "--d2", "2"], 281),
        (&["--kind", "regression", "--d", "3", "--beta", "0.3333333333333333"], 1683),
        (&["--kind", "leverage", "--d", "8"], 569),
    ];
    for (extra, want) in cases {
        let mut args = vec!["budget", "--eps", "0.5", "--delta", "0.1"];
        args.extend_from_slice(extra);
        let out = run(&args);
        assert_eq!(code(&out), 0);
        assert_eq!(json(&out)["budget"]["r"], want, "{extra:?}");
    }
}

#[test]
fn report_schema_is_fixed() {
    let out = run(&["budget", "--kind", "leverage", "--d", "8", "--eps", "0.5", "--delta", "0.1"]);
    let rep = json(&out);
    let mut keys: Vec<&str> = rep.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        ["budget", "command", "error", "metrics", "parameters", "runtime_seconds", "status", "trial_report"]
    );
    assert_eq!(rep["command"], "budget");
    assert_eq!(rep["status"], "ok");
    assert!(rep["metrics"].as_object().unwrap().values().all(|v| v.as_f64().unwrap().is_finite()));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["gram", "--in", "x.bin", "--eps", "0.5"])), 2);
    assert_eq!(code(&run(&["specnorm", "--in", "x.bin", "--delta", "0.1", "--bogus"])), 2);
    assert_eq!(code(&run(&["budget", "--kind", "symmetric", "--eps", "0.5", "--delta", "0.1", "--d", "4"])), 2);
    assert_eq!(code(&run(&["gram", "--eps", "0.5", "--delta", "0.1"])), 2);
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.bin", &["--kind", "gaussian", "--m", "20", "--d", "3"]);
    assert_eq!(code(&run(&["gram", "--in", &a, "--eps", "0.5", "--delta", "0.1", "--method", "leverage"])), 2);
}

#[test]
fn single_row_gram_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("one.csv");
    std::fs::write(&p, "1,3\n1.5,-2,0.25\n").unwrap();
    let out = run(&["gram", "--in", p.to_str().unwrap(), "--eps", "0.5", "--delta", "0.1"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["metrics"]["spectral_error"], 0.0);
}

#[test]
fn isometry_trials_pass_gate() {
    let out = run(&[
        "trials", "--task", "isometry", "--m", "256", "--d", "8", "--eps", "0.5", "--delta", "0.1", "--trials", "100",
        "--seed", "7",
    ]);
    assert_eq!(code(&out), 0);
    let rep = json(&out);
    assert!(rep["trial_report"]["failures"].as_u64().unwrap() <= 20);
    assert_eq!(rep["trial_report"]["trials"], 100);
}

#[test]
fn undersampled_trials_fail_gate() {
    let out = run(&[
        "trials", "--task", "isometry", "--m", "64", "--d", "4", "--eps", "0.5", "--delta", "0.1", "--trials", "20",
        "--rows", "1",
    ]);
    assert_eq!(code(&out), 4);
    assert_eq!(json(&out)["status"], "gate_failed");
}

#[test]
fn task_errors_exit_3_with_name() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.bin", &["--kind", "gaussian", "--m", "30", "--d", "4", "--seed", "1"]);
    let y = gen(dir.path(), "y.bin", &["--kind", "gaussian", "--m", "30", "--d", "1", "--seed", "2"]);
    let out = run(&["regress", "--in", &a, "--y", &y, "--eps", "0.5", "--delta", "0.1", "--rows", "2"]);
    assert_eq!(code(&out), 3);
    let rep = json(&out);
    assert_eq!(rep["status"], "task_error");
    assert_eq!(rep["error"]["name"], "RankCollapse");

    let out = run(&["reconstruct", "--in", &a, "--k", "9", "--eps", "0.5", "--delta", "0.1"]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["error"]["name"], "BadRank");

    let bad = dir.path().join("bad.bin");
    std::fs::write(&bad, b"NOPE").unwrap();
    let out = run(&["specnorm", "--in", bad.to_str().unwrap(), "--delta", "0.1"]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["error"]["name"], "BadMagic");
}

#[test]
fn reports_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.bin", &["--kind", "planted", "--m", "60", "--d", "4", "--spectrum", "5,3,2,1"]);
    let b = gen(dir.path(), "b.csv", &["--kind", "gaussian", "--m", "60", "--d", "2", "--seed", "4"]);
    let y = gen(dir.path(), "y.bin", &["--kind", "gaussian", "--m", "60", "--d", "1", "--seed", "5"]);
    let commands: [Vec<&str>; 6] = [
        vec!["gram", "--in", &a, "--eps", "0.5", "--delta", "0.1", "--seed", "3"],
        vec!["matmul", "--in", &a, "--in2", &b, "--eps", "0.5", "--delta", "0.1", "--seed", "3"],
        vec!["reconstruct", "--in", &a, "--k", "2", "--eps", "0.5", "--delta", "0.1", "--seed", "3"],
        vec!["regress", "--in", &a, "--y", &y, "--eps", "0.5", "--delta", "0.1", "--seed", "3"],
        vec!["specnorm", "--in", &a, "--delta", "0.1", "--seed", "3"],
        vec!["trials", "--task", "gram", "--in", &a, "--eps", "0.5", "--delta", "0.1", "--trials", "10"],
    ];
    for args in &commands {
        let (o1, o2) = (run(args), run(args));
        assert_eq!(code(&o1), 0, "{args:?}: {}", String::from_utf8_lossy(&o1.stderr));
        let (mut r1, mut r2) = (json(&o1), json(&o2));
        r1["runtime_seconds"] = Value::Null;
        r2["runtime_seconds"] = Value::Null;
        assert_eq!(r1, r2, "{args:?}");
        assert!(r1["budget"].is_object() || args[0] == "specnorm" || args[0] == "trials");
    }
}

#[test]
fn file_input_matches_in_memory_run() {
    use rowsketch::algorithms::{approx_gram, SketchConfig};
    use rowsketch::generate::{generate_matrix, MatrixSpec};
    use rowsketch::matrix_core::spectral_norm;

    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.bin", &["--kind", "gaussian", "--m", "50", "--d", "5", "--seed", "9"]);
    let out = run(&["gram", "--in", &a, "--eps", "0.5", "--delta", "0.1", "--seed", "2"]);
    let rep = json(&out);

    let m = generate_matrix(&MatrixSpec::gaussian(50, 5, 9)).unwrap();
    let g = approx_gram(&m, &SketchConfig::new(0.5, 0.1, 1.0, 2).unwrap()).unwrap();
    let err = spectral_norm(&m.gram().sub(&g.gram).unwrap()).unwrap();
    assert_eq!(rep["metrics"]["spectral_error"].as_f64().unwrap().to_bits(), err.to_bits());
    assert_eq!(rep["budget"]["r"], g.budget.r);
}

#[test]
fn out_flag_writes_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.csv", &["--kind", "gaussian", "--m", "40", "--d", "3"]);
    let rp = dir.path().join("report.json");
    let out = run(&["specnorm", "--in", &a, "--delta", "0.1", "--out", rp.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&rp).unwrap()).unwrap();
    assert_eq!(rep["command"], "specnorm");
    let ratio = rep["metrics"]["ratio"].as_f64().unwrap();
    assert!(ratio > 0.0 && ratio <= 1.0 + 1e-12);
}

#[test]
fn gen_reports_planted_norms() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.bin");
    let out = run(&[
        "gen", "--kind", "planted", "--m", "10", "--d", "4", "--spectrum", "8,4,2,1", "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let rep = json(&out);
    assert!((rep["metrics"]["spectral_norm"].as_f64().unwrap() - 8.0).abs() < 1e-8);
    assert!((rep["metrics"]["frobenius_norm"].as_f64().unwrap() - 85f64.sqrt()).abs() < 1e-8);
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 21 + 8 * 40);

    let out = run(&["gen", "--kind", "gaussian", "--m", "2", "--d", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert_eq!(json(&out)["error"]["name"], "BadSpec");
}
