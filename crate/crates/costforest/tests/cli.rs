use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_costforest")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

fn predictions(p: &Path) -> Vec<String> {
    read(p).lines().skip(1).map(String::from).collect()
}

#[test]
fn train_then_predict_recovers_fixture_labels() {
    let dir = TempDir::new().unwrap();
    let data = fixture("four.csv");
    for cfg in ["csdt.cfg", "ensemble.cfg"] {
        let model = dir.path().join(format!("{cfg}.json"));
        let preds = dir.path().join(format!("{cfg}.csv"));
        ok(&["--seed", "1", "train", "--config", s(&fixture(cfg)), "--train", s(&data), "--model-out", s(&model)]);
        assert!(read(&model).contains("\"format_version\": \"costforest-model/1\""));
        ok(&["predict", "--model", s(&model), "--data", s(&data), "--out", s(&preds)]);
        assert_eq!(read(&preds), "prediction\n0\n0\n1\n1\n", "{cfg}");
    }
}

#[test]
fn predict_keeps_row_count_and_ignores_extra_columns() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.json");
    ok(&["train", "--config", s(&fixture("csdt.cfg")), "--train", s(&fixture("four.csv")), "--model-out", s(&model)]);
    let unlabelled = dir.path().join("u.csv");
    let rows: String = (0..37).map(|i| format!("{},{}\n", i, f64::from(i) / 7.0)).collect();
    fs::write(&unlabelled, format!("id,x\n{rows}")).unwrap();
    let out = dir.path().join("p.csv");
    ok(&["predict", "--model", s(&model), "--data", s(&unlabelled), "--out", s(&out)]);
    let p = predictions(&out);
    assert_eq!(p.len(), 37);
    assert!(p.iter().all(|v| v == "0" || v == "1"));
    // threshold 2.5 learnt from the fixture
    assert_eq!(p[17], "0");
    assert_eq!(p[18], "1");
}

#[test]
fn evaluate_reports_perfect_savings_on_fixture() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.json");
    ok(&["train", "--config", s(&fixture("csdt.cfg")), "--train", s(&fixture("four.csv")), "--model-out", s(&model)]);
    let out = dir.path().join("metrics.json");
    ok(&["evaluate", "--model", s(&model), "--data", s(&fixture("four.csv")), "--out", s(&out)]);
    let v: serde_json::Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(v["savings"], 1.0);
    assert_eq!(v["total_cost"], 0.0);
    assert_eq!(v["costless_cost"], 10.0);
    assert_eq!(v["costless_class"], 1);
    assert_eq!(v["f1"], 1.0);
}

#[test]
fn build_costs_matches_golden_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("costed.csv");
    ok(&[
        "build-costs", "--domain", "fraud", "--params", s(&fixture("fraud.params")),
        "--data", s(&fixture("transactions.csv")), "--out", s(&out),
    ]);
    assert_eq!(read(&out), read(&fixture("transactions_costed.golden.csv")));
}

#[test]
fn resample_methods() {
    let dir = TempDir::new().unwrap();
    let data = fixture("transactions_costed.golden.csv");
    let common = ["--drop-cols", "id"];
    let u = dir.path().join("u.csv");
    ok(&[&["--seed", "4", "resample", "--method", "u", "--data", s(&data), "--out", s(&u)][..], &common].concat());
    assert_eq!(predictions(&u).len(), 4);
    let o = dir.path().join("o.csv");
    ok(&[&["resample", "--method", "o", "--data", s(&data), "--out", s(&o)][..], &common].concat());
    // weights 120.5, 2.5, 2.5, 990 -> copies 48, 1, 1, 396
    assert_eq!(predictions(&o).len(), 48 + 1 + 1 + 396);
    let r1 = dir.path().join("r1.csv");
    let r2 = dir.path().join("r2.csv");
    for r in [&r1, &r2] {
        ok(&[&["resample", "--method", "r", "--seed", "9", "--data", s(&data), "--out", s(r)][..], &common].concat());
    }
    assert_eq!(read(&r1), read(&r2));
    assert!(predictions(&r1).iter().any(|l| l.starts_with("4,")));
    let bad = run(&["resample", "--method", "x", "--data", s(&data), "--out", s(&u)]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn benchmark_report_has_one_cell_per_algorithm_and_dataset() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("report.json");
    ok(&["--seed", "5", "benchmark", "--spec", s(&fixture("bench.cfg")), "--out", s(&json)]);
    let v: serde_json::Value = serde_json::from_str(&read(&json)).unwrap();
    let algos = v["algorithms"].as_array().unwrap();
    assert_eq!(algos.len(), 3);
    let cells: Vec<&serde_json::Value> = algos.iter().flat_map(|a| a["cells"].as_array().unwrap()).collect();
    assert_eq!(cells.len(), 6);
    assert!(cells.iter().all(|c| c["error"].is_null() && c["savings"]["mean"].is_number()));
    assert_eq!(v["repetitions"], 2);
    let ranks: f64 = algos.iter().map(|a| a["friedman_rank"].as_f64().unwrap()).sum();
    assert!((ranks - 6.0).abs() < 1e-12);

    let csv = dir.path().join("report.csv");
    ok(&["--seed", "5", "benchmark", "--spec", s(&fixture("bench.cfg")), "--out", s(&csv)]);
    let text = read(&csv);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("family,algorithm,small:savings_mean"));
    assert!(lines[0].ends_with("f_rank,per_best"));
    assert!(lines[3].starts_with("ecsdt,CSB-wv-t,"));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = TempDir::new().unwrap();
    let mut reports = Vec::new();
    let mut models = Vec::new();
    for jobs in ["1", "4"] {
        let r = dir.path().join(format!("r{jobs}.json"));
        ok(&["--jobs", jobs, "--seed", "11", "benchmark", "--spec", s(&fixture("bench.cfg")), "--out", s(&r)]);
        reports.push(read(&r));
        let m = dir.path().join(format!("m{jobs}.json"));
        ok(&[
            "--jobs", jobs, "--seed", "11", "train", "--config", s(&fixture("ensemble.cfg")),
            "--train", s(&fixture("transactions_costed.golden.csv")), "--drop-cols", "id", "--model-out", s(&m),
        ]);
        models.push(read(&m));
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(models[0], models[1]);
}

#[test]
fn seed_controls_every_random_choice() {
    let dir = TempDir::new().unwrap();
    let run_with = |seed: &str, name: &str| {
        let r = dir.path().join(name);
        ok(&["--seed", seed, "verify-theory", "--T", "5", "--trials", "30", "--examples", "40", "--out", s(&r)]);
        read(&r)
    };
    let a = run_with("3", "a.json");
    assert_eq!(a, run_with("3", "b.json"));
    assert_ne!(a, run_with("4", "c.json"));
}

#[test]
fn verify_theory_report() {
    let dir = TempDir::new().unwrap();
    let r = dir.path().join("theory.json");
    ok(&["verify-theory", "--T", "11", "--rho", "0.7", "--trials", "200", "--examples", "100", "--out", s(&r)]);
    let v: serde_json::Value = serde_json::from_str(&read(&r)).unwrap();
    assert_eq!(v["holds"], true);
    assert_eq!(v["params"]["n_trees"], 11);
    let exact = v["majority_correct"]["exact"].as_f64().unwrap();
    assert!((exact - 0.9217).abs() < 1e-4, "{exact}");
    assert_eq!(v["correlated"]["savings"]["mean"], 0.0);
    let even = run(&["verify-theory", "--T", "4", "--out", s(&r)]);
    assert_eq!(even.status.code(), Some(1));
}

#[test]
fn malformed_config_key_exits_one_with_position() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "version = 1\nmodel.type = csdt\ntree.max_depht = 3\n").unwrap();
    let out = run(&["train", "--config", s(&cfg), "--train", s(&fixture("four.csv")), "--model-out", s(&dir.path().join("m"))]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("tree.max_depht") && msg.contains("bad.cfg:3"), "{msg}");

    fs::write(&cfg, "version = 1\ntree..depth = 3\n").unwrap();
    let out = run(&["train", "--config", s(&cfg), "--train", s(&fixture("four.csv")), "--model-out", s(&dir.path().join("m"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("bad.cfg:2"));

    fs::write(&cfg, "model.type = csdt\n").unwrap();
    let out = run(&["train", "--config", s(&cfg), "--train", s(&fixture("four.csv")), "--model-out", s(&dir.path().join("m"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("version"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["train"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    // T = 2 is a configuration error
    let cfg = dir.path().join("t2.cfg");
    fs::write(&cfg, "version = 1\ninducer.T = 2\n").unwrap();
    let out = run(&["train", "--config", s(&cfg), "--train", s(&fixture("four.csv")), "--model-out", s(&dir.path().join("m"))]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "x,label,c_tp,c_fp,c_fn,c_tn\n1,0,0,5,10,0\n2,7,0,5,10,0\n").unwrap();
    let out = run(&["train", "--config", s(&fixture("csdt.cfg")), "--train", s(&bad), "--model-out", s(&dir.path().join("m"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(":3"), "{}", stderr(&out));

    let missing = dir.path().join("nope.csv");
    let out = run(&["train", "--config", s(&fixture("csdt.cfg")), "--train", s(&missing), "--model-out", s(&dir.path().join("m"))]);
    assert_eq!(out.status.code(), Some(2));

    let unwritable = dir.path().join("no/such/dir/m.json");
    let out = run(&["train", "--config", s(&fixture("csdt.cfg")), "--train", s(&fixture("four.csv")), "--model-out", s(&unwritable)]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn prune_set_override() {
    let dir = TempDir::new().unwrap();
    let model = dir.path().join("m.json");
    ok(&[
        "train", "--config", s(&fixture("csdt.cfg")), "--train", s(&fixture("four.csv")),
        "--prune-set", s(&fixture("four.csv")), "--model-out", s(&model),
    ]);
    let preds = dir.path().join("p.csv");
    ok(&["predict", "--model", s(&model), "--data", s(&fixture("four.csv")), "--out", s(&preds)]);
    assert_eq!(predictions(&preds), ["0", "0", "1", "1"]);
    let out = run(&[
        "train", "--config", s(&fixture("ensemble.cfg")), "--train", s(&fixture("four.csv")),
        "--prune-set", s(&fixture("four.csv")), "--model-out", s(&model),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
