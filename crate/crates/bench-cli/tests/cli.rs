//! End-to-end tests of the compiled binary: exit codes, file layout, and
//! the determinism contract of stored runs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mggpo-bench"))
}

fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "expected success for {args:?}\nstderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

fn exit_code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

fn tiny_config(algo: &str, out_dir: &Path) -> Value {
    let params = match algo {
        "mggpo" => json!({
            "m1": 3,
            "m2": 3,
            "gp_max_evals_per_restart": 30,
            "gp_restarts": 1
        }),
        _ => json!({}),
    };
    json!({
        "schema_version": 1,
        "problem": "zdt1",
        "dimension": 4,
        "algo": algo,
        "population_size": 8,
        "budget": 32,
        "repeats": 2,
        "base_seed": 11,
        "checkpoints": [16, 32],
        "reference_point": [1.0, 1.0],
        "front_resolution": 200,
        "out_dir": out_dir,
        "params": params
    })
}

fn write_config(dir: &Path, name: &str, config: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_produces_a_complete_experiment_directory() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("exp");
    let config = write_config(dir.path(), "exp.json", &tiny_config("nsga2", &out));
    run_ok(&["run", "--config", &config]);

    assert!(out.join("experiment.json").is_file());
    assert!(out.join("summary.csv").is_file());
    let run_a = out.join("runs/nsga2-zdt1-p004-s00011.jsonl");
    let run_b = out.join("runs/nsga2-zdt1-p004-s00012.jsonl");
    assert!(run_a.is_file() && run_b.is_file());

    let text = fs::read_to_string(&run_a).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "initial population plus three generations");
    for (index, line) in lines.iter().enumerate() {
        let record: Value = serde_json::from_str(line).unwrap();
        assert_eq!(record["eval_count"].as_u64().unwrap(), 8 * (index as u64 + 1));
        assert_eq!(record["algo"], "nsga2");
        assert!(record["kappa"].is_null());
    }

    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "problem,dimension,algo,metric,checkpoint,best,mean,std,runs");
    assert_eq!(rows.len(), 5, "two metrics at two checkpoints");
    assert!(rows.iter().skip(1).all(|r| r.ends_with(",2")));
}

#[test]
fn repeated_runs_differ_only_in_wall_time() {
    let dir = tempdir().unwrap();
    let out1 = dir.path().join("one");
    let out2 = dir.path().join("two");
    let config = write_config(dir.path(), "exp.json", &tiny_config("mggpo", &out1));
    run_ok(&["run", "--config", &config]);
    run_ok(&[
        "run",
        "--config",
        &config,
        "--out",
        out2.to_str().unwrap(),
    ]);

    for seed in [11, 12] {
        let name = format!("runs/mggpo-zdt1-p004-s000{seed}.jsonl");
        let text1 = fs::read_to_string(out1.join(&name)).unwrap();
        let text2 = fs::read_to_string(out2.join(&name)).unwrap();
        let normalize = |text: &str| -> Vec<String> {
            text.lines()
                .map(|line| {
                    let mut v: Value = serde_json::from_str(line).unwrap();
                    v["wall_time_s"] = json!(0.0);
                    v.to_string()
                })
                .collect()
        };
        assert_eq!(normalize(&text1), normalize(&text2), "{name}");
    }
}

#[test]
fn seed_and_repeat_overrides_change_the_run_set() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("exp");
    let config = write_config(dir.path(), "exp.json", &tiny_config("mopso", &out));
    run_ok(&["run", "--config", &config, "--repeats", "1", "--seed", "99"]);
    let runs: Vec<_> = fs::read_dir(out.join("runs")).unwrap().collect();
    assert_eq!(runs.len(), 1);
    assert!(out.join("runs/mopso-zdt1-p004-s00099.jsonl").is_file());
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("exp");

    let mut bad = tiny_config("nsga2", &out);
    bad["budget"] = json!(31);
    let path = write_config(dir.path(), "bad_budget.json", &bad);
    let output = bin().args(["run", "--config", &path]).output().unwrap();
    assert_eq!(exit_code(&output), 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("budget"), "stderr: {stderr}");

    let mut unknown = tiny_config("nsga2", &out);
    unknown["tyop"] = json!(1);
    let path = write_config(dir.path(), "unknown_key.json", &unknown);
    let output = bin().args(["run", "--config", &path]).output().unwrap();
    assert_eq!(exit_code(&output), 2);

    let mut wrong_param = tiny_config("nsga2", &out);
    wrong_param["params"] = json!({ "w": 0.4 });
    let path = write_config(dir.path(), "wrong_param.json", &wrong_param);
    let output = bin().args(["run", "--config", &path]).output().unwrap();
    assert_eq!(exit_code(&output), 2);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains('w'), "stderr: {stderr}");

    let output = bin()
        .args(["run", "--config", "/nonexistent/exp.json"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2);
}

#[test]
fn front_and_metrics_agree_on_the_analytic_front() {
    let dir = tempdir().unwrap();
    let front_path = dir.path().join("front.csv");
    run_ok(&[
        "front",
        "--problem",
        "zdt1",
        "--resolution",
        "500",
        "--out",
        front_path.to_str().unwrap(),
    ]);
    let text = fs::read_to_string(&front_path).unwrap();
    assert!(text.starts_with("f1,f2\n"));
    assert_eq!(text.lines().count(), 501);

    let output = run_ok(&[
        "metrics",
        "--front",
        front_path.to_str().unwrap(),
        "--problem",
        "zdt1",
        "--ref-point",
        "1,1",
        "--resolution",
        "500",
    ]);
    let value: Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(value["igd"].as_f64().unwrap(), 0.0);
    let hv = value["hv"].as_f64().unwrap();
    assert!((hv - 2.0 / 3.0).abs() < 2e-3, "hv {hv}");

    let output = bin()
        .args(["front", "--problem", "zdt5"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2, "unknown problem is a config error");

    let output = bin()
        .args([
            "metrics",
            "--front",
            front_path.to_str().unwrap(),
            "--problem",
            "zdt1",
            "--ref-point",
            "1;1",
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2, "malformed reference point");
}

#[test]
fn compare_of_an_experiment_with_itself_finds_no_winner() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("exp");
    let mut config = tiny_config("nsga2", &out);
    config["repeats"] = json!(3);
    let path = write_config(dir.path(), "exp.json", &config);
    run_ok(&["run", "--config", &path]);

    let output = run_ok(&[
        "compare",
        "--a",
        out.to_str().unwrap(),
        "--b",
        out.to_str().unwrap(),
        "--metric",
        "igd",
    ]);
    let table = String::from_utf8(output.stdout).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(
        rows[0],
        "problem,dimension,metric,checkpoint,n_a,n_b,median_a,median_b,p_value,result"
    );
    assert_eq!(rows.len(), 3, "one row per shared checkpoint");
    for row in &rows[1..] {
        assert!(row.starts_with("zdt1,4,igd,"));
        assert!(row.ends_with(",0"), "identical samples cannot separate: {row}");
    }

    let output = bin()
        .args([
            "compare",
            "--a",
            out.to_str().unwrap(),
            "--b",
            out.to_str().unwrap(),
            "--metric",
            "spread",
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 2, "unknown metric is a config error");

    let output = bin()
        .args([
            "compare",
            "--a",
            out.to_str().unwrap(),
            "--b",
            "/nonexistent",
            "--metric",
            "igd",
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 1, "missing directory is a runtime error");
}

#[test]
fn compare_rejects_mismatched_instances() {
    let dir = tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let mut config_a = tiny_config("nsga2", &out_a);
    config_a["repeats"] = json!(3);
    let mut config_b = config_a.clone();
    config_b["problem"] = json!("zdt2");
    config_b["out_dir"] = json!(out_b);
    let path_a = write_config(dir.path(), "a.json", &config_a);
    let path_b = write_config(dir.path(), "b.json", &config_b);
    run_ok(&["run", "--config", &path_a]);
    run_ok(&["run", "--config", &path_b]);

    let output = bin()
        .args([
            "compare",
            "--a",
            out_a.to_str().unwrap(),
            "--b",
            out_b.to_str().unwrap(),
            "--metric",
            "hv",
        ])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 1);
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("zdt1_4") && stderr.contains("zdt2_4"), "stderr: {stderr}");
}

#[test]
fn convergence_tabulates_every_generation() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("exp");
    let config = write_config(dir.path(), "exp.json", &tiny_config("mopso", &out));
    run_ok(&["run", "--config", &config]);

    let output = run_ok(&[
        "convergence",
        "--in",
        out.to_str().unwrap(),
        "--metric",
        "hv",
    ]);
    let table = String::from_utf8(output.stdout).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "eval_count,mean,median,std,min,max");
    assert_eq!(rows.len(), 5, "four generations of records");
    assert!(rows[1].starts_with("8,"));
    assert!(rows[4].starts_with("32,"));

    let output = bin()
        .args(["convergence", "--in", "/nonexistent", "--metric", "igd"])
        .output()
        .unwrap();
    assert_eq!(exit_code(&output), 1);
}
