use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use blockcg::experiments::multiplicity_spectrum_values;
use blockcg_cli::spectrum_file::{format_spectrum, load_spectrum_file};

fn blockcg(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_blockcg"));
    cmd.args(args).env_remove("BLOCKCG_SEED");
    if let Some(seed) = env_seed {
        cmd.env("BLOCKCG_SEED", seed);
    }
    cmd.output().expect("spawn blockcg")
}

fn file_names(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    names
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn missing_scenario_id_is_usage_error() {
    let out = blockcg(&["example"], None);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
}

#[test]
fn unknown_flag_and_bad_values_are_usage_errors() {
    assert_eq!(blockcg(&["example", "ex4.1", "--bogus"], None).status.code(), Some(2));
    assert_eq!(blockcg(&["example", "ex4.1", "--s", "0"], None).status.code(), Some(2));
    assert_eq!(blockcg(&["example", "ex7"], None).status.code(), Some(2));
    assert_eq!(blockcg(&["example", "ex4.3", "--s", "2"], Some("x")).status.code(), Some(2));
}

#[test]
fn list_prints_every_scenario() {
    let out = blockcg(&["list"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["ex4.1", "ex4.2", "ex4.3", "ex4.4", "ex4.5", "ex4.6"] {
        assert!(text.contains(id));
    }
}

#[test]
fn example_writes_frozen_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = blockcg(&["example", "ex4.1", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let names = file_names(dir.path());
    assert!(names.contains(&"residuals.csv".to_string()));
    assert!(names.contains(&"summary.json".to_string()));
    assert_eq!(names.iter().filter(|n| n.starts_with("bounds_m")).count(), 10);

    let residuals = fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    assert!(residuals.starts_with("iteration,residual_ainvF,theta_min,theta_max\n"));
    let bounds = fs::read_to_string(dir.path().join("bounds_m34_k1_0.csv")).unwrap();
    assert!(bounds.starts_with("j,actual,comparison,b1,b1_ls_sqrt2,b2,gamma_m,alpha\n"));
    assert!(!bounds.contains('\r'));

    let get = |name: &str, j: usize| column(&bounds, name)[j].parse::<f64>().unwrap();
    assert!((get("actual", 1) - 0.28305).abs() < 5e-6);
    assert!((get("b1", 1) - 0.34058).abs() < 5e-6);
    assert!((get("b2", 1) - 0.35903).abs() < 1e-5);

    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenario"], "ex4.1");
    assert_eq!(summary["source"]["kind"], "example");
    assert_eq!(summary["seed"], 42);
    assert!(summary["onset"].is_u64());
    assert_eq!(summary["configs"].as_array().unwrap().len(), 10);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = blockcg(&["example", "ex4.3", "--s", "4", "--out", d.path().to_str().unwrap()], None);
        assert_eq!(out.status.code(), Some(0));
    }
    let names = file_names(a.path());
    assert_eq!(names, file_names(b.path()));
    for n in &names {
        assert_eq!(fs::read(a.path().join(n)).unwrap(), fs::read(b.path().join(n)).unwrap(), "{n}");
    }
}

#[test]
fn seed_environment_variable_is_honored() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let d3 = tempfile::tempdir().unwrap();
    let run = |dir: &Path, extra: &[&str], env: Option<&str>| {
        let mut args = vec!["example", "ex4.3", "--s", "4", "--format", "json", "--out", dir.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(blockcg(&args, env).status.code(), Some(0));
        let v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap();
        v["seed"].as_u64().unwrap()
    };
    assert_eq!(run(d1.path(), &[], Some("7")), 7);
    assert_eq!(run(d2.path(), &["--seed", "9"], Some("7")), 9);
    assert_eq!(run(d3.path(), &[], None), 42);
    assert_eq!(file_names(d1.path()), vec!["summary.json"]);
}

#[test]
fn empty_grid_writes_only_residuals_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = blockcg(&["poisson", "--grid", "6", "--ic0", "--s", "2", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(file_names(dir.path()), vec!["residuals.csv", "summary.json"]);
}

#[test]
fn exported_spectrum_reloads_to_identical_operator() {
    let dir = tempfile::tempdir().unwrap();
    let values = multiplicity_spectrum_values();
    let path = dir.path().join("ex45.txt");
    fs::write(&path, format!("# exported spectrum\n{}", format_spectrum(&values))).unwrap();
    let reloaded = load_spectrum_file(&path).unwrap();
    assert_eq!(reloaded.len(), values.len());
    assert!(reloaded.iter().zip(&values).all(|(a, b)| a.to_bits() == b.to_bits()));

    let out_a = dir.path().join("file_run");
    let out_b = dir.path().join("registry_run");
    let run = blockcg(
        &["spectrum", path.to_str().unwrap(), "--m", "80", "--jmax", "3", "--out", out_a.to_str().unwrap()],
        None,
    );
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let run = blockcg(
        &["example", "ex4.5", "--m", "80", "--jmax", "3", "--out", out_b.to_str().unwrap()],
        None,
    );
    assert_eq!(run.status.code(), Some(0));
    for name in ["residuals.csv", "bounds_m80_k1_0.csv"] {
        assert_eq!(fs::read(out_a.join(name)).unwrap(), fs::read(out_b.join(name)).unwrap(), "{name}");
    }
}

#[test]
fn bad_spectrum_files() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "1\n-2\n").unwrap();
    let out = blockcg(&["spectrum", bad.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));
    let missing = dir.path().join("missing.txt");
    assert_eq!(blockcg(&["spectrum", missing.to_str().unwrap()], None).status.code(), Some(1));
}

#[test]
fn partial_failure_exits_one_with_error_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = blockcg(&["example", "ex4.6", "--m", "5,40", "--jmax", "2", "--out", dir.path().to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["configs"][0]["status"], "ok");
    assert_eq!(summary["configs"][1]["status"], "error");
    assert!(dir.path().join("bounds_m5_k1_0.csv").exists());
    assert!(!dir.path().join("bounds_m40_k1_0.csv").exists());
}

#[test]
fn unwritable_output_is_io_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sub");
    let out = blockcg(&["example", "ex4.1", "--m", "5", "--jmax", "1", "--out", target.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
}
