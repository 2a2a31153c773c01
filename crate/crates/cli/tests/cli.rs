use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_hub-integrity"));
    cmd.env_remove("HUB_INTEGRITY_OUT");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn figure_writes_csv_and_manifest() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&["figure", "awma-vs-cwma", "--seed", "7", "--out", out.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let dir = out.path().join("awma-vs-cwma");
    let names: Vec<_> = read_dir_sorted(&dir).into_iter().map(|(n, _)| n).collect();
    assert!(names.iter().any(|n| n.ends_with(".csv")), "{names:?}");
    assert!(names.contains(&"manifest.json".to_string()));
}

#[test]
fn figure_output_is_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, jobs) in [(&a, "1"), (&b, "0")] {
        let o = run(&["figure", "awma-vs-cwma", "--seed", "7", "--jobs", jobs, "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(
        read_dir_sorted(&a.path().join("awma-vs-cwma")),
        read_dir_sorted(&b.path().join("awma-vs-cwma"))
    );
}

#[test]
fn missing_config_is_a_config_error_naming_the_file() {
    let o = run(&["run", "--config", "missing.conf"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.starts_with("error[config]:"), "{err}");
    assert!(err.contains("missing.conf"), "{err}");
    assert_eq!(err.lines().count(), 1, "{err}");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = run(&["bogus"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.starts_with("error[usage]:"), "{err}");
    assert!(err.contains("Usage"), "{err}");
}

#[test]
fn help_and_version_succeed() {
    for flag in ["--help", "--version"] {
        let o = run(&[flag]);
        assert!(o.status.success(), "{flag}");
        assert!(!stdout(&o).is_empty());
    }
}

#[test]
fn sweep_range_produces_one_row_per_value() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&[
        "sweep", "--axis", "p_a", "--values", "0.1:1.0:0.1",
        "--set", "replications=2", "--set", "t_slots=30",
        "--out", out.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.path().join("scenario_sweep_p_a.csv")).unwrap();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], "p_a,replications,pt_mean,pt_std,eut_mean,eut_std");
    assert_eq!(lines.len(), 11);
    assert!(lines[1].starts_with("0.1,2,"));
    assert!(lines[10].starts_with("1,2,"));
}

#[test]
fn sweep_rejects_unknown_axis() {
    let o = run(&["sweep", "--axis", "zeta", "--values", "0.1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("zeta"));
}

#[test]
fn set_overrides_take_precedence_over_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.toml");
    std::fs::write(&cfg, "seed = 3\n[attack]\np_a = 0.2\n").unwrap();
    let o = run(&[
        "validate-config", "--config", cfg.to_str().unwrap(),
        "--set", "attack.p_a=0.4", "--seed", "11",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let effective: toml::Table = text.parse().unwrap();
    assert_eq!(effective["seed"].as_integer(), Some(11));
    assert_eq!(effective["attack"]["p_a"].as_float(), Some(0.4));
}

#[test]
fn validate_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .current_dir(dir.path())
        .env("HUB_INTEGRITY_OUT", dir.path().join("out"))
        .arg("validate-config")
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn invalid_values_report_every_field() {
    let o = run(&["validate-config", "--set", "attack.p_a=1.5", "--set", "n_devices=0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("p_a") && err.contains("n_devices"), "{err}");
}

#[test]
fn output_directory_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("from_env");
    let o = bin()
        .env("HUB_INTEGRITY_OUT", &target)
        .args(["run", "--set", "t_slots=20", "--set", "name=envcheck"])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(target.join("envcheck_rep0.csv")).unwrap();
    assert!(csv.starts_with("t,attacked_count,n_alpha,n_beta,n_mu,"));
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn explicit_out_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("HUB_INTEGRITY_OUT", dir.path().join("env"))
        .args(["run", "--set", "t_slots=5", "--out", dir.path().join("flag").to_str().unwrap()])
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("flag/scenario_rep0.csv").exists());
    assert!(!dir.path().join("env").exists());
}
