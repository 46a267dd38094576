use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dfrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfrc"))
        .args(args)
        .env("DFRC_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn preset_file() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets/table1.conf")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Small problem so experiment commands finish quickly.
const SMALL: &[&str] = &[
    "--set",
    "num_radar_antennas=3",
    "--set",
    "irs_rows=2",
    "--set",
    "irs_cols=3",
    "--set",
    "num_users=2",
    "--set",
    "realizations=3",
    "--set",
    "j_max=40",
    "--set",
    "p0=10",
    "--set",
    "gamma_bp=2",
];

#[test]
fn preset_file_matches_builtin_preset() {
    let from_file = dfrc(&["print-config", "--config", preset_file().to_str().unwrap()]);
    let builtin = dfrc(&["print-config"]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(stdout(&from_file), stdout(&builtin));
}

#[test]
fn print_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = dfrc(&[
        "print-config",
        "--set",
        "alpha=0.3",
        "--set",
        "eta=0.2-0.7j",
    ]);
    assert!(first.status.success());
    let path = dir.path().join("resolved.conf");
    fs::write(&path, stdout(&first)).unwrap();
    let second = dfrc(&["print-config", "--config", path.to_str().unwrap()]);
    assert_eq!(stdout(&first), stdout(&second));
    assert!(stdout(&first).contains("alpha = 0.3\n"));
}

#[test]
fn config_errors_exit_2() {
    let out = dfrc(&["print-config", "--set", "alpha=1.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("alpha"), "{}", stderr(&out));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.conf");
    fs::write(&path, "preset = table1\nalpah = 0.2\n").unwrap();
    let out = dfrc(&["print-config", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    assert!(stderr(&out).contains("alpah"));

    let out = dfrc(&[
        "print-config",
        "--config",
        dir.path().join("missing.conf").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = dfrc(&["converge"]);
    assert_eq!(out.status.code(), Some(2), "converge without --out");

    let out = dfrc(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_gradient_passes_and_detects_fault() {
    let ok = dfrc(&["validate-gradient", "--instances", "20"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("finite differences"));

    let bad = dfrc(&[
        "validate-gradient",
        "--instances",
        "20",
        "--inject-fault",
        "flipped-conjugate",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(
        stdout(&bad).contains("FAILED at `gradient vs finite differences"),
        "{}",
        stdout(&bad)
    );
}

#[test]
fn validate_solver_reports_gap() {
    let out = dfrc(&["validate-solver"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("M=2 solver vs best sample"));
}

#[test]
fn converge_writes_one_csv_per_alpha_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let mut args = vec!["converge", "--out", dir.path().to_str().unwrap()];
        args.extend_from_slice(SMALL);
        let out = dfrc(&args);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        [
            "alpha_0.1.csv",
            "alpha_0.5.csv",
            "alpha_0.9.csv",
            "manifest.json"
        ]
    );
    for name in &names[..3] {
        let left = fs::read(a.path().join(name)).unwrap();
        assert_eq!(left, fs::read(b.path().join(name)).unwrap(), "{name}");
        assert!(String::from_utf8(left)
            .unwrap()
            .starts_with("param,iteration,mean,std\n"));
    }
    let manifest = fs::read_to_string(a.path().join("manifest.json")).unwrap();
    assert!(manifest.contains("\"schema_version\": 1"));
    assert!(manifest.contains("\"git_describe\""));
    assert!(manifest.contains("\"mean_gain_vs_iteration0\""));
}

#[test]
fn sweep_writes_one_csv_per_array_pair() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec![
        "sweep",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "sweep_radar_antennas=2,3",
        "--set",
        "sweep_irs=2x2",
        "--set",
        "sweep_p0=1,10",
    ];
    args.extend_from_slice(SMALL);
    let out = dfrc(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("M3_N4.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(dir.path().join("M2_N4.csv").exists());
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_dfrc"))
        .arg("print-config")
        .env("DFRC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
