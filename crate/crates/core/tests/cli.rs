use std::path::Path;
use std::process::Command;

use adareg::harness::cli::{main_with_args, EXIT_FAILURE, EXIT_OK, EXIT_USAGE};

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["adareg"];
    full.extend_from_slice(args);
    let code = main_with_args(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn summary_field<'a>(summary: &'a str, key: &str) -> &'a str {
    summary
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in summary"))
}

#[test]
fn run_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let (code, stdout, _) = cli(&[
        "run",
        "--algo",
        "adagrad-full",
        "--dim",
        "4",
        "--horizon",
        "50",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(summary_field(&stdout, "certificate"), "pass");
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("t,loss,cum_loss,cum_regret,delta_t,bound_prefix")
    );
    assert_eq!(lines.count(), 50);
    let summary = std::fs::read_to_string(dir.path().join("r.summary.txt")).unwrap();
    assert_eq!(summary, stdout);
    let json = summary_field(&summary, "json");
    let v: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(v["certificate_status"], "pass");
}

#[test]
fn every_algorithm_runs_on_its_default_problem() {
    let dir = tempfile::tempdir().unwrap();
    for algo in adareg::Preset::IDS {
        let out = dir.path().join(format!("{algo}.csv"));
        let (code, stdout, stderr) = cli(&[
            "run",
            "--algo",
            algo,
            "--dim",
            "3",
            "--horizon",
            "40",
            "--out",
            path_str(&out),
        ]);
        assert_eq!(code, EXIT_OK, "{algo}: {stderr}");
        assert_ne!(summary_field(&stdout, "certificate"), "fail", "{algo}");
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "algo = \"adagrad-diag\"\ndim = 3\nhorizon = 30\nseed = 7\n",
    )
    .unwrap();
    let out = dir.path().join("r.csv");
    let (code, stdout, _) = cli(&[
        "run",
        "--config",
        path_str(&cfg),
        "--horizon",
        "20",
        "--out",
        path_str(&out),
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(summary_field(&stdout, "algo"), "adagrad-diag");
    assert_eq!(summary_field(&stdout, "horizon"), "20");
    assert_eq!(summary_field(&stdout, "seed"), "7");
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "algo = \"adagrad-full\"\nlearning_rate = 3\n").unwrap();
    let out = dir.path().join("r.csv");
    let (code, _, stderr) = cli(&["run", "--config", path_str(&cfg), "--out", path_str(&out)]);
    assert_eq!(code, EXIT_USAGE);
    assert!(stderr.contains("learning_rate"), "{stderr}");
    assert!(!out.exists());
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let o = path_str(&out);
    let cases: &[&[&str]] = &[
        &["run", "--algo", "nope", "--out", o],
        &["run", "--algo", "adagrad-full", "--eta", "0.5", "--out", o],
        &["run", "--algo", "adagrad-full", "--dim", "0", "--out", o],
        &[
            "run",
            "--algo",
            "adagrad-full",
            "--set",
            "triangle",
            "--out",
            o,
        ],
        &["run", "--algo", "ons-full", "--beta", "1e6", "--out", o],
        &["run", "--algo", "sc-ogd", "--alpha", "100", "--out", o],
        &[
            "run",
            "--algo",
            "adagrad-full",
            "--problem",
            "nope",
            "--out",
            o,
        ],
        &["verify", "--trials", "0"],
        &["verify", "--suite", "nope"],
        &["frobnicate"],
    ];
    for args in cases {
        let (code, _, _) = cli(args);
        assert_eq!(code, EXIT_USAGE, "{args:?}");
    }
    assert!(!out.exists());
}

#[test]
fn verify_passes_and_notices_injected_fault() {
    let (code, stdout, _) = cli(&["verify", "--suite", "bounds", "--trials", "3"]);
    assert_eq!(code, EXIT_OK, "{stdout}");
    assert!(stdout.starts_with("PASS bounds:"), "{stdout}");

    let (code, stdout, _) = cli(&[
        "verify",
        "--suite",
        "bounds",
        "--trials",
        "3",
        "--inject-fault",
    ]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(stdout.contains("failure manifest:"), "{stdout}");
}

#[test]
fn curves_merges_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (p, seed) in [(&a, "1"), (&b, "2")] {
        let (code, _, _) = cli(&[
            "run",
            "--algo",
            "adaptive-ogd",
            "--dim",
            "2",
            "--horizon",
            "10",
            "--seed",
            seed,
            "--out",
            path_str(p),
        ]);
        assert_eq!(code, EXIT_OK);
    }
    let tidy = dir.path().join("tidy.csv");
    let (code, _, _) = cli(&[
        "curves",
        path_str(&a),
        path_str(&b),
        "--out",
        path_str(&tidy),
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&tidy).unwrap();
    assert_eq!(text.lines().next(), Some("run_id,t,regret,bound"));
    assert_eq!(text.lines().count(), 21);

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "x,y\n1,2\n").unwrap();
    let (code, _, _) = cli(&["curves", path_str(&bad), "--out", path_str(&tidy)]);
    assert_ne!(code, EXIT_OK);
}

#[test]
fn list_names_everything() {
    let (code, stdout, _) = cli(&["list"]);
    assert_eq!(code, EXIT_OK);
    for id in adareg::Preset::IDS
        .iter()
        .chain(adareg::ProblemKind::IDS.iter())
    {
        assert!(stdout.contains(id), "{id}");
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_adareg");
    let status = Command::new(bin).arg("list").status().unwrap();
    assert_eq!(status.code(), Some(EXIT_OK));
    let status = Command::new(bin).args(["run"]).output().unwrap().status;
    assert_eq!(status.code(), Some(EXIT_USAGE));
    let out = Command::new(bin)
        .args(["verify", "--trials", "1"])
        .env("ADAREG_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}
