//! End-to-end runs of the `abc-rates` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn abc_rates(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abc-rates"))
        .args(args)
        .env_remove("ABC_RATES_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn tune_prints_scaling_factors() {
    let o = abc_rates(&["tune", "--q", "2", "--alpha", "2", "--dry-run"]);
    assert!(o.status.success());
    let dir = tempfile::tempdir().unwrap();
    let o = abc_rates(&[
        "tune",
        "--q",
        "2",
        "--alpha",
        "2",
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    for line in ["n_factor=4", "delta_factor=0.7071", "cost_factor=8"] {
        assert!(out.lines().any(|l| l == line), "{out}");
    }
    let csv = fs::read_to_string(dir.path().join("tune.csv")).unwrap();
    assert_eq!(
        csv,
        "q,target,value,n_factor,delta_factor,cost_factor,error_factor\n\
         2,alpha,2,4,0.70710678118654757,8,0.5\n"
    );
}

#[test]
fn accept_all_sample_emits_prior_draws() {
    let dir = tempfile::tempdir().unwrap();
    let o = abc_rates(&[
        "sample",
        "--model",
        "toy",
        "--delta",
        "inf",
        "--n",
        "10",
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "accepted 10 of 10 proposals");
    let csv = fs::read_to_string(dir.path().join("sample.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(csv.starts_with("index,proposal,theta,distance\n"));
    assert!(!csv.contains('\r'));
    let echo = fs::read_to_string(dir.path().join("config.echo.json")).unwrap();
    assert!(echo.contains("\"delta\": \"inf\""));
    assert!(dir.path().join("sample.md").exists());
}

#[test]
fn bias_sweep_writes_figure_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = abc_rates(&[
        "bias-sweep",
        "--deltas",
        "1.0,0.5",
        "--n",
        "20",
        "--k",
        "10",
        "--seed",
        "3",
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("bias-sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "delta,mean_bias,std_error,theory_bias");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.5,"));
    let theory: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!((theory - 0.0323).abs() < 5e-4);
    let md = fs::read_to_string(dir.path().join("bias-sweep.md")).unwrap();
    assert!(md.contains("- seed: 3"));
}

#[test]
fn validation_failures_exit_two() {
    let o = abc_rates(&["bias-sweep", "--n", "10", "--k", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error: invalid-config: deltas"), "{err}");

    let o = abc_rates(&["bias-sweep", "--deltas", "0.5,-1", "--n", "10", "--k", "10"]);
    assert_eq!(o.status.code(), Some(2));
    let o = abc_rates(&["tune", "--q", "2", "--alpha", "2", "--threads", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("threads"));
}

#[test]
fn runtime_failures_exit_one() {
    // f_S(s*) is effectively zero here, so the proposal cap trips
    let o = abc_rates(&[
        "sample",
        "--s-star",
        "40,-40",
        "--delta",
        "0.01",
        "--n",
        "1",
        "--dry-run",
    ]);
    assert!(o.status.success());
    let dir = tempfile::tempdir().unwrap();
    let o = abc_rates(&[
        "sample",
        "--s-star",
        "40,-40",
        "--delta",
        "0.01",
        "--n",
        "1",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).starts_with("error: proposal-cap-exceeded: "),
        "{}",
        stderr(&o)
    );
}

#[test]
fn dry_run_prints_grid_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let o = abc_rates(&[
        "mse-sweep",
        "--deltas",
        "0.5,1,2",
        "--kappa",
        "1000",
        "--k",
        "10",
        "--dry-run",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("delta 0.5: n 250"));
    assert!(text.contains("delta 1: n 1000"));
    assert!(!out.exists());
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(
        &cfg,
        r#"{"deltas": [0.5, 1.0], "n": 30, "k": 8, "seed": 11, "h": "one"}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = abc_rates(&[
        "bias-sweep",
        "--config",
        path(&cfg),
        "--k",
        "5",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let echo: serde_like::Echo =
        serde_like::parse(&fs::read_to_string(out.join("config.echo.json")).unwrap());
    assert_eq!(echo.k, 5);
    assert_eq!(echo.seed, 11);
    // h ≡ 1 has no error at all
    let csv = fs::read_to_string(out.join("bias-sweep.csv")).unwrap();
    assert_eq!(
        csv,
        "delta,mean_bias,std_error,theory_bias\n0.5,0,0,0\n1,0,0,0\n"
    );

    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"deltas": [0.5], "bogus": 1}"#).unwrap();
    let o = abc_rates(&["bias-sweep", "--config", path(&bad)]);
    assert_eq!(o.status.code(), Some(2));
}

/// Minimal field extraction so the test does not depend on the crate's types.
mod serde_like {
    pub struct Echo {
        pub k: u64,
        pub seed: u64,
    }

    fn field(text: &str, name: &str) -> u64 {
        let key = format!("\"{name}\": ");
        let start = text.find(&key).unwrap() + key.len();
        text[start..]
            .chars()
            .take_while(char::is_ascii_digit)
            .collect::<String>()
            .parse()
            .unwrap()
    }

    pub fn parse(text: &str) -> Echo {
        Echo {
            k: field(text, "k"),
            seed: field(text, "seed"),
        }
    }
}

#[test]
fn thread_count_does_not_change_csv() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (i, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = dir.path().join(format!("run{i}"));
        let o = Command::new(env!("CARGO_BIN_EXE_abc-rates"))
            .args([
                "mse-sweep",
                "--deltas",
                "0.6,0.9,1.2",
                "--n",
                "40",
                "--k",
                "30",
                "--seed",
                "5",
            ])
            .args(["--out", path(&out)])
            .env("ABC_RATES_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(fs::read(out.join("mse-sweep.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}
