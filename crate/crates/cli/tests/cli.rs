use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const SCENARIO_1: &str = "\
n = 15
r = 10
k = 50
deg_f = 2
deadline = 1
mu_g = 10
mu_b = 3
p_gg = 0.8
p_bb = 0.8
";

fn lea(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lea"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn simulate_csv_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s1.conf", SCENARIO_1);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    for out in [&a, &b] {
        let o = lea(&[
            "simulate",
            "--config",
            s(&cfg),
            "--rounds",
            "3000",
            "--seed",
            "5",
            "--out",
            s(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("round,strategy,i_star,est_success_prob,n_good_true,on_time_evals,success")
    );
    let rounds: Vec<u64> = lines
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(rounds, (1..=3000).collect::<Vec<_>>());
}

#[test]
fn simulate_text_summary_and_estimates() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s1.conf", SCENARIO_1);
    let est = dir.path().join("est.csv");
    let o = lea(&[
        "simulate",
        "--config",
        s(&cfg),
        "--rounds",
        "2000",
        "--format",
        "text",
        "--estimates",
        s(&est),
        "--estimate-every",
        "500",
    ]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("strategy = lea\n"));
    assert!(stdout.contains("rounds = 2000\n"));
    assert!(stdout.contains("k_star = 99\n"));
    assert!(stdout.contains("worker.1.p_hat_gg = "));
    let snapshots = std::fs::read_to_string(est).unwrap();
    assert_eq!(snapshots.lines().count(), 1 + 4 * 15);
    assert!(snapshots.starts_with("round,worker,p_hat_gg,p_hat_bb\n"));
}

#[test]
fn strategy_and_fidelity_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s1.conf", SCENARIO_1);
    let o = lea(&[
        "simulate",
        "--config",
        s(&cfg),
        "--rounds",
        "200",
        "--strategy",
        "static",
        "--fidelity",
        "full",
        "--format",
        "text",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("strategy = static\n"));
    assert!(stdout.contains("decode_checks = 200\n"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let missing_n = write(dir.path(), "bad.conf", &SCENARIO_1.replace("n = 15\n", ""));
    let o = lea(&["simulate", "--config", s(&missing_n)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("n: missing required key"));

    let slow = write(
        dir.path(),
        "slow.conf",
        &SCENARIO_1.replace("mu_g = 10", "mu_g = 3"),
    );
    let o = lea(&["simulate", "--config", s(&slow)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mu_g"));

    let o = lea(&["simulate", "--config", s(&dir.path().join("absent.conf"))]);
    assert_eq!(o.status.code(), Some(1));

    let good = write(dir.path(), "s1.conf", SCENARIO_1);
    let o = lea(&["simulate", "--config", s(&good), "--strategy", "oracle"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_emits_one_row_per_cell() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "s1.conf", SCENARIO_1);
    let b = write(
        dir.path(),
        "s4.conf",
        &SCENARIO_1
            .replace("p_gg = 0.8", "p_gg = 0.9")
            .replace("p_bb = 0.8", "p_bb = 0.6"),
    );
    let out = dir.path().join("sweep.csv");
    let args = [
        "sweep",
        "--config",
        s(&a),
        s(&b),
        "--seed",
        "3",
        "--seeds",
        "3",
        "--rounds",
        "500",
        "--strategy",
        "lea,static",
        "--out",
        s(&out),
    ];
    assert!(lea(&args).status.success());
    let first = std::fs::read_to_string(&out).unwrap();
    assert_eq!(first.lines().count(), 1 + 2 * 3 * 2);
    let row: Vec<&str> = first.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1..4], ["3", "lea", "500"]);
    assert!(lea(&args).status.success());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), first);
}

#[test]
fn verify_passes() {
    let o = lea(&["verify", "--quick", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(
        stdout.lines().filter(|l| l.starts_with("[PASS]")).count(),
        4
    );
}

#[test]
fn encode_demo_decodes_a_dataset_file() {
    let dir = TempDir::new().unwrap();
    let data = write(dir.path(), "data.txt", "# two chunks\n1 2 3\n4 5 6\n");
    let o = lea(&[
        "encode-demo",
        "--data",
        s(&data),
        "--modulus",
        "101",
        "--seed",
        "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("recovery_threshold = 3\n"));
    // Shard 4 is -2 X_1 + 3 X_2 = (10, 11, 12).
    assert!(stdout.contains("\n4 2 10 11 12\n"), "{stdout}");
    assert!(stdout.contains("matches_direct = true\n"));

    let o = lea(&["encode-demo", "--data", s(&data), "--k", "3"]);
    assert_eq!(o.status.code(), Some(1));
}
