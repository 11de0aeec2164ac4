use std::process::{Command, Output};

use serde_json::Value;

fn rmtrace(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmtrace"))
        .args(args)
        .env_remove("RMTRACE_THREADS")
        .output()
        .expect("binary runs")
}

fn payload(args: &[&str]) -> Value {
    let out = rmtrace(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    v["payload"].clone()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn coeffs_of_01() {
    let p = payload(&["coeffs", "--x", "01"]);
    assert_eq!(p["alpha"], "0");
    assert_eq!(p["beta"], "0");
    assert_eq!(p["gamma"], "1/2");
    assert_eq!(p["delta"], "1/2");
}

#[test]
fn expected_runs_exact_and_rational() {
    let p = payload(&["expected-runs", "--x", "01"]);
    assert_eq!(p["total"], "1");
    let p = payload(&["expected-runs", "--x", "0", "--q", "1/3"]);
    assert_eq!(p["zeros"], "2/3");
    let out = rmtrace(&["expected-runs", "--x", "01", "--q", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn envelope_fields_present() {
    let out = rmtrace(&["runs", "--x", "00101"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    for key in ["tool_version", "command", "seeds", "timestamp", "payload"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["payload"]["total"], 4);
}

#[test]
fn codewords_listing() {
    let out = rmtrace(&["codewords", "--m", "2"]);
    assert_eq!(stdout(&out), "0000\n0101\n0011\n0110\n1111\n1010\n1100\n1001\n");
    let out = rmtrace(&["codewords", "--m", "3", "--first-bit", "1"]);
    assert_eq!(stdout(&out).lines().count(), 8);
    assert!(stdout(&out).lines().all(|l| l.starts_with('1')));
}

#[test]
fn encode_matches_codebook() {
    let out = rmtrace(&["encode", "--m", "2", "--u0", "0", "--u", "11"]);
    assert_eq!(stdout(&out), "0110\n");
}

#[test]
fn table_check_passes() {
    let out = rmtrace(&["check-table1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["payload"]["result"], "48/48 exact");
}

#[test]
fn verify_lemma_csv_has_one_row_per_condition() {
    let out = rmtrace(&["verify-lemma", "--m", "4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(1).all(|l| l.contains(",true,")));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["reconstruct", "--m", "3", "--x", "00001111"],
        vec!["encode", "--m", "2", "--u0", "2", "--u", "10"],
        vec!["coeffs", "--x", "01a"],
        vec!["runs"],
        vec!["codewords", "--m", "40"],
        vec!["coeffs", "--x", "01", "--format", "csv"],
    ] {
        assert_eq!(rmtrace(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn traces_are_deterministic_given_seed() {
    let args = ["trace", "--x", "0110100110010110", "--q", "1/2", "--k", "20", "--seed", "11"];
    let a = rmtrace(&args);
    let b = rmtrace(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 20);
    let masked = rmtrace(&["trace", "--x", "0101", "--q", "0", "--k", "2", "--mask", "--seed", "1"]);
    assert_eq!(stdout(&masked), "0000 0101\n0000 0101\n");
}

#[test]
fn experiment_is_thread_count_independent() {
    let run = |threads: &str| {
        payload(&[
            "experiment", "--m", "4", "--trials", "6", "--k", "20000", "--seed", "3", "--threads", threads,
        ])
    };
    let one = run("1");
    assert_eq!(one, run("3"));
    assert_eq!(one["trials"], 6);
}

#[test]
fn reconstruct_from_file() {
    let dir = std::env::temp_dir().join(format!("rmtrace-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("traces.txt");
    let x = "0000000011111111";
    let traces = rmtrace(&["trace", "--x", x, "--q", "1/2", "--k", "300000", "--seed", "8"]);
    std::fs::write(&path, &traces.stdout).unwrap();
    let p = payload(&["reconstruct", "--m", "4", "--traces", path.to_str().unwrap()]);
    assert_eq!(p["decoded"], x);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn reconstruct_streaming() {
    let p = payload(&["reconstruct", "--m", "4", "--x", "0101010101010101", "--seed", "4"]);
    assert_eq!(p["decoded"], "0101010101010101");
    assert_eq!(p["correct"], true);
}
