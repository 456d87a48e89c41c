use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gennet")).args(args).output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let o = run(args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

#[test]
fn counts_by_method() {
    assert_eq!(stdout(&["count", "--k", "1", "--n", "5", "--method", "closed"]).trim(), "300");
    assert_eq!(stdout(&["count", "--k", "1", "--n", "5"]).trim(), "300");
    assert_eq!(stdout(&["count", "--k", "1", "--n", "7", "--method", "oracle"]).trim(), "30240");
    assert_eq!(stdout(&["count", "--k", "1", "--n", "4"]).trim(), "0 (n even)");
    assert_eq!(stdout(&["count", "--k", "1", "--leaves", "3", "--labeling", "leaf"]).trim(), "36");
    assert_eq!(stdout(&["count", "--k", "2", "--n", "5", "--stratum", "mult"]).trim(), "240");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["count", "--k", "4", "--n", "5"]).status.code(), Some(2));
    assert_eq!(run(&["count", "--k", "1", "--n", "13", "--method", "oracle"]).status.code(), Some(2));
    assert_eq!(run(&["asym", "--k", "1", "--n", "21", "--order", "3"]).status.code(), Some(2));
    assert_eq!(run(&["bogus"]).status.code(), Some(2));
    let o = run(&["--budget", "0s", "count", "--k", "2", "--n", "9", "--method", "oracle"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn json_count() {
    let v: serde_json::Value = serde_json::from_str(&stdout(&["--format", "json", "count", "--k", "1", "--n", "5"])).unwrap();
    assert_eq!(v["count"], "300");
    assert_eq!(v["k"], 1);
}

#[test]
fn series_csv() {
    let out = stdout(&["--format", "csv", "series", "--k", "1", "--max-n", "5"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,numerator,denominator,count"));
    assert_eq!(out.lines().last(), Some("5,5,2,300"));
}

#[test]
fn report_lists_printed_formulas() {
    let out = stdout(&["--format", "csv", "report", "consistency", "--k", "2", "--max-n", "9", "--no-oracle"]);
    assert!(out.starts_with("formula_id,k,n_or_ℓ,value,series_value,oracle_value,status"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("ExactGen2,")));
}

#[test]
fn output_is_deterministic() {
    let args = ["--threads", "1", "--format", "json", "verify", "--max-n", "5"];
    let a = stdout(&args);
    let b = stdout(&["--threads", "4", "--format", "json", "verify", "--max-n", "5"]);
    assert_eq!(a, b);
    assert_eq!(a, stdout(&args));
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("gennet-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("t.csv");
    let o = run(&["--format", "csv", "--output", p.to_str().unwrap(), "series", "--k", "1", "--max-n", "3"]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&p).unwrap().contains("3,1,1,6"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn asym_table() {
    let out = stdout(&["--format", "csv", "asym", "--k", "1", "--n", "11,21"]);
    assert!(out.starts_with("k,n,exact,est1,est2,rel_err1,rel_err2,fitted_residual"), "{out}");
    assert_eq!(out.lines().count(), 3);
}
