use std::fs;
use std::process::{Command, Output};

fn ptw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptw")).args(args).env_remove("PTW_CACHE").output().expect("run ptw")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn symbolic_gamma_decomposition() {
    let o = ptw(&["gamma", "--unramified", "--as-ratfunc"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("quantity,value,check,route\n"));
    assert!(out.contains("\"L(chi, s)\",-1/(z*u - 1)"), "{out}");
    assert!(out.lines().last().unwrap().contains(",equal,"));
}

#[test]
fn ramified_gamma_is_pure_epsilon() {
    let o = ptw(&["--prime", "5", "gamma", "--conductor", "2", "--index", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"L(chi, s)\",1,"));
}

#[test]
fn fundamental_lemma_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fl.csv");
    let o = ptw(&["fundamental-lemma", "--p", "3", "--depth", "1", "--report", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ball,lhs,rhs,equal,lhs_route,rhs_route"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 40);
    assert!(rows.iter().all(|r| r.ends_with(",true,closed-form,oracle")));
    assert!(stdout(&o).contains("\"passed\": true"));
}

#[test]
fn tate_check_passes() {
    let o = ptw(&["tate-check", "--p", "5", "--family", "balls", "--max-level", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("unequal"));
    let o = ptw(&["tate-check", "--regime", "numeric", "--max-level", "1", "--max-conductor", "1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["--prime", "9", "gamma"][..],
        &["gamma", "--no-such-flag"],
        &["--suite", "nonsense"],
        &["--regime", "symbolic", "--tolerance", "1e-3", "gamma"],
        &["basic-vector", "--group", "pgl2"],
        &["fundamental-lemma", "--depth", "9"],
        &[],
    ] {
        assert_eq!(ptw(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn failed_check_prints_diff_table() {
    let o = ptw(&["conv", "--tolerance", "0", "--k", "-1", "--conductor", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("failing row(s) in conv"), "{err}");
    assert!(err.contains("shell | residue"));
    let o = ptw(&["conv", "--k", "-1", "--conductor", "1"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn reports_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = ptw(&["scattering-table", "--z-samples", "4", "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["scattering-table.csv", "scattering-table.json"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap());
    }
}

#[test]
fn json_rows_format() {
    let o = ptw(&["scattering-table", "--case", "whittaker", "--z-samples", "2", "--format", "json"]);
    let rows: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rows.as_array().unwrap().len(), 2);
    assert_eq!(rows[0]["case"], "whittaker");
}

#[test]
fn oracle_cache_round_trip() {
    let cache = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_ptw"))
            .args(["oracle", "--op", "trace-fiber", "--p", "3", "--k", "1", "--out", out.path().to_str().unwrap()])
            .env("PTW_CACHE", cache.path())
            .output()
            .unwrap()
    };
    assert_eq!(run().status.code(), Some(0));
    let first = fs::read(out.path().join("trace-fiber.csv")).unwrap();
    assert!(cache.path().join("trace-fiber-p3-k1.json").exists());
    assert_eq!(run().status.code(), Some(0));
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.path().join("trace-fiber.json")).unwrap()).unwrap();
    assert_eq!(summary["cached"], true);
    assert_eq!(fs::read(out.path().join("trace-fiber.csv")).unwrap(), first);
    // |SL2(Z/3)| = 24
    let total: u64 = String::from_utf8(first).unwrap().lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
    assert_eq!(total, 24);
}

#[test]
fn suite_by_name_and_number() {
    let o = ptw(&["--suite", "bessel-normalization"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("7,bessel-normalization,true"));
    let o = ptw(&["--suite", "11"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn basic_vector_and_transfers() {
    let o = ptw(&["basic-vector", "--group", "sl2", "--r", "ad", "--shells", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 5);
    let o = ptw(&["transfer", "--case", "rudnick", "--window", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0+p^0,9/8,closed-form"));
    let o = ptw(&["transfer", "--case", "torus"]);
    assert_eq!(o.status.code(), Some(0));
    let o = ptw(&["mellin"]);
    assert_eq!(o.status.code(), Some(0));
}
