use std::process::{Command, Output};

fn qalg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qalg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).expect("valid json")
}

#[test]
fn chsh_exact_json() {
    let o = qalg(&["chsh", "--model", "exact", "--angles", "0,90,45,135", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    let s = rows.iter().find(|r| r["term"] == "S").unwrap();
    let value = s["estimate"].as_f64().unwrap();
    assert!((value - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-8);
    assert!(stdout(&o).contains("2.8284"));
    for r in rows {
        for key in ["seed", "samples", "model", "estimate", "stderr"] {
            assert!(r.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn epr_example() {
    let o = qalg(&["epr", "--axis", "z", "--samples", "100", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next().unwrap(), "seed,samples,model,axis,anticorrelated,estimate,exact,stderr");
    assert_eq!(lines.next().unwrap(), "7,100,contextual,0 0 1,100,-1,-1,0");
}

#[test]
fn epr_accepts_triples() {
    let o = qalg(&["epr", "--axis", "1,1,0", "--samples", "500", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["rows"][0]["anticorrelated"], 500);
}

#[test]
fn gns_example() {
    let o = qalg(&["gns", "--dim", "3", "--trials", "50", "--seed", "1", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["rep_dim"], 3);
    assert_eq!(rows[1]["rep_dim"], 9);
    assert!(rows.iter().all(|r| r["passed"] == true));
}

#[test]
fn correlation_csv_schema() {
    let o = qalg(&["correlation", "--samples", "2000", "--step", "30", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "theta_deg,E_estimate,E_exact,stderr,n,seed");
    assert_eq!(lines.len(), 1 + 7);
    assert!(lines[1].starts_with("0,-1,-1,0,2000,5"));
    assert!(lines[7].starts_with("180,1,1,0,2000,5"));
    assert!(lines[4].starts_with("90,"));
    assert!(lines[4].contains(",0,"));
}

#[test]
fn identical_arguments_give_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let path = dir.path().join(name);
        let p = path.to_str().unwrap().to_string();
        let o = Command::new(env!("CARGO_BIN_EXE_qalg"))
            .env("QALG_THREADS", threads)
            .args(["chsh", "--model", "contextual", "--samples", "40000", "--seed", "11", "--out", &p])
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        assert!(o.stdout.is_empty());
        std::fs::read(path).unwrap()
    };
    let a = run("a.csv", "0");
    let b = run("b.csv", "0");
    let c = run("c.csv", "1");
    assert_eq!(a, b);
    assert_eq!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().all(|l| l.starts_with("seed") || l.starts_with("11,")));
}

#[test]
fn seed_changes_output() {
    let a = stdout(&qalg(&["chsh", "--model", "lhv", "--samples", "5000", "--seed", "1"]));
    let b = stdout(&qalg(&["chsh", "--model", "lhv", "--samples", "5000", "--seed", "2"]));
    assert_ne!(a, b);
}

#[test]
fn lhv_and_contextual_sit_on_either_side_of_two() {
    let s = |model: &str| {
        let v = json(&qalg(&["chsh", "--model", model, "--samples", "200000", "--format", "json"]));
        v["rows"][4]["estimate"].as_f64().unwrap()
    };
    assert!(s("lhv") <= 2.0 + 1e-12);
    assert!(s("contextual") > 2.7);
}

#[test]
fn evolve_table() {
    let o = qalg(&["evolve", "--points", "5", "--samples", "1000", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    // precession of +x under (omega/2) sigma_z with omega = 1, over one period
    assert!((rows[2]["sx"].as_f64().unwrap() + 1.0).abs() < 1e-8);
    assert!((rows[1]["sy"].as_f64().unwrap() - 1.0).abs() < 1e-8);
    assert_eq!(rows[0]["estimate"], 1.0);
}

#[test]
fn postulates_report() {
    let o = qalg(&["postulates", "--samples", "2000", "--cases", "60", "--trials", "10", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["passed"] == true));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["chsh", "--angles", "1,2"][..],
        &["chsh", "--model", "bohm"],
        &["epr", "--axis", "0,0,0"],
        &["epr", "--samples", "0"],
        &["correlation", "--step", "-5"],
        &["nonsense"],
        &[],
    ] {
        let o = qalg(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}");
        assert!(o.stdout.is_empty());
    }
}

#[test]
fn bad_thread_count_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_qalg"))
        .env("QALG_THREADS", "many")
        .args(["epr", "--samples", "10"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    let o = qalg(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("chsh"));
}
