use std::process::{Command, Output};

fn lsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lsc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} ")))
        .unwrap_or_else(|| panic!("no `{key}` in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn validate_prints_four_pass_lines() {
    let o = lsc(&["validate", "--system", "carpet104"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS ")).count(), 4);
}

#[test]
fn claims_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("cert.txt");
    let o = lsc(&["claims", "--system", "carpet104", "--out", cert.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: contradiction"));
    let text = std::fs::read_to_string(cert).unwrap();
    assert!(text.lines().any(|l| l == "verdict contradiction"));
    assert!(text.lines().any(|l| l == "bound upper exact 1/2"));
    // sc8 has no 104-cell corner gluing
    assert_eq!(lsc(&["claims", "--system", "sc8"]).status.code(), Some(1));
}

#[test]
fn resistance_matches_oracle() {
    let o = lsc(&["resistance", "--system", "sc8", "--level", "2", "--from", "edge:left", "--to", "edge:right", "--oracle"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!((value(&text, "R") - value(&text, "oracle")).abs() < 1e-10);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(lsc(&["validate", "--system", "nosuch"]).status.code(), Some(2));
    assert_eq!(lsc(&["resistance", "--system", "sc8", "--level", "1", "--from", "edge:up", "--to", "edge:left"]).status.code(), Some(2));
    assert_eq!(lsc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(lsc(&["scan", "--system", "carpet104", "--levels", "1..4"]).status.code(), Some(2));
    assert_eq!(lsc(&["scan", "--system", "sc8", "--levels", "x"]).status.code(), Some(2));
    assert_eq!(lsc(&["graph", "--system", "sc8", "--level", "2", "--rule", "theta:"]).status.code(), Some(2));
}

#[test]
fn budget_flag_and_config() {
    let o = lsc(&["graph", "--system", "sc8", "--level", "2", "--budget", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget 1"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lsc.toml");
    std::fs::write(&cfg, "budget.sc8 = 1\n").unwrap();
    let o = lsc(&["graph", "--system", "sc8", "--level", "2", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ifs_round_trip_and_malformed_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.ifs");
    let o = lsc(&["export-ifs", "--system", "carpet104", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = lsc(&["validate", "--ifs", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS ")).count(), 4);

    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let k = lines.iter().position(|l| l.starts_with("map")).unwrap();
    lines[k] = "map 1/2 oops 0";
    std::fs::write(&path, lines.join("\n")).unwrap();
    let o = lsc(&["validate", "--ifs", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains(&format!("line {}", k + 1)));
    assert_eq!(lsc(&["validate", "--ifs", "/nonexistent.ifs"]).status.code(), Some(2));
}

#[test]
fn scan_csv_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("scan.csv");
    let o = lsc(&["scan", "--system", "sc8", "--levels", "1..3", "--problems", "crossing,poincare", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("system,level,rule,problem,setA,setB,R,energy,residual,iters,seconds"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells.len(), 11);
        assert_eq!(cells[10], "0");
        for c in &cells[6..] {
            assert!(*c == "inf" || c.parse::<f64>().is_ok(), "{c}");
        }
    }
    let fits = std::fs::read_to_string(dir.path().join("scan.csv.fits")).unwrap();
    assert!(fits.starts_with("problem,levels,slope"));
    assert!(fits.lines().any(|l| l.starts_with("crossing,1..3,")));
}

#[test]
fn empty_selection_is_a_computational_failure() {
    // the centre cell of sc8 is missing, so a rectangle there selects nothing
    let o = lsc(&["scan", "--system", "sc8", "--levels", "1..1", "--problems", "p=edge:left~rect:(2/5,2/5,3/5,3/5)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("empty"));
    let o = lsc(&["scan", "--system", "sc8", "--levels", "1..1", "--problems", "p=edge:left~rect:(2/3,0,1,1/3),crossing"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"rect:(2/3,0,1,1/3)\""));
}

#[test]
fn heuristic_rule_is_labelled() {
    let o = lsc(&["poincare", "--system", "carpet104", "--level", "1", "--rule", "theta:0.5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("note heuristic conductance rule"));
}
