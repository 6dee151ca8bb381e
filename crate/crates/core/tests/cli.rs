use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cxham(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cxham"))
        .args(args)
        .current_dir(dir)
        .env_remove("CXHAM_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn last_row(csv: &str) -> Vec<f64> {
    csv.lines().last().unwrap().split(',').map(|v| v.parse().unwrap()).collect()
}

#[test]
fn simulate_both_frames() {
    let dir = tempfile::tempdir().unwrap();
    let o = cxham(
        dir.path(),
        &["simulate", "--potential", "i*z^3", "--mass", "0.5", "--z0", "0", "--p0", "1", "--t-end", "5", "--frame", "both"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x,y,p,q,x1,p1,x2,p2,Hr,Hi");
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("traj.json")).unwrap()).unwrap();
    assert!(summary["drift_Hr"].as_f64().unwrap() <= 1e-8);
    assert!(summary["drift_Hi"].as_f64().unwrap() <= 1e-8);
    assert_eq!(summary["terminated_by"], "t_end");
    assert_eq!(summary["equivalence"]["passed"], true);
    // Columns x1..p2 come from the independent Darboux run.
    for line in csv.lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let mapped = [v[1], v[3], v[4], v[2]].map(|c| c * std::f64::consts::SQRT_2);
        for k in 0..4 {
            assert!((mapped[k] - v[5 + k]).abs() < 1e-5, "{line}");
        }
    }
}

#[test]
fn harmonic_period_returns_to_start() {
    let dir = tempfile::tempdir().unwrap();
    let o = cxham(dir.path(), &["simulate", "--potential", "z^2", "--z0", "1", "--p0", "0", "--t-end", "3.14159265"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let row = last_row(&fs::read_to_string(dir.path().join("traj.csv")).unwrap());
    assert!((row[1] - 1.0).abs() < 1e-6 && row[3].abs() < 1e-6, "{row:?}");
}

#[test]
fn fixed_step_methods_run() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["rk4", "split"] {
        let out = format!("{method}.csv");
        let o = cxham(
            dir.path(),
            &["simulate", "--potential", "z2", "--z0", "1", "--t-end", "1", "--method", method, "--dt", "0.01", "--frame", "darboux", "--out", &out],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        let csv = fs::read_to_string(dir.path().join(&out)).unwrap();
        assert_eq!(csv.lines().count(), 102);
        let row = last_row(&csv);
        assert!((row[0] - 1.0).abs() < 1e-15);
        assert!((row[1] - 2f64.cos()).abs() < 1e-3, "{method}: {row:?}");
    }
}

#[test]
fn escape_is_not_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = cxham(
        dir.path(),
        &["simulate", "--potential=-z^4", "--z0", "1.5", "--p0", "1", "--t-end", "50", "--escape-radius", "10"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("terminated_by=escape"));
}

#[test]
fn unsupported_potential_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = cxham(dir.path(), &["simulate", "--potential", "sqrt(z)"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unsupported"), "{}", stderr(&o));
    assert!(!dir.path().join("traj.csv").exists());
    let o = cxham(dir.path(), &["simulate", "--potential", "z", "--mass", "-1"]);
    assert_eq!(o.status.code(), Some(1));
    let o = cxham(dir.path(), &["simulate", "--potential", "z", "--rtol", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["simulate", "--potential", "exp(i*z)", "--z0", "0.2-0.1i", "--p0", "0.5+0.3i", "--t-end", "2", "--frame", "both"];
    cxham(dir.path(), &args);
    let first = (fs::read(dir.path().join("traj.csv")).unwrap(), fs::read(dir.path().join("traj.json")).unwrap());
    cxham(dir.path(), &args);
    let second = (fs::read(dir.path().join("traj.csv")).unwrap(), fs::read(dir.path().join("traj.json")).unwrap());
    assert_eq!(first, second);
    let a = stdout(&cxham(dir.path(), &["verify-symplectic", "--random", "5", "--json"]));
    let b = stdout(&cxham(dir.path(), &["verify-symplectic", "--random", "5", "--json"]));
    assert_eq!(a, b);
}

#[test]
fn table_report_flags_the_two_misprints() {
    let dir = tempfile::tempdir().unwrap();
    let o = cxham(dir.path(), &["verify-table1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("seed 42, 100 points"));
    let discrepant: Vec<&str> = text.lines().filter(|l| l.contains("DISCREPANT")).collect();
    assert_eq!(discrepant.len(), 2, "{text}");
    assert!(discrepant[0].starts_with("i z ") && discrepant[0].contains(" h "));
    assert!(discrepant[1].starts_with("-z^4") && discrepant[1].contains(" Hi "));
    assert_eq!(text.lines().filter(|l| l.contains(" PASS")).count(), 10);

    let json = cxham(dir.path(), &["verify-table1", "--json", "--out", "table.json"]);
    assert_eq!(json.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("table.json")).unwrap()).unwrap();
    assert_eq!(v["entries"].as_array().unwrap().len(), 12);
}

#[test]
fn seed_comes_from_flag_then_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_cxham"))
        .args(["verify-table1", "--points", "3"])
        .env("CXHAM_SEED", "7")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(stdout(&o).starts_with("seed 7, 3 points"));
    let o = cxham(dir.path(), &["verify-table1", "--points", "3", "--seed", "9"]);
    assert!(stdout(&o).starts_with("seed 9, 3 points"));
    let o = Command::new(env!("CARGO_BIN_EXE_cxham"))
        .args(["verify-table1"])
        .env("CXHAM_SEED", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn darboux_examples() {
    let dir = tempfile::tempdir().unwrap();
    let o = cxham(dir.path(), &["darboux", "--a", "0", "--b", "0", "--alpha", "0", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["r_plus"], 0.5);
    assert_eq!(v["r_minus"], 0.5);
    let s: Vec<Vec<f64>> = serde_json::from_value(v["S"].clone()).unwrap();
    assert_eq!(s, vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 0.0, 0.0], vec![0.0, 0.0, 0.0, 1.0], vec![0.0, 0.0, 1.0, 0.0]]);

    let o = cxham(dir.path(), &["darboux", "--a", "0", "--b", "0", "--alpha", "1"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("degenerate"));

    let o = cxham(dir.path(), &["darboux", "--a", "1.5", "--b", "-0.5", "--alpha", "-0.3+0.8i", "--w", "1,2,3,4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("xi = ("));
}

#[test]
fn symplectic_sweep_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cxham(dir.path(), &["verify-symplectic", "--random", "100", "--seed", "42"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().last().unwrap() == "100/100 PASS");
    let o = cxham(dir.path(), &["verify-symplectic", "--a", "1", "--b", "-1", "--alpha", "0.3+0.2i"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("PASS\n"));
}

#[test]
fn flow_and_constraint() {
    let dir = tempfile::tempdir().unwrap();
    let o = cxham(dir.path(), &["hi-flow", "--potential", "iz3", "--xi0", "0.5,0.4,-0.3,0.2", "--epsilon-end", "-1", "--out", "flow.csv"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("flow.csv")).unwrap();
    assert!(csv.starts_with("eps,x,y,p,q,x1,p1,x2,p2,Hr,Hi\n"));
    assert_eq!(last_row(&csv)[0], -1.0);

    let o = cxham(dir.path(), &["constrain", "--potential", "i*z", "--x1", "1.4142135623730951", "--p1", "1", "--p2", "0", "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["x2"].as_f64().unwrap() + 1.0).abs() < 1e-15);
    assert!(v["Hi"].as_f64().unwrap().abs() < 1e-12);
}
