use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn denjoy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_denjoy")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str, body: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("denjoy-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FAN2: &str = "root Fan(2)\nstate Fan(p)\n  when p = 0\n  otherwise\n    tail const Fan(p-1)\n";

#[test]
fn ranks() {
    let o = denjoy(&["rank", s(&corpus("leaf.scheme"))]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "1\n"));
    let o = denjoy(&["rank", s(&corpus("ladder.scheme"))]);
    assert_eq!(stdout(&o), "w + 1\n");
    let o = denjoy(&["rank", "--which", "cb", s(&corpus("omega_two.scheme"))]);
    assert_eq!(stdout(&o), "w*2 + 1\n");
    let o = denjoy(&["rank", "--which", "wf", s(&corpus("fan3.scheme"))]);
    assert_eq!(stdout(&o), "4\n");
}

#[test]
fn ill_founded_reports_the_cycle() {
    let o = denjoy(&["rank", s(&corpus("illfounded/loop.scheme"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(stderr(&o).contains("(0) repeated"), "{}", stderr(&o));
}

#[test]
fn exit_codes() {
    let bad = scratch("bad.scheme", "root Missing\n");
    let o = denjoy(&["rank", s(&bad)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown state"));
    assert_eq!(denjoy(&["rank", "--bogus", s(&bad)]).status.code(), Some(1));
    assert_eq!(denjoy(&["sample", s(&corpus("leaf.scheme")), "--width", "0"]).status.code(), Some(1));
    assert_eq!(denjoy(&["sample", s(&corpus("leaf.scheme")), "--grid", "-1/2"]).status.code(), Some(1));
    assert_eq!(denjoy(&["rank", "--format", "csv", s(&corpus("leaf.scheme"))]).status.code(), Some(1));
    let fan = scratch("fan2.scheme", FAN2);
    let o = denjoy(&["sample", s(&fan), "--depth", "2", "--width", "3"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("breakpoints"));
    assert!(o.stdout.is_empty());
}

#[test]
fn crosscheck_corpus() {
    let o = denjoy(&["crosscheck", s(&corpus(""))]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    assert!(text.ends_with("22 schemes, 0 failed: PASS\n"));
    assert_eq!(text.lines().filter(|l| l.ends_with(": PASS")).count(), 23);
    let o = denjoy(&["crosscheck", "--format", "json", s(&corpus(""))]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let ladder = v["schemes"].as_array().unwrap().iter().find(|x| x["scheme"] == "ladder").unwrap();
    assert_eq!(ladder["derivation"]["AC*"], "w + 1");
    assert_eq!(ladder["cb"], "w + 1");
}

#[test]
fn crosscheck_edge_cases() {
    let empty = std::env::temp_dir().join(format!("denjoy-cli-empty-{}", std::process::id()));
    fs::create_dir_all(&empty).unwrap();
    let o = denjoy(&["crosscheck", s(&empty)]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "0 schemes, 0 failed: PASS\n"));
    let o = denjoy(&["crosscheck", "--undoubled", s(&corpus(""))]);
    assert!(matches!(o.status.code(), Some(0) | Some(4)));
    assert!(stdout(&o).contains("22 schemes"));
    let wrong = std::env::temp_dir().join(format!("denjoy-cli-wrong-{}", std::process::id()));
    fs::create_dir_all(&wrong).unwrap();
    fs::write(wrong.join("fan.scheme"), format!("# ls-rank: 5\n{FAN2}")).unwrap();
    let o = denjoy(&["crosscheck", s(&wrong)]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).contains("expected 5: FAIL"));
}

#[test]
fn sample_leaf_matches_the_wiggle() {
    // wiggle on [0,1]: M = 1, five pieces of width 1/5, zero on the first,
    // rising, flat at 1, falling, zero on the last
    let o = denjoy(&["sample", s(&corpus("leaf.scheme")), "--grid", "1/5"]);
    assert_eq!(stdout(&o), "0,0\n1/5,0\n2/5,1\n3/5,1\n4/5,0\n1,0\n");
    let o = denjoy(&["sample", s(&corpus("leaf.scheme")), "--grid", "1/10", "--decimal", "2"]);
    assert_eq!(stdout(&o).lines().nth(3), Some("0.30,0.50"));
}

#[test]
fn sample_empty_tree_is_zero() {
    let e = scratch("empty.scheme", "root absent\n");
    let o = denjoy(&["sample", s(&e), "--grid", "1/8", "--depth", "4"]);
    let rows: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.ends_with(",0")));
}

#[test]
fn sample_regression_fan2() {
    let fan = scratch("fan2-regression.scheme", FAN2);
    let o = denjoy(&["sample", s(&fan), "--depth", "2", "--width", "1", "--grid", "1/64"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 65);
    let hash: String = Sha256::digest(&o.stdout).iter().map(|b| format!("{b:02x}")).collect();
    assert_eq!(hash, "4bb62ea074045417f80b943e911f040ba050478ecc6c98ec18a66a0f842e75e4");
}

#[test]
fn derive_trace() {
    let o = denjoy(&["derive", s(&corpus("fan1.scheme"))]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["rank"], "2");
    assert_eq!(v["variant"], "VB");
    assert_eq!(v["complete"], true);
    assert_eq!(v["stages"][1]["set"], r#"(copies "3 flats of [0, 1]" 3 (point "0"))"#);
    assert_eq!(v["stages"][2]["set"], "empty");
    let o = denjoy(&["derive", s(&corpus("ladder.scheme")), "--variant", "acs", "--stages", "2", "--format", "text"]);
    let text = stdout(&o);
    assert!(text.starts_with("AC* rank w + 1\n"));
    assert!(text.contains("\nstage 2: "));
    assert_eq!(denjoy(&["derive", s(&corpus("fan1.scheme")), "--variant", "bv"]).status.code(), Some(1));
}

#[test]
fn probe_variation() {
    let f = s(&corpus("fan1.scheme")).to_string();
    let o = denjoy(&["probe", &f, "--depth", "0", "--grid", "1/5"]);
    // the grid sees the single wiggle go up and down once
    assert_eq!(stdout(&o), "2\n");
    let o = denjoy(&["probe", &f, "--depth", "0", "--grid", "1/5", "--window", "0,1/2"]);
    assert_eq!(stdout(&o), "1\n");
    assert_eq!(denjoy(&["probe", &f, "--variant", "ac"]).status.code(), Some(1));
    assert_eq!(denjoy(&["probe", &f, "--window", "0,2"]).status.code(), Some(1));
}

#[test]
fn staircase_reports() {
    let one = scratch("one.sched", "# one refinement of [1/3, 1/2]\n1 1\n");
    let v: Value = serde_json::from_str(&stdout(&denjoy(&["staircase", s(&one)]))).unwrap();
    assert_eq!(v["stages"][1]["intervals"][0]["zero_slope_measure"], "1/18");
    assert_eq!(v["lusin"][0]["rows"][1]["zero_slope_measure"], "1/18");

    let dense: String = (1..=10).map(|k| format!("{k} 0\n")).collect();
    let dense = scratch("dense.sched", &dense);
    let v: Value = serde_json::from_str(&stdout(&denjoy(&["staircase", s(&dense)]))).unwrap();
    // (1 - (2/3)^10)/2 = (3^10 - 2^10)/(2 * 3^10)
    assert_eq!(v["stages"][10]["intervals"][0]["zero_slope_measure"], "58025/118098");

    let empty = scratch("empty.sched", "");
    let v: Value = serde_json::from_str(&stdout(&denjoy(&["staircase", s(&empty), "--stages", "3"]))).unwrap();
    let stages = v["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 4);
    assert!(stages.iter().all(|st| st["breakpoints"] == 2 && st["plateau_values"] == 0));

    let bad = scratch("bad.sched", "1 x\n");
    assert_eq!(denjoy(&["staircase", s(&bad)]).status.code(), Some(1));
}

#[test]
fn mi_dist_built_and_symbolic_agree() {
    let f = s(&corpus("fan1.scheme")).to_string();
    for ell in ["0", "1", "2"] {
        let built = stdout(&denjoy(&["mi-dist", &f, "--depth", ell]));
        let closed = stdout(&denjoy(&["mi-dist", &f, "--depth", ell, "--symbolic"]));
        assert_eq!(built, closed, "ℓ = {ell}");
    }
    // G_0 = 0 and G_1 is the wiggle on [0,1], whose slope is ±5 on 2/5 of I
    assert_eq!(stdout(&denjoy(&["mi-dist", &f, "--depth", "0"])), "2/5\n");
}

#[test]
fn output_is_deterministic() {
    for args in [
        vec!["crosscheck", "--format", "json"],
        vec!["derive"],
        vec!["sample", "--grid", "1/16", "--depth", "1", "--width", "2"],
    ] {
        let target = if args[0] == "crosscheck" { corpus("") } else { corpus("fan1.scheme") };
        let mut full = args.clone();
        full.insert(1, s(&target));
        let a = denjoy(&full);
        let b = denjoy(&full);
        assert_eq!(a.stdout, b.stdout);
        assert!(!a.stdout.is_empty());
    }
}
