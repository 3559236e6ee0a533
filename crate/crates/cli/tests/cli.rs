use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nearlab")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_fixtures_pass() {
    for name in ["fig1.alg", "fig2.alg"] {
        let o = run(&["check", fixture(name).to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        assert!(out.starts_with("nearlattice: pass; distributive: pass\n"), "{out}");
        assert!(out.contains("greatest element: 1\n"));
    }
}

#[test]
fn corrupted_table_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.alg");
    fs::write(&path, "size 2\nm 0 0 0 = 0\nm 0 0 1 = 7\n").unwrap();
    let o = run(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn non_distributive_table_fails_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m3.alg");
    fs::write(
        &path,
        "size 5\nelements 0 a b c 1\ncover 0 < a\ncover 0 < b\ncover 0 < c\ncover a < 1\ncover b < 1\ncover c < 1\n",
    )
    .unwrap();
    let o = run(&["check", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("distributive: fail"), "{}", stdout(&o));
}

#[test]
fn consequence_over_fig2() {
    let class = fixture("fig2");
    let class = class.to_str().unwrap();
    let o =
        run(&["consequence", "--class", class, "--premises", "bot1;bot2", "--conclusion", "x0", "--mode", "degrees"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "holds\n"));

    let o = run(&[
        "consequence",
        "--class",
        class,
        "--premises",
        "m(bot1,bot2,x0)",
        "--conclusion",
        "x0",
        "--mode",
        "degrees",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("x0=c"), "{}", stdout(&o));

    let o = run(&["consequence", "--class", class, "--premises", "bot1;bot2", "--conclusion", "x0", "--mode", "plain"]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["consequence", "--class", class, "--premises", "", "--conclusion", "top", "--mode", "plain"]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "holds\n"));
}

#[test]
fn consequence_rejects_unknown_mode_and_constant() {
    let class = fixture("fig2.alg");
    let class = class.to_str().unwrap();
    assert_eq!(run(&["consequence", "--class", class, "--conclusion", "x0", "--mode", "fuzzy"]).status.code(), Some(2));
    assert_eq!(run(&["consequence", "--class", class, "--conclusion", "nope"]).status.code(), Some(2));
}

#[test]
fn prove_single_rule() {
    let o = run(&["prove", "m(x0,x1,x2) |- x0|x2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let cert: Vec<&str> = out.lines().skip(1).collect();
    assert_eq!(cert, ["1. m(x0,x1,x2) |- x0 | x2 ; MLeft1 ; from - ; subst phi=x0, psi=x1, chi=x2"]);
}

#[test]
fn prove_writes_certificate_that_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("proof.txt");
    let o = run(&["prove", "x0|x1 |- x1|x0", "--certificate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let cert = fs::read_to_string(&path).unwrap();
    assert!(cert.lines().count() <= 5);
    let o = run(&["verify", path.to_str().unwrap()]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "valid: x0 | x1 |- x1 | x0\n"));

    fs::write(&path, cert.replace("OrRightR", "OrRightL")).unwrap();
    let o = run(&["verify", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("invalid:"));
}

#[test]
fn prove_reports_countermodel() {
    let o = run(&["prove", "x0 |- x1"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.starts_with("not found\ncountermodel (2 elements)"), "{out}");
}

#[test]
fn prove_depth_bound() {
    let o = run(&["prove", "x0|x1, x0|x2 |- x0 | m(x1,x2,x3)", "--depth", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("above the depth bound 2"));
    assert_eq!(run(&["prove", "x0 |-"]).status.code(), Some(2));
}

#[test]
fn enumerate_writes_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["enumerate", "--size", "3", "--out", dir.path().to_str().unwrap()]);
    assert_eq!((o.status.code(), stdout(&o).as_str()), (Some(0), "size 3 count 2\n"));
    let algs = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "alg"));
    assert_eq!(algs.count(), 2);
    assert_eq!(fs::read_to_string(dir.path().join("index.txt")).unwrap(), "size 3 count 2\n");

    let o = run(&[
        "consequence",
        "--class",
        dir.path().to_str().unwrap(),
        "--premises",
        "x0;x1",
        "--conclusion",
        "m(x0,x1,x2)",
    ]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn enumerate_sizes_and_guard() {
    assert_eq!(stdout(&run(&["enumerate", "--size", "1"])), "size 1 count 1\n");
    let o = run(&["enumerate", "--size", "99"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

#[test]
fn enumerate_modal_is_deterministic() {
    let a = run(&["enumerate", "--size", "3", "--modal"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&run(&["enumerate", "--size", "3", "--modal"])));
}

#[test]
fn usage_error_exits_2() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["enumerate"]).status.code(), Some(2));
}
