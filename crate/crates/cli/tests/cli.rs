use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    root.to_string_lossy().into_owned()
}

fn nbrdv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nbrdv")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn scover_fig1_two_steps() {
    let o = nbrdv(&["check", "scover", &fixture("fig1.rvp"), "--method", "explore", "--max-procs", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "RESULT YES");
    assert_eq!(lines.iter().filter(|l| l.starts_with("STEP ")).count(), 2);
    assert_eq!(lines[1], "STEP nb:a q_in,q5");
    assert_eq!(lines[2], "STEP msg:b q1,q6");
}

#[test]
fn abstract_p2_fixpoint() {
    let o = nbrdv(&["abstract", &fixture("p2.rvp")]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let last = out.lines().last().unwrap();
    assert!(last.contains("S = {p1, p2, p3, p4, q1, q3, q_in}"), "{last}");
    assert!(last.ends_with("Toks = {(q2,b)}"), "{last}");
}

#[test]
fn abstract_on_fig1_is_a_precondition_violation() {
    let o = nbrdv(&["check", "ccover", &fixture("fig1.rvp"), "--method", "abstract", "--target", "q1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn parse_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.rvp");
    std::fs::write(&bad, "protocol t\nstates a b\nfinal b\n").unwrap();
    let o = nbrdv(&["abstract", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.rvp:3:1"), "{err}");

    let o = nbrdv(&["check", "ccover", &fixture("p1.rvp"), "--target", "q9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_file_exits_one() {
    assert_eq!(nbrdv(&["abstract", "/nonexistent/x.rvp"]).status.code(), Some(1));
}

#[test]
fn ccover_needs_target() {
    assert_eq!(nbrdv(&["check", "ccover", &fixture("p1.rvp")]).status.code(), Some(3));
}

#[test]
fn auto_prefers_abstract() {
    let out = stdout(&nbrdv(&["check", "ccover", &fixture("p1.rvp"), "--target", "q3:2"]));
    assert!(out.starts_with("RESULT "));
    assert!(out.contains("method abstract"));
    let out = stdout(&nbrdv(&["check", "scover", &fixture("fig1.rvp"), "--max-procs", "3"]));
    assert!(out.contains("method explore"));
    let out = stdout(&nbrdv(&["check", "synchro", &fixture("p2.rvp"), "--max-procs", "2"]));
    assert!(out.contains("method explore"));
}

#[test]
fn budget_exhaustion_exits_four() {
    let o = nbrdv(&["check", "synchro", &fixture("p2.rvp"), "--method", "explore", "--max-procs", "6", "--budget", "5"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn output_is_deterministic() {
    let args = ["check", "ccover", &fixture("fig1.rvp"), "--target", "q3:2", "--max-procs", "5"];
    assert_eq!(stdout(&nbrdv(&args)), stdout(&nbrdv(&args)));
}

#[test]
fn translate_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let nbm = dir.path().join("p1.nbm");
    let o = nbrdv(&["translate", "p2cm", &fixture("p1.rvp"), nbm.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = nbrdv(&["explore", "machine", nbm.to_str().unwrap(), "--loc", "l_f", "--cap", "3"]);
    assert!(stdout(&o).starts_with("RESULT YES"));

    let rvp = dir.path().join("m.rvp");
    let o = nbrdv(&["translate", "minsky2p", &fixture("minsky_halt.nbm"), rvp.to_str().unwrap(), "--target-loc", "lf"]);
    assert_eq!(o.status.code(), Some(0));
    let o = nbrdv(&["check", "synchro", rvp.to_str().unwrap(), "--max-procs", "3"]);
    assert!(stdout(&o).starts_with("RESULT YES"));

    let vas = dir.path().join("r.vas");
    let o = nbrdv(&["translate", "cm2vas", &fixture("restore_inc.nbm"), vas.to_str().unwrap(), "--target-loc", "l_f"]);
    assert_eq!(o.status.code(), Some(0));
    let o = nbrdv(&["explore", "vas", vas.to_str().unwrap(), "--cap", "2"]);
    assert!(stdout(&o).starts_with("RESULT YES"));

    let rvp = dir.path().join("r.rvp");
    let o = nbrdv(&["translate", "cm2p", &fixture("restore_inc.nbm"), rvp.to_str().unwrap(), "--target-loc", "l_f"]);
    assert_eq!(o.status.code(), Some(0));
    let o = nbrdv(&["check", "scover", rvp.to_str().unwrap(), "--method", "explore", "--max-procs", "3"]);
    assert!(stdout(&o).starts_with("RESULT YES"));
}

#[test]
fn translate_rejects_wrong_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.rvp");
    let o = nbrdv(&["translate", "cm2p", &fixture("minsky_halt.nbm"), out.to_str().unwrap(), "--target-loc", "lf"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.exists());
}

#[test]
fn gen_commands_write_parseable_machines() {
    let dir = tempfile::tempdir().unwrap();
    let shell = dir.path().join("shell.nbm");
    let o = nbrdv(&["gen", "lipton", "--levels", "1", &fixture("restore_inc.nbm"), shell.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&shell).unwrap();
    assert!(text.contains("restore on"));
    let rst = dir.path().join("rst.nbm");
    let o = nbrdv(&["gen", "rst", "--levels", "1", "--level", "0", rst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = nbrdv(&["gen", "rst", "--levels", "1", "--level", "4", rst.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn explore_protocol_lists_configurations() {
    let out = stdout(&nbrdv(&["explore", "protocol", &fixture("fig1.rvp"), "--procs", "2", "--list"]));
    assert!(out.starts_with("reachable 6 configurations"));
    assert!(out.contains("CONFIG q2:2"));
}
