#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use support::{fixture_dir, Fixture, MUTATIONS};

fn run(dir: Option<&Path>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_leanarch"));
    if let Some(d) = dir {
        cmd.arg("--project").arg(d);
    }
    cmd.args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn exit_codes() {
    let fixture = fixture_dir();
    assert_eq!(code(&run(Some(&fixture), &["check"])), 0);
    assert_eq!(code(&run(None, &["--help"])), 0);
    assert_eq!(code(&run(None, &["--version"])), 0);
    assert_eq!(code(&run(None, &["bogus"])), 3);
    assert_eq!(code(&run(Some(&fixture), &["check", "--rules", "NOPE-001"])), 3);
    assert_eq!(code(&run(Some(&fixture), &["trace", "NOPE-001"])), 3);
    assert_eq!(code(&run(Some(&fixture), &["fpm", "cutsets", "NoSuchTop"])), 3);

    let empty = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(Some(empty.path()), &["check"])), 2);

    let dir = tempfile::tempdir().unwrap();
    MUTATIONS[0].apply().write_to(dir.path());
    assert_eq!(code(&run(Some(dir.path()), &["check"])), 1);
    assert_eq!(code(&run(Some(dir.path()), &["coverage"])), 1);

    let mut broken = Fixture::load();
    broken.edit("models/physical.arch", "  component FCC_01 : LRU {", "  component FCC_01 : LRU {{");
    let dir = tempfile::tempdir().unwrap();
    broken.write_to(dir.path());
    let o = run(Some(dir.path()), &["check"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("models/physical.arch:2:"), "{}", stderr(&o));
}

#[test]
fn json_output_parses() {
    let fixture = fixture_dir();
    for args in [
        &["check"][..],
        &["trace", "SYS-REQ-001", "--forward"],
        &["coverage"],
        &["fpm", "cutsets", "InabilityToDisengage"],
        &["report", "compliance", "--stdout"],
        &["report", "matrix", "--stdout"],
        &["report", "breakdown", "--model", "Phys", "--stdout"],
    ] {
        let mut all = vec!["--format", "json"];
        all.extend_from_slice(args);
        let o = run(Some(&fixture), &all);
        assert_eq!(code(&o), 0, "{args:?}: {}", stderr(&o));
        let _: Value = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{args:?}: {e}"));
    }
}

#[test]
fn reports_go_to_out_unless_stdout() {
    let dir = tempfile::tempdir().unwrap();
    Fixture::load().write_to(dir.path());
    let o = run(Some(dir.path()), &["report", "dot", "--model", "Phys"]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(stderr(&o), "wrote out/Phys.dot\n");
    let written = std::fs::read_to_string(dir.path().join("out/Phys.dot")).unwrap();
    assert!(written.starts_with("digraph"));
    let o = run(Some(dir.path()), &["report", "dot", "--model", "Phys", "--stdout"]);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), written);
}

#[test]
fn new_scaffold_checks_clean() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("demo");
    let o = run(None, &["new", dir.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(String::from_utf8(o.stdout).unwrap().contains("created project.manifest"));
    let o = run(Some(&dir), &["check"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(code(&run(None, &["new", dir.to_str().unwrap()])), 2);
}

#[test]
fn piped_diagnostics_are_plain() {
    let dir = tempfile::tempdir().unwrap();
    MUTATIONS[2].apply().write_to(dir.path());
    for no_color in [true, false] {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_leanarch"));
        cmd.arg("--project").arg(dir.path()).arg("check");
        if no_color {
            cmd.env("NO_COLOR", "1");
        } else {
            cmd.env_remove("NO_COLOR");
        }
        let o = cmd.output().unwrap();
        let err = stderr(&o);
        assert!(err.contains("error[M-PORT-001]"), "{err}");
        assert!(!err.contains('\x1b'));
    }
}
