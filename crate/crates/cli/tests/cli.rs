use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_recur-lab"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_experiments_names_every_kind() {
    let o = bin().arg("list-experiments").output().unwrap();
    assert!(o.status.success());
    let text = stdout(&o);
    for kind in ["prop51", "example121", "thmA_chacon", "lemma65_density", "change_poly_check"] {
        assert!(text.contains(kind), "{kind} missing");
    }
}

#[test]
fn bundled_scenarios_validate() {
    let mut n = 0;
    for entry in std::fs::read_dir(scenarios()).unwrap() {
        let path = entry.unwrap().path();
        let o = bin().arg("validate").arg(&path).output().unwrap();
        assert!(o.status.success(), "{}: {}", path.display(), String::from_utf8_lossy(&o.stderr));
        n += 1;
    }
    assert_eq!(n, 12);
}

#[test]
fn run_passes_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "ex.json",
        r#"{"name": "ex", "experiment": {"kind": "example121", "ladder": [[-8, 4096]]}}"#,
    );
    let prefix = dir.path().join("out").join("ex");
    let o = bin().arg("run").arg(&s).arg("--out").arg(&prefix).args(["--format", "csv"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("result: PASS"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("time"));
    let checks = std::fs::read_to_string(dir.path().join("out/ex.checks.csv")).unwrap();
    assert!(checks.starts_with("name,verdict,"));
    assert!(dir.path().join("out/ex.profiles.csv").exists());
}

#[test]
fn json_output_is_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(
        dir.path(),
        "cp.json",
        r#"{"name": "cp", "experiment": {"kind": "change_poly_check", "instances": 5}, "seed": 3}"#,
    );
    let mut outs = Vec::new();
    for name in ["a", "b"] {
        let prefix = dir.path().join(name);
        let o = bin().arg("run").arg(&s).arg("--out").arg(&prefix).args(["--format", "json", "--threads", "1"]).output().unwrap();
        assert!(o.status.success());
        outs.push(std::fs::read(prefix.with_extension("json")).unwrap());
    }
    assert_eq!(outs[0], outs[1]);
    assert!(String::from_utf8_lossy(&outs[0]).contains("\"seed\": 3"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let fail = write(
        dir.path(),
        "f.json",
        r#"{"name": "f", "experiment": {"kind": "example121", "ladder": [[-8, 4096]], "expected_max_gap": 5}}"#,
    );
    assert_eq!(bin().arg("run").arg(&fail).output().unwrap().status.code(), Some(1));

    let invalid = write(dir.path(), "i.json", r#"{"name": "i", "experiment": {"kind": "prop51", "eps": "$e"}}"#);
    assert_eq!(bin().arg("run").arg(&invalid).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().arg("validate").arg(&invalid).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().arg("validate").arg(dir.path().join("missing.json")).output().unwrap().status.code(), Some(2));

    let refused = write(
        dir.path(),
        "r.json",
        r#"{"name": "r", "experiment": {"kind": "thmB_rotation", "system": "rot(1/3)", "window": [1, 100]}}"#,
    );
    let o = bin().arg("run").arg(&refused).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("refused"));
}

#[test]
fn format_without_destination_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "e.json", r#"{"name": "e", "experiment": {"kind": "lemma21_demo"}}"#);
    let o = bin().arg("run").arg(&s).args(["--format", "csv"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
