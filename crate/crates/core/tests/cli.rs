use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_extremal"))
}

fn dir(name: &str) -> PathBuf {
    let d = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{name}"));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn write_config(d: &Path, body: &str) -> PathBuf {
    let p = d.join("config.toml");
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn passing_run_exits_zero_with_manifest() {
    let d = dir("pass");
    let cfg = write_config(&d, "[scenario]\nname = \"round\"\nlevel = 4\n");
    let out = d.join("out");
    let st = bin().arg("--out").arg(&out).arg("run").arg(&cfg).output().unwrap().status;
    assert_eq!(st.code(), Some(0));
    let manifest = fs::read_to_string(out.join("MANIFEST")).unwrap();
    assert!(manifest.contains("status: all tolerances met"));
    let csv = fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert!(csv.starts_with("index,eigenvalue,residual\n"));
    assert_eq!(csv.lines().count(), 17);
}

#[test]
fn tolerance_failure_exits_one() {
    let d = dir("fail");
    let cfg = write_config(&d, "[scenario]\nname = \"round\"\nlevel = 1\n");
    let st = bin().arg("--out").arg(d.join("out")).arg("run").arg(&cfg).output().unwrap().status;
    assert_eq!(st.code(), Some(1));
    let manifest = fs::read_to_string(d.join("out/MANIFEST")).unwrap();
    assert!(manifest.contains("FAIL multiplets") && manifest.contains("status: tolerance failure"));
}

#[test]
fn input_errors_exit_two() {
    let d = dir("error");
    let cfg = write_config(&d, "[scenario]\nname = \"round\"\nlevl = 3\n");
    assert_eq!(bin().arg("run").arg(&cfg).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().arg("run").arg(d.join("missing.toml")).output().unwrap().status.code(), Some(2));
    let map = d.join("map.toml");
    fs::write(&map, "numerator = [[1.0, 0.0]]\ndenominator = [[1.0, 0.0]]\n").unwrap();
    let out = bin().arg("--out").arg(d.join("o")).args(["branched", "--level", "2", "--map"]).arg(&map).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn branched_subcommand_writes_tables() {
    let d = dir("branched");
    let map = d.join("map.toml");
    fs::write(&map, "numerator = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]\ndenominator = [[1.0, 0.0]]\n").unwrap();
    let out = d.join("out");
    let st = bin().arg("--out").arg(&out).args(["branched", "--level", "4", "--map"]).arg(&map).output().unwrap().status;
    assert_eq!(st.code(), Some(0));
    for t in ["critical_points.csv", "area.csv", "spectrum.csv", "MANIFEST"] {
        assert!(out.join(t).is_file(), "{t} missing");
    }
    let crit = fs::read_to_string(out.join("critical_points.csv")).unwrap();
    assert_eq!(crit.lines().count(), 3);
}
