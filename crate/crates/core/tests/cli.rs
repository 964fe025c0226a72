use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use phonon_qft::circuits::parse_gates;

const YUKAWA: &str = "\
model = yukawa
n_sites = 2
cutoff = 3
g = 5
m_psi = 1
m_phi = 1
dt = 0.25
t_total = 1
";

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phonon-qft"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn shipped(name: &str) -> String {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    dir.join(name).to_string_lossy().into_owned()
}

fn with_output(text: &str, out: &Path) -> String {
    format!("{text}output_dir = {}\n", out.display())
}

#[test]
fn run_writes_all_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "y.conf", &with_output(YUKAWA, &out));
    let o = bin(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let printed = stdout(&o);
    let listed: Vec<&str> = printed
        .lines()
        .map(|l| l.rsplit('/').next().unwrap())
        .collect();
    assert_eq!(
        listed,
        [
            "angles.csv",
            "cost.csv",
            "trajectory_exact.csv",
            "trajectory_trotter.csv"
        ]
    );

    // both solvers sample the same time grid
    let exact = fs::read_to_string(out.join("trajectory_exact.csv")).unwrap();
    let trotter = fs::read_to_string(out.join("trajectory_trotter.csv")).unwrap();
    let times = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| l.split(',').next().unwrap().to_owned())
            .collect()
    };
    assert_eq!(times(&exact), times(&trotter));
    assert_eq!(times(&exact).len(), 6);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let text = with_output(YUKAWA, &out).replace("t_total = 1", "t_total = 2\nthreads = 2");
        let cfg = write_config(dir.path(), &format!("y{k}.conf"), &text);
        let o = bin(&["run", cfg.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(out);
    }
    for name in [
        "angles.csv",
        "cost.csv",
        "trajectory_exact.csv",
        "trajectory_trotter.csv",
    ] {
        let a = fs::read(outputs[0].join(name)).unwrap();
        let b = fs::read(outputs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn hardware_sheet_for_shipped_configs() {
    let o = bin(&["hardware", &shipped("yukawa_n2.conf")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.lines().count() > 3);
    assert!(text.contains("omega_z"), "{text}");

    let o = bin(&["hardware", &shipped("schwinger_n4.conf")]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("delta_omega_x"), "{}", stdout(&o));
}

#[test]
fn cost_as_json() {
    let o = bin(&["cost", "--json", &shipped("schwinger_n4.conf")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = v.as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert_eq!(reports[0]["n_sites"], 4);
}

#[test]
fn dumped_circuit_parses_back() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "y.conf", YUKAWA);
    let o = bin(&["dump-circuit", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let gates = parse_gates(&stdout(&o)).unwrap();
    assert!(!gates.is_empty());
}

#[test]
fn angles_with_conflicts_go_to_stderr() {
    let o = bin(&["angles", "--conflicts", &shipped("yukawa_n2.conf")]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("kind,site,mode,theta,phi\n"));
    assert!(!stderr(&o).is_empty());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();

    // usage errors
    assert_eq!(bin(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(bin(&[]).status.code(), Some(1));
    assert_eq!(bin(&["--help"]).status.code(), Some(0));

    // unreadable or invalid configs
    let missing = dir.path().join("nope.conf");
    assert_eq!(
        bin(&["run", missing.to_str().unwrap()]).status.code(),
        Some(1)
    );
    let bad = write_config(dir.path(), "bad.conf", &YUKAWA.replace("g = 5", "g = five"));
    let o = bin(&["run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    // no trap keys
    let plain = write_config(dir.path(), "plain.conf", YUKAWA);
    assert_eq!(
        bin(&["hardware", plain.to_str().unwrap()]).status.code(),
        Some(1)
    );

    // valid config whose register cannot be built
    let huge = YUKAWA.replace(
        "model = yukawa\nn_sites = 2\ncutoff = 3\ng = 5\nm_psi = 1\nm_phi = 1",
        "model = schwinger\nn_sites = 40\ncutoff = 2\ng = 0.35\nm = 1\noccupation = 40",
    );
    let huge = write_config(
        dir.path(),
        "huge.conf",
        &with_output(&huge, &dir.path().join("o")),
    );
    let o = bin(&["run", huge.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("overflows"), "{}", stderr(&o));
}
