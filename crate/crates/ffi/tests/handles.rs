use std::ffi::{CStr, CString};
use std::ptr;

use phonon_qft_ffi::*;

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

fn last_error() -> String {
    unsafe { CStr::from_ptr(pq_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn parse(text: &str) -> Result<*mut PqConfig, (PqStatus, String)> {
    let text = CString::new(text).unwrap();
    let mut cfg = ptr::null_mut();
    match unsafe { pq_config_parse(text.as_ptr(), &mut cfg) } {
        PqStatus::Ok => Ok(cfg),
        s => Err((s, last_error())),
    }
}

fn take_string(p: *mut std::ffi::c_char) -> String {
    let s = unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_owned();
    unsafe { pq_string_free(p) };
    s
}

#[test]
fn evolve_through_handles() {
    let cfg = parse(YUKAWA).unwrap();
    assert_eq!(unsafe { pq_config_n_sites(cfg) }, 2);

    let mut circuit = ptr::null_mut();
    let mut psi0 = ptr::null_mut();
    let mut psi = ptr::null_mut();
    unsafe {
        assert_eq!(pq_circuit_new(cfg, &mut circuit), PqStatus::Ok);
        assert_eq!(pq_state_initial(cfg, &mut psi0), PqStatus::Ok);
        assert_eq!(pq_state_clone(psi0, &mut psi), PqStatus::Ok);
        assert_eq!(pq_circuit_n_steps(circuit), 4);
        assert!(pq_circuit_n_gates(circuit) > 0);
        assert_eq!(pq_state_dim(psi), 8 * 16);
    }

    let mut echoes = Vec::new();
    for _ in 0..4 {
        let (mut norm, mut echo) = (0.0, 0.0);
        unsafe {
            assert_eq!(pq_circuit_apply(circuit, psi, 1), PqStatus::Ok);
            assert_eq!(pq_state_norm(psi, &mut norm), PqStatus::Ok);
            assert_eq!(pq_state_echo(psi0, psi, &mut echo), PqStatus::Ok);
        }
        assert!((norm - 1.0).abs() < 1e-12);
        echoes.push(echo);
    }

    // the per-step echoes agree with the Trotter trajectory exported as CSV
    let mut csv = ptr::null_mut();
    assert_eq!(unsafe { pq_trajectory_csv(cfg, 0, &mut csv) }, PqStatus::Ok);
    let csv = take_string(csv);
    let from_csv: Vec<f64> = csv
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(from_csv.len(), echoes.len());
    for (a, b) in from_csv.iter().zip(&echoes) {
        assert!((a - b).abs() < 1e-11, "{a} vs {b}");
    }

    let mut buf = vec![0.0; 2 * 8 * 16];
    assert_eq!(
        unsafe { pq_state_amplitudes(psi, buf.as_mut_ptr(), buf.len()) },
        PqStatus::Ok
    );
    let total: f64 = buf.iter().map(|x| x * x).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(
        unsafe { pq_state_amplitudes(psi, buf.as_mut_ptr(), buf.len() - 2) },
        PqStatus::InvalidArgument
    );
    assert!(last_error().contains("need 256"));

    unsafe {
        pq_state_free(psi);
        pq_state_free(psi0);
        pq_circuit_free(circuit);
        pq_config_free(cfg);
    }
}

#[test]
fn config_errors_carry_line_numbers() {
    let (status, msg) = parse("model = yukawa\nbogus = 1\n").unwrap_err();
    assert_eq!(status, PqStatus::Config);
    assert!(msg.contains("line 2"), "{msg}");
    let (status, msg) = parse("").unwrap_err();
    assert_eq!(status, PqStatus::Config);
    assert!(msg.contains("model missing"), "{msg}");
}

#[test]
fn null_and_bad_input_are_reported() {
    let mut cfg = ptr::null_mut();
    assert_eq!(
        unsafe { pq_config_parse(ptr::null(), &mut cfg) },
        PqStatus::NullPointer
    );
    let bad = [0xffu8, 0xfe, 0];
    assert_eq!(
        unsafe { pq_config_parse(bad.as_ptr().cast(), &mut cfg) },
        PqStatus::InvalidUtf8
    );
    let mut norm = 0.0;
    assert_eq!(
        unsafe { pq_state_norm(ptr::null(), &mut norm) },
        PqStatus::NullPointer
    );
    assert!(last_error().contains("state is null"));
    unsafe {
        pq_config_free(ptr::null_mut());
        pq_state_free(ptr::null_mut());
        pq_circuit_free(ptr::null_mut());
        pq_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { pq_config_n_sites(ptr::null()) }, 0);
}

#[test]
fn reports_and_text_round_trip() {
    let cfg = parse(YUKAWA).unwrap();
    let mut out = ptr::null_mut();
    unsafe {
        assert_eq!(pq_config_to_text(cfg, &mut out), PqStatus::Ok);
    }
    let text = take_string(out);
    let again = parse(&text).unwrap();
    unsafe {
        assert_eq!(pq_angles_csv(again, &mut out), PqStatus::Ok);
        assert!(take_string(out).starts_with("kind,site,mode,theta,phi\n"));
        assert_eq!(pq_cost_csv(again, &mut out), PqStatus::Ok);
        assert!(take_string(out).contains("yukawa,2,3,analog_digital,fermion_hopping,4"));
        assert_eq!(pq_hardware_csv(again, &mut out), PqStatus::Config);
        let mut c = ptr::null_mut();
        assert_eq!(pq_circuit_new(again, &mut c), PqStatus::Ok);
        assert_eq!(pq_circuit_dump(c, &mut out), PqStatus::Ok);
        assert!(take_string(out).starts_with("# yukawa"));
        pq_circuit_free(c);
        pq_config_free(again);
        pq_config_free(cfg);
    }
    let version = unsafe { CStr::from_ptr(pq_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn layout_mismatch_between_handles() {
    let a = parse(YUKAWA).unwrap();
    let b = parse(&YUKAWA.replace("cutoff = 3", "cutoff = 2")).unwrap();
    let mut circuit = ptr::null_mut();
    let mut psi = ptr::null_mut();
    unsafe {
        assert_eq!(pq_circuit_new(a, &mut circuit), PqStatus::Ok);
        assert_eq!(pq_state_initial(b, &mut psi), PqStatus::Ok);
        assert_eq!(pq_circuit_apply(circuit, psi, 1), PqStatus::InvalidArgument);
        pq_state_free(psi);
        pq_circuit_free(circuit);
        pq_config_free(a);
        pq_config_free(b);
    }
}

#[test]
fn run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!("{YUKAWA}output_dir = {}\n", dir.path().display());
    let cfg = parse(&text).unwrap();
    assert_eq!(unsafe { pq_run(cfg) }, PqStatus::Ok);
    for name in [
        "angles.csv",
        "cost.csv",
        "trajectory_exact.csv",
        "trajectory_trotter.csv",
    ] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    unsafe { pq_config_free(cfg) };
}
