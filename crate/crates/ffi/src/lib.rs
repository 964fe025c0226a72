//! C interface to `phonon-qft`.
//!
//! Objects cross the boundary as opaque handles created by `pq_*_new`-style
//! constructors and released with the matching `pq_*_free`. Every fallible
//! call returns a [`PqStatus`]; on failure [`pq_last_error`] describes the
//! problem until the next failing call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use phonon_qft::circuits::Circuit;
use phonon_qft::config::{parse_config, RunConfig};
use phonon_qft::cost::reports_to_csv;
use phonon_qft::statespace::StateVector;
use phonon_qft::{runner, Error};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PqStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Config = 3,
    InvalidArgument = 4,
    Solver = 5,
    Io = 6,
    Panic = 7,
}

/// Parsed run configuration.
pub struct PqConfig(RunConfig);

/// Compiled Trotter circuit.
pub struct PqCircuit(Circuit);

/// State vector on a spin-phonon register.
pub struct PqState(StateVector);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).unwrap_or_default());
}

fn status_of(err: &Error) -> PqStatus {
    match err {
        Error::Config { .. } | Error::ConfigMissing(_) | Error::Parse { .. } => PqStatus::Config,
        Error::Io { .. } => PqStatus::Io,
        Error::InvalidParams(_)
        | Error::IndexOutOfRange { .. }
        | Error::DimensionMismatch { .. }
        | Error::LayoutMismatch
        | Error::InvalidWindow { .. }
        | Error::OccupationOutOfWindow { .. }
        | Error::RepeatedTarget(_) => PqStatus::InvalidArgument,
        _ => PqStatus::Solver,
    }
}

/// Runs `f`, converting errors and panics into a status and the last-error message.
fn guard(f: impl FnOnce() -> Result<(), (PqStatus, String)>) -> PqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PqStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic");
            PqStatus::Panic
        }
    }
}

fn lib(err: Error) -> (PqStatus, String) {
    (status_of(&err), err.to_string())
}

fn null(what: &str) -> (PqStatus, String) {
    (PqStatus::NullPointer, format!("{what} is null"))
}

unsafe fn borrow<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PqStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn borrow_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (PqStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn utf8<'a>(p: *const c_char, what: &str) -> Result<&'a str, (PqStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| (PqStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn give<T>(out: *mut *mut T, value: T) -> Result<(), (PqStatus, String)> {
    let slot = borrow_mut(out, "output pointer")?;
    *slot = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn give_string(out: *mut *mut c_char, s: String) -> Result<(), (PqStatus, String)> {
    let slot = borrow_mut(out, "output pointer")?;
    *slot = CString::new(s)
        .map_err(|e| (PqStatus::Panic, e.to_string()))?
        .into_raw();
    Ok(())
}

/// Message for the most recent failure on this thread; empty if none. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn pq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn pq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses `key = value` configuration text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pq_config_parse(text: *const c_char, out: *mut *mut PqConfig) -> PqStatus {
    guard(|| {
        let cfg = parse_config(utf8(text, "config text")?).map_err(lib)?;
        give(out, PqConfig(cfg))
    })
}

/// # Safety
/// `cfg` must come from [`pq_config_parse`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pq_config_free(cfg: *mut PqConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Canonical text form of a configuration.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pq_config_to_text(
    cfg: *const PqConfig,
    out: *mut *mut c_char,
) -> PqStatus {
    guard(|| give_string(out, borrow(cfg, "config")?.0.to_text()))
}

/// Number of lattice sites.
///
/// # Safety
/// `cfg` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pq_config_n_sites(cfg: *const PqConfig) -> usize {
    cfg.as_ref().map(|c| c.0.params.n_sites()).unwrap_or(0)
}

/// Writes every artifact of the configured run into its output directory.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn pq_run(cfg: *const PqConfig) -> PqStatus {
    guard(|| {
        runner::run(&borrow(cfg, "config")?.0).map_err(lib)?;
        Ok(())
    })
}

/// Trajectory CSV from the exact solver (`exact != 0`) or the Trotter circuit.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pq_trajectory_csv(
    cfg: *const PqConfig,
    exact: i32,
    out: *mut *mut c_char,
) -> PqStatus {
    guard(|| {
        let cfg = &borrow(cfg, "config")?.0;
        let traj = if exact != 0 {
            runner::exact_trajectory(cfg)
        } else {
            runner::trotter_trajectory(cfg)
        }
        .map_err(lib)?;
        give_string(out, traj.to_csv())
    })
}

/// Gate-angle table as CSV.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pq_angles_csv(cfg: *const PqConfig, out: *mut *mut c_char) -> PqStatus {
    guard(|| {
        give_string(
            out,
            runner::angles_csv(&borrow(cfg, "config")?.0).map_err(lib)?,
        )
    })
}

/// Entangling-gate counts as CSV.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pq_cost_csv(cfg: *const PqConfig, out: *mut *mut c_char) -> PqStatus {
    guard(|| {
        let reports = runner::cost_reports(&borrow(cfg, "config")?.0).map_err(lib)?;
        give_string(out, reports_to_csv(&reports))
    })
}

/// Trap parameter sheet as CSV; fails with [`PqStatus::Config`] when the config has no trap keys.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pq_hardware_csv(cfg: *const PqConfig, out: *mut *mut c_char) -> PqStatus {
    guard(
        || match runner::hardware_csv(&borrow(cfg, "config")?.0).map_err(lib)? {
            Some(csv) => give_string(out, csv),
            None => Err((PqStatus::Config, "no trap keys in config".into())),
        },
    )
}

/// Compiles one Trotter step of the configured model.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_new(
    cfg: *const PqConfig,
    out: *mut *mut PqCircuit,
) -> PqStatus {
    guard(|| {
        let c = runner::circuit(&borrow(cfg, "config")?.0).map_err(lib)?;
        give(out, PqCircuit(c))
    })
}

/// # Safety
/// `circuit` must come from [`pq_circuit_new`] and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_free(circuit: *mut PqCircuit) {
    if !circuit.is_null() {
        drop(Box::from_raw(circuit));
    }
}

/// Number of Trotter steps covering the configured total time.
///
/// # Safety
/// `circuit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_n_steps(circuit: *const PqCircuit) -> usize {
    circuit.as_ref().map(|c| c.0.n_steps).unwrap_or(0)
}

/// Gates in one step.
///
/// # Safety
/// `circuit` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_n_gates(circuit: *const PqCircuit) -> usize {
    circuit.as_ref().map(|c| c.0.step.len()).unwrap_or(0)
}

/// One step as gate lines.
///
/// # Safety
/// `circuit` must be a live handle and `out` a valid pointer; free the result with [`pq_string_free`].
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_dump(
    circuit: *const PqCircuit,
    out: *mut *mut c_char,
) -> PqStatus {
    guard(|| give_string(out, borrow(circuit, "circuit")?.0.dump()))
}

/// Applies `n_steps` Trotter steps to `state` in place.
///
/// # Safety
/// `circuit` and `state` must be live handles.
#[no_mangle]
pub unsafe extern "C" fn pq_circuit_apply(
    circuit: *const PqCircuit,
    state: *mut PqState,
    n_steps: usize,
) -> PqStatus {
    guard(|| {
        let c = &borrow(circuit, "circuit")?.0;
        let s = &mut borrow_mut(state, "state")?.0;
        for _ in 0..n_steps {
            c.apply_step(s).map_err(lib)?;
        }
        Ok(())
    })
}

/// The configured model's initial state.
///
/// # Safety
/// `cfg` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pq_state_initial(
    cfg: *const PqConfig,
    out: *mut *mut PqState,
) -> PqStatus {
    guard(|| {
        let s = runner::initial_state(&borrow(cfg, "config")?.0).map_err(lib)?;
        give(out, PqState(s))
    })
}

/// Independent copy of a state.
///
/// # Safety
/// `state` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pq_state_clone(state: *const PqState, out: *mut *mut PqState) -> PqStatus {
    guard(|| {
        let s = borrow(state, "state")?.0.clone();
        give(out, PqState(s))
    })
}

/// # Safety
/// `state` must come from this library and not have been freed. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn pq_state_free(state: *mut PqState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// Register dimension.
///
/// # Safety
/// `state` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn pq_state_dim(state: *const PqState) -> usize {
    state.as_ref().map(|s| s.0.amplitudes().len()).unwrap_or(0)
}

/// Copies amplitudes as interleaved `(re, im)` pairs into `buf`, which holds `len` doubles.
///
/// # Safety
/// `state` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn pq_state_amplitudes(
    state: *const PqState,
    buf: *mut f64,
    len: usize,
) -> PqStatus {
    guard(|| {
        let amps = borrow(state, "state")?.0.amplitudes();
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len != 2 * amps.len() {
            return Err((
                PqStatus::InvalidArgument,
                format!("buffer holds {len} doubles, need {}", 2 * amps.len()),
            ));
        }
        let out = std::slice::from_raw_parts_mut(buf, len);
        for (pair, a) in out.chunks_exact_mut(2).zip(amps) {
            pair[0] = a.re;
            pair[1] = a.im;
        }
        Ok(())
    })
}

/// Euclidean norm.
///
/// # Safety
/// `state` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pq_state_norm(state: *const PqState, out: *mut f64) -> PqStatus {
    guard(|| {
        let n = borrow(state, "state")?.0.norm();
        *borrow_mut(out, "output pointer")? = n;
        Ok(())
    })
}

/// Loschmidt echo `|<reference|state>|^2`.
///
/// # Safety
/// Both states must be live handles and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pq_state_echo(
    reference: *const PqState,
    state: *const PqState,
    out: *mut f64,
) -> PqStatus {
    guard(|| {
        let a = &borrow(reference, "reference")?.0;
        let b = &borrow(state, "state")?.0;
        let overlap = a.inner_product(b).map_err(lib)?;
        *borrow_mut(out, "output pointer")? = overlap.norm_sqr();
        Ok(())
    })
}
