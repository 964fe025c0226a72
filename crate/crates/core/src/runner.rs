//! Orchestration of a configured experiment: circuits, trajectories and reports.

use std::fs;
use std::path::{Path, PathBuf};

use crate::circuits::{
    schwinger_angles, schwinger_circuit, yukawa_angles, yukawa_circuit, Circuit,
};
use crate::config::{ModelParams, RunConfig};
use crate::cost::{analog_digital_report, digital_estimate, reports_to_csv, CostReport};
use crate::error::{Error, Result};
use crate::evolve::{
    exact_evolve, run_trotter_in_place, sample_times, ExactOptions, ObservableSpec, Trajectory,
};
use crate::hardware::{schwinger_sheet, yukawa_sheet};
use crate::models::{
    schwinger_hamiltonian, schwinger_initial_state, yukawa_hamiltonian, yukawa_initial_state,
};
use crate::operator::SparseOperator;
use crate::statespace::StateVector;

pub fn circuit(cfg: &RunConfig) -> Result<Circuit> {
    match &cfg.params {
        ModelParams::Yukawa(p) => yukawa_circuit(p, cfg.frame_policy),
        ModelParams::Schwinger(p) => schwinger_circuit(p),
    }
}

pub fn initial_state(cfg: &RunConfig) -> Result<StateVector> {
    match &cfg.params {
        ModelParams::Yukawa(p) => yukawa_initial_state(p),
        ModelParams::Schwinger(p) => schwinger_initial_state(p),
    }
}

pub fn hamiltonian(cfg: &RunConfig) -> Result<SparseOperator> {
    match &cfg.params {
        ModelParams::Yukawa(p) => Ok(yukawa_hamiltonian(p, cfg.boundary)?.total()),
        ModelParams::Schwinger(p) => Ok(schwinger_hamiltonian(p, cfg.boundary)?.total()),
    }
}

pub fn observables(cfg: &RunConfig, psi0: &StateVector) -> ObservableSpec {
    let spec = ObservableSpec::new(psi0);
    match &cfg.params {
        ModelParams::Yukawa(_) => spec,
        ModelParams::Schwinger(p) => spec.with_gauss(p.occupation, cfg.boson_report),
    }
}

pub fn angles_csv(cfg: &RunConfig) -> Result<String> {
    Ok(match &cfg.params {
        ModelParams::Yukawa(p) => yukawa_angles(p)?.to_csv(),
        ModelParams::Schwinger(p) => schwinger_angles(p)?.to_csv(),
    })
}

/// Hardware parameter sheet as CSV; `None` when the config has no trap section.
pub fn hardware_csv(cfg: &RunConfig) -> Result<Option<String>> {
    let Some(h) = &cfg.hardware else {
        return Ok(None);
    };
    let missing = |key| Error::ConfigMissing(key);
    let csv = match &cfg.params {
        ModelParams::Yukawa(p) => {
            let trap = h.trap().ok_or(missing("omega_z_khz"))?;
            yukawa_sheet(p, &trap, h.tau_gate())?.to_csv()
        }
        ModelParams::Schwinger(p) => {
            let trap = h.local_trap(p.n_sites).ok_or(missing("eta_sw"))?;
            let tau_phonon = h.tau_phonon().ok_or(missing("tau_phonon_us"))?;
            schwinger_sheet(p, &trap, h.tau_gate(), tau_phonon)?.to_csv()
        }
    };
    Ok(Some(csv))
}

/// Analog-digital counts, plus the digital estimate when the cutoff supports a binary register.
pub fn cost_reports(cfg: &RunConfig) -> Result<Vec<CostReport>> {
    let (model, n, cutoff) = (cfg.params.kind(), cfg.params.n_sites(), cfg.params.cutoff());
    let mut out = vec![analog_digital_report(model, n, cutoff)?];
    if cutoff >= 2 {
        out.push(digital_estimate(model, n, cutoff)?);
    }
    Ok(out)
}

pub fn exact_trajectory(cfg: &RunConfig) -> Result<Trajectory> {
    let c = circuit(cfg)?;
    let psi0 = initial_state(cfg)?;
    let spec = observables(cfg, &psi0);
    let opts = ExactOptions {
        method: cfg.exact_method,
        ..ExactOptions::default()
    };
    let times = sample_times(c.dt, c.n_steps, cfg.stride);
    exact_evolve(&hamiltonian(cfg)?, &psi0, &times, &spec, &opts)
}

/// Evolves a single state in place; the register is never copied.
pub fn trotter_trajectory(cfg: &RunConfig) -> Result<Trajectory> {
    let c = circuit(cfg)?;
    let mut psi = initial_state(cfg)?;
    let spec = observables(cfg, &psi);
    let mut traj = Trajectory::default();
    run_trotter_in_place(&c, &mut psi, c.n_steps, cfg.stride, |t, s| {
        traj.push(t, spec.measure(s))
    })?;
    Ok(traj)
}

/// Files written by [`run`], in the order they were produced.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<PathBuf>,
}

fn write(dir: &Path, name: &str, text: &str, out: &mut Artifacts) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    out.files.push(path);
    Ok(())
}

/// Writes reports first, then the trajectories selected by `solver`, into `output_dir`.
pub fn run(cfg: &RunConfig) -> Result<Artifacts> {
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Artifacts::default();
    write(dir, "angles.csv", &angles_csv(cfg)?, &mut out)?;
    write(
        dir,
        "cost.csv",
        &reports_to_csv(&cost_reports(cfg)?),
        &mut out,
    )?;
    if let Some(csv) = hardware_csv(cfg)? {
        write(dir, "hardware.csv", &csv, &mut out)?;
    }
    if cfg.solver.exact() {
        write(
            dir,
            "trajectory_exact.csv",
            &exact_trajectory(cfg)?.to_csv(),
            &mut out,
        )?;
    }
    if cfg.solver.trotter() {
        write(
            dir,
            "trajectory_trotter.csv",
            &trotter_trajectory(cfg)?.to_csv(),
            &mut out,
        )?;
    }
    Ok(out)
}
