//! Compilation of model parameters into Trotter-step gate sequences.
//!
//! Gate lists are in time order: the first gate acts first. A conjugated
//! block written as the operator product `A B C` therefore appears here as
//! `C, B, A`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gates::{apply_gate, gate_unitary, Gate, ModeCoupling};
use crate::models::{scalar_mode_energies, SchwingerParams, YukawaParams};
use crate::statespace::{RegisterLayout, StateVector};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Yukawa,
    Schwinger,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Yukawa => "yukawa",
            ModelKind::Schwinger => "schwinger",
        }
    }
}

/// Where the free scalar energy `sum_m eps_m n_m dt` is inserted in a Yukawa step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FramePolicy {
    /// A `dt / (N + 1)` slice after each of the N + 1 spin-phonon blocks.
    #[default]
    Interleaved,
    /// One frame gate after the last block.
    Lumped,
}

/// One Trotter step repeated `n_steps` times on a fixed register.
#[derive(Debug, Clone)]
pub struct Circuit {
    pub model: ModelKind,
    pub layout: Arc<RegisterLayout>,
    pub step: Vec<Gate>,
    pub n_steps: usize,
    pub dt: f64,
}

impl Circuit {
    pub fn validate(&self) -> Result<()> {
        self.step.iter().try_for_each(|g| g.validate(&self.layout))
    }

    pub fn apply_step(&self, state: &mut StateVector) -> Result<()> {
        if state.layout().as_ref() != self.layout.as_ref() {
            return Err(Error::LayoutMismatch);
        }
        for g in &self.step {
            apply_gate(state, g)?;
        }
        Ok(())
    }

    /// Dense product of the step's gate unitaries.
    pub fn step_unitary(&self) -> Result<DMatrix<C64>> {
        sequence_unitary(&self.step, &self.layout)
    }

    /// Text dump: a comment header, then one gate per line with 0-based targets.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "# {} qubits={} modes={} dt={:.16e} steps={}",
            self.model.name(),
            self.layout.n_qubits(),
            self.layout.n_modes(),
            self.dt,
            self.n_steps
        );
        for g in &self.step {
            let _ = writeln!(out, "{g}");
        }
        out
    }
}

/// Parses gate lines, skipping blank lines and `#` comments.
pub fn parse_gates(text: &str) -> Result<Vec<Gate>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| {
            l.parse::<Gate>().map_err(|message| Error::Parse {
                line: i + 1,
                message,
            })
        })
        .collect()
}

/// Dense product of a gate sequence in time order.
pub fn sequence_unitary(gates: &[Gate], layout: &RegisterLayout) -> Result<DMatrix<C64>> {
    let mut u = DMatrix::identity(layout.dim(), layout.dim());
    for g in gates {
        u = gate_unitary(g, layout)? * u;
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AngleKind {
    SpinSpin,
    SingleSpin,
    SpinPhonon,
    PhononLinear,
    PhononQuadratic,
}

impl AngleKind {
    pub fn name(&self) -> &'static str {
        match self {
            AngleKind::SpinSpin => "spin_spin",
            AngleKind::SingleSpin => "z_rotation",
            AngleKind::SpinPhonon => "spin_phonon",
            AngleKind::PhononLinear => "phonon_chi1",
            AngleKind::PhononQuadratic => "phonon_chi2",
        }
    }
}

/// One row of an angle table. Sites and modes are 1-based lattice labels.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleEntry {
    pub kind: AngleKind,
    pub site: Option<usize>,
    pub mode: Option<usize>,
    pub theta: f64,
    pub phi: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AngleTable {
    pub entries: Vec<AngleEntry>,
}

impl AngleTable {
    pub fn get(
        &self,
        kind: AngleKind,
        site: Option<usize>,
        mode: Option<usize>,
    ) -> Option<&AngleEntry> {
        self.entries
            .iter()
            .find(|e| e.kind == kind && e.site == site && e.mode == mode)
    }

    pub fn of_kind(&self, kind: AngleKind) -> impl Iterator<Item = &AngleEntry> {
        self.entries.iter().filter(move |e| e.kind == kind)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let mut out = String::from("kind,site,mode,theta,phi\n");
        for e in &self.entries {
            let phi = e.phi.map(|p| format!("{p:.16e}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{}",
                e.kind.name(),
                opt(e.site),
                opt(e.mode),
                e.theta,
                phi
            );
        }
        out
    }
}

/// Mode label `N/2 + 1` carries zero momentum.
pub fn zero_momentum_mode(n_sites: usize) -> usize {
    n_sites / 2 + 1
}

/// Angles for the Yukawa circuit.
///
/// The ancilla row holds the single zero-momentum coupling `N theta_m` that
/// realizes the identity part of `(I + Z_j)` summed over all sites.
pub fn yukawa_angles(p: &YukawaParams) -> Result<AngleTable> {
    p.validate()?;
    let n = p.n_sites;
    let mut entries = Vec::new();
    for j in 1..=n {
        entries.push(AngleEntry {
            kind: AngleKind::SpinSpin,
            site: Some(j),
            mode: None,
            theta: p.dt / (4.0 * p.b),
            phi: None,
        });
    }
    for j in 1..=n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        entries.push(AngleEntry {
            kind: AngleKind::SingleSpin,
            site: Some(j),
            mode: None,
            theta: 0.5 * p.m_psi * sign * p.dt,
            phi: None,
        });
    }
    let coup = p.couplings();
    for j in 1..=n {
        for m in 1..=n {
            entries.push(AngleEntry {
                kind: AngleKind::SpinPhonon,
                site: Some(j),
                mode: Some(m),
                theta: coup[m - 1] * p.dt,
                phi: Some(p.mode_phase(m, j)),
            });
        }
    }
    let m0 = zero_momentum_mode(n);
    entries.push(AngleEntry {
        kind: AngleKind::SpinPhonon,
        site: Some(n + 1),
        mode: Some(m0),
        theta: n as f64 * coup[m0 - 1] * p.dt,
        phi: Some(0.0),
    });
    Ok(AngleTable { entries })
}

/// `R(-pi/4, 0)`, the multi-mode spin-phonon gate, then `R(pi/4, 0)`: a Z-conditioned displacement.
pub fn yukawa_scalar_block(qubit: usize, couplings: Vec<ModeCoupling>) -> Vec<Gate> {
    vec![
        Gate::SpinRot {
            qubit,
            theta: -FRAC_PI_4,
            phi: 0.0,
        },
        Gate::SpinPhononMulti { qubit, couplings },
        Gate::SpinRot {
            qubit,
            theta: FRAC_PI_4,
            phi: 0.0,
        },
    ]
}

pub fn yukawa_step(p: &YukawaParams, policy: FramePolicy) -> Result<Vec<Gate>> {
    let angles = yukawa_angles(p)?;
    let n = p.n_sites;
    let next = |j: usize| j % n;
    let mut gates = Vec::new();
    let theta_ss = p.dt / (4.0 * p.b);
    for j in 0..n {
        gates.push(Gate::Ms {
            q1: j,
            q2: next(j + 1),
            theta: theta_ss,
        });
    }
    for j in 0..n {
        let k = next(j + 1);
        gates.push(Gate::s_dag(j));
        gates.push(Gate::s_dag(k));
        gates.push(Gate::Ms {
            q1: j,
            q2: k,
            theta: theta_ss,
        });
        gates.push(Gate::s(j));
        gates.push(Gate::s(k));
    }
    for e in angles.of_kind(AngleKind::SingleSpin) {
        gates.push(Gate::ZRot {
            qubit: e.site.unwrap() - 1,
            theta: e.theta,
        });
    }
    let eps = scalar_mode_energies(p);
    let frame = |duration: f64| Gate::PhononFrame {
        energies: eps.iter().enumerate().map(|(m, e)| (m, *e)).collect(),
        duration,
    };
    for j in 1..=n + 1 {
        let couplings = angles
            .of_kind(AngleKind::SpinPhonon)
            .filter(|e| e.site == Some(j))
            .map(|e| ModeCoupling {
                mode: e.mode.unwrap() - 1,
                theta: e.theta,
                phi: e.phi.unwrap(),
            })
            .collect();
        gates.extend(yukawa_scalar_block(j - 1, couplings));
        if policy == FramePolicy::Interleaved {
            gates.push(frame(p.dt / (n + 1) as f64));
        }
    }
    if policy == FramePolicy::Lumped {
        gates.push(frame(p.dt));
    }
    Ok(gates)
}

pub fn yukawa_circuit(p: &YukawaParams, policy: FramePolicy) -> Result<Circuit> {
    Ok(Circuit {
        model: ModelKind::Yukawa,
        layout: Arc::new(p.layout()?),
        step: yukawa_step(p, policy)?,
        n_steps: p.n_steps()?,
        dt: p.dt,
    })
}

pub fn schwinger_angles(p: &SchwingerParams) -> Result<AngleTable> {
    p.validate()?;
    let mut entries = Vec::new();
    let theta = p.dt / (8.0 * p.b * (p.occupation as f64).sqrt());
    for j in 1..=p.n_sites {
        entries.push(AngleEntry {
            kind: AngleKind::SpinPhonon,
            site: Some(j),
            mode: Some(j),
            theta,
            phi: None,
        });
    }
    for j in 1..=p.n_sites {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        entries.push(AngleEntry {
            kind: AngleKind::SingleSpin,
            site: Some(j),
            mode: None,
            theta: 0.5 * sign * p.m * p.dt,
            phi: None,
        });
    }
    let g2b = p.g * p.g * p.b;
    for j in 1..=p.n_sites {
        entries.push(AngleEntry {
            kind: AngleKind::PhononLinear,
            site: None,
            mode: Some(j),
            theta: -g2b * p.occupation as f64 * p.dt,
            phi: None,
        });
        entries.push(AngleEntry {
            kind: AngleKind::PhononQuadratic,
            site: None,
            mode: Some(j),
            theta: 0.5 * g2b * p.dt,
            phi: None,
        });
    }
    Ok(AngleTable { entries })
}

/// One site factor of one of the four hopping brackets, on qubits `j`, `k = j+1` and link mode `j` (0-based).
pub fn schwinger_block(bracket: usize, j: usize, k: usize, theta: f64) -> Vec<Gate> {
    // S powers applied on (j, k) around the block
    let (sj, sk, spin_phonon_theta, phi) = match bracket {
        0 => (1, 0, theta, 0.0),
        1 => (2, 1, theta, 0.0),
        2 => (1, 1, theta, FRAC_PI_2),
        3 => (2, 0, -theta, FRAC_PI_2),
        _ => panic!("bracket {bracket} out of range"),
    };
    let mut gates = Vec::new();
    gates.extend(std::iter::repeat_n(Gate::s_dag(j), sj));
    gates.extend(std::iter::repeat_n(Gate::s_dag(k), sk));
    gates.push(Gate::Ms {
        q1: j,
        q2: k,
        theta: -FRAC_PI_4,
    });
    gates.push(Gate::SpinRot {
        qubit: j,
        theta: -FRAC_PI_4,
        phi: 0.0,
    });
    gates.push(Gate::SpinPhononLocal {
        qubit: j,
        mode: j,
        theta: spin_phonon_theta,
        phi,
    });
    gates.push(Gate::SpinRot {
        qubit: j,
        theta: FRAC_PI_4,
        phi: 0.0,
    });
    gates.push(Gate::Ms {
        q1: j,
        q2: k,
        theta: FRAC_PI_4,
    });
    gates.extend(std::iter::repeat_n(Gate::s(j), sj));
    gates.extend(std::iter::repeat_n(Gate::s(k), sk));
    gates
}

pub fn schwinger_step(p: &SchwingerParams) -> Result<Vec<Gate>> {
    let angles = schwinger_angles(p)?;
    let n = p.n_sites;
    let mut gates = Vec::new();
    for bracket in 0..4 {
        for e in angles.of_kind(AngleKind::SpinPhonon) {
            let j = e.site.unwrap() - 1;
            gates.extend(schwinger_block(bracket, j, (j + 1) % n, e.theta));
        }
    }
    for e in angles.of_kind(AngleKind::SingleSpin) {
        gates.push(Gate::ZRot {
            qubit: e.site.unwrap() - 1,
            theta: e.theta,
        });
    }
    for m in 1..=n {
        let chi1 = angles
            .get(AngleKind::PhononLinear, None, Some(m))
            .unwrap()
            .theta;
        let chi2 = angles
            .get(AngleKind::PhononQuadratic, None, Some(m))
            .unwrap()
            .theta;
        gates.push(Gate::PhononSelf {
            mode: m - 1,
            chi1,
            chi2,
        });
    }
    Ok(gates)
}

pub fn schwinger_circuit(p: &SchwingerParams) -> Result<Circuit> {
    Ok(Circuit {
        model: ModelKind::Schwinger,
        layout: Arc::new(p.layout()?),
        step: schwinger_step(p)?,
        n_steps: p.n_steps()?,
        dt: p.dt,
    })
}

/// A published angle compared with the value its defining formula gives.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleConflict {
    pub label: &'static str,
    pub published: f64,
    pub formula: f64,
    pub note: &'static str,
}

impl AngleConflict {
    pub fn ratio(&self) -> f64 {
        self.published / self.formula
    }
}

/// Reference angles whose printed values disagree with the circuit formulas.
///
/// The formulas are used by every circuit: only they reproduce each Hamiltonian
/// term exactly, and the trap parameters derived from them agree with the
/// published Rabi frequencies.
pub fn angle_conflicts() -> Vec<AngleConflict> {
    let yukawa = YukawaParams {
        b: 1.0,
        n_sites: 2,
        cutoff: 8,
        g: 5.0 * 2f64.sqrt(),
        m_psi: 1.0,
        m_phi: 1.0,
        dt: 0.25,
        t_total: 5.0,
    };
    let coup = yukawa.couplings();
    let schwinger_theta = 0.125 / (8.0 * 10f64.sqrt());
    vec![
        AngleConflict {
            label: "yukawa N=2 spin-phonon angle, mode 1",
            published: 0.344,
            formula: coup[0] * yukawa.dt,
            note: "published value is sqrt(2) = sqrt(N) times the formula",
        },
        AngleConflict {
            label: "yukawa N=2 spin-phonon angle, mode 2",
            published: 0.625,
            formula: coup[1] * yukawa.dt,
            note: "published value is sqrt(2) = sqrt(N) times the formula",
        },
        AngleConflict {
            label: "schwinger spin-phonon angle (M=10, dt=0.125)",
            published: 0.008,
            formula: schwinger_theta,
            note: "published value matches dt/(16 b), not dt/(8 b sqrt(M))",
        },
    ]
}

pub fn conflict_report() -> String {
    let mut out = String::from("label,published,formula,ratio,note\n");
    for c in angle_conflicts() {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{}",
            c.label,
            c.published,
            c.formula,
            c.ratio(),
            c.note
        );
    }
    out
}
