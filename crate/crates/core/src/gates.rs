//! The native gate set: single-spin rotations, spin-phonon couplings on
//! collective or local modes, Mølmer-Sørensen spin-spin rotations,
//! standing-wave phonon self-interactions, and the interaction-picture
//! frame phase.

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{self, FockWindow};
use crate::operator::{ProductTerm, SparseOperator};
use crate::statespace::{RegisterLayout, Site, StateVector};
use crate::C64;

/// One term of a multi-mode spin-phonon rotation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoupling {
    pub mode: usize,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    /// `exp(-i theta (cos phi X - sin phi Y))`
    SpinRot { qubit: usize, theta: f64, phi: f64 },
    /// `exp(-i theta Z)`
    ZRot { qubit: usize, theta: f64 },
    /// `exp(-i sum_k theta_k (e^{i phi_k} a_k + e^{-i phi_k} a_k^dagger) Y)`
    SpinPhononMulti {
        qubit: usize,
        couplings: Vec<ModeCoupling>,
    },
    /// Single local mode version of [`Gate::SpinPhononMulti`].
    SpinPhononLocal {
        qubit: usize,
        mode: usize,
        theta: f64,
        phi: f64,
    },
    /// `exp(-i theta X X)`
    Ms { q1: usize, q2: usize, theta: f64 },
    /// `exp(-i (chi1 n + chi2 n^2))`
    PhononSelf { mode: usize, chi1: f64, chi2: f64 },
    /// `exp(-i sum_m eps_m n_m dt)`; the zero-point constant is not included.
    PhononFrame {
        energies: Vec<(usize, f64)>,
        duration: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateFamily {
    SpinRot,
    ZRot,
    SpinPhononMulti,
    SpinPhononLocal,
    Ms,
    PhononSelf,
    PhononFrame,
}

impl GateFamily {
    pub const ALL: [GateFamily; 7] = [
        GateFamily::SpinRot,
        GateFamily::ZRot,
        GateFamily::SpinPhononMulti,
        GateFamily::SpinPhononLocal,
        GateFamily::Ms,
        GateFamily::PhononSelf,
        GateFamily::PhononFrame,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            GateFamily::SpinRot => "SPIN_ROT",
            GateFamily::ZRot => "Z_ROT",
            GateFamily::SpinPhononMulti => "SPIN_PHONON",
            GateFamily::SpinPhononLocal => "SPIN_PHONON_LOCAL",
            GateFamily::Ms => "MS",
            GateFamily::PhononSelf => "PHONON_SELF",
            GateFamily::PhononFrame => "PHONON_FRAME",
        }
    }
}

impl Gate {
    /// Phase gate `S = R^z(pi/4)`.
    pub fn s(qubit: usize) -> Gate {
        Gate::ZRot {
            qubit,
            theta: FRAC_PI_4,
        }
    }

    pub fn s_dag(qubit: usize) -> Gate {
        Gate::ZRot {
            qubit,
            theta: -FRAC_PI_4,
        }
    }

    pub fn family(&self) -> GateFamily {
        match self {
            Gate::SpinRot { .. } => GateFamily::SpinRot,
            Gate::ZRot { .. } => GateFamily::ZRot,
            Gate::SpinPhononMulti { .. } => GateFamily::SpinPhononMulti,
            Gate::SpinPhononLocal { .. } => GateFamily::SpinPhononLocal,
            Gate::Ms { .. } => GateFamily::Ms,
            Gate::PhononSelf { .. } => GateFamily::PhononSelf,
            Gate::PhononFrame { .. } => GateFamily::PhononFrame,
        }
    }

    /// Sites the gate acts on, in the order its local matrix uses.
    /// True for gates that are diagonal in the register basis.
    pub fn is_diagonal(&self) -> bool {
        matches!(
            self,
            Gate::ZRot { .. } | Gate::PhononSelf { .. } | Gate::PhononFrame { .. }
        )
    }

    /// The same gate with qubit and mode labels mapped through `qubit` and `mode`.
    pub fn relabeled(&self, qubit: impl Fn(usize) -> usize, mode: impl Fn(usize) -> usize) -> Gate {
        let mut g = self.clone();
        match &mut g {
            Gate::SpinRot { qubit: q, .. } | Gate::ZRot { qubit: q, .. } => *q = qubit(*q),
            Gate::SpinPhononMulti {
                qubit: q,
                couplings,
            } => {
                *q = qubit(*q);
                couplings.iter_mut().for_each(|c| c.mode = mode(c.mode));
            }
            Gate::SpinPhononLocal {
                qubit: q, mode: m, ..
            } => {
                *q = qubit(*q);
                *m = mode(*m);
            }
            Gate::Ms { q1, q2, .. } => {
                *q1 = qubit(*q1);
                *q2 = qubit(*q2);
            }
            Gate::PhononSelf { mode: m, .. } => *m = mode(*m),
            Gate::PhononFrame { energies, .. } => {
                energies.iter_mut().for_each(|e| e.0 = mode(e.0));
            }
        }
        g
    }

    pub fn targets(&self) -> Vec<Site> {
        match self {
            Gate::SpinRot { qubit, .. } | Gate::ZRot { qubit, .. } => vec![Site::Qubit(*qubit)],
            Gate::SpinPhononMulti { qubit, couplings } => std::iter::once(Site::Qubit(*qubit))
                .chain(couplings.iter().map(|c| Site::Mode(c.mode)))
                .collect(),
            Gate::SpinPhononLocal { qubit, mode, .. } => {
                vec![Site::Qubit(*qubit), Site::Mode(*mode)]
            }
            Gate::Ms { q1, q2, .. } => vec![Site::Qubit(*q1), Site::Qubit(*q2)],
            Gate::PhononSelf { mode, .. } => vec![Site::Mode(*mode)],
            Gate::PhononFrame { energies, .. } => {
                energies.iter().map(|(m, _)| Site::Mode(*m)).collect()
            }
        }
    }

    fn angles(&self) -> Vec<f64> {
        match self {
            Gate::SpinRot { theta, phi, .. } => vec![*theta, *phi],
            Gate::ZRot { theta, .. } => vec![*theta],
            Gate::SpinPhononMulti { couplings, .. } => {
                couplings.iter().flat_map(|c| [c.theta, c.phi]).collect()
            }
            Gate::SpinPhononLocal { theta, phi, .. } => vec![*theta, *phi],
            Gate::Ms { theta, .. } => vec![*theta],
            Gate::PhononSelf { chi1, chi2, .. } => vec![*chi1, *chi2],
            Gate::PhononFrame { energies, duration } => std::iter::once(*duration)
                .chain(energies.iter().map(|e| e.1))
                .collect(),
        }
    }

    pub fn validate(&self, layout: &RegisterLayout) -> Result<()> {
        if self.angles().iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("gate angle"));
        }
        let targets = self.targets();
        for (k, t) in targets.iter().enumerate() {
            layout.site_dim(*t)?;
            if targets[..k].contains(t) {
                return Err(Error::InvalidParams(format!(
                    "gate {self} repeats target {t:?}"
                )));
            }
        }
        Ok(())
    }

    /// Hermitian generator `K` with gate unitary `exp(-i K)`.
    pub fn generator(&self, layout: &RegisterLayout) -> Result<SparseOperator> {
        self.validate(layout)?;
        let terms = match self {
            Gate::SpinRot { qubit, theta, phi } => vec![
                ProductTerm::new(theta * phi.cos(), vec![(Site::Qubit(*qubit), pauli_x())]),
                ProductTerm::new(-theta * phi.sin(), vec![(Site::Qubit(*qubit), pauli_y())]),
            ],
            Gate::ZRot { qubit, theta } => {
                vec![ProductTerm::new(
                    *theta,
                    vec![(Site::Qubit(*qubit), pauli_z())],
                )]
            }
            Gate::SpinPhononMulti { qubit, couplings } => couplings
                .iter()
                .map(|c| {
                    ProductTerm::new(
                        c.theta,
                        vec![
                            (Site::Qubit(*qubit), pauli_y()),
                            (
                                Site::Mode(c.mode),
                                fock::quadrature(layout.window(c.mode), c.phi),
                            ),
                        ],
                    )
                })
                .collect(),
            Gate::SpinPhononLocal {
                qubit,
                mode,
                theta,
                phi,
            } => vec![ProductTerm::new(
                *theta,
                vec![
                    (Site::Qubit(*qubit), pauli_y()),
                    (
                        Site::Mode(*mode),
                        fock::quadrature(layout.window(*mode), *phi),
                    ),
                ],
            )],
            Gate::Ms { q1, q2, theta } => vec![ProductTerm::new(
                *theta,
                vec![(Site::Qubit(*q1), pauli_x()), (Site::Qubit(*q2), pauli_x())],
            )],
            Gate::PhononSelf { mode, chi1, chi2 } => {
                let n = number_op(layout.window(*mode));
                let n2 = &n * &n;
                vec![ProductTerm::new(
                    1.0,
                    vec![(
                        Site::Mode(*mode),
                        n * C64::from(*chi1) + n2 * C64::from(*chi2),
                    )],
                )]
            }
            Gate::PhononFrame { energies, duration } => energies
                .iter()
                .map(|(m, eps)| {
                    ProductTerm::new(
                        eps * duration,
                        vec![(Site::Mode(*m), number_op(layout.window(*m)))],
                    )
                })
                .collect(),
        };
        SparseOperator::from_terms(layout, &terms)
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family().tag())?;
        match self {
            Gate::SpinRot { qubit, theta, phi } => write!(f, " {qubit} {theta:.16e} {phi:.16e}"),
            Gate::ZRot { qubit, theta } => write!(f, " {qubit} {theta:.16e}"),
            Gate::SpinPhononMulti { qubit, couplings } => {
                write!(f, " {qubit}")?;
                for c in couplings {
                    write!(f, " {} {:.16e} {:.16e}", c.mode, c.theta, c.phi)?;
                }
                Ok(())
            }
            Gate::SpinPhononLocal {
                qubit,
                mode,
                theta,
                phi,
            } => write!(f, " {qubit} {mode} {theta:.16e} {phi:.16e}"),
            Gate::Ms { q1, q2, theta } => write!(f, " {q1} {q2} {theta:.16e}"),
            Gate::PhononSelf { mode, chi1, chi2 } => write!(f, " {mode} {chi1:.16e} {chi2:.16e}"),
            Gate::PhononFrame { energies, duration } => {
                write!(f, " {duration:.16e}")?;
                for (m, e) in energies {
                    write!(f, " {m} {e:.16e}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Gate {
    type Err = String;

    fn from_str(line: &str) -> std::result::Result<Self, String> {
        let mut it = line.split_whitespace();
        let tag = it.next().ok_or("empty line")?;
        let rest: Vec<&str> = it.collect();
        let int = |s: &str| s.parse::<usize>().map_err(|e| format!("{s:?}: {e}"));
        let real = |s: &str| s.parse::<f64>().map_err(|e| format!("{s:?}: {e}"));
        let want = |n: usize| {
            if rest.len() == n {
                Ok(())
            } else {
                Err(format!("{tag} expects {n} fields, got {}", rest.len()))
            }
        };
        match tag {
            "SPIN_ROT" => {
                want(3)?;
                Ok(Gate::SpinRot {
                    qubit: int(rest[0])?,
                    theta: real(rest[1])?,
                    phi: real(rest[2])?,
                })
            }
            "Z_ROT" => {
                want(2)?;
                Ok(Gate::ZRot {
                    qubit: int(rest[0])?,
                    theta: real(rest[1])?,
                })
            }
            "SPIN_PHONON" => {
                if rest.is_empty() || !(rest.len() - 1).is_multiple_of(3) {
                    return Err("SPIN_PHONON expects qubit then (mode theta phi) triples".into());
                }
                let couplings = rest[1..]
                    .chunks(3)
                    .map(|c| {
                        Ok(ModeCoupling {
                            mode: int(c[0])?,
                            theta: real(c[1])?,
                            phi: real(c[2])?,
                        })
                    })
                    .collect::<std::result::Result<_, String>>()?;
                Ok(Gate::SpinPhononMulti {
                    qubit: int(rest[0])?,
                    couplings,
                })
            }
            "SPIN_PHONON_LOCAL" => {
                want(4)?;
                Ok(Gate::SpinPhononLocal {
                    qubit: int(rest[0])?,
                    mode: int(rest[1])?,
                    theta: real(rest[2])?,
                    phi: real(rest[3])?,
                })
            }
            "MS" => {
                want(3)?;
                Ok(Gate::Ms {
                    q1: int(rest[0])?,
                    q2: int(rest[1])?,
                    theta: real(rest[2])?,
                })
            }
            "PHONON_SELF" => {
                want(3)?;
                Ok(Gate::PhononSelf {
                    mode: int(rest[0])?,
                    chi1: real(rest[1])?,
                    chi2: real(rest[2])?,
                })
            }
            "PHONON_FRAME" => {
                if rest.is_empty() || !(rest.len() - 1).is_multiple_of(2) {
                    return Err("PHONON_FRAME expects duration then (mode energy) pairs".into());
                }
                let energies = rest[1..]
                    .chunks(2)
                    .map(|c| Ok((int(c[0])?, real(c[1])?)))
                    .collect::<std::result::Result<_, String>>()?;
                Ok(Gate::PhononFrame {
                    energies,
                    duration: real(rest[0])?,
                })
            }
            other => Err(format!("unknown gate family {other:?}")),
        }
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> DMatrix<C64> {
    DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

pub fn identity2() -> DMatrix<C64> {
    DMatrix::identity(2, 2)
}

fn number_op(w: FockWindow) -> DMatrix<C64> {
    DMatrix::from_diagonal(&fock::number_matrix(w).map(|n| c(n, 0.0)))
}

fn spin_rot_matrix(theta: f64, phi: f64) -> DMatrix<C64> {
    let (s, co) = theta.sin_cos();
    let off = c(0.0, -s);
    DMatrix::from_row_slice(
        2,
        2,
        &[
            c(co, 0.0),
            off * C64::from_polar(1.0, phi),
            off * C64::from_polar(1.0, -phi),
            c(co, 0.0),
        ],
    )
}

fn ms_matrix(theta: f64) -> DMatrix<C64> {
    let (s, co) = theta.sin_cos();
    let d = c(co, 0.0);
    let o = c(0.0, -s);
    let z = c(0.0, 0.0);
    DMatrix::from_row_slice(4, 4, &[d, z, z, o, z, d, o, z, z, o, d, z, o, z, z, d])
}

/// Columns are the sigma^y eigenvectors for s = +1 and s = -1.
fn y_eigenbasis() -> DMatrix<C64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_row_slice(2, 2, &[c(r, 0.), c(r, 0.), c(0., r), c(0., -r)])
}

/// `exp(-i theta s Q_phi)` on the window for spin eigenvalue `s = ±1`.
pub fn conditional_displacement(w: FockWindow, theta: f64, phi: f64, s: f64) -> DMatrix<C64> {
    (fock::quadrature(w, phi) * c(0.0, -theta * s)).exp()
}

fn block_diag(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let d = a.nrows();
    let mut m = DMatrix::zeros(2 * d, 2 * d);
    m.view_mut((0, 0), (d, d)).copy_from(a);
    m.view_mut((d, d), (d, d)).copy_from(b);
    m
}

fn apply_spin_phonon(
    state: &mut StateVector,
    qubit: usize,
    couplings: &[ModeCoupling],
) -> Result<()> {
    let v = y_eigenbasis();
    state.apply_local(&v.adjoint(), &[Site::Qubit(qubit)])?;
    for cpl in couplings {
        let w = state.layout().window(cpl.mode);
        let plus = conditional_displacement(w, cpl.theta, cpl.phi, 1.0);
        let minus = conditional_displacement(w, cpl.theta, cpl.phi, -1.0);
        state.apply_local(
            &block_diag(&plus, &minus),
            &[Site::Qubit(qubit), Site::Mode(cpl.mode)],
        )?;
    }
    state.apply_local(&v, &[Site::Qubit(qubit)])
}

/// Applies `gate` to `state` in place using the closed-form or per-mode strategy of each family.
pub fn apply_gate(state: &mut StateVector, gate: &Gate) -> Result<()> {
    gate.validate(state.layout())?;
    match gate {
        Gate::SpinRot { qubit, theta, phi } => {
            state.apply_local(&spin_rot_matrix(*theta, *phi), &[Site::Qubit(*qubit)])
        }
        Gate::ZRot { qubit, theta } => state.apply_diagonal(
            &[C64::from_polar(1.0, -theta), C64::from_polar(1.0, *theta)],
            &[Site::Qubit(*qubit)],
        ),
        Gate::Ms { q1, q2, theta } => {
            state.apply_local(&ms_matrix(*theta), &[Site::Qubit(*q1), Site::Qubit(*q2)])
        }
        Gate::SpinPhononMulti { qubit, couplings } => apply_spin_phonon(state, *qubit, couplings),
        Gate::SpinPhononLocal {
            qubit,
            mode,
            theta,
            phi,
        } => apply_spin_phonon(
            state,
            *qubit,
            &[ModeCoupling {
                mode: *mode,
                theta: *theta,
                phi: *phi,
            }],
        ),
        Gate::PhononSelf { mode, chi1, chi2 } => {
            let w = state.layout().window(*mode);
            state.apply_diagonal(&fock::phase_diagonal(w, *chi1, *chi2), &[Site::Mode(*mode)])
        }
        Gate::PhononFrame { energies, duration } => {
            for (m, eps) in energies {
                let w = state.layout().window(*m);
                state.apply_diagonal(
                    &fock::phase_diagonal(w, eps * duration, 0.0),
                    &[Site::Mode(*m)],
                )?;
            }
            Ok(())
        }
    }
}

/// Largest register for which [`gate_unitary`] builds a dense matrix.
pub const DENSE_UNITARY_LIMIT: usize = 4096;

/// Dense unitary of `gate` on the full register, from the matrix exponential of its generator.
pub fn gate_unitary(gate: &Gate, layout: &RegisterLayout) -> Result<DMatrix<C64>> {
    if layout.dim() > DENSE_UNITARY_LIMIT {
        return Err(Error::DimensionTooLarge {
            dim: layout.dim(),
            limit: DENSE_UNITARY_LIMIT,
        });
    }
    let k = gate.generator(layout)?.to_dense();
    Ok((k * c(0.0, -1.0)).exp())
}
