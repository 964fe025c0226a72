//! Entangling-gate accounting.
//!
//! Analog-digital counts come from traversing compiled Trotter steps. Fully
//! digital counts are leading-order estimates with unit constants, with the
//! boson register sized to `L = ceil(log2(cutoff))` qubits.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::circuits::{schwinger_step, yukawa_step, FramePolicy, ModelKind};
use crate::error::{Error, Result};
use crate::gates::{Gate, GateFamily};
use crate::models::{SchwingerParams, YukawaParams};

/// Gate multiset of one Trotter step, by family.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct GateCounts {
    pub ms: u64,
    pub spin_phonon: u64,
    pub phonon_phonon: u64,
    pub single_qubit: u64,
    pub phonon_frame: u64,
}

pub fn count_gates(gates: &[Gate]) -> GateCounts {
    let mut c = GateCounts::default();
    for g in gates {
        match g.family() {
            GateFamily::Ms => c.ms += 1,
            GateFamily::SpinPhononMulti | GateFamily::SpinPhononLocal => c.spin_phonon += 1,
            GateFamily::PhononSelf => c.phonon_phonon += 1,
            GateFamily::SpinRot | GateFamily::ZRot => c.single_qubit += 1,
            GateFamily::PhononFrame => c.phonon_frame += 1,
        }
    }
    c
}

/// Per-step counts of a compiled circuit.
pub fn count_circuit(circuit: &crate::circuits::Circuit) -> GateCounts {
    count_gates(&circuit.step)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    AnalogDigital,
    Digital,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::AnalogDigital => "analog_digital",
            Scheme::Digital => "digital",
        }
    }
}

/// Entangling gates spent on one Hamiltonian term per Trotter step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermCost {
    pub term: &'static str,
    pub entangling: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    pub model: ModelKind,
    pub n_sites: usize,
    pub cutoff: usize,
    pub scheme: Scheme,
    pub terms: Vec<TermCost>,
    /// Traversal counts; present for the analog-digital scheme.
    pub gates: Option<GateCounts>,
}

impl CostReport {
    pub fn total(&self) -> u64 {
        self.terms.iter().map(|t| t.entangling).sum()
    }

    pub fn term(&self, name: &str) -> Option<u64> {
        self.terms
            .iter()
            .find(|t| t.term == name)
            .map(|t| t.entangling)
    }
}

pub const YUKAWA_TERMS: [&str; 4] = [
    "fermion_hopping",
    "fermion_mass",
    "free_scalar",
    "interaction",
];
pub const SCHWINGER_TERMS: [&str; 3] = ["fermion_gauge", "fermion_mass", "electric"];

fn check_sites(n_sites: usize) -> Result<()> {
    if n_sites < 2 || !n_sites.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "site count must be even and at least 2, got {n_sites}"
        )));
    }
    Ok(())
}

fn check_size(n_sites: usize, cutoff: usize) -> Result<()> {
    check_sites(n_sites)?;
    if cutoff < 2 {
        return Err(Error::InvalidParams(format!(
            "cutoff must be at least 2, got {cutoff}"
        )));
    }
    Ok(())
}

/// Qubits per boson register, `ceil(log2(cutoff))`.
pub fn register_qubits(cutoff: usize) -> u64 {
    cutoff.next_power_of_two().trailing_zeros() as u64
}

/// Counts from a step compiled with nominal parameters; gate counts do not depend on them.
pub fn analog_digital_report(
    model: ModelKind,
    n_sites: usize,
    cutoff: usize,
) -> Result<CostReport> {
    check_sites(n_sites)?;
    if cutoff == 0 {
        return Err(Error::InvalidParams("cutoff must be positive".into()));
    }
    let (gates, terms) = match model {
        ModelKind::Yukawa => {
            let p = YukawaParams {
                b: 1.0,
                n_sites,
                cutoff,
                g: 1.0,
                m_psi: 1.0,
                m_phi: 1.0,
                dt: 0.1,
                t_total: 0.1,
            };
            let c = count_gates(&yukawa_step(&p, FramePolicy::Interleaved)?);
            // spin-phonon blocks and frame shifts need no spin-spin gates
            (c, vec![c.ms, 0, 0, 0])
        }
        ModelKind::Schwinger => {
            let p = SchwingerParams {
                b: 1.0,
                n_sites,
                cutoff,
                g: 1.0,
                m: 1.0,
                occupation: cutoff,
                dt: 0.1,
                t_total: 0.1,
            };
            let c = count_gates(&schwinger_step(&p)?);
            (c, vec![c.ms, 0, c.phonon_phonon])
        }
    };
    Ok(CostReport {
        model,
        n_sites,
        cutoff,
        scheme: Scheme::AnalogDigital,
        terms: term_names(model)
            .iter()
            .copied()
            .zip(terms)
            .map(|(term, entangling)| TermCost { term, entangling })
            .collect(),
        gates: Some(gates),
    })
}

fn term_names(model: ModelKind) -> &'static [&'static str] {
    match model {
        ModelKind::Yukawa => &YUKAWA_TERMS,
        ModelKind::Schwinger => &SCHWINGER_TERMS,
    }
}

/// Leading-order CNOT counts for a fully digital encoding.
pub fn digital_estimate(model: ModelKind, n_sites: usize, cutoff: usize) -> Result<CostReport> {
    check_size(n_sites, cutoff)?;
    let n = n_sites as u64;
    let l = register_qubits(cutoff);
    let terms = match model {
        ModelKind::Yukawa => vec![2 * n, 0, 0, n * n * l * l],
        ModelKind::Schwinger => vec![n * l * l, 0, n * l * (l - 1)],
    };
    Ok(CostReport {
        model,
        n_sites,
        cutoff,
        scheme: Scheme::Digital,
        terms: term_names(model)
            .iter()
            .copied()
            .zip(terms)
            .map(|(term, entangling)| TermCost { term, entangling })
            .collect(),
        gates: None,
    })
}

/// Least-squares `(p, q)` in `cost ~ c N^p L^q` from `(N, L, cost)` samples with positive cost.
pub fn fit_exponents(samples: &[(f64, f64, f64)]) -> Result<(f64, f64)> {
    let rows: Vec<_> = samples.iter().filter(|s| s.2 > 0.0).collect();
    if rows.len() < 3 {
        return Err(Error::InvalidParams(
            "need at least three samples with positive cost".into(),
        ));
    }
    let a = DMatrix::from_fn(rows.len(), 3, |i, k| match k {
        0 => 1.0,
        1 => rows[i].0.ln(),
        _ => rows[i].1.ln(),
    });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|s| s.2.ln()));
    let x = a
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::InvalidParams(e.to_string()))?;
    Ok((x[1], x[2]))
}

/// Exponents of one digital term over a grid of site counts and cutoffs.
pub fn digital_exponents(
    model: ModelKind,
    term: &str,
    sites: &[usize],
    cutoffs: &[usize],
) -> Result<(f64, f64)> {
    let mut samples = Vec::new();
    for &n in sites {
        for &c in cutoffs {
            let r = digital_estimate(model, n, c)?;
            let cost = r
                .term(term)
                .ok_or_else(|| Error::InvalidParams(format!("unknown term {term}")))?;
            samples.push((n as f64, register_qubits(c) as f64, cost as f64));
        }
    }
    fit_exponents(&samples)
}

pub const CSV_HEADER: &str = "model,n_sites,cutoff,scheme,term,entangling\n";

pub fn reports_to_csv(reports: &[CostReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    for r in reports {
        for t in &r.terms {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.model.name(),
                r.n_sites,
                r.cutoff,
                r.scheme.name(),
                t.term,
                t.entangling
            );
        }
    }
    out
}

pub fn reports_to_json(reports: &[CostReport]) -> String {
    serde_json::to_string_pretty(reports).expect("cost reports serialize")
}
