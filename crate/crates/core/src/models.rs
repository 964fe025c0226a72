//! Lattice models: the 1+1D Yukawa theory on collective phonon modes and the
//! Schwinger model in the highly-occupied boson approximation on local modes.
//!
//! Sites are labelled `j = 1..N` in formulas and stored as qubit `j - 1`.
//! Jordan–Wigner uses `psi_j = prod_{l<j}(i Z_l) sigma^-_j`, so an occupied
//! site is spin up, which is qubit bit 0.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::fock::{self, FockWindow};
use crate::gates::{pauli_x, pauli_y, pauli_z};
use crate::operator::{ProductTerm, SparseOperator};
use crate::statespace::{basis_state, ordered_sum, RegisterLayout, Site, StateVector};
use crate::C64;

/// Treatment of the hopping term that wraps from site N back to site 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Plain two-body Pauli terms, exactly as the circuits realize them.
    #[default]
    Plain,
    /// Full Jordan–Wigner string on the wrap-around term.
    JordanWigner,
}

#[derive(Debug, Clone, PartialEq)]
pub struct YukawaParams {
    pub b: f64,
    pub n_sites: usize,
    pub cutoff: usize,
    pub g: f64,
    pub m_psi: f64,
    pub m_phi: f64,
    pub dt: f64,
    pub t_total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchwingerParams {
    pub b: f64,
    pub n_sites: usize,
    pub cutoff: usize,
    pub g: f64,
    pub m: f64,
    /// Background occupation `M` of every link mode.
    pub occupation: usize,
    pub dt: f64,
    pub t_total: f64,
}

fn check_lattice(n_sites: usize, b: f64, dt: f64, t_total: f64) -> Result<()> {
    if n_sites < 2 || !n_sites.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!(
            "site count must be even and at least 2, got {n_sites}"
        )));
    }
    for (name, v) in [("b", b), ("dt", dt)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParams(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    if !(t_total.is_finite() && t_total >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "t_total must be non-negative, got {t_total}"
        )));
    }
    step_count(dt, t_total).map(|_| ())
}

/// Number of Trotter steps covering `t_total`, which must be a whole multiple of `dt`.
pub fn step_count(dt: f64, t_total: f64) -> Result<usize> {
    let n = (t_total / dt).round();
    if (n * dt - t_total).abs() > 1e-9 * t_total.max(1.0) {
        return Err(Error::InvalidParams(format!(
            "t_total = {t_total} is not a multiple of dt = {dt}"
        )));
    }
    Ok(n as usize)
}

impl YukawaParams {
    pub fn validate(&self) -> Result<()> {
        check_lattice(self.n_sites, self.b, self.dt, self.t_total)?;
        if self.cutoff < 1 {
            return Err(Error::InvalidParams("cutoff must be at least 1".into()));
        }
        for (name, v) in [("g", self.g), ("m_psi", self.m_psi), ("m_phi", self.m_phi)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        if self.m_phi <= 0.0 {
            // the k = 0 mode would have zero energy and a divergent coupling
            return Err(Error::InvalidParams("m_phi must be positive".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> Result<usize> {
        step_count(self.dt, self.t_total)
    }

    /// N site qubits, the ancilla as qubit N, and N modes with occupations `0..=cutoff`.
    pub fn layout(&self) -> Result<RegisterLayout> {
        RegisterLayout::new(
            self.n_sites + 1,
            vec![FockWindow::cutoff(self.cutoff); self.n_sites],
        )
    }

    pub fn ancilla(&self) -> usize {
        self.n_sites
    }

    /// Momentum label `k = m - N/2 - 1` of the 1-based mode label `m`.
    pub fn momentum(&self, m: usize) -> i64 {
        m as i64 - self.n_sites as i64 / 2 - 1
    }

    /// Phase `2 pi j (m - N/2 - 1) / N` coupling site `j` to mode `m` (both 1-based).
    pub fn mode_phase(&self, m: usize, j: usize) -> f64 {
        2.0 * PI * j as f64 * self.momentum(m) as f64 / self.n_sites as f64
    }

    /// `sqrt(g^2 b / (8 N eps))` for each mode.
    pub fn couplings(&self) -> Vec<f64> {
        scalar_mode_energies(self)
            .iter()
            .map(|e| (self.g * self.g * self.b / (8.0 * self.n_sites as f64 * e)).sqrt())
            .collect()
    }
}

impl SchwingerParams {
    pub fn validate(&self) -> Result<()> {
        check_lattice(self.n_sites, self.b, self.dt, self.t_total)?;
        if self.cutoff < 1 {
            return Err(Error::InvalidParams("cutoff must be at least 1".into()));
        }
        if self.occupation == 0 {
            return Err(Error::InvalidParams(
                "background occupation M must be positive".into(),
            ));
        }
        if self.cutoff > self.occupation {
            return Err(Error::InvalidParams(format!(
                "cutoff {} exceeds background occupation {}",
                self.cutoff, self.occupation
            )));
        }
        for (name, v) in [("g", self.g), ("m", self.m)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    /// Advisory messages; the boson model only approaches the gauge theory for M much larger than N.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.occupation < self.n_sites {
            out.push(format!(
                "M = {} is smaller than N = {}; link algebra deviates strongly from U(1)",
                self.occupation, self.n_sites
            ));
        }
        out
    }

    pub fn n_steps(&self) -> Result<usize> {
        step_count(self.dt, self.t_total)
    }

    pub fn window(&self) -> Result<FockWindow> {
        FockWindow::around(self.occupation, self.cutoff)
    }

    /// N site qubits and N link modes on `[M - cutoff, M + cutoff]`.
    pub fn layout(&self) -> Result<RegisterLayout> {
        RegisterLayout::new(self.n_sites, vec![self.window()?; self.n_sites])
    }
}

/// `eps_k = sqrt((2 pi k / (N b))^2 + m_phi^2)` ordered by mode label `m = 1..N`.
pub fn scalar_mode_energies(p: &YukawaParams) -> Vec<f64> {
    (1..=p.n_sites)
        .map(|m| {
            let q = 2.0 * PI * p.momentum(m) as f64 / (p.n_sites as f64 * p.b);
            (q * q + p.m_phi * p.m_phi).sqrt()
        })
        .collect()
}

fn stagger(j: usize) -> f64 {
    if j.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn real(m: DMatrix<f64>) -> DMatrix<C64> {
    m.map(|x| c(x, 0.0))
}

fn q(j: usize) -> Site {
    Site::Qubit(j - 1)
}

fn md(j: usize) -> Site {
    Site::Mode(j - 1)
}

fn next(j: usize, n: usize) -> usize {
    j % n + 1
}

/// Sign and Z-string dressing of the wrap-around hopping term.
fn wrap_dressing(n: usize, boundary: Boundary) -> (f64, Vec<(Site, DMatrix<C64>)>) {
    match boundary {
        Boundary::Plain => (1.0, Vec::new()),
        Boundary::JordanWigner => {
            let sign = if (n / 2) % 2 == 1 { -1.0 } else { 1.0 };
            (sign, (2..n).map(|l| (q(l), pauli_z())).collect())
        }
    }
}

/// Hopping term on bond `(j, j+1)` with coefficient and two-site factors, dressed on the wrap bond.
fn bond_term(
    n: usize,
    j: usize,
    boundary: Boundary,
    coeff: C64,
    mut factors: Vec<(Site, DMatrix<C64>)>,
) -> ProductTerm {
    if j == n {
        let (sign, string) = wrap_dressing(n, boundary);
        factors.extend(string);
        ProductTerm::new(coeff * sign, factors)
    } else {
        ProductTerm::new(coeff, factors)
    }
}

/// The primed Yukawa pieces. Additive constants and zero-point energies are dropped.
#[derive(Debug, Clone)]
pub struct YukawaHamiltonian {
    pub hopping_xx: SparseOperator,
    pub hopping_yy: SparseOperator,
    pub mass: SparseOperator,
    /// Fermion–scalar coupling plus the free scalar energy.
    pub scalar: SparseOperator,
}

impl YukawaHamiltonian {
    pub fn pieces(&self) -> [&SparseOperator; 4] {
        [&self.hopping_xx, &self.hopping_yy, &self.mass, &self.scalar]
    }

    pub fn total(&self) -> SparseOperator {
        SparseOperator::sum(self.mass.dim(), self.pieces())
    }
}

pub fn yukawa_hamiltonian(p: &YukawaParams, boundary: Boundary) -> Result<YukawaHamiltonian> {
    p.validate()?;
    let layout = p.layout()?;
    let n = p.n_sites;
    let hop = c(1.0 / (4.0 * p.b), 0.0);
    let bonds = |pauli: fn() -> DMatrix<C64>| -> Vec<ProductTerm> {
        (1..=n)
            .map(|j| {
                bond_term(
                    n,
                    j,
                    boundary,
                    hop,
                    vec![(q(j), pauli()), (q(next(j, n)), pauli())],
                )
            })
            .collect()
    };
    let hopping_xx = SparseOperator::from_terms(&layout, &bonds(pauli_x))?;
    let hopping_yy = SparseOperator::from_terms(&layout, &bonds(pauli_y))?;
    let mass_terms: Vec<ProductTerm> = (1..=n)
        .map(|j| ProductTerm::new(0.5 * p.m_psi * stagger(j), vec![(q(j), pauli_z())]))
        .collect();
    let mass = SparseOperator::from_terms(&layout, &mass_terms)?;

    let eps = scalar_mode_energies(p);
    let coup = p.couplings();
    let w = FockWindow::cutoff(p.cutoff);
    let number = DMatrix::from_diagonal(&fock::number_matrix(w).map(|x| c(x, 0.0)));
    let one_plus_z =
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 0.0), c(0.0, 0.0)]));
    let mut terms = Vec::new();
    for j in 1..=n {
        for m in 1..=n {
            terms.push(ProductTerm::new(
                coup[m - 1],
                vec![
                    (q(j), one_plus_z.clone()),
                    (md(m), fock::quadrature(w, p.mode_phase(m, j))),
                ],
            ));
        }
    }
    for m in 1..=n {
        terms.push(ProductTerm::new(eps[m - 1], vec![(md(m), number.clone())]));
    }
    let scalar = SparseOperator::from_terms(&layout, &terms)?;
    Ok(YukawaHamiltonian {
        hopping_xx,
        hopping_yy,
        mass,
        scalar,
    })
}

/// The primed Schwinger pieces; the electric constant `g^2 b M^2 N / 2` is dropped.
#[derive(Debug, Clone)]
pub struct SchwingerHamiltonian {
    /// `XX(d + d†)`, `YY(d + d†)`, `i XY(d - d†)` and `-i YX(d - d†)` sums, in that order.
    pub hopping: [SparseOperator; 4],
    pub mass: SparseOperator,
    pub electric: SparseOperator,
}

impl SchwingerHamiltonian {
    pub fn pieces(&self) -> Vec<&SparseOperator> {
        self.hopping
            .iter()
            .chain([&self.mass, &self.electric])
            .collect()
    }

    pub fn total(&self) -> SparseOperator {
        SparseOperator::sum(self.mass.dim(), self.pieces())
    }
}

/// Local factors of the four hopping strings on bond `(j, j+1)`, with unit coefficient.
pub fn schwinger_hopping_factors(w: FockWindow, which: usize) -> [DMatrix<C64>; 3] {
    let a = real(fock::lowering_matrix(w));
    let ad = a.adjoint();
    let sym = &a + &ad;
    // i (d - d†), Hermitian
    let anti = (&a - &ad) * c(0.0, 1.0);
    match which {
        0 => [pauli_x(), pauli_x(), sym],
        1 => [pauli_y(), pauli_y(), sym],
        2 => [pauli_x(), pauli_y(), anti],
        3 => [pauli_y(), pauli_x(), -anti],
        _ => panic!("hopping string index {which} out of range"),
    }
}

pub fn schwinger_hamiltonian(
    p: &SchwingerParams,
    boundary: Boundary,
) -> Result<SchwingerHamiltonian> {
    p.validate()?;
    let layout = p.layout()?;
    let w = p.window()?;
    let n = p.n_sites;
    let coeff = c(1.0 / (8.0 * p.b * (p.occupation as f64).sqrt()), 0.0);
    let mut hopping = Vec::with_capacity(4);
    for which in 0..4 {
        let terms: Vec<ProductTerm> = (1..=n)
            .map(|j| {
                let [fj, fk, fm] = schwinger_hopping_factors(w, which);
                bond_term(
                    n,
                    j,
                    boundary,
                    coeff,
                    vec![(q(j), fj), (q(next(j, n)), fk), (md(j), fm)],
                )
            })
            .collect();
        hopping.push(SparseOperator::from_terms(&layout, &terms)?);
    }
    let mass_terms: Vec<ProductTerm> = (1..=n)
        .map(|j| ProductTerm::new(0.5 * p.m * stagger(j), vec![(q(j), pauli_z())]))
        .collect();
    let mass = SparseOperator::from_terms(&layout, &mass_terms)?;
    let half_g2b = 0.5 * p.g * p.g * p.b;
    let m_bg = p.occupation as f64;
    let electric_diag: Vec<C64> = w
        .occupations()
        .map(|k| {
            let k = k as f64;
            c(half_g2b * (-2.0 * m_bg * k + k * k), 0.0)
        })
        .collect();
    let electric_local = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(electric_diag));
    let electric_terms: Vec<ProductTerm> = (1..=n)
        .map(|j| ProductTerm::new(1.0, vec![(md(j), electric_local.clone())]))
        .collect();
    let electric = SparseOperator::from_terms(&layout, &electric_terms)?;
    let hopping: [SparseOperator; 4] = hopping.try_into().expect("four hopping strings");
    Ok(SchwingerHamiltonian {
        hopping,
        mass,
        electric,
    })
}

/// Eigenvalue of `G_j` (1-based `j`) on the basis state `index`.
pub fn gauss_value(layout: &RegisterLayout, occupation: usize, index: usize, j: usize) -> f64 {
    let n = layout.n_qubits();
    let e = |link: usize| layout.occupation(index, link - 1) as f64 - occupation as f64;
    let prev = if j == 1 { n } else { j - 1 };
    let filled = if layout.qubit_bit(index, j - 1) == 0 {
        1.0
    } else {
        0.0
    };
    let background = if j % 2 == 1 { 1.0 } else { 0.0 };
    e(j) - e(prev) - filled + background
}

/// `G_j = E_j - E_{j-1} - psi†_j psi_j + [1 - (-1)^j] / 2` with `E_0 = E_N`.
pub fn gauss_operator(p: &SchwingerParams, j: usize) -> Result<SparseOperator> {
    p.validate()?;
    if j == 0 || j > p.n_sites {
        return Err(Error::IndexOutOfRange {
            kind: "site",
            index: j,
            len: p.n_sites,
        });
    }
    let layout = p.layout()?;
    let diag: Vec<f64> = (0..layout.dim())
        .map(|i| gauss_value(&layout, p.occupation, i, j))
        .collect();
    Ok(SparseOperator::diagonal(&diag))
}

/// `sum_j <G_j^2>`, evaluated without building any operator.
pub fn gauss_violation(state: &StateVector, occupation: usize) -> f64 {
    let layout = state.layout();
    let n = layout.n_qubits();
    let amps = state.amplitudes();
    ordered_sum(amps.len(), |i| {
        let p = amps[i].norm_sqr();
        if p == 0.0 {
            return 0.0;
        }
        p * (1..=n)
            .map(|j| gauss_value(layout, occupation, i, j).powi(2))
            .sum::<f64>()
    })
}

/// Staggered vacuum bits: odd sites filled (spin up, bit 0), even sites empty.
pub fn vacuum_bits(n_sites: usize) -> Vec<u8> {
    (1..=n_sites)
        .map(|j| if j % 2 == 1 { 0 } else { 1 })
        .collect()
}

pub fn yukawa_initial_state(p: &YukawaParams) -> Result<StateVector> {
    p.validate()?;
    let layout = Arc::new(p.layout()?);
    let mut bits = vacuum_bits(p.n_sites);
    bits.push(0);
    basis_state(layout, &bits, &vec![0; p.n_sites])
}

pub fn schwinger_initial_state(p: &SchwingerParams) -> Result<StateVector> {
    p.validate()?;
    let layout = Arc::new(p.layout()?);
    basis_state(
        layout,
        &vacuum_bits(p.n_sites),
        &vec![p.occupation; p.n_sites],
    )
}

/// `sum_j psi†_j psi_j = sum_j (1 + Z_j) / 2` over the N site qubits.
pub fn fermion_number(layout: &RegisterLayout, n_sites: usize) -> SparseOperator {
    let diag: Vec<f64> = (0..layout.dim())
        .map(|i| {
            (0..n_sites)
                .filter(|&j| layout.qubit_bit(i, j) == 0)
                .count() as f64
        })
        .collect();
    SparseOperator::diagonal(&diag)
}

/// Total phonon number `sum_m <n_m>` divided by the number of modes.
pub fn mean_boson(state: &StateVector) -> f64 {
    let layout = state.layout();
    let nm = layout.n_modes();
    if nm == 0 {
        return 0.0;
    }
    let amps = state.amplitudes();
    let total = ordered_sum(amps.len(), |i| {
        let p = amps[i].norm_sqr();
        if p == 0.0 {
            return 0.0;
        }
        p * (0..nm).map(|m| layout.occupation(i, m) as f64).sum::<f64>()
    });
    total / nm as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn yukawa(n: usize, cutoff: usize, g: f64) -> YukawaParams {
        YukawaParams {
            b: 1.0,
            n_sites: n,
            cutoff,
            g,
            m_psi: 1.0,
            m_phi: 1.0,
            dt: 0.25,
            t_total: 5.0,
        }
    }

    fn schwinger(n: usize, cutoff: usize) -> SchwingerParams {
        SchwingerParams {
            b: 1.0,
            n_sites: n,
            cutoff,
            g: 0.35,
            m: 1.0,
            occupation: 10,
            dt: 0.125,
            t_total: 5.0,
        }
    }

    /// Fermion operators built straight from the Jordan–Wigner definition.
    struct Fermions {
        psi: Vec<SparseOperator>,
    }

    impl Fermions {
        fn new(layout: &RegisterLayout, n: usize) -> Self {
            let lower =
                DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(1., 0.), c(0., 0.)]);
            let psi = (1..=n)
                .map(|j| {
                    let mut f: Vec<(Site, DMatrix<C64>)> =
                        (1..j).map(|l| (q(l), pauli_z() * c(0.0, 1.0))).collect();
                    f.push((q(j), lower.clone()));
                    SparseOperator::from_terms(layout, &[ProductTerm::new(1.0, f)]).unwrap()
                })
                .collect();
            Self { psi }
        }

        fn psi(&self, j: usize) -> &SparseOperator {
            &self.psi[j - 1]
        }
    }

    fn mode_op(layout: &RegisterLayout, mode: usize, m: DMatrix<f64>) -> SparseOperator {
        SparseOperator::from_terms(
            layout,
            &[ProductTerm::new(1.0, vec![(Site::Mode(mode), real(m))])],
        )
        .unwrap()
    }

    fn dense_gap(a: &SparseOperator, b: &SparseOperator) -> f64 {
        a.add(&b.scaled(-1.0)).unwrap().max_abs()
    }

    #[test]
    fn mode_energies_match_table() {
        let e2 = scalar_mode_energies(&yukawa(2, 8, 1.0));
        assert!((e2[0] - 3.297).abs() < 5e-4 && (e2[1] - 1.0).abs() < 1e-15);
        let e4 = scalar_mode_energies(&yukawa(4, 1, 1.0));
        for (e, want) in e4.iter().zip([3.297, 1.862, 1.0, 1.862]) {
            assert!((e - want).abs() < 5e-4, "{e} vs {want}");
        }
        for n in [2, 6, 10] {
            assert_eq!(scalar_mode_energies(&yukawa(n, 1, 1.0))[n / 2], 1.0);
        }
    }

    #[test]
    fn coupling_prefactor() {
        let p = yukawa(4, 1, 5.0);
        assert!((p.couplings()[2] - (25.0f64 / 32.0).sqrt()).abs() < 1e-15);
        assert!((p.couplings()[2] - 0.8839).abs() < 1e-4);
    }

    #[test]
    fn params_validation() {
        let mut p = yukawa(3, 1, 1.0);
        assert!(p.validate().is_err());
        p.n_sites = 2;
        p.t_total = 0.3;
        assert!(p.validate().is_err());
        let mut s = schwinger(2, 11);
        assert!(s.validate().is_err());
        s.cutoff = 2;
        assert!(s.validate().is_ok());
        s.n_sites = 12;
        assert_eq!(s.warnings().len(), 1);
    }

    #[test]
    fn yukawa_pieces_hermitian_with_expected_entries() {
        let p = yukawa(2, 1, 5.0 * 2f64.sqrt());
        let h = yukawa_hamiltonian(&p, Boundary::Plain).unwrap();
        for piece in h.pieces() {
            assert!(piece.hermiticity_defect() < 1e-13);
        }
        // both bonds of the 2-site ring act on the same pair
        let l = p.layout().unwrap();
        let i = l.index_of(&[0, 0, 0], &[0, 0]).unwrap();
        let k = l.index_of(&[1, 1, 0], &[0, 0]).unwrap();
        let entry = h.hopping_xx.row(k).find(|e| e.0 == i).unwrap().1;
        assert!((entry - c(0.5, 0.0)).norm() < 1e-15);
        let p4 = yukawa(4, 1, 5.0);
        let h4 = yukawa_hamiltonian(&p4, Boundary::Plain).unwrap();
        let l4 = p4.layout().unwrap();
        let i = l4.index_of(&[0, 0, 0, 0, 0], &[0; 4]).unwrap();
        let k = l4.index_of(&[1, 1, 0, 0, 0], &[0; 4]).unwrap();
        let entry = h4.hopping_xx.row(k).find(|e| e.0 == i).unwrap().1;
        assert!((entry - c(0.25, 0.0)).norm() < 1e-15);
    }

    fn yukawa_direct(p: &YukawaParams) -> SparseOperator {
        let layout = p.layout().unwrap();
        let n = p.n_sites;
        let f = Fermions::new(&layout, n);
        let dim = layout.dim();
        let w = FockWindow::cutoff(p.cutoff);
        let eps = scalar_mode_energies(p);
        let mut parts = Vec::new();
        for j in 1..=n {
            let k = next(j, n);
            let fwd = f.psi(j).adjoint().mul(f.psi(k));
            let bwd = f.psi(k).adjoint().mul(f.psi(j));
            let hop = fwd.add(&bwd.scaled(-1.0)).unwrap();
            parts.push(scale_c(&hop, c(0.0, 1.0 / (2.0 * p.b))));
            let dens = f.psi(j).adjoint().mul(f.psi(j));
            parts.push(dens.scaled(p.m_psi * stagger(j)));
            // phi_j from the momentum-mode expansion
            let mut phi = SparseOperator::zeros(dim);
            for m in 1..=n {
                let kk = p.momentum(m) as f64;
                let ph = 2.0 * PI * kk * j as f64 / n as f64;
                let a = mode_op(&layout, m - 1, fock::lowering_matrix(w));
                let term = scale_c(&a.adjoint(), C64::from_polar(1.0, -ph))
                    .add(&scale_c(&a, C64::from_polar(1.0, ph)))
                    .unwrap()
                    .scaled(1.0 / (2.0 * eps[m - 1]).sqrt());
                phi = phi.add(&term).unwrap();
            }
            let phi = phi.scaled(1.0 / (n as f64 * p.b).sqrt());
            parts.push(f.psi(j).adjoint().mul(&phi).mul(f.psi(j)).scaled(p.g * p.b));
        }
        for m in 1..=n {
            let a = mode_op(&layout, m - 1, fock::lowering_matrix(w));
            parts.push(a.adjoint().mul(&a).scaled(eps[m - 1]));
        }
        SparseOperator::sum(dim, parts.iter())
    }

    fn scale_c(op: &SparseOperator, s: C64) -> SparseOperator {
        let dim = op.dim();
        SparseOperator::from_triplets(dim, op.triplets().map(|(r, k, v)| (r, k, v * s)).collect())
    }

    #[test]
    fn yukawa_primed_matches_fermion_transcription() {
        for n in [2, 4] {
            let p = yukawa(n, 1, 1.7);
            let primed = yukawa_hamiltonian(&p, Boundary::JordanWigner)
                .unwrap()
                .total();
            let direct = yukawa_direct(&p);
            assert!(dense_gap(&primed, &direct) < 1e-12, "N={n}");
        }
    }

    #[test]
    fn plain_boundary_differs_only_on_the_wrap_bond() {
        let p = yukawa(4, 1, 1.0);
        let plain = yukawa_hamiltonian(&p, Boundary::Plain).unwrap();
        let jw = yukawa_hamiltonian(&p, Boundary::JordanWigner).unwrap();
        assert!(dense_gap(&plain.mass, &jw.mass) == 0.0);
        assert!(dense_gap(&plain.hopping_xx, &jw.hopping_xx) > 0.1);
        // N = 2: the dressed wrap bond cancels the bulk bond exactly
        let p2 = yukawa(2, 1, 1.0);
        let jw2 = yukawa_hamiltonian(&p2, Boundary::JordanWigner).unwrap();
        assert_eq!(jw2.hopping_xx.nnz(), 0);
    }

    #[test]
    fn yukawa_conserves_fermion_number() {
        let p = yukawa(2, 1, 3.0);
        let l = p.layout().unwrap();
        let nf = fermion_number(&l, 2);
        for b in [Boundary::Plain, Boundary::JordanWigner] {
            let h = yukawa_hamiltonian(&p, b).unwrap().total();
            assert!(h.commutator(&nf).max_abs() < 1e-12);
        }
    }

    #[test]
    fn schwinger_coefficients() {
        let p = schwinger(2, 1);
        let h = schwinger_hamiltonian(&p, Boundary::Plain).unwrap();
        let l = p.layout().unwrap();
        let i = l.index_of(&[0, 1], &[10, 10]).unwrap();
        let e = h.electric.row(i).next().unwrap().1.re;
        assert!((e - 2.0 * (-1.225 * 10.0 + 0.06125 * 100.0)).abs() < 1e-12);
        let want_hop = 1.0 / (8.0 * 10f64.sqrt());
        assert!((want_hop - 0.03953).abs() < 1e-5);
        let u = h.hopping[0]
            .triplets()
            .map(|t| t.2.norm())
            .fold(0.0, f64::max);
        // two bonds on the same pair, times sqrt(11) at most from the link factor
        assert!(u <= 2.0 * want_hop * 11f64.sqrt() + 1e-12);
        for piece in h.pieces() {
            assert!(piece.hermiticity_defect() < 1e-13);
        }
    }

    #[test]
    fn schwinger_primed_matches_fermion_transcription() {
        for n in [2, 4] {
            let p = schwinger(n, 1);
            let l = p.layout().unwrap();
            let f = Fermions::new(&l, n);
            let w = p.window().unwrap();
            let dim = l.dim();
            let sqrt_m = (p.occupation as f64).sqrt();
            let mut parts = Vec::new();
            for j in 1..=n {
                let k = next(j, n);
                let u_dag = mode_op(&l, j - 1, fock::raising_matrix(w)).scaled(1.0 / sqrt_m);
                let fwd = f.psi(j).adjoint().mul(&u_dag).mul(f.psi(k));
                let hop = fwd.add(&fwd.adjoint().scaled(-1.0)).unwrap();
                parts.push(scale_c(&hop, c(0.0, 1.0 / (2.0 * p.b))));
                parts.push(f.psi(j).adjoint().mul(f.psi(j)).scaled(p.m * stagger(j)));
                let e = mode_op(&l, j - 1, DMatrix::from_diagonal(&fock::number_matrix(w)))
                    .add(&SparseOperator::diagonal(&vec![
                        -(p.occupation as f64);
                        dim
                    ]))
                    .unwrap();
                parts.push(e.mul(&e).scaled(0.5 * p.g * p.g * p.b));
            }
            let constant = 0.5 * p.g * p.g * p.b * (p.occupation as f64).powi(2) * n as f64;
            parts.push(SparseOperator::diagonal(&vec![-constant; dim]));
            let direct = SparseOperator::sum(dim, parts.iter());
            let primed = schwinger_hamiltonian(&p, Boundary::JordanWigner)
                .unwrap()
                .total();
            assert!(dense_gap(&primed, &direct) < 1e-12, "N={n}");
        }
    }

    #[test]
    fn schwinger_commutes_with_gauss_law() {
        for (n, cutoff) in [(2, 1), (2, 2), (4, 1), (4, 2)] {
            let p = schwinger(n, cutoff);
            for b in [Boundary::Plain, Boundary::JordanWigner] {
                let h = schwinger_hamiltonian(&p, b).unwrap().total();
                for j in 1..=n {
                    let g = gauss_operator(&p, j).unwrap();
                    assert!(g.is_diagonal() && g.hermiticity_defect() == 0.0);
                    assert!(
                        h.commutator(&g).max_abs() < 1e-12,
                        "N={n} cutoff={cutoff} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn gauss_law_on_vacuum_and_link_excitation() {
        let p = schwinger(4, 2);
        let psi = schwinger_initial_state(&p).unwrap();
        for j in 1..=4 {
            let g = gauss_operator(&p, j).unwrap();
            assert!(g.matvec(psi.amplitudes()).iter().all(|a| a.norm() == 0.0));
        }
        assert_eq!(gauss_violation(&psi, 10), 0.0);
        let l = p.layout().unwrap();
        let i = l.index_of(&vacuum_bits(4), &[10, 11, 10, 10]).unwrap();
        assert_eq!(gauss_value(&l, 10, i, 2), 1.0);
        assert_eq!(gauss_value(&l, 10, i, 3), -1.0);
        assert_eq!(gauss_value(&l, 10, i, 1), 0.0);
        assert!(gauss_operator(&p, 5).is_err());
    }

    #[test]
    fn initial_states() {
        let p = yukawa(2, 8, 1.0);
        let psi = yukawa_initial_state(&p).unwrap();
        assert_eq!(psi.layout().dim(), 8 * 81);
        assert_eq!(mean_boson(&psi), 0.0);
        let l = psi.layout();
        assert_eq!(
            psi.amplitudes()[l.index_of(&[0, 1, 0], &[0, 0]).unwrap()],
            c(1.0, 0.0)
        );
        let s = schwinger_initial_state(&schwinger(4, 2)).unwrap();
        assert_eq!(mean_boson(&s), 10.0);
        // staggered vacuum minimizes the mass term
        let sp = schwinger(4, 1);
        let h = schwinger_hamiltonian(&sp, Boundary::Plain).unwrap();
        let v = schwinger_initial_state(&sp).unwrap();
        assert!((h.mass.expectation(&v).re + 2.0).abs() < 1e-14);
    }
}
