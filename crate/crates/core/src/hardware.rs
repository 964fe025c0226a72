//! Translation of circuit angles into trap and laser parameters.
//!
//! Frequencies are angular (rad/s) internally; [`khz`] and [`to_khz`]
//! convert from and to `f / 2pi` in kHz, the unit used in parameter sheets.
//! Ion positions are in units of `(e^2 / (4 pi eps0 m omega_z^2))^(1/3)`.

use std::f64::consts::PI;
use std::fmt::{self, Write as _};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::circuits::{schwinger_angles, yukawa_angles, AngleKind};
use crate::error::{Error, Result};
use crate::models::{scalar_mode_energies, SchwingerParams, YukawaParams};

/// `2 pi * f` for `f` in kHz.
pub fn khz(f: f64) -> f64 {
    2.0 * PI * 1e3 * f
}

/// Angular frequency to `f / 2pi` in kHz.
pub fn to_khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

/// Transverse direction the gates address. Informational only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeAxis {
    #[default]
    X,
    Y,
}

impl fmt::Display for ModeAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeAxis::X => "x",
            ModeAxis::Y => "y",
        })
    }
}

/// Linear Paul trap with harmonic axial confinement.
#[derive(Debug, Clone, PartialEq)]
pub struct TrapConfig {
    pub n_ions: usize,
    /// Transverse center-of-mass frequency.
    pub omega_x: f64,
    /// Axial frequency.
    pub omega_z: f64,
    /// Single-ion Lamb-Dicke parameter at `omega_x`.
    pub eta_base: f64,
    pub mode_axis: ModeAxis,
}

impl TrapConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_ions < 1 {
            return Err(Error::Hardware("need at least one ion".into()));
        }
        if !(self.omega_z > 0.0 && self.omega_x > self.omega_z && self.omega_x.is_finite()) {
            return Err(Error::Hardware(format!(
                "need omega_x > omega_z > 0, got omega_x = {}, omega_z = {}",
                self.omega_x, self.omega_z
            )));
        }
        if !(self.eta_base > 0.0 && self.eta_base < 0.2) {
            return Err(Error::Hardware(format!(
                "Lamb-Dicke parameter {} outside (0, 0.2)",
                self.eta_base
            )));
        }
        Ok(())
    }
}

/// Axial equilibrium positions of `n` ions, ascending.
pub fn equilibrium_positions(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let force = |u: &DVector<f64>| -> DVector<f64> {
        DVector::from_fn(n, |i, _| {
            let mut f = u[i];
            for j in 0..n {
                if j != i {
                    let d = u[i] - u[j];
                    f -= d.signum() / (d * d);
                }
            }
            f
        })
    };
    let scale = 2.0 * (n as f64).powf(-0.56);
    let mut u = DVector::from_fn(n, |i, _| (i as f64 - (n as f64 - 1.0) / 2.0) * scale);
    let mut f = force(&u);
    for _ in 0..200 {
        if f.amax() < 1e-12 {
            return Ok(u.iter().copied().collect());
        }
        let jac = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0 + (0..n)
                    .filter(|&k| k != i)
                    .map(|k| 2.0 / (u[i] - u[k]).abs().powi(3))
                    .sum::<f64>()
            } else {
                -2.0 / (u[i] - u[j]).abs().powi(3)
            }
        });
        let step = jac
            .cholesky()
            .ok_or_else(|| Error::Hardware("singular equilibrium Jacobian".into()))?
            .solve(&f);
        // backtrack until ordering is kept and the residual drops
        let mut lambda = 1.0;
        loop {
            let trial = &u - &step * lambda;
            let ordered = trial.as_slice().windows(2).all(|w| w[0] < w[1]);
            if ordered {
                let ft = force(&trial);
                if ft.norm() < f.norm() || lambda < 1e-6 {
                    u = trial;
                    f = ft;
                    break;
                }
            }
            lambda *= 0.5;
            if lambda < 1e-12 {
                return Err(Error::Hardware("equilibrium line search stalled".into()));
            }
        }
    }
    Err(Error::Hardware(format!(
        "equilibrium solve did not reach 1e-12 residual (at {:.3e})",
        f.amax()
    )))
}

/// Eigen-decomposition of the transverse Coulomb matrix, `mu` ascending.
///
/// Transverse mode frequencies are `omega_x^2 - mu_m omega_z^2`; eigenvectors are
/// the columns of the returned matrix.
pub fn coulomb_spectrum(positions: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let n = positions.len();
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (0..n)
                .filter(|&k| k != i)
                .map(|k| 1.0 / (positions[i] - positions[k]).abs().powi(3))
                .sum()
        } else {
            -1.0 / (positions[i] - positions[j]).abs().powi(3)
        }
    });
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mu = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    (mu, vecs)
}

/// Transverse normal modes of a chain.
#[derive(Debug, Clone)]
pub struct NormalModes {
    /// Axial positions, ascending.
    pub positions: Vec<f64>,
    /// Coulomb eigenvalues `mu_m`, same order as `frequencies`.
    pub mu: Vec<f64>,
    /// Angular frequencies, descending; the COM mode is first.
    pub frequencies: Vec<f64>,
    /// `vectors[(m, j)]` = component of mode `m` on ion `j`.
    pub vectors: DMatrix<f64>,
}

impl NormalModes {
    /// `eta[(m, j)] = eta_base sqrt(omega_x / omega_m) b_{m,j}`.
    pub fn lamb_dicke(&self, cfg: &TrapConfig) -> DMatrix<f64> {
        DMatrix::from_fn(self.frequencies.len(), self.frequencies.len(), |m, j| {
            cfg.eta_base * (cfg.omega_x / self.frequencies[m]).sqrt() * self.vectors[(m, j)]
        })
    }
}

pub fn normal_modes(cfg: &TrapConfig) -> Result<NormalModes> {
    cfg.validate()?;
    let positions = equilibrium_positions(cfg.n_ions)?;
    let (mu, cols) = coulomb_spectrum(&positions);
    let n = cfg.n_ions;
    let mut frequencies = Vec::with_capacity(n);
    for &m in &mu {
        let w2 = cfg.omega_x * cfg.omega_x - m * cfg.omega_z * cfg.omega_z;
        if w2 <= 0.0 {
            return Err(Error::Hardware(format!(
                "transverse mode unstable (omega^2 = {w2:.3e}); raise omega_x or lower omega_z"
            )));
        }
        frequencies.push(w2.sqrt());
    }
    let mut vectors = cols.transpose();
    // first non-negligible component positive; for the COM mode that makes all positive
    for m in 0..n {
        let lead = (0..n)
            .map(|j| vectors[(m, j)])
            .find(|v| v.abs() > 1e-9)
            .unwrap_or(1.0);
        if lead < 0.0 {
            for j in 0..n {
                vectors[(m, j)] = -vectors[(m, j)];
            }
        }
    }
    Ok(NormalModes {
        positions,
        mu,
        frequencies,
        vectors,
    })
}

/// Least-squares `omega_z` from measured transverse frequencies (descending).
pub fn fit_axial_frequency(omega_x: f64, measured: &[f64]) -> Result<f64> {
    let (mu, _) = coulomb_spectrum(&equilibrium_positions(measured.len())?);
    let (num, den) = mu
        .iter()
        .zip(measured)
        .fold((0.0, 0.0), |(n, d), (&m, &w)| {
            (n + m * (omega_x * omega_x - w * w), d + m * m)
        });
    if den == 0.0 {
        return Err(Error::Hardware(
            "need at least two ions to fit omega_z".into(),
        ));
    }
    Ok((num / den).sqrt())
}

/// Rabi frequency `2 theta / (eta tau)` producing rotation angle `theta` in time `tau`.
pub fn spin_phonon_rabi(theta: f64, eta: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::Hardware(format!(
            "gate time must be positive, got {tau}"
        )));
    }
    if theta == 0.0 {
        return Ok(0.0);
    }
    if eta == 0.0 {
        return Err(Error::Hardware("zero Lamb-Dicke coupling".into()));
    }
    Ok(2.0 * theta / (eta * tau))
}

/// Inverse of [`spin_phonon_rabi`].
pub fn spin_phonon_angle(omega: f64, eta: f64, tau: f64) -> f64 {
    eta * omega * tau / 2.0
}

/// Interaction-picture shift `eps_m dt / (tau (N + 1))` for each model mode.
pub fn frame_shifts_yukawa(p: &YukawaParams, tau: f64) -> Result<Vec<f64>> {
    if !(tau > 0.0) {
        return Err(Error::Hardware(format!(
            "gate time must be positive, got {tau}"
        )));
    }
    let blocks = (p.n_sites + 1) as f64;
    Ok(scalar_mode_energies(p)
        .iter()
        .map(|e| e * p.dt / (tau * blocks))
        .collect())
}

/// Standing-wave drive realizing the phonon self-interaction gate.
#[derive(Debug, Clone, PartialEq)]
pub struct StandingWave {
    /// Amplitude `F`.
    pub force: f64,
    /// Linear angle the drive produces on its own, `2 F (-eta^2 + eta^4) tau`.
    pub native_chi1: f64,
    /// Sideband frequency shift supplying the remaining linear term.
    pub delta_omega: f64,
    /// `F eta^2 / omega_x`, which must be small.
    pub adiabatic_ratio: f64,
    pub feasible: bool,
}

pub fn standing_wave_params(
    chi1: f64,
    chi2: f64,
    eta_sw: f64,
    omega_x: f64,
    tau_aa: f64,
) -> Result<StandingWave> {
    if !(eta_sw > 0.0 && eta_sw < 0.2) {
        return Err(Error::Hardware(format!(
            "standing-wave Lamb-Dicke parameter {eta_sw} outside (0, 0.2)"
        )));
    }
    if !(tau_aa > 0.0) {
        return Err(Error::Hardware(format!(
            "gate time must be positive, got {tau_aa}"
        )));
    }
    let e2 = eta_sw * eta_sw;
    let force = chi2 / (2.0 * e2 * e2 * tau_aa);
    let native_chi1 = 2.0 * force * (-e2 + e2 * e2) * tau_aa;
    let adiabatic_ratio = force * e2 / omega_x;
    let feasible = adiabatic_ratio.abs() < 0.01;
    if !feasible {
        return Err(Error::Hardware(format!(
            "standing-wave amplitude too large: F eta^2 / omega_x = {adiabatic_ratio:.3e}"
        )));
    }
    Ok(StandingWave {
        force,
        native_chi1,
        delta_omega: (chi1 - native_chi1) / tau_aa,
        adiabatic_ratio,
        feasible,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Warn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub status: CheckStatus,
}

impl Check {
    fn below(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            status: if value.abs() < limit {
                CheckStatus::Pass
            } else {
                CheckStatus::Warn
            },
        }
    }
}

/// Limit used for every "much less than one" condition.
pub const SMALL: f64 = 0.3;

/// One spin-phonon drive: ion `ion` (1-based) on trap mode `mode` (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Drive {
    pub ion: usize,
    pub mode: usize,
    pub theta: f64,
    pub eta: f64,
    pub rabi: f64,
}

#[derive(Debug, Clone)]
pub struct YukawaSheet {
    pub trap: TrapConfig,
    pub modes: NormalModes,
    /// Lamb-Dicke matrix, trap mode by ion.
    pub eta: DMatrix<f64>,
    /// Trap mode (0-based) carrying each model mode `m = 1..N`.
    pub mode_map: Vec<usize>,
    pub tau_gate: f64,
    pub drives: Vec<Drive>,
    /// Per trap mode; zero on unused modes.
    pub frame_shifts: Vec<f64>,
    pub checks: Vec<Check>,
}

/// Maps the N Yukawa modes onto the first N trap modes whose eigenvectors
/// touch every one of the N + 1 driven ions, in order of falling frequency.
pub fn yukawa_sheet(p: &YukawaParams, trap: &TrapConfig, tau_gate: f64) -> Result<YukawaSheet> {
    p.validate()?;
    let n = p.n_sites;
    let active = n + 1;
    if trap.n_ions < active {
        return Err(Error::Hardware(format!(
            "{} ions cannot host {n} sites plus an ancilla",
            trap.n_ions
        )));
    }
    let modes = normal_modes(trap)?;
    let eta = modes.lamb_dicke(trap);
    let mode_map: Vec<usize> = (0..trap.n_ions)
        .filter(|&k| (0..active).all(|j| modes.vectors[(k, j)].abs() > 1e-6))
        .take(n)
        .collect();
    if mode_map.len() < n {
        return Err(Error::Hardware(format!(
            "only {} of {} trap modes couple to all {active} driven ions",
            mode_map.len(),
            n
        )));
    }
    let angles = yukawa_angles(p)?;
    let mut drives = Vec::new();
    for e in angles.of_kind(AngleKind::SpinPhonon) {
        let (ion, m) = (e.site.unwrap(), e.mode.unwrap());
        let k = mode_map[m - 1];
        let eta_kj = eta[(k, ion - 1)];
        let rabi = spin_phonon_rabi(e.theta, eta_kj, tau_gate).map_err(|err| {
            Error::Hardware(format!(
                "ion {ion} is stationary in trap mode {}: {err}",
                k + 1
            ))
        })?;
        drives.push(Drive {
            ion,
            mode: k + 1,
            theta: e.theta,
            eta: eta_kj,
            rabi,
        });
    }
    let mut frame_shifts = vec![0.0; trap.n_ions];
    for (m, s) in frame_shifts_yukawa(p, tau_gate)?.into_iter().enumerate() {
        frame_shifts[mode_map[m]] = s;
    }
    let eta_max = mode_map
        .iter()
        .flat_map(|&k| (0..active).map(move |j| (k, j)))
        .map(|kj| eta[kj].abs())
        .fold(0.0, f64::max);
    let checks = vec![
        Check::below("lamb_dicke", eta_max, 0.2),
        Check::below(
            "eta_sqrt_2n_plus_1",
            eta_max * (2.0 * p.cutoff as f64 + 1.0).sqrt(),
            SMALL,
        ),
    ];
    Ok(YukawaSheet {
        trap: trap.clone(),
        modes,
        eta,
        mode_map,
        tau_gate,
        drives,
        frame_shifts,
        checks,
    })
}

/// Tight-binding local modes, one per ion.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTrap {
    pub n_ions: usize,
    pub omega_x: f64,
    /// Raman Lamb-Dicke parameter.
    pub eta: f64,
    /// Standing-wave Lamb-Dicke parameter.
    pub eta_sw: f64,
    /// Axial frequency, if known; enables the phonon-hopping check.
    pub omega_z: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SchwingerSheet {
    pub trap: LocalTrap,
    pub theta: f64,
    pub rabi: f64,
    pub tau_spin_phonon: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub tau_phonon: f64,
    pub standing_wave: StandingWave,
    pub checks: Vec<Check>,
}

pub fn schwinger_sheet(
    p: &SchwingerParams,
    trap: &LocalTrap,
    tau_spin_phonon: f64,
    tau_phonon: f64,
) -> Result<SchwingerSheet> {
    if trap.n_ions < p.n_sites {
        return Err(Error::Hardware(format!(
            "{} ions cannot host {} sites",
            trap.n_ions, p.n_sites
        )));
    }
    if !(trap.eta > 0.0 && trap.eta < 0.2) {
        return Err(Error::Hardware(format!(
            "Lamb-Dicke parameter {} outside (0, 0.2)",
            trap.eta
        )));
    }
    let angles = schwinger_angles(p)?;
    let first = |kind| angles.of_kind(kind).next().map(|e| e.theta).unwrap_or(0.0);
    let theta = first(AngleKind::SpinPhonon);
    let chi1 = first(AngleKind::PhononLinear);
    let chi2 = first(AngleKind::PhononQuadratic);
    let rabi = spin_phonon_rabi(theta, trap.eta, tau_spin_phonon)?;
    let standing_wave = standing_wave_params(chi1, chi2, trap.eta_sw, trap.omega_x, tau_phonon)?;
    let root_m = (p.occupation as f64).sqrt();
    let mut checks = vec![
        Check::below("eta_sqrt_m", trap.eta * root_m, SMALL),
        Check::below("eta_sw_sqrt_m", trap.eta_sw * root_m, SMALL),
        Check::below("adiabatic_ratio", standing_wave.adiabatic_ratio, 0.01),
    ];
    if let Some(omega_z) = trap.omega_z {
        checks.push(Check::below(
            "hopping_phase",
            local_hopping_rate(trap.n_ions, trap.omega_x, omega_z)? * tau_phonon,
            SMALL,
        ));
    }
    Ok(SchwingerSheet {
        trap: trap.clone(),
        theta,
        rabi,
        tau_spin_phonon,
        chi1,
        chi2,
        tau_phonon,
        standing_wave,
        checks,
    })
}

/// Largest nearest-neighbor phonon hopping rate `omega_z^2 / (2 omega_x d^3)`.
pub fn local_hopping_rate(n_ions: usize, omega_x: f64, omega_z: f64) -> Result<f64> {
    let u = equilibrium_positions(n_ions)?;
    let d_min = u
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min);
    if !d_min.is_finite() {
        return Ok(0.0);
    }
    Ok(omega_z * omega_z / (2.0 * omega_x * d_min.powi(3)))
}

/// Condition checks for a Schwinger sheet at background occupation `m`
/// (recomputed so callers can vary `m` without rebuilding the sheet).
pub fn feasibility_report(sheet: &SchwingerSheet, m: usize) -> Vec<Check> {
    let root_m = (m as f64).sqrt();
    let mut out = vec![
        Check::below("eta_sqrt_m", sheet.trap.eta * root_m, SMALL),
        Check::below("eta_sw_sqrt_m", sheet.trap.eta_sw * root_m, SMALL),
    ];
    out.extend(
        sheet
            .checks
            .iter()
            .filter(|c| !matches!(c.name, "eta_sqrt_m" | "eta_sw_sqrt_m"))
            .cloned(),
    );
    out
}

const CSV_HEADER: &str = "quantity,mode,ion,value,unit\n";

fn row(out: &mut String, q: &str, mode: Option<usize>, ion: Option<usize>, v: f64, unit: &str) {
    let opt = |x: Option<usize>| x.map(|x| x.to_string()).unwrap_or_default();
    let _ = writeln!(out, "{q},{},{},{v:.6},{unit}", opt(mode), opt(ion));
}

fn check_rows(out: &mut String, checks: &[Check]) {
    for c in checks {
        let status = match c.status {
            CheckStatus::Pass => "pass",
            CheckStatus::Warn => "warn",
        };
        row(
            out,
            &format!("check_{}_{status}", c.name),
            None,
            None,
            c.value,
            "",
        );
    }
}

impl YukawaSheet {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        row(&mut out, "eta_base", None, None, self.trap.eta_base, "");
        row(
            &mut out,
            "omega_z",
            None,
            None,
            to_khz(self.trap.omega_z),
            "kHz",
        );
        for (k, w) in self.modes.frequencies.iter().enumerate() {
            row(&mut out, "omega_mode", Some(k + 1), None, to_khz(*w), "kHz");
        }
        for &k in &self.mode_map {
            for j in 0..=self.mode_map.len() {
                row(
                    &mut out,
                    "eta",
                    Some(k + 1),
                    Some(j + 1),
                    self.eta[(k, j)],
                    "",
                );
            }
        }
        for d in &self.drives {
            row(
                &mut out,
                "rabi",
                Some(d.mode),
                Some(d.ion),
                to_khz(d.rabi),
                "kHz",
            );
        }
        row(&mut out, "tau_gate", None, None, self.tau_gate * 1e6, "us");
        for (k, s) in self.frame_shifts.iter().enumerate() {
            row(
                &mut out,
                "frame_shift",
                Some(k + 1),
                None,
                to_khz(*s),
                "kHz",
            );
        }
        check_rows(&mut out, &self.checks);
        out
    }
}

impl SchwingerSheet {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        row(
            &mut out,
            "omega_x",
            None,
            None,
            to_khz(self.trap.omega_x),
            "kHz",
        );
        row(&mut out, "eta", None, None, self.trap.eta, "");
        row(&mut out, "theta", None, None, self.theta, "rad");
        row(&mut out, "rabi", None, None, to_khz(self.rabi), "kHz");
        row(
            &mut out,
            "tau_spin_phonon",
            None,
            None,
            self.tau_spin_phonon * 1e6,
            "us",
        );
        row(&mut out, "chi1", None, None, self.chi1, "rad");
        row(&mut out, "chi2", None, None, self.chi2, "rad");
        row(
            &mut out,
            "force",
            None,
            None,
            to_khz(self.standing_wave.force),
            "kHz",
        );
        row(&mut out, "eta_sw", None, None, self.trap.eta_sw, "");
        row(
            &mut out,
            "delta_omega_x",
            None,
            None,
            to_khz(self.standing_wave.delta_omega),
            "kHz",
        );
        row(
            &mut out,
            "tau_phonon",
            None,
            None,
            self.tau_phonon * 1e6,
            "us",
        );
        check_rows(&mut out, &self.checks);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trap3() -> TrapConfig {
        TrapConfig {
            n_ions: 3,
            omega_x: khz(4000.0),
            omega_z: khz(699.9),
            eta_base: 0.068,
            mode_axis: ModeAxis::X,
        }
    }

    #[test]
    fn two_and_three_ion_positions() {
        let u = equilibrium_positions(2).unwrap();
        let want = 0.25f64.powf(1.0 / 3.0);
        assert!((u[1] - want).abs() < 1e-12 && (u[0] + want).abs() < 1e-12);
        let u = equilibrium_positions(3).unwrap();
        assert!(u[1].abs() < 1e-12);
        assert!((u[2] - 1.25f64.powf(1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn coulomb_eigenvalues_known_for_three_ions() {
        let (mu, _) = coulomb_spectrum(&equilibrium_positions(3).unwrap());
        assert!(mu[0].abs() < 1e-10);
        assert!((mu[1] - 1.0).abs() < 1e-10);
        assert!((mu[2] - 2.4).abs() < 1e-10);
    }

    #[test]
    fn eigenvectors_orthonormal_and_com_positive() {
        for n in [2, 3, 6, 9] {
            let mut t = trap3();
            t.n_ions = n;
            t.omega_z = khz(300.0);
            let modes = normal_modes(&t).unwrap();
            let b = &modes.vectors;
            assert!((b * b.transpose() - DMatrix::identity(n, n)).amax() < 1e-10);
            for j in 0..n {
                assert!((b[(0, j)] - 1.0 / (n as f64).sqrt()).abs() < 1e-10);
            }
            assert!(modes.frequencies.windows(2).all(|w| w[0] >= w[1]));
            assert!((modes.frequencies[0] - t.omega_x).abs() < 1e-6);
        }
    }

    #[test]
    fn zigzag_mode_and_its_lamb_dicke_row() {
        let modes = normal_modes(&trap3()).unwrap();
        let s6 = 6f64.sqrt();
        for (j, want) in [1.0 / s6, -2.0 / s6, 1.0 / s6].iter().enumerate() {
            assert!((modes.vectors[(2, j)] - want).abs() < 1e-10);
        }
        let eta = modes.lamb_dicke(&trap3());
        for (j, want) in [0.028, -0.057, 0.028].iter().enumerate() {
            assert!((eta[(2, j)] - want).abs() < 1e-3, "{}", eta[(2, j)]);
        }
    }

    #[test]
    fn unstable_chain_is_rejected() {
        let mut t = trap3();
        t.n_ions = 20;
        t.omega_z = khz(2000.0);
        assert!(matches!(normal_modes(&t), Err(Error::Hardware(_))));
    }

    #[test]
    fn rabi_round_trip() {
        for &(theta, eta, tau) in &[
            (0.061, -0.028, 1e-5),
            (0.4419, 0.0283, 2e-5),
            (1e-4, 0.1, 1e-6),
        ] {
            let omega = spin_phonon_rabi(theta, eta, tau).unwrap();
            assert!((spin_phonon_angle(omega, eta, tau) - theta).abs() < 1e-12);
        }
        assert_eq!(spin_phonon_rabi(0.0, 0.0, 1e-5).unwrap(), 0.0);
        assert!(spin_phonon_rabi(0.1, 0.0, 1e-5).is_err());
        assert!(spin_phonon_rabi(0.1, 0.05, 0.0).is_err());
    }

    #[test]
    fn standing_wave_rejects_bad_inputs() {
        assert!(standing_wave_params(-0.15, 0.0077, 0.25, khz(6000.0), 5e-5).is_err());
        assert!(standing_wave_params(-0.15, 0.0077, 0.05, khz(6000.0), 0.0).is_err());
        // a 1 us gate needs a drive far beyond adiabatic elimination
        assert!(standing_wave_params(-0.15, 0.0077, 0.05, khz(6000.0), 1e-7).is_err());
    }

    #[test]
    fn sheet_uses_modes_touching_every_driven_ion() {
        let p = YukawaParams {
            b: 1.0,
            n_sites: 2,
            cutoff: 2,
            g: 1.0,
            m_psi: 1.0,
            m_phi: 1.0,
            dt: 0.25,
            t_total: 0.5,
        };
        let mut t = trap3();
        t.n_ions = 2;
        assert!(yukawa_sheet(&p, &t, 2e-5).is_err());
        let sheet = yukawa_sheet(&p, &trap3(), 2e-5).unwrap();
        assert_eq!(sheet.mode_map, vec![0, 2]);
        assert!(sheet.to_csv().starts_with(CSV_HEADER));
    }
}
