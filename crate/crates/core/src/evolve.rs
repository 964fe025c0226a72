//! Exact and Trotterized time evolution with observable sampling.

use std::collections::VecDeque;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::circuits::Circuit;
use crate::error::{Error, Result};
use crate::fusion::FusedStep;
use crate::models::{gauss_violation, mean_boson};
use crate::operator::SparseOperator;
use crate::statespace::{ordered_sum, StateVector};
use crate::C64;

/// Reporting convention for the mean boson number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BosonReport {
    #[default]
    Absolute,
    /// Subtract the background occupation `M`.
    RelativeToBackground,
}

/// What to measure along a trajectory.
#[derive(Debug, Clone)]
pub struct ObservableSpec {
    /// Nonzero amplitudes of the reference state for the Loschmidt echo.
    reference: Vec<(usize, C64)>,
    /// Background occupation for the Gauss-law check; `None` skips it.
    pub gauss_background: Option<usize>,
    pub boson_offset: f64,
}

impl ObservableSpec {
    pub fn new(reference: &StateVector) -> Self {
        Self {
            reference: reference
                .amplitudes()
                .iter()
                .enumerate()
                .filter(|(_, a)| a.norm_sqr() > 0.0)
                .map(|(i, a)| (i, *a))
                .collect(),
            gauss_background: None,
            boson_offset: 0.0,
        }
    }

    pub fn with_gauss(mut self, background: usize, report: BosonReport) -> Self {
        self.gauss_background = Some(background);
        if report == BosonReport::RelativeToBackground {
            self.boson_offset = background as f64;
        }
        self
    }

    pub fn measure(&self, state: &StateVector) -> Observables {
        let amps = state.amplitudes();
        let overlap: C64 = self
            .reference
            .iter()
            .map(|(i, r)| r.conj() * amps[*i])
            .sum();
        Observables {
            echo: overlap.norm_sqr(),
            mean_boson: mean_boson(state) - self.boson_offset,
            gauss_violation: self.gauss_background.map(|m| gauss_violation(state, m)),
            norm: state.norm(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub echo: f64,
    pub mean_boson: f64,
    pub gauss_violation: Option<f64>,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub samples: Vec<Observables>,
}

impl Trajectory {
    pub fn push(&mut self, t: f64, o: Observables) {
        self.times.push(t);
        self.samples.push(o);
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn echo(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.echo).collect()
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| (s.norm - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest pointwise echo difference; the time grids must coincide.
    pub fn max_echo_gap(&self, other: &Trajectory) -> Result<f64> {
        if self.times.len() != other.times.len()
            || self
                .times
                .iter()
                .zip(&other.times)
                .any(|(a, b)| (a - b).abs() > 1e-9)
        {
            return Err(Error::InvalidParams(
                "trajectories sampled on different grids".into(),
            ));
        }
        Ok(self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a.echo - b.echo).abs())
            .fold(0.0, f64::max))
    }

    /// CSV with header `t,echo,mean_boson,gauss_violation,norm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,echo,mean_boson,gauss_violation,norm\n");
        for (t, s) in self.times.iter().zip(&self.samples) {
            let g = s
                .gauss_violation
                .map(|g| format!("{g:.12e}"))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                "{t:.6},{:.12e},{:.12e},{g},{:.15}",
                s.echo, s.mean_boson, s.norm
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExactMethod {
    /// Dense diagonalization when the reachable subspace is small enough, Krylov otherwise.
    #[default]
    Auto,
    Dense,
    Krylov,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactOptions {
    pub method: ExactMethod,
    /// Largest reachable subspace handled densely.
    pub dense_limit: usize,
    /// Per-substep bound on the Lanczos error estimate.
    pub tolerance: f64,
    pub max_basis: usize,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            method: ExactMethod::Auto,
            dense_limit: 4096,
            tolerance: 1e-10,
            max_basis: 40,
        }
    }
}

/// Basis states connected to the support of `psi` through nonzero entries of `h`, sorted.
pub fn reachable_subspace(h: &SparseOperator, psi: &StateVector) -> Vec<usize> {
    let mut seen = vec![false; h.dim()];
    let mut queue: VecDeque<usize> = VecDeque::new();
    for (i, a) in psi.amplitudes().iter().enumerate() {
        if a.norm_sqr() > 0.0 {
            seen[i] = true;
            queue.push_back(i);
        }
    }
    while let Some(r) = queue.pop_front() {
        for (c, _) in h.row(r) {
            if !seen[c] {
                seen[c] = true;
                queue.push_back(c);
            }
        }
    }
    seen.iter()
        .enumerate()
        .filter(|(_, s)| **s)
        .map(|(i, _)| i)
        .collect()
}

/// Evolves `psi0` under `h`, recording observables at each time in `times` (ascending, from 0).
pub fn exact_evolve(
    h: &SparseOperator,
    psi0: &StateVector,
    times: &[f64],
    spec: &ObservableSpec,
    opts: &ExactOptions,
) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    exact_evolve_with(h, psi0, times, opts, |t, s| traj.push(t, spec.measure(s)))?;
    Ok(traj)
}

/// As [`exact_evolve`], handing each sampled state to `visit`.
pub fn exact_evolve_with(
    h: &SparseOperator,
    psi0: &StateVector,
    times: &[f64],
    opts: &ExactOptions,
    mut visit: impl FnMut(f64, &StateVector),
) -> Result<()> {
    if h.dim() != psi0.layout().dim() {
        return Err(Error::DimensionMismatch {
            expected: psi0.layout().dim(),
            got: h.dim(),
        });
    }
    check_times(times)?;
    let method = match opts.method {
        ExactMethod::Auto => {
            let sub = reachable_subspace(h, psi0);
            if sub.len() <= opts.dense_limit {
                return dense_evolve(h, psi0, times, &sub, visit);
            }
            ExactMethod::Krylov
        }
        m => m,
    };
    match method {
        ExactMethod::Dense => {
            let sub = reachable_subspace(h, psi0);
            if sub.len() > opts.dense_limit {
                return Err(Error::DimensionTooLarge {
                    dim: sub.len(),
                    limit: opts.dense_limit,
                });
            }
            dense_evolve(h, psi0, times, &sub, visit)
        }
        _ => {
            let mut psi = psi0.clone();
            let mut now = 0.0;
            for &t in times {
                krylov_advance(h, &mut psi, t - now, opts)?;
                now = t;
                visit(t, &psi);
            }
            Ok(())
        }
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::NonFinite("sample time"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(
            "sample times must increase strictly".into(),
        ));
    }
    Ok(())
}

/// Diagonalizes `h` restricted to `sub` and evolves there.
fn dense_evolve(
    h: &SparseOperator,
    psi0: &StateVector,
    times: &[f64],
    sub: &[usize],
    mut visit: impl FnMut(f64, &StateVector),
) -> Result<()> {
    let n = sub.len();
    let mut pos = vec![usize::MAX; h.dim()];
    for (k, &i) in sub.iter().enumerate() {
        pos[i] = k;
    }
    let mut hd = DMatrix::<C64>::zeros(n, n);
    for (k, &r) in sub.iter().enumerate() {
        for (c, v) in h.row(r) {
            hd[(k, pos[c])] += v;
        }
    }
    let eig = SymmetricEigen::new(hd);
    let v = eig.eigenvectors;
    let x0 = DVector::from_iterator(n, sub.iter().map(|&i| psi0.amplitudes()[i]));
    let coeffs = v.adjoint() * x0;
    let mut psi = StateVector::zeros(psi0.layout().clone());
    for &t in times {
        let phased = DVector::from_iterator(
            n,
            coeffs
                .iter()
                .zip(eig.eigenvalues.iter())
                .map(|(c, e)| c * C64::from_polar(1.0, -e * t)),
        );
        let x = &v * phased;
        let amps = psi.amplitudes_mut();
        for (k, &i) in sub.iter().enumerate() {
            amps[i] = x[k];
        }
        visit(t, &psi);
    }
    Ok(())
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    ordered_sum(a.len(), |i| a[i].conj() * b[i])
}

fn norm(a: &[C64]) -> f64 {
    ordered_sum(a.len(), |i| a[i].norm_sqr()).sqrt()
}

/// `exp(-i tau T) e_1` for the real symmetric tridiagonal `T`.
fn tridiagonal_exp(alpha: &[f64], beta: &[f64], tau: f64) -> DVector<C64> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    DVector::from_iterator(
        m,
        (0..m).map(|r| {
            (0..m)
                .map(|k| {
                    let w = eig.eigenvectors[(r, k)] * eig.eigenvectors[(0, k)];
                    C64::from_polar(w, -eig.eigenvalues[k] * tau)
                })
                .sum()
        }),
    )
}

/// Advances `psi` by `span` with adaptive Lanczos substeps.
pub fn krylov_advance(
    h: &SparseOperator,
    psi: &mut StateVector,
    span: f64,
    opts: &ExactOptions,
) -> Result<()> {
    let dim = h.dim();
    let mut remaining = span;
    let mut tau = span;
    while remaining > 0.0 {
        let v0 = psi.amplitudes();
        let beta0 = norm(v0);
        if beta0 == 0.0 {
            return Ok(());
        }
        let mut basis: Vec<Vec<C64>> = vec![v0.iter().map(|x| x / beta0).collect()];
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        let mut w = vec![C64::new(0.0, 0.0); dim];
        let mut breakdown = false;
        let max_basis = opts.max_basis.min(dim).max(1);
        loop {
            let k = basis.len() - 1;
            h.matvec_into(&basis[k], &mut w);
            let a = dot(&basis[k], &w).re;
            alpha.push(a);
            // full reorthogonalization, twice
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &w);
                    w.par_iter_mut()
                        .zip(b.par_iter())
                        .for_each(|(x, y)| *x -= c * y);
                }
            }
            let bnext = norm(&w);
            beta.push(bnext);
            if bnext < 1e-13 * a.abs().max(1.0) {
                breakdown = true;
                break;
            }
            if basis.len() == max_basis {
                break;
            }
            basis.push(w.iter().map(|x| x / bnext).collect());
        }
        let m = alpha.len();
        let offdiag = &beta[..m - 1];
        let step = tau.min(remaining);
        let (coeffs, used) = if breakdown {
            (tridiagonal_exp(&alpha, offdiag, step), step)
        } else {
            let mut s = step;
            loop {
                let c = tridiagonal_exp(&alpha, offdiag, s);
                let err = beta0 * beta[m - 1] * c[m - 1].norm();
                if err <= opts.tolerance {
                    break (c, s);
                }
                s *= 0.5;
                if s < span.abs() * 1e-12 || s < 1e-300 {
                    return Err(Error::KrylovNonConvergence {
                        residual: err,
                        tolerance: opts.tolerance,
                    });
                }
            }
        };
        let amps = psi.amplitudes_mut();
        amps.par_iter_mut().enumerate().for_each(|(i, x)| {
            *x = basis
                .iter()
                .zip(coeffs.iter())
                .map(|(b, c)| b[i] * c)
                .sum::<C64>()
                * beta0;
        });
        remaining -= used;
        if remaining < span * 1e-14 {
            remaining = 0.0;
        }
        // try a larger substep next time if this one was accepted at first attempt
        tau = if used == step {
            (used * 2.0).min(span)
        } else {
            used
        };
    }
    Ok(())
}

/// Applies `n_steps` circuit steps to `psi0`, measuring every `stride` steps and after the last.
pub fn run_trotter(
    circuit: &Circuit,
    psi0: &StateVector,
    n_steps: usize,
    stride: usize,
    spec: &ObservableSpec,
) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    run_trotter_with(circuit, psi0, n_steps, stride, |t, s| {
        traj.push(t, spec.measure(s))
    })?;
    Ok(traj)
}

pub fn run_trotter_with(
    circuit: &Circuit,
    psi0: &StateVector,
    n_steps: usize,
    stride: usize,
    visit: impl FnMut(f64, &StateVector),
) -> Result<()> {
    let mut psi = psi0.clone();
    run_trotter_in_place(circuit, &mut psi, n_steps, stride, visit)
}

/// Like [`run_trotter_with`] but evolves `psi` itself, for registers too large to copy.
pub fn run_trotter_in_place(
    circuit: &Circuit,
    psi: &mut StateVector,
    n_steps: usize,
    stride: usize,
    mut visit: impl FnMut(f64, &StateVector),
) -> Result<()> {
    if stride == 0 {
        return Err(Error::InvalidParams(
            "sample stride must be positive".into(),
        ));
    }
    if psi.layout().as_ref() != circuit.layout.as_ref() {
        return Err(Error::LayoutMismatch);
    }
    let step = FusedStep::new(&circuit.step, circuit.layout.clone())?;
    visit(0.0, psi);
    for k in 1..=n_steps {
        step.apply(psi)?;
        if k % stride == 0 || k == n_steps {
            if !psi.is_finite() {
                return Err(Error::NonFinite("state amplitude"));
            }
            visit(k as f64 * circuit.dt, psi);
        }
    }
    Ok(())
}

/// Sample times `0, stride dt, 2 stride dt, ...` up to `n_steps dt`, matching [`run_trotter`].
pub fn sample_times(dt: f64, n_steps: usize, stride: usize) -> Vec<f64> {
    (0..=n_steps)
        .filter(|k| k % stride.max(1) == 0 || *k == n_steps)
        .map(|k| k as f64 * dt)
        .collect()
}
