//! Truncated bosonic modes.
//!
//! A [`FockWindow`] keeps the occupations `n_min..=n_max` of a single mode.
//! Plain cutoff modes start at zero; highly-occupied modes sit symmetrically
//! around a large background occupation `M`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockWindow {
    n_min: usize,
    n_max: usize,
}

impl FockWindow {
    pub fn new(n_min: usize, n_max: usize) -> Result<Self> {
        if n_max < n_min {
            return Err(Error::InvalidWindow { n_min, n_max });
        }
        Ok(Self { n_min, n_max })
    }

    /// Occupations `0..=cutoff`.
    pub fn cutoff(cutoff: usize) -> Self {
        Self {
            n_min: 0,
            n_max: cutoff,
        }
    }

    /// Occupations `M - cutoff ..= M + cutoff` around a background occupation `M`.
    pub fn around(background: usize, cutoff: usize) -> Result<Self> {
        if cutoff > background {
            return Err(Error::InvalidParams(format!(
                "window around M={background} with cutoff {cutoff} would need negative occupations"
            )));
        }
        Ok(Self {
            n_min: background - cutoff,
            n_max: background + cutoff,
        })
    }

    pub fn n_min(&self) -> usize {
        self.n_min
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.n_max - self.n_min + 1
    }

    pub fn contains(&self, n: usize) -> bool {
        (self.n_min..=self.n_max).contains(&n)
    }

    pub fn occupations(&self) -> impl Iterator<Item = usize> {
        self.n_min..=self.n_max
    }

    /// Local basis index of occupation `n`.
    pub fn index_of(&self, n: usize) -> Option<usize> {
        self.contains(n).then(|| n - self.n_min)
    }
}

/// Annihilation operator restricted to the window: `<n-1|a|n> = sqrt(n)` for
/// `n_min < n <= n_max`. Transitions leaving the window are dropped.
pub fn lowering_matrix(w: FockWindow) -> DMatrix<f64> {
    let d = w.dim();
    let mut a = DMatrix::zeros(d, d);
    for col in 1..d {
        let n = w.n_min + col;
        a[(col - 1, col)] = (n as f64).sqrt();
    }
    a
}

pub fn raising_matrix(w: FockWindow) -> DMatrix<f64> {
    lowering_matrix(w).transpose()
}

/// Diagonal of the number operator, `n_min..=n_max`.
pub fn number_matrix(w: FockWindow) -> DVector<f64> {
    DVector::from_iterator(w.dim(), w.occupations().map(|n| n as f64))
}

/// Diagonal of `exp(-i (c1 n + c2 n^2))`.
pub fn phase_diagonal(w: FockWindow, c1: f64, c2: f64) -> Vec<C64> {
    w.occupations()
        .map(|n| {
            let n = n as f64;
            C64::from_polar(1.0, -(c1 * n + c2 * n * n))
        })
        .collect()
}

/// Hermitian quadrature `e^{i phi} a + e^{-i phi} a^dagger` on the window.
pub fn quadrature(w: FockWindow, phi: f64) -> DMatrix<C64> {
    let a = lowering_matrix(w);
    let phase = C64::from_polar(1.0, phi);
    let mut q = DMatrix::zeros(w.dim(), w.dim());
    for r in 0..w.dim() {
        for c in 0..w.dim() {
            q[(r, c)] = phase * a[(r, c)] + phase.conj() * a[(c, r)];
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(a: usize, b: usize) -> FockWindow {
        FockWindow::new(a, b).unwrap()
    }

    #[test]
    fn lowering_small_windows() {
        let a = lowering_matrix(w(0, 1));
        assert_eq!(a, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));

        let a = lowering_matrix(w(0, 2));
        assert_eq!(a[(0, 1)], 1.0);
        assert_eq!(a[(1, 2)], 2f64.sqrt());
        assert_eq!(a.iter().filter(|x| **x != 0.0).count(), 2);
    }

    #[test]
    fn lowering_hobm_window() {
        let win = FockWindow::around(10, 2).unwrap();
        assert_eq!((win.n_min(), win.n_max()), (8, 12));
        let a = lowering_matrix(win);
        let off: Vec<f64> = (0..4).map(|k| a[(k, k + 1)]).collect();
        let want: Vec<f64> = [9.0f64, 10.0, 11.0, 12.0]
            .iter()
            .map(|x| x.sqrt())
            .collect();
        assert_eq!(off, want);
        assert_eq!(a.iter().filter(|x| **x != 0.0).count(), 4);
        assert_eq!(raising_matrix(win), a.transpose());
    }

    #[test]
    fn number_and_field() {
        assert_eq!(number_matrix(w(0, 1)).as_slice(), &[0.0, 1.0]);
        let win = w(8, 12);
        assert_eq!(number_matrix(win).as_slice(), &[8.0, 9.0, 10.0, 11.0, 12.0]);
        let e: Vec<f64> = number_matrix(win).iter().map(|n| n - 10.0).collect();
        assert_eq!(e, vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn phase_diagonal_values() {
        assert!(phase_diagonal(w(0, 4), 0.0, 0.0)
            .iter()
            .all(|z| *z == C64::new(1.0, 0.0)));
        let p = phase_diagonal(w(0, 1), std::f64::consts::PI, 0.0);
        assert!((p[0] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((p[1] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        let p = phase_diagonal(w(8, 12), -0.153, 0.008);
        let want = C64::from_polar(1.0, 0.73);
        assert!((p[2] - want).norm() < 1e-14);
    }

    #[test]
    fn truncated_commutator_is_pinned() {
        // Plain cutoff: identity except the top corner, which carries -n_max.
        let win = w(0, 4);
        let a = lowering_matrix(win);
        let comm = &a * a.transpose() - a.transpose() * &a;
        for n in 0..4 {
            assert!((comm[(n, n)] - 1.0).abs() < 1e-12);
        }
        assert!((comm[(4, 4)] + 4.0).abs() < 1e-12);

        // Windowed: the bottom edge loses its sqrt(n_min) link, so a^dagger a
        // vanishes there and the commutator reads n_min + 1.
        let win = w(8, 12);
        let a = lowering_matrix(win);
        let ada = a.transpose() * &a;
        assert_eq!(ada[(0, 0)], 0.0);
        for (k, n) in (9..=12).enumerate() {
            assert!((ada[(k + 1, k + 1)] - n as f64).abs() < 1e-12);
        }
        let comm = &a * a.transpose() - &ada;
        assert!((comm[(0, 0)] - 9.0).abs() < 1e-12);
        for k in 1..4 {
            assert!((comm[(k, k)] - 1.0).abs() < 1e-12);
        }
        assert!((comm[(4, 4)] + 12.0).abs() < 1e-12);
        for r in 0..5 {
            for c in 0..5 {
                if r != c {
                    assert_eq!(comm[(r, c)], 0.0);
                }
            }
        }
    }

    #[test]
    fn quadrature_is_hermitian() {
        let q = quadrature(w(3, 9), 0.7);
        assert!((q.adjoint() - &q).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_windows() {
        assert!(FockWindow::new(3, 2).is_err());
        assert!(FockWindow::around(1, 2).is_err());
    }

    proptest::proptest! {
        #[test]
        fn phase_diagonal_unitary(c1 in -50.0f64..50.0, c2 in -5.0f64..5.0, lo in 0usize..20, span in 0usize..12) {
            for z in phase_diagonal(w(lo, lo + span), c1, c2) {
                proptest::prop_assert!((z.norm() - 1.0).abs() < 1e-14);
            }
        }
    }
}
