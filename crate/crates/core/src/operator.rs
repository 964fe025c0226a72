//! Sparse operators on a register, assembled from tensor-product terms.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::statespace::{ordered_sum, RegisterLayout, Site, StateVector};
use crate::C64;

/// `coeff * ⊗_k factor_k`, identity on every other site.
#[derive(Debug, Clone)]
pub struct ProductTerm {
    pub coeff: C64,
    pub factors: Vec<(Site, DMatrix<C64>)>,
}

impl ProductTerm {
    pub fn new(coeff: impl Into<C64>, factors: Vec<(Site, DMatrix<C64>)>) -> Self {
        Self {
            coeff: coeff.into(),
            factors,
        }
    }
}

/// Compressed-row sparse complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOperator {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        Self::from_triplets(
            diag.len(),
            diag.iter()
                .enumerate()
                .map(|(i, &d)| (i, i, C64::new(d, 0.0)))
                .collect(),
        )
    }

    /// Duplicates are summed; entries that cancel to exactly zero are dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|t| (t.0, t.1));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != C64::new(0.0, 0.0));
        let mut row_ptr = vec![0; dim + 1];
        for t in &merged {
            row_ptr[t.0 + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            cols: merged.iter().map(|t| t.1).collect(),
            vals: merged.iter().map(|t| t.2).collect(),
        }
    }

    /// Assembles the sum of product terms on `layout`.
    pub fn from_terms(layout: &RegisterLayout, terms: &[ProductTerm]) -> Result<Self> {
        let dim = layout.dim();
        let mut plan = Vec::with_capacity(terms.len());
        for t in terms {
            let mut factors = Vec::with_capacity(t.factors.len());
            for (site, m) in &t.factors {
                let d = layout.site_dim(*site)?;
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        got: m.nrows(),
                    });
                }
                // column -> nonzero (row, value)
                let colwise: Vec<Vec<(usize, C64)>> = (0..d)
                    .map(|c| {
                        (0..d)
                            .filter(|&r| m[(r, c)] != C64::new(0.0, 0.0))
                            .map(|r| (r, m[(r, c)]))
                            .collect()
                    })
                    .collect();
                factors.push((layout.stride(*site)?, d, colwise));
            }
            plan.push((t.coeff, factors));
        }
        let triplets: Vec<(usize, usize, C64)> = (0..dim)
            .into_par_iter()
            .flat_map_iter(|col| {
                let mut out = Vec::new();
                for (coeff, factors) in &plan {
                    let mut images = vec![(col, *coeff)];
                    for (stride, d, colwise) in factors {
                        let mut next = Vec::with_capacity(images.len());
                        for (idx, v) in images {
                            let digit = (idx / stride) % d;
                            for &(r, m) in &colwise[digit] {
                                next.push((idx + r * stride - digit * stride, v * m));
                            }
                        }
                        images = next;
                        if images.is_empty() {
                            break;
                        }
                    }
                    out.extend(images.into_iter().map(|(r, v)| (r, col, v)));
                }
                out.into_iter()
            })
            .collect();
        Ok(Self::from_triplets(dim, triplets))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    /// `y = A x`.
    pub fn matvec_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out = acc;
        });
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dim];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn add(&self, other: &SparseOperator) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(Self::from_triplets(
            self.dim,
            self.triplets().chain(other.triplets()).collect(),
        ))
    }

    pub fn sum<'a>(dim: usize, ops: impl IntoIterator<Item = &'a SparseOperator>) -> Self {
        Self::from_triplets(dim, ops.into_iter().flat_map(|o| o.triplets()).collect())
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.dim,
            self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect(),
        )
    }

    /// Sparse product `self * other`.
    pub fn mul(&self, other: &SparseOperator) -> Self {
        let triplets = (0..self.dim)
            .flat_map(|r| {
                self.row(r)
                    .flat_map(move |(k, a)| other.row(k).map(move |(c, b)| (r, c, a * b)))
            })
            .collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn commutator(&self, other: &SparseOperator) -> Self {
        let ab = self.mul(other);
        let ba = other.mul(self);
        Self::from_triplets(
            self.dim,
            ab.triplets()
                .chain(ba.triplets().map(|(r, c, v)| (r, c, -v)))
                .collect(),
        )
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |A - A^dagger|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let adj = self.adjoint();
        Self::from_triplets(
            self.dim,
            self.triplets()
                .chain(adj.triplets().map(|(r, c, v)| (r, c, -v)))
                .collect(),
        )
        .max_abs()
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets().all(|(r, c, _)| r == c)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// `<psi|A|psi>`.
    pub fn expectation(&self, psi: &StateVector) -> C64 {
        let x = psi.amplitudes();
        ordered_sum(self.dim, |r| {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            x[r].conj() * acc
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockWindow;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn triplets_sum_and_cancel() {
        let op = SparseOperator::from_triplets(
            3,
            vec![
                (0, 1, c(1.0)),
                (2, 2, c(3.0)),
                (0, 1, c(-1.0)),
                (1, 0, c(2.0)),
                (1, 0, c(0.5)),
            ],
        );
        assert_eq!(op.nnz(), 2);
        let d = op.to_dense();
        assert_eq!(d[(1, 0)], c(2.5));
        assert_eq!(d[(2, 2)], c(3.0));
        assert_eq!(d[(0, 1)], c(0.0));
    }

    #[test]
    fn terms_match_kronecker() {
        let layout = RegisterLayout::new(1, vec![FockWindow::cutoff(2)]).unwrap();
        let x = DMatrix::from_row_slice(2, 2, &[c(0.), c(1.), c(1.), c(0.)]);
        let a = crate::fock::lowering_matrix(FockWindow::cutoff(2)).map(c);
        let op = SparseOperator::from_terms(
            &layout,
            &[ProductTerm::new(
                c(2.0),
                vec![(Site::Qubit(0), x.clone()), (Site::Mode(0), a.clone())],
            )],
        )
        .unwrap();
        let want = x.kronecker(&a) * c(2.0);
        assert!((op.to_dense() - want).norm() < 1e-15);
        assert!(op.hermiticity_defect() > 0.1);
    }

    #[test]
    fn commutator_of_commuting_diagonals_vanishes() {
        let a = SparseOperator::diagonal(&[1.0, 2.0, 3.0]);
        let b = SparseOperator::diagonal(&[0.5, -2.0, 7.0]);
        assert_eq!(a.commutator(&b).nnz(), 0);
        assert!(a.is_diagonal());
    }
}
