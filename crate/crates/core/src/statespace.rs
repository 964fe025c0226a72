//! Composite qubit ⊗ mode registers and the kernels that act on them.
//!
//! Index convention: subsystems are ordered qubits first (qubit 0 most
//! significant), then modes in ascending label. A qubit digit of 0 is the
//! spin-up state (sigma^z = +1); a mode digit `d` stands for occupation
//! `n_min + d` of that mode's window.

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::FockWindow;
use crate::C64;

/// One addressable subsystem of a register.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    Qubit(usize),
    Mode(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    n_qubits: usize,
    modes: Vec<FockWindow>,
    dims: Vec<usize>,
    strides: Vec<usize>,
    dim: usize,
}

impl RegisterLayout {
    pub fn new(n_qubits: usize, modes: Vec<FockWindow>) -> Result<Self> {
        let dims: Vec<usize> = std::iter::repeat_n(2, n_qubits)
            .chain(modes.iter().map(|w| w.dim()))
            .collect();
        let mut strides = vec![0; dims.len()];
        let mut acc: usize = 1;
        for k in (0..dims.len()).rev() {
            strides[k] = acc;
            acc = acc.checked_mul(dims[k]).ok_or_else(|| {
                Error::DimensionOverflow(format!("{n_qubits} qubits and {} modes", modes.len()))
            })?;
        }
        // Amplitudes are 16 bytes each and must be addressable by one allocation.
        if acc > isize::MAX as usize / std::mem::size_of::<C64>() {
            return Err(Error::DimensionOverflow(format!("dimension {acc}")));
        }
        Ok(Self {
            n_qubits,
            modes,
            dims,
            strides,
            dim: acc,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[FockWindow] {
        &self.modes
    }

    pub fn window(&self, mode: usize) -> FockWindow {
        self.modes[mode]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn slot(&self, site: Site) -> Result<usize> {
        match site {
            Site::Qubit(q) if q < self.n_qubits => Ok(q),
            Site::Qubit(q) => Err(Error::IndexOutOfRange {
                kind: "qubit",
                index: q,
                len: self.n_qubits,
            }),
            Site::Mode(m) if m < self.modes.len() => Ok(self.n_qubits + m),
            Site::Mode(m) => Err(Error::IndexOutOfRange {
                kind: "mode",
                index: m,
                len: self.modes.len(),
            }),
        }
    }

    pub fn site_dim(&self, site: Site) -> Result<usize> {
        Ok(self.dims[self.slot(site)?])
    }

    pub fn stride(&self, site: Site) -> Result<usize> {
        Ok(self.strides[self.slot(site)?])
    }

    /// Flat index of the basis element with the given qubit bits and mode occupations.
    pub fn index_of(&self, bits: &[u8], occupations: &[usize]) -> Result<usize> {
        if bits.len() != self.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                got: bits.len(),
            });
        }
        if occupations.len() != self.modes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.modes.len(),
                got: occupations.len(),
            });
        }
        let mut idx = 0;
        for (q, &b) in bits.iter().enumerate() {
            if b > 1 {
                return Err(Error::InvalidParams(format!(
                    "qubit {q} bit {b} is not 0 or 1"
                )));
            }
            idx += b as usize * self.strides[q];
        }
        for (m, (&n, w)) in occupations.iter().zip(&self.modes).enumerate() {
            let d = w.index_of(n).ok_or(Error::OccupationOutOfWindow {
                mode: m,
                value: n,
                n_min: w.n_min(),
                n_max: w.n_max(),
            })?;
            idx += d * self.strides[self.n_qubits + m];
        }
        Ok(idx)
    }

    /// Inverse of [`RegisterLayout::index_of`].
    pub fn decode(&self, index: usize) -> (Vec<u8>, Vec<usize>) {
        let bits = (0..self.n_qubits)
            .map(|q| self.qubit_bit(index, q))
            .collect();
        let occ = (0..self.modes.len())
            .map(|m| self.occupation(index, m))
            .collect();
        (bits, occ)
    }

    #[inline]
    pub fn qubit_bit(&self, index: usize, q: usize) -> u8 {
        ((index / self.strides[q]) % 2) as u8
    }

    #[inline]
    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        let k = self.n_qubits + mode;
        (index / self.strides[k]) % self.dims[k] + self.modes[mode].n_min()
    }

    /// Plan for sweeping every block of a local operator over the register.
    fn plan(&self, targets: &[Site]) -> Result<BlockPlan> {
        let mut slots = Vec::with_capacity(targets.len());
        for &t in targets {
            let s = self.slot(t)?;
            if slots.contains(&s) {
                return Err(Error::RepeatedTarget(s));
            }
            slots.push(s);
        }
        if slots.is_empty() {
            return Err(Error::InvalidParams("operator without targets".into()));
        }
        // Offsets of the local basis inside one block, first target most significant.
        let mut offsets = vec![0usize];
        for &s in &slots {
            let mut next = Vec::with_capacity(offsets.len() * self.dims[s]);
            for &o in &offsets {
                for d in 0..self.dims[s] {
                    next.push(o + d * self.strides[s]);
                }
            }
            offsets = next;
        }
        let top = *slots.iter().min().unwrap();
        let bottom = *slots.iter().max().unwrap();
        let chunk = self.dims[top] * self.strides[top];
        let run = self.strides[bottom];
        let middle = (top + 1..bottom)
            .filter(|s| !slots.contains(s))
            .map(|s| (self.dims[s], self.strides[s]))
            .collect();
        Ok(BlockPlan {
            offsets,
            chunk,
            run,
            middle,
        })
    }
}

struct BlockPlan {
    /// Offsets of the local basis states relative to a block base.
    offsets: Vec<usize>,
    /// Independent contiguous chunk length (everything above the first target is spectator).
    chunk: usize,
    /// Contiguous run below the last target.
    run: usize,
    /// Spectator subsystems between the first and last target.
    middle: Vec<(usize, usize)>,
}

/// Columns handled by one sweep task.
const GROUP: usize = 256;

/// Per-task buffers of a sweep.
#[derive(Default)]
struct Scratch {
    positions: Vec<usize>,
    re: Vec<f64>,
    im: Vec<f64>,
    out_re: Vec<f64>,
    out_im: Vec<f64>,
}

impl BlockPlan {
    fn bases_per_chunk(&self) -> usize {
        self.middle.iter().map(|m| m.0).product()
    }

    /// Offset of the `k`-th block base inside a chunk.
    fn base_at(&self, mut k: usize) -> usize {
        let mut base = 0;
        for &(d, s) in self.middle.iter().rev() {
            base += (k % d) * s;
            k /= d;
        }
        base
    }

    /// Start indices of columns `first..first + count`, in order.
    fn column_positions(&self, first: usize, count: usize, out: &mut Vec<usize>) {
        out.clear();
        let bases = self.bases_per_chunk();
        let per_chunk = bases * self.run;
        let mut c = first / per_chunk;
        let mut b = (first % per_chunk) / self.run;
        let mut t = first % self.run;
        let mut base = c * self.chunk + self.base_at(b);
        for _ in 0..count {
            out.push(base + t);
            t += 1;
            if t == self.run {
                t = 0;
                b += 1;
                if b == bases {
                    b = 0;
                    c += 1;
                }
                base = c * self.chunk + self.base_at(b);
            }
        }
    }

    /// Calls `f(scratch)` for groups of columns. A column starting at `p` is the
    /// index set `p + offsets[i]`; columns partition the register, so groups are disjoint.
    fn sweep(&self, total: usize, f: impl Fn(&mut Scratch) + Sync + Send) {
        let columns = (total / self.chunk) * self.bases_per_chunk() * self.run;
        let tasks = columns.div_ceil(GROUP);
        (0..tasks)
            .into_par_iter()
            .with_min_len(8)
            .for_each_init(Scratch::default, |s, task| {
                let first = task * GROUP;
                let count = GROUP.min(columns - first);
                self.column_positions(first, count, &mut s.positions);
                f(s);
            });
    }
}

/// Shared mutable access for tile sweeps whose index sets are disjoint.
#[derive(Clone, Copy)]
struct AmpPtr(*mut C64);

// SAFETY: every task of a sweep touches a disjoint set of indices.
unsafe impl Send for AmpPtr {}
unsafe impl Sync for AmpPtr {}

impl AmpPtr {
    /// # Safety
    /// `i` is in bounds and no other task accesses it concurrently.
    #[inline]
    unsafe fn at(self, i: usize) -> *mut C64 {
        self.0.add(i)
    }
}

/// Parallel sum of `f(0) + ... + f(len - 1)` over fixed blocks combined in
/// index order, so the result does not depend on the thread count.
pub fn ordered_sum<T>(len: usize, f: impl Fn(usize) -> T + Sync) -> T
where
    T: Send + std::iter::Sum<T>,
{
    const BLOCK: usize = 4096;
    (0..len.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| (b * BLOCK..len.min((b + 1) * BLOCK)).map(&f).sum::<T>())
        .collect::<Vec<T>>()
        .into_iter()
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    layout: Arc<RegisterLayout>,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zeros(layout: Arc<RegisterLayout>) -> Self {
        let amps = vec![C64::new(0.0, 0.0); layout.dim()];
        Self { layout, amps }
    }

    /// Like [`StateVector::zeros`] but reports allocation failure instead of aborting.
    pub fn try_zeros(layout: Arc<RegisterLayout>) -> Result<Self> {
        let dim = layout.dim();
        let mut amps = Vec::new();
        amps.try_reserve_exact(dim)
            .map_err(|_| Error::OutOfMemory {
                bytes: dim * std::mem::size_of::<C64>(),
            })?;
        amps.resize(dim, C64::new(0.0, 0.0));
        Ok(Self { layout, amps })
    }

    pub fn from_amplitudes(layout: Arc<RegisterLayout>, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: amps.len(),
            });
        }
        Ok(Self { layout, amps })
    }

    pub fn layout(&self) -> &Arc<RegisterLayout> {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        ordered_sum(self.amps.len(), |i| self.amps[i].norm_sqr()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.amps
            .par_iter()
            .all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// Applies a dense operator on the tensor product of `targets` (first target
    /// most significant in the operator's basis), identity elsewhere.
    pub fn apply_local(&mut self, op: &DMatrix<C64>, targets: &[Site]) -> Result<()> {
        let plan = self.layout.plan(targets)?;
        let d = plan.offsets.len();
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: op.nrows().max(op.ncols()),
            });
        }
        if op.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("operator entry"));
        }
        // Sparse rows: most gate matrices have structural zeros.
        let rows: Vec<Vec<(usize, C64)>> = (0..d)
            .map(|i| {
                (0..d)
                    .filter(|&j| op[(i, j)] != C64::new(0.0, 0.0))
                    .map(|j| (j, op[(i, j)]))
                    .collect()
            })
            .collect();
        let ptr = AmpPtr(self.amps.as_mut_ptr());
        plan.sweep(self.amps.len(), |s| {
            let g = s.positions.len();
            s.re.resize(d * GROUP, 0.0);
            s.im.resize(d * GROUP, 0.0);
            s.out_re.resize(GROUP, 0.0);
            s.out_im.resize(GROUP, 0.0);
            for (j, &off) in plan.offsets.iter().enumerate() {
                for (k, &p) in s.positions.iter().enumerate() {
                    // SAFETY: the sweep hands out disjoint in-bounds index sets.
                    let z = unsafe { *ptr.at(p + off) };
                    s.re[j * GROUP + k] = z.re;
                    s.im[j * GROUP + k] = z.im;
                }
            }
            for (i, &off) in plan.offsets.iter().enumerate() {
                let (or, oi) = (&mut s.out_re[..g], &mut s.out_im[..g]);
                or.fill(0.0);
                oi.fill(0.0);
                for &(j, c) in &rows[i] {
                    let br = &s.re[j * GROUP..j * GROUP + g];
                    let bi = &s.im[j * GROUP..j * GROUP + g];
                    for k in 0..g {
                        or[k] += c.re * br[k] - c.im * bi[k];
                        oi[k] += c.re * bi[k] + c.im * br[k];
                    }
                }
                for (k, &p) in s.positions.iter().enumerate() {
                    // SAFETY: as above; all reads of this group happened before.
                    unsafe { *ptr.at(p + off) = C64::new(or[k], oi[k]) };
                }
            }
        });
        Ok(())
    }

    /// Applies a diagonal operator on the tensor product of `targets`.
    pub fn apply_diagonal(&mut self, diag: &[C64], targets: &[Site]) -> Result<()> {
        let plan = self.layout.plan(targets)?;
        if diag.len() != plan.offsets.len() {
            return Err(Error::DimensionMismatch {
                expected: plan.offsets.len(),
                got: diag.len(),
            });
        }
        if diag.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("diagonal entry"));
        }
        let ptr = AmpPtr(self.amps.as_mut_ptr());
        plan.sweep(self.amps.len(), |s| {
            for (&off, &c) in plan.offsets.iter().zip(diag) {
                if c == C64::new(1.0, 0.0) {
                    continue;
                }
                for &p in &s.positions {
                    // SAFETY: as in `apply_local`.
                    unsafe { *ptr.at(p + off) *= c };
                }
            }
        });
        Ok(())
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner_product(&self, other: &StateVector) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch);
        }
        Ok(ordered_sum(self.amps.len(), |i| {
            self.amps[i].conj() * other.amps[i]
        }))
    }

    /// Writes the binary dump: 16-byte header (`PQSV`, version u32, dimension u64),
    /// then little-endian `(re, im)` f64 pairs.
    pub fn write_dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        w.write_all(&DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(self.amps.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(16 * 4096);
        for block in self.amps.chunks(4096) {
            buf.clear();
            for a in block {
                buf.extend_from_slice(&a.re.to_le_bytes());
                buf.extend_from_slice(&a.im.to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        Ok(())
    }

    pub fn save_dump(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_dump(std::io::BufWriter::new(f))
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_dump<R: Read>(layout: Arc<RegisterLayout>, mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::Parse {
            line: 0,
            message: m.to_string(),
        };
        let mut header = [0u8; 16];
        r.read_exact(&mut header)
            .map_err(|_| bad("truncated header"))?;
        if header[..4] != DUMP_MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != DUMP_VERSION {
            return Err(bad("unsupported dump version"));
        }
        let dim = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        if dim != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                got: dim,
            });
        }
        let mut amps = Vec::with_capacity(dim);
        let mut pair = [0u8; 16];
        for _ in 0..dim {
            r.read_exact(&mut pair)
                .map_err(|_| bad("truncated amplitudes"))?;
            amps.push(C64::new(
                f64::from_le_bytes(pair[..8].try_into().unwrap()),
                f64::from_le_bytes(pair[8..].try_into().unwrap()),
            ));
        }
        Self::from_amplitudes(layout, amps)
    }
}

pub const DUMP_MAGIC: [u8; 4] = *b"PQSV";
pub const DUMP_VERSION: u32 = 1;

/// Unit vector on one basis element.
pub fn basis_state(
    layout: Arc<RegisterLayout>,
    bits: &[u8],
    occupations: &[usize],
) -> Result<StateVector> {
    let idx = layout.index_of(bits, occupations)?;
    let mut s = StateVector::try_zeros(layout)?;
    s.amps[idx] = C64::new(1.0, 0.0);
    Ok(s)
}

pub fn inner_product(s1: &StateVector, s2: &StateVector) -> Result<C64> {
    s1.inner_product(s2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn layout(nq: usize, modes: &[(usize, usize)]) -> Arc<RegisterLayout> {
        Arc::new(
            RegisterLayout::new(
                nq,
                modes
                    .iter()
                    .map(|&(a, b)| FockWindow::new(a, b).unwrap())
                    .collect(),
            )
            .unwrap(),
        )
    }

    fn pauli_x() -> DMatrix<C64> {
        DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    #[test]
    fn basis_state_at_origin() {
        let l = layout(2, &[(0, 1), (0, 1)]);
        let s = basis_state(l, &[0, 0], &[0, 0]).unwrap();
        assert_eq!(s.amplitudes()[0], c(1.0, 0.0));
        assert_eq!(s.norm(), 1.0);
    }

    #[test]
    fn basis_state_hobm_links() {
        let windows = [(8, 12); 4];
        let l = layout(4, &windows);
        let s = basis_state(l.clone(), &[0, 1, 0, 1], &[10; 4]).unwrap();
        let nz: Vec<usize> = (0..l.dim())
            .filter(|&i| s.amplitudes()[i].norm() > 0.0)
            .collect();
        assert_eq!(nz.len(), 1);
        let (bits, occ) = l.decode(nz[0]);
        assert_eq!(bits, vec![0, 1, 0, 1]);
        assert_eq!(occ, vec![10; 4]);
    }

    #[test]
    fn out_of_window_occupation_is_rejected() {
        let l = layout(1, &[(0, 2)]);
        let err = basis_state(l, &[0], &[3]).unwrap_err();
        assert!(matches!(
            err,
            Error::OccupationOutOfWindow {
                mode: 0,
                value: 3,
                ..
            }
        ));
    }

    #[test]
    fn pauli_x_on_first_qubit() {
        let l = layout(2, &[]);
        let mut s = basis_state(l.clone(), &[0, 0], &[]).unwrap();
        s.apply_local(&pauli_x(), &[Site::Qubit(0)]).unwrap();
        let want = l.index_of(&[1, 0], &[]).unwrap();
        assert_eq!(want, 2);
        assert_eq!(s.amplitudes()[want], c(1.0, 0.0));
    }

    #[test]
    fn identity_is_bitwise_noop() {
        let l = layout(2, &[(0, 2)]);
        let amps: Vec<C64> = (0..l.dim())
            .map(|i| c(i as f64 * 0.1, -(i as f64) * 0.03))
            .collect();
        let mut s = StateVector::from_amplitudes(l.clone(), amps.clone()).unwrap();
        s.apply_local(&DMatrix::identity(6, 6), &[Site::Qubit(1), Site::Mode(0)])
            .unwrap();
        assert_eq!(s.amplitudes(), &amps[..]);
    }

    #[test]
    fn quadrature_raises_vacuum() {
        let l = layout(0, &[(0, 1)]);
        let mut s = basis_state(l.clone(), &[], &[0]).unwrap();
        let q = crate::fock::quadrature(l.window(0), 0.0);
        s.apply_local(&q, &[Site::Mode(0)]).unwrap();
        assert_eq!(s.amplitudes()[1], c(1.0, 0.0));
        assert_eq!(s.amplitudes()[0], c(0.0, 0.0));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let l = layout(2, &[]);
        let mut s = StateVector::zeros(l);
        assert!(s
            .apply_local(&DMatrix::identity(3, 3), &[Site::Qubit(0)])
            .is_err());
        assert!(s
            .apply_local(&pauli_x(), &[Site::Qubit(0), Site::Qubit(0)])
            .is_err());
        assert!(s.apply_local(&pauli_x(), &[Site::Mode(0)]).is_err());
        let mut bad = pauli_x();
        bad[(0, 0)] = c(f64::NAN, 0.0);
        assert!(matches!(
            s.apply_local(&bad, &[Site::Qubit(0)]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn inner_products() {
        let l = layout(1, &[(0, 1)]);
        let a = basis_state(l.clone(), &[0], &[0]).unwrap();
        let b = basis_state(l.clone(), &[1], &[0]).unwrap();
        assert_eq!(inner_product(&a, &a).unwrap(), c(1.0, 0.0));
        assert_eq!(inner_product(&a, &b).unwrap(), c(0.0, 0.0));
        let other = basis_state(layout(1, &[(0, 2)]), &[0], &[0]).unwrap();
        assert!(matches!(
            inner_product(&a, &other),
            Err(Error::LayoutMismatch)
        ));
    }

    #[test]
    fn index_round_trip() {
        let l = layout(3, &[(0, 2), (4, 6)]);
        for i in 0..l.dim() {
            let (bits, occ) = l.decode(i);
            assert_eq!(l.index_of(&bits, &occ).unwrap(), i);
        }
    }

    #[test]
    fn dump_round_trip_and_header() {
        let l = layout(1, &[(0, 2)]);
        let amps: Vec<C64> = (0..6).map(|i| c(i as f64, -0.5 * i as f64)).collect();
        let s = StateVector::from_amplitudes(l.clone(), amps).unwrap();
        let mut bytes = Vec::new();
        s.write_dump(&mut bytes).unwrap();
        assert_eq!(bytes.len(), 16 + 6 * 16);
        assert_eq!(&bytes[..4], b"PQSV");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 6);
        let back = StateVector::read_dump(l, &bytes[..]).unwrap();
        assert_eq!(back, s);
    }

    fn random_state(l: &Arc<RegisterLayout>, seed: &[f64]) -> StateVector {
        let amps: Vec<C64> = (0..l.dim())
            .map(|i| {
                let a = seed[i % seed.len()] + 0.37 * i as f64;
                c(a.sin(), (1.3 * a).cos())
            })
            .collect();
        let mut s = StateVector::from_amplitudes(l.clone(), amps).unwrap();
        let n = s.norm();
        s.amplitudes_mut().iter_mut().for_each(|z| *z /= n);
        s
    }

    fn random_op(d: usize, seed: f64) -> DMatrix<C64> {
        DMatrix::from_fn(d, d, |i, j| {
            let x = seed + 1.7 * i as f64 + 0.61 * j as f64;
            c(x.sin(), (2.3 * x).cos())
        })
    }

    fn random_unitary(d: usize, seed: f64) -> DMatrix<C64> {
        let h = random_op(d, seed);
        let h = (&h + h.adjoint()) * c(0.5, 0.0);
        (h * c(0.0, -1.0)).exp()
    }

    /// Explicit Kronecker embedding of a local operator (brute-force oracle).
    fn embed(l: &RegisterLayout, op: &DMatrix<C64>, targets: &[Site]) -> DMatrix<C64> {
        let dim = l.dim();
        let tdims: Vec<usize> = targets.iter().map(|t| l.site_dim(*t).unwrap()).collect();
        let local = |idx: usize| -> usize {
            targets.iter().zip(&tdims).fold(0, |acc, (t, d)| {
                let digit = (idx / l.stride(*t).unwrap()) % d;
                acc * d + digit
            })
        };
        let spectator = |idx: usize| -> usize {
            let mut r = idx;
            for t in targets {
                let st = l.stride(*t).unwrap();
                let d = l.site_dim(*t).unwrap();
                r -= ((idx / st) % d) * st;
            }
            r
        };
        DMatrix::from_fn(dim, dim, |r, cidx| {
            if spectator(r) == spectator(cidx) {
                op[(local(r), local(cidx))]
            } else {
                c(0.0, 0.0)
            }
        })
    }

    proptest! {
        #[test]
        fn apply_local_matches_kronecker(
            seed in 0.0f64..10.0,
            pick in 0usize..6,
            order_swap in proptest::bool::ANY,
        ) {
            // total dim = 2 * 2 * 3 * 2 = 24 <= 64
            let l = layout(2, &[(0, 2), (5, 6)]);
            let choices: [&[Site]; 6] = [
                &[Site::Qubit(0)],
                &[Site::Mode(0)],
                &[Site::Qubit(1), Site::Mode(1)],
                &[Site::Qubit(0), Site::Mode(0)],
                &[Site::Mode(1), Site::Qubit(0), Site::Mode(0)],
                &[Site::Qubit(0), Site::Qubit(1)],
            ];
            let mut targets = choices[pick].to_vec();
            if order_swap {
                targets.reverse();
            }
            let d: usize = targets.iter().map(|t| l.site_dim(*t).unwrap()).product();
            let op = random_op(d, seed);
            let s0 = random_state(&l, &[seed, 2.0 * seed + 1.0]);
            let mut s = s0.clone();
            s.apply_local(&op, &targets).unwrap();
            let full = embed(&l, &op, &targets);
            let v = nalgebra::DVector::from_column_slice(s0.amplitudes());
            let want = full * v;
            for (a, b) in s.amplitudes().iter().zip(want.iter()) {
                prop_assert!((a - b).norm() < 1e-12);
            }

            // diagonal path agrees with the dense path on a diagonal operator
            let diag: Vec<C64> = (0..d).map(|k| C64::from_polar(1.0, seed * k as f64)).collect();
            let mut s1 = s0.clone();
            s1.apply_diagonal(&diag, &targets).unwrap();
            let mut s2 = s0.clone();
            s2.apply_local(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)), &targets).unwrap();
            for (a, b) in s1.amplitudes().iter().zip(s2.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-14);
            }
        }

        #[test]
        fn disjoint_targets_commute(seed in 0.0f64..10.0) {
            let l = layout(2, &[(0, 2), (0, 1)]);
            let u1 = random_unitary(6, seed);
            let u2 = random_unitary(4, seed + 3.0);
            let s0 = random_state(&l, &[seed]);
            let mut a = s0.clone();
            a.apply_local(&u1, &[Site::Qubit(0), Site::Mode(0)]).unwrap();
            a.apply_local(&u2, &[Site::Qubit(1), Site::Mode(1)]).unwrap();
            let mut b = s0.clone();
            b.apply_local(&u2, &[Site::Qubit(1), Site::Mode(1)]).unwrap();
            b.apply_local(&u1, &[Site::Qubit(0), Site::Mode(0)]).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unitary_norm_preserved_over_many_applications() {
        let l = layout(2, &[(0, 3)]);
        let u = random_unitary(8, 0.4);
        let mut s = random_state(&l, &[0.9]);
        for k in 0..1000 {
            let targets: &[Site] = if k % 2 == 0 {
                &[Site::Qubit(0), Site::Mode(0)]
            } else {
                &[Site::Mode(0), Site::Qubit(1)]
            };
            s.apply_local(&u, targets).unwrap();
        }
        assert!((s.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn layout_overflow_rejected() {
        let modes = vec![FockWindow::cutoff(1000); 12];
        assert!(matches!(
            RegisterLayout::new(40, modes),
            Err(Error::DimensionOverflow(_))
        ));
    }
}
