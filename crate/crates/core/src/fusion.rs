//! Fusion of consecutive gates into fewer register sweeps.
//!
//! Large registers are bandwidth bound: every gate is one pass over the
//! state. Runs of gates whose combined support stays small are multiplied
//! into a single local operator, built by pushing basis states of the
//! support through the ordinary gate kernels.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gates::{apply_gate, Gate};
use crate::statespace::{RegisterLayout, Site, StateVector};
use crate::C64;

/// Largest support dimension of a fused dense operator.
pub const DENSE_FUSION_LIMIT: usize = 32;
/// Largest support dimension of a fused diagonal.
pub const DIAGONAL_FUSION_LIMIT: usize = 4096;

/// Entries below this magnitude are dropped from fused matrices so that the
/// sweep kernel keeps exploiting structural zeros.
const ZERO_CUTOFF: f64 = 1e-15;

#[derive(Debug, Clone)]
pub enum FusedOp {
    /// A gate applied by its own kernel.
    Native(Gate),
    /// Dense operator on `targets` (qubits ascending, then modes ascending).
    Local {
        targets: Vec<Site>,
        matrix: DMatrix<C64>,
    },
    Diagonal {
        targets: Vec<Site>,
        diag: Vec<C64>,
    },
}

/// A gate sequence regrouped into fused operators, same action in the same order.
#[derive(Debug, Clone)]
pub struct FusedStep {
    layout: Arc<RegisterLayout>,
    ops: Vec<FusedOp>,
}

impl FusedStep {
    pub fn new(gates: &[Gate], layout: Arc<RegisterLayout>) -> Result<Self> {
        Self::with_limits(gates, layout, DENSE_FUSION_LIMIT, DIAGONAL_FUSION_LIMIT)
    }

    pub fn with_limits(
        gates: &[Gate],
        layout: Arc<RegisterLayout>,
        dense_limit: usize,
        diagonal_limit: usize,
    ) -> Result<Self> {
        let mut ops = Vec::new();
        let mut group: Vec<&Gate> = Vec::new();
        let mut support: Vec<Site> = Vec::new();
        let mut diagonal = true;
        for g in gates {
            g.validate(&layout)?;
            let mut union = support.clone();
            union.extend(g.targets());
            union.sort_unstable();
            union.dedup();
            let both_diagonal = diagonal && g.is_diagonal();
            let limit = if both_diagonal {
                diagonal_limit
            } else {
                dense_limit
            };
            if group.is_empty() || support_dim(&layout, &union)? <= limit {
                group.push(g);
                support = union;
                diagonal = both_diagonal;
            } else {
                ops.push(fuse(
                    &group,
                    &support,
                    diagonal,
                    &layout,
                    dense_limit,
                    diagonal_limit,
                )?);
                group = vec![g];
                support = g.targets();
                support.sort_unstable();
                diagonal = g.is_diagonal();
            }
        }
        if !group.is_empty() {
            ops.push(fuse(
                &group,
                &support,
                diagonal,
                &layout,
                dense_limit,
                diagonal_limit,
            )?);
        }
        Ok(Self { layout, ops })
    }

    pub fn ops(&self) -> &[FusedOp] {
        &self.ops
    }

    pub fn layout(&self) -> &Arc<RegisterLayout> {
        &self.layout
    }

    pub fn apply(&self, state: &mut StateVector) -> Result<()> {
        if state.layout().as_ref() != self.layout.as_ref() {
            return Err(Error::LayoutMismatch);
        }
        for op in &self.ops {
            match op {
                FusedOp::Native(g) => apply_gate(state, g)?,
                FusedOp::Local { targets, matrix } => state.apply_local(matrix, targets)?,
                FusedOp::Diagonal { targets, diag } => state.apply_diagonal(diag, targets)?,
            }
        }
        Ok(())
    }
}

fn support_dim(layout: &RegisterLayout, sites: &[Site]) -> Result<usize> {
    sites.iter().try_fold(
        1usize,
        |acc, &s| Ok(acc.saturating_mul(layout.site_dim(s)?)),
    )
}

fn fuse(
    group: &[&Gate],
    support: &[Site],
    diagonal: bool,
    layout: &RegisterLayout,
    dense_limit: usize,
    diagonal_limit: usize,
) -> Result<FusedOp> {
    let dim = support_dim(layout, support)?;
    let limit = if diagonal {
        diagonal_limit
    } else {
        dense_limit
    };
    if dim > limit {
        debug_assert_eq!(group.len(), 1);
        return Ok(FusedOp::Native(group[0].clone()));
    }
    let qubits: Vec<usize> = support
        .iter()
        .filter_map(|s| match s {
            Site::Qubit(q) => Some(*q),
            Site::Mode(_) => None,
        })
        .collect();
    let modes: Vec<usize> = support
        .iter()
        .filter_map(|s| match s {
            Site::Mode(m) => Some(*m),
            Site::Qubit(_) => None,
        })
        .collect();
    let sub = Arc::new(RegisterLayout::new(
        qubits.len(),
        modes.iter().map(|&m| layout.window(m)).collect(),
    )?);
    let local: Vec<Gate> = group
        .iter()
        .map(|g| {
            g.relabeled(
                |q| qubits.iter().position(|&x| x == q).unwrap(),
                |m| modes.iter().position(|&x| x == m).unwrap(),
            )
        })
        .collect();
    let run = |amps: Vec<C64>| -> Result<Vec<C64>> {
        let mut s = StateVector::from_amplitudes(sub.clone(), amps)?;
        for g in &local {
            apply_gate(&mut s, g)?;
        }
        Ok(s.into_amplitudes())
    };
    let zero = C64::new(0.0, 0.0);
    if diagonal {
        let diag = run(vec![C64::new(1.0, 0.0); dim])?;
        return Ok(FusedOp::Diagonal {
            targets: support.to_vec(),
            diag,
        });
    }
    let mut matrix = DMatrix::from_element(dim, dim, zero);
    for c in 0..dim {
        let mut e = vec![zero; dim];
        e[c] = C64::new(1.0, 0.0);
        for (r, z) in run(e)?.into_iter().enumerate() {
            if z.norm() > ZERO_CUTOFF {
                matrix[(r, c)] = z;
            }
        }
    }
    Ok(FusedOp::Local {
        targets: support.to_vec(),
        matrix,
    })
}
