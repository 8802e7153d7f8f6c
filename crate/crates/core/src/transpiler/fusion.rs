use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate, Matrix};
use crate::linalg::{embed, identity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub enabled: bool,
    /// Fusion only runs on circuits with at least this many qubits.
    pub threshold: usize,
    /// Largest fused operand set; 3 yields up to 8×8 matrices.
    pub max_fused_qubits: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            enabled: true,
            threshold: 14,
            max_fused_qubits: 3,
        }
    }
}

impl FusionConfig {
    pub fn disabled() -> Self {
        FusionConfig {
            enabled: false,
            ..Default::default()
        }
    }

    pub fn applies_to(&self, n_qubits: usize) -> bool {
        self.enabled && n_qubits >= self.threshold
    }
}

/// A group of consecutive gates folded into one explicit unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedUnitary {
    /// Ascending; `qubits[0]` is the low bit of the matrix index.
    pub qubits: Vec<usize>,
    pub matrix: Matrix,
    /// Indices of the source gates in the input circuit.
    pub provenance: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FusionOutput {
    pub circuit: Circuit,
    pub groups: Vec<FusedUnitary>,
}

#[derive(Default)]
struct OpenGroup {
    members: Vec<usize>,
    qubits: BTreeSet<usize>,
}

impl OpenGroup {
    fn flush(&mut self, input: &Circuit, out: &mut Circuit, groups: &mut Vec<FusedUnitary>) {
        match self.members.len() {
            0 => {}
            1 => {
                out.push(input.gates[self.members[0]].clone());
            }
            _ => {
                let space: Vec<usize> = self.qubits.iter().copied().collect();
                let mut acc = identity(1 << space.len());
                for &i in &self.members {
                    let (ops, m) = input.gates[i]
                        .full_matrix()
                        .expect("fusion groups hold unitary gates only");
                    acc = embed(&m, &ops, &space) * acc;
                }
                out.push(Gate::unitary(acc.clone(), space.clone()));
                groups.push(FusedUnitary {
                    qubits: space,
                    matrix: acc,
                    provenance: std::mem::take(&mut self.members),
                });
            }
        }
        self.members.clear();
        self.qubits.clear();
    }
}

/// Greedy forward fusion.
///
/// A gate joins the open group while the union of operands stays within
/// `max_fused_qubits`; otherwise the group is flushed. Groups of one gate pass through
/// unchanged. Measurements and barriers flush, as do gates wider than the limit, which
/// are emitted natively.
pub fn fuse(c: &Circuit, cfg: &FusionConfig) -> FusionOutput {
    if !cfg.applies_to(c.n_qubits) {
        return FusionOutput {
            circuit: c.clone(),
            groups: Vec::new(),
        };
    }
    let limit = cfg.max_fused_qubits.max(1);
    let mut out = Circuit {
        n_qubits: c.n_qubits,
        gates: Vec::with_capacity(c.gates.len()),
        metadata: c.metadata.clone(),
    };
    let mut groups = Vec::new();
    let mut open = OpenGroup::default();
    for (i, g) in c.gates.iter().enumerate() {
        if !g.kind.is_unitary() || g.span() > limit {
            open.flush(c, &mut out, &mut groups);
            out.push(g.clone());
            continue;
        }
        let extra = g.qubits().filter(|q| !open.qubits.contains(q)).count();
        if open.qubits.len() + extra > limit {
            open.flush(c, &mut out, &mut groups);
        }
        open.members.push(i);
        open.qubits.extend(g.qubits());
    }
    open.flush(c, &mut out, &mut groups);
    FusionOutput { circuit: out, groups }
}

pub fn fuse_pass(c: &Circuit, cfg: &FusionConfig) -> Circuit {
    fuse(c, cfg).circuit
}

impl FusedUnitary {
    pub fn k(&self) -> usize {
        self.qubits.len()
    }
}
