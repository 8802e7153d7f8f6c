use serde::{Deserialize, Serialize};

use super::TranspileError;
use crate::circuit::{Circuit, Gate};
use crate::state::Precision;

/// One step of a blocked circuit.
#[derive(Debug, Clone, PartialEq)]
pub enum BlockedOp {
    /// A gate on physical qubits, all below the blocking boundary.
    Gate(Gate),
    /// Exchange of physical qubits `low < b <= high`: amplitudes move between chunks.
    Exchange { low: usize, high: usize },
}

/// A circuit rewritten so that every gate is chunk-local.
#[derive(Debug, Clone)]
pub struct BlockingPlan {
    pub n_qubits: usize,
    pub blocking_qubits: usize,
    pub ops: Vec<BlockedOp>,
    /// Exchanges inserted before gates (excludes the restore sequence).
    pub body_exchanges: usize,
    /// Exchanges in the trailing restore sequence.
    pub restore_exchanges: usize,
    /// Index in `ops` where the restore sequence starts.
    pub restore_start: usize,
    /// Logical → physical mapping after the last op (identity for a complete plan).
    pub final_layout: Vec<usize>,
}

impl BlockingPlan {
    /// All inserted exchange SWAPs, restore sequence included.
    pub fn inserted_swaps(&self) -> usize {
        self.body_exchanges + self.restore_exchanges
    }

    /// Amplitude bytes crossing chunk boundaries: each exchange moves `2^{n-1}` amplitudes.
    pub fn predicted_inter_chunk_bytes(&self, precision: Precision) -> u64 {
        self.inserted_swaps() as u64 * (1u64 << (self.n_qubits - 1)) * precision.amplitude_bytes()
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> {
        self.ops.iter().filter_map(|op| match op {
            BlockedOp::Gate(g) => Some(g),
            BlockedOp::Exchange { .. } => None,
        })
    }
}

struct Layout {
    phys_of: Vec<usize>,
    log_of: Vec<usize>,
}

impl Layout {
    fn identity(n: usize) -> Self {
        Layout {
            phys_of: (0..n).collect(),
            log_of: (0..n).collect(),
        }
    }

    fn swap_physical(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.log_of[a], self.log_of[b]);
        self.log_of.swap(a, b);
        self.phys_of[la] = b;
        self.phys_of[lb] = a;
    }
}

/// Rewrites `c` so every gate acts on physical qubits `< b`.
///
/// Each operand living at a physical qubit `>= b` is exchanged with the lowest physical
/// qubit below `b` not used by the same gate. A restore sequence at the end brings the
/// layout back to identity. Measurements and barriers carry no amplitude work and are
/// dropped from the plan.
pub fn block_pass(c: &Circuit, b: usize) -> Result<BlockingPlan, TranspileError> {
    let n = c.n_qubits;
    if b == 0 || b > n {
        return Err(TranspileError::InvalidBlocking {
            blocking_qubits: b,
            n_qubits: n,
        });
    }
    let mut layout = Layout::identity(n);
    let mut ops = Vec::with_capacity(c.gates.len());
    let mut body_exchanges = 0;
    for (gate_index, g) in c.gates.iter().enumerate() {
        if !g.kind.is_unitary() {
            continue;
        }
        if g.span() > b {
            return Err(TranspileError::BlockingInfeasible {
                gate_index,
                span: g.span(),
                blocking_qubits: b,
            });
        }
        let mut phys: Vec<usize> = g.qubits().map(|q| layout.phys_of[q]).collect();
        for i in 0..phys.len() {
            if phys[i] < b {
                continue;
            }
            let free = (0..b).find(|p| !phys.contains(p)).expect("span <= b leaves a free low qubit");
            ops.push(BlockedOp::Exchange { low: free, high: phys[i] });
            layout.swap_physical(free, phys[i]);
            body_exchanges += 1;
            phys[i] = free;
        }
        let nt = g.targets.len();
        ops.push(BlockedOp::Gate(Gate::new(
            g.kind.clone(),
            phys[..nt].to_vec(),
            phys[nt..].to_vec(),
        )));
    }

    let restore_start = ops.len();
    let mut restore_exchanges = 0;
    for p in 0..n {
        if layout.log_of[p] == p {
            continue;
        }
        // positions below p are already restored, so logical p sits above it
        let q = layout.phys_of[p];
        if q < b {
            ops.push(BlockedOp::Gate(Gate::swap(p, q)));
        } else if p < b {
            ops.push(BlockedOp::Exchange { low: p, high: q });
            restore_exchanges += 1;
        } else {
            // transposition of two chunk-index qubits, routed through physical qubit 0
            for high in [p, q, p] {
                ops.push(BlockedOp::Exchange { low: 0, high });
                restore_exchanges += 1;
            }
        }
        layout.swap_physical(p, q);
    }
    debug_assert!(layout.phys_of.iter().enumerate().all(|(l, &p)| l == p));

    Ok(BlockingPlan {
        n_qubits: n,
        blocking_qubits: b,
        ops,
        body_exchanges,
        restore_exchanges,
        restore_start,
        final_layout: layout.phys_of,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub blocking_qubits: usize,
    pub inserted_swaps: usize,
    pub restore_swaps: usize,
    pub predicted_inter_chunk_bytes: u64,
}

/// Plans `c` for every `b` without touching amplitudes.
pub fn sweep_blocking(c: &Circuit, b_values: &[usize], precision: Precision) -> Result<Vec<SweepRow>, TranspileError> {
    b_values
        .iter()
        .map(|&b| {
            let plan = block_pass(c, b)?;
            Ok(SweepRow {
                blocking_qubits: b,
                inserted_swaps: plan.inserted_swaps(),
                restore_swaps: plan.restore_exchanges,
                predicted_inter_chunk_bytes: plan.predicted_inter_chunk_bytes(precision),
            })
        })
        .collect()
}
