//! Circuit-to-circuit passes: gate fusion, cache blocking and gate decompositions.

mod blocking;
mod decompose;
mod fusion;

use thiserror::Error;

pub use blocking::{block_pass, sweep_blocking, BlockedOp, BlockingPlan, SweepRow};
pub use decompose::{
    decompose_multi_controlled, mcp_gates, mcx_gates, su4_decompose, two_qubit_to_native, zyz_decompose, Zyz,
};
pub use fusion::{fuse, fuse_pass, FusedUnitary, FusionConfig, FusionOutput};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TranspileError {
    #[error("blocking qubits must be in 1..={n_qubits}, got {blocking_qubits}")]
    InvalidBlocking { blocking_qubits: usize, n_qubits: usize },
    #[error("blocking infeasible: gate {gate_index} touches {span} qubits but only {blocking_qubits} are chunk-local")]
    BlockingInfeasible {
        gate_index: usize,
        span: usize,
        blocking_qubits: usize,
    },
}
