use thiserror::Error;

use crate::bench::BenchError;
use crate::circuit::CircuitError;
use crate::engine::EngineError;
use crate::perf::{MachineModelError, PerfError};
use crate::qasm::QasmError;
use crate::state::StateError;
use crate::transpiler::TranspileError;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Qasm(#[from] QasmError),
    #[error(transparent)]
    Transpile(#[from] TranspileError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Bench(#[from] BenchError),
    #[error(transparent)]
    Perf(#[from] PerfError),
    #[error(transparent)]
    Machine(#[from] MachineModelError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
