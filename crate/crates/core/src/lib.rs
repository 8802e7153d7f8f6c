//! Full state-vector (Schrödinger) quantum circuit simulation.
//!
//! The crate is split along the pipeline a circuit goes through:
//!
//! * [`circuit`] holds the gate library and the circuit IR, plus static statistics.
//! * [`qasm`] loads and exports an OpenQASM 2.0 subset.
//! * [`transpiler`] implements gate fusion, cache blocking and a few decomposition passes.
//! * [`engine`] applies gates to a [`state::StateVector`], either monolithically or as
//!   a chunked state spread over emulated workers, and samples shots.
//! * [`bench`] generates the six benchmark applications (QV, QFT, RQC, Grover, GHZ, QW).
//! * [`perf`] is the FLOP/byte cost model, roofline evaluation and scaling reports.
//!
//! Qubit ordering is little-endian everywhere: qubit 0 is the least significant bit of
//! a basis-state index.

pub mod bench;
pub mod circuit;
pub mod engine;
pub mod perf;
pub mod qasm;
pub mod state;
pub mod transpiler;

mod error;
pub mod linalg;

pub use error::{Error, Result};

pub use num_complex::{Complex32, Complex64};
