//! Gate application, monolithic and chunked circuit execution, and shot sampling.

mod chunked;
pub(crate) mod kernels;
mod report;
mod sample;

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::{Complex, Complex64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Gate, GateKind, Matrix, ViolationKind};
use crate::perf::{kernel_cost, KernelClass, PerfLedger, PhaseTimes};
use crate::state::{Amplitudes, MemoryBudget, Precision, Scalar, StateError, StateVector};
use crate::transpiler::{block_pass, fuse_pass, FusionConfig, TranspileError};

pub use chunked::{run_chunked, ChunkedState};
pub use report::{ClassRow, ReportConfig, RunReport};
pub use sample::{normalization_tolerance, sample, sample_chunked, sampling_rng, Counts};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Transpile(#[from] TranspileError),
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit state")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("gate operands overlap")]
    OverlappingOperands,
    #[error("matrix is {rows}×{cols} but {qubits} qubit(s) were given")]
    MatrixShape { rows: usize, cols: usize, qubits: usize },
    #[error("mid-circuit measurement at gate {0}; only trailing measurement is supported")]
    MidCircuitMeasurement(usize),
    #[error("state norm {norm} deviates from 1 by more than {tolerance}")]
    Normalization { norm: f64, tolerance: f64 },
    #[error("worker count must be at least 1")]
    NoWorkers,
    #[error("could not build worker pool: {0}")]
    ThreadPool(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub precision: Precision,
    pub shots: u64,
    pub seed: u64,
    pub fusion: FusionConfig,
    /// `Some(b)` runs chunked with `2^b`-amplitude chunks.
    pub blocking_qubits: Option<usize>,
    pub workers: usize,
    pub budget: MemoryBudget,
    /// Keep the final state in the result.
    pub keep_state: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            precision: Precision::Double,
            shots: 0,
            seed: 0,
            fusion: FusionConfig::default(),
            blocking_qubits: None,
            workers: 1,
            budget: MemoryBudget::default(),
            keep_state: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub state: Option<StateVector>,
    pub counts: Counts,
    pub ledger: PerfLedger,
    /// Gates executed after transpilation (exchanges excluded).
    pub executed_gates: usize,
    /// Exchange SWAPs executed by a chunked run.
    pub inserted_swaps: usize,
}

impl RunResult {
    pub fn phases(&self) -> &PhaseTimes {
        &self.ledger.phases
    }
}

/// Share of wall time per phase; `idle` is whatever the other phases do not account for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseBreakdown {
    pub initialize: f64,
    pub transfer: f64,
    pub compute: f64,
    pub finalize: f64,
    pub idle: f64,
}

pub fn phase_breakdown(r: &RunResult) -> PhaseBreakdown {
    let p = r.phases();
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(p.wall > 0.0) {
        return PhaseBreakdown {
            initialize: 0.0,
            transfer: 0.0,
            compute: 0.0,
            finalize: 0.0,
            idle: 1.0,
        };
    }
    let accounted = p.initialize + p.transfer + p.compute + p.finalize;
    // accounted phases are measured inside the wall interval; guard against clock jitter
    let scale = if accounted > p.wall { accounted } else { p.wall };
    let (initialize, transfer, compute, finalize) =
        (p.initialize / scale, p.transfer / scale, p.compute / scale, p.finalize / scale);
    PhaseBreakdown {
        initialize,
        transfer,
        compute,
        finalize,
        idle: 1.0 - (initialize + transfer + compute + finalize),
    }
}

pub(crate) fn m2(m: &Matrix) -> kernels::M2 {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn row_major(m: &Matrix) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(m.len());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            v.push(m[(r, c)]);
        }
    }
    v
}

fn check_operands(n_qubits: usize, qubits: &[usize]) -> Result<(), EngineError> {
    for (i, &q) in qubits.iter().enumerate() {
        if q >= n_qubits {
            return Err(EngineError::QubitOutOfRange { qubit: q, n_qubits });
        }
        if qubits[..i].contains(&q) {
            return Err(EngineError::OverlappingOperands);
        }
    }
    Ok(())
}

fn bit_mask(qubits: &[usize]) -> usize {
    qubits.iter().fold(0, |m, &q| m | (1 << q))
}

/// Kernel shape `(k, controls)` of a gate, `None` for non-unitary instructions.
pub fn kernel_shape(g: &Gate) -> Option<(usize, usize)> {
    if !g.kind.is_unitary() {
        return None;
    }
    Some((g.targets.len(), g.controls.len()))
}

/// Applies `g` to a little-endian amplitude slice. Operands must already be checked.
pub(crate) fn apply_gate_slice<T: Scalar>(amps: &mut [Complex<T>], g: &Gate, par: bool) {
    let one = Complex64::new(1.0, 0.0);
    let cmask = bit_mask(&g.controls);
    let t0 = g.targets.first().copied().unwrap_or(0);
    match &g.kind {
        GateKind::Measure { .. } | GateKind::Barrier => {}
        GateKind::X | GateKind::Cx | GateKind::Ccx | GateKind::Mcx => kernels::apply_controlled_x(amps, cmask, t0, par),
        GateKind::Z | GateKind::Cz | GateKind::Mcz => {
            kernels::apply_phase_mask(amps, cmask | (1 << t0), Complex64::new(-1.0, 0.0), par)
        }
        GateKind::Cp(theta) => kernels::apply_phase_mask(amps, cmask | (1 << t0), Complex64::from_polar(1.0, *theta), par),
        GateKind::S => kernels::apply_diag_1q(amps, one, Complex64::new(0.0, 1.0), t0, par),
        GateKind::T => kernels::apply_diag_1q(amps, one, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4), t0, par),
        GateKind::P(theta) => kernels::apply_diag_1q(amps, one, Complex64::from_polar(1.0, *theta), t0, par),
        GateKind::Rz(theta) => kernels::apply_diag_1q(
            amps,
            Complex64::from_polar(1.0, -theta / 2.0),
            Complex64::from_polar(1.0, theta / 2.0),
            t0,
            par,
        ),
        GateKind::Swap => kernels::apply_swap(amps, g.targets[0], g.targets[1], par),
        GateKind::Su4(m) | GateKind::Unitary(m) => apply_matrix_slice(amps, m, &g.targets, par),
        _ => {
            let m = g.matrix().expect("unitary kind");
            if g.controls.is_empty() {
                kernels::apply_1q(amps, &m2(&m), t0, par);
            } else {
                kernels::apply_controlled(amps, &m2(&m), cmask, t0, par);
            }
        }
    }
}

fn apply_matrix_slice<T: Scalar>(amps: &mut [Complex<T>], m: &Matrix, qubits: &[usize], par: bool) {
    match qubits.len() {
        1 => kernels::apply_1q(amps, &m2(m), qubits[0], par),
        2 => kernels::apply_dense::<T, 4>(amps, &row_major(m), qubits, par),
        3 => kernels::apply_dense::<T, 8>(amps, &row_major(m), qubits, par),
        _ => kernels::apply_dense::<T, 0>(amps, &row_major(m), qubits, par),
    }
}

macro_rules! with_amps {
    ($state:expr, $v:ident => $body:expr) => {
        match $state.amplitudes_mut() {
            Amplitudes::Single($v) => $body,
            Amplitudes::Double($v) => $body,
        }
    };
}

/// Applies a 2×2 unitary to `target`.
pub fn apply_1q(s: &mut StateVector, m: &Matrix, target: usize) -> Result<(), EngineError> {
    check_matrix(m, 1)?;
    check_operands(s.n_qubits(), &[target])?;
    let m = m2(m);
    with_amps!(s, v => kernels::apply_1q(v, &m, target, true));
    Ok(())
}

/// Applies a 2×2 unitary to `target` on the subspace where every control is 1.
pub fn apply_controlled(s: &mut StateVector, m: &Matrix, controls: &[usize], target: usize) -> Result<(), EngineError> {
    check_matrix(m, 1)?;
    let mut ops = controls.to_vec();
    ops.push(target);
    check_operands(s.n_qubits(), &ops)?;
    let (m, mask) = (m2(m), bit_mask(controls));
    with_amps!(s, v => kernels::apply_controlled(v, &m, mask, target, true));
    Ok(())
}

/// Applies a `2^k × 2^k` unitary; local bit `i` of the matrix index is `qubits[i]`.
pub fn apply_kq(s: &mut StateVector, m: &Matrix, qubits: &[usize]) -> Result<(), EngineError> {
    check_matrix(m, qubits.len())?;
    check_operands(s.n_qubits(), qubits)?;
    with_amps!(s, v => apply_matrix_slice(v, m, qubits, true));
    Ok(())
}

fn check_matrix(m: &Matrix, k: usize) -> Result<(), EngineError> {
    if k == 0 || m.nrows() != 1 << k || m.ncols() != 1 << k {
        return Err(EngineError::MatrixShape {
            rows: m.nrows(),
            cols: m.ncols(),
            qubits: k,
        });
    }
    Ok(())
}

pub fn apply_gate(s: &mut StateVector, g: &Gate) -> Result<(), EngineError> {
    let ops: Vec<usize> = g.qubits().collect();
    check_operands(s.n_qubits(), &ops)?;
    if let GateKind::Su4(m) | GateKind::Unitary(m) = &g.kind {
        check_matrix(m, g.targets.len())?;
    }
    with_amps!(s, v => apply_gate_slice(v, g, true));
    Ok(())
}

/// Validates `c`, reporting mid-circuit measurement as its own error.
pub(crate) fn check_runnable(c: &Circuit) -> Result<(), EngineError> {
    match c.validate() {
        Ok(()) => Ok(()),
        Err(CircuitError::Invalid(v)) => {
            if let Some(m) = v.iter().find(|v| v.kind == ViolationKind::MeasureNotTrailing) {
                return Err(EngineError::MidCircuitMeasurement(m.gate_index));
            }
            Err(CircuitError::Invalid(v).into())
        }
        Err(e) => Err(e.into()),
    }
}

pub(crate) fn with_pool<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> Result<R, EngineError> {
    if workers == 0 {
        return Err(EngineError::NoWorkers);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| EngineError::ThreadPool(e.to_string()))?;
    Ok(pool.install(f))
}

/// Executes `c` from `|0…0⟩` and samples `cfg.shots` outcomes from the final state.
pub fn run(c: &Circuit, cfg: &RunConfig) -> Result<RunResult, EngineError> {
    let wall = Instant::now();
    check_runnable(c)?;
    cfg.budget.check(c.n_qubits, cfg.precision)?;
    let transpiled = fuse_pass(c, &cfg.fusion);
    if let Some(b) = cfg.blocking_qubits {
        let plan = block_pass(&transpiled, b)?;
        return chunked::execute(&plan, cfg, wall);
    }
    if cfg.workers == 0 {
        return Err(EngineError::NoWorkers);
    }

    let mut ledger = PerfLedger::default();
    let t = Instant::now();
    let mut state = StateVector::zero_with_budget(c.n_qubits, cfg.precision, &cfg.budget)?;
    ledger.phases.initialize = t.elapsed().as_secs_f64();

    let par = cfg.workers > 1;
    let n = c.n_qubits;
    let t = Instant::now();
    let executed = with_pool(cfg.workers, || {
        let mut executed = 0;
        for g in &transpiled.gates {
            let Some((k, controls)) = kernel_shape(g) else { continue };
            let start = Instant::now();
            with_amps!(state, v => apply_gate_slice(v, g, par));
            let cost = kernel_cost(k, controls, n, cfg.precision).expect("validated gate shape");
            ledger.record(&cost, start.elapsed().as_secs_f64());
            executed += 1;
        }
        executed
    })?;
    ledger.phases.compute = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let counts = if cfg.shots > 0 {
        sample(&state, cfg.shots, cfg.seed)?
    } else {
        BTreeMap::new()
    };
    ledger.phases.finalize = t.elapsed().as_secs_f64();
    ledger.phases.wall = wall.elapsed().as_secs_f64();
    Ok(RunResult {
        state: cfg.keep_state.then_some(state),
        counts,
        ledger,
        executed_gates: executed,
        inserted_swaps: 0,
    })
}

pub(crate) fn class_of(g: &Gate) -> Option<KernelClass> {
    kernel_shape(g).map(|(k, c)| KernelClass::of(k, c))
}
