//! Circuit intermediate representation, the gate library and static circuit statistics.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::linalg::Matrix;
use crate::linalg::{self, embed};

/// Unitarity tolerance for matrix payloads: `max |M†M − I| < UNITARITY_TOL`.
pub const UNITARITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    /// `diag(1, e^{iθ})`, the OpenQASM `u1`/`p`.
    P(f64),
    /// OpenQASM `u3(θ, φ, λ)`.
    U(f64, f64, f64),
    SqrtX,
    SqrtY,
    Cx,
    Cz,
    Cp(f64),
    Ccx,
    Swap,
    /// X on the single target, conditioned on any number of controls.
    Mcx,
    /// Z on the single target, conditioned on any number of controls.
    Mcz,
    /// Explicit two-qubit unitary (Haar-random blocks of QV).
    Su4(Matrix),
    /// Explicit `2^k × 2^k` unitary, e.g. the product of a fused gate group.
    Unitary(Matrix),
    Measure {
        clbit: usize,
    },
    Barrier,
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::S => "s",
            GateKind::T => "t",
            GateKind::Rx(_) => "rx",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::P(_) => "p",
            GateKind::U(..) => "u3",
            GateKind::SqrtX => "sx",
            GateKind::SqrtY => "sy",
            GateKind::Cx => "cx",
            GateKind::Cz => "cz",
            GateKind::Cp(_) => "cp",
            GateKind::Ccx => "ccx",
            GateKind::Swap => "swap",
            GateKind::Mcx => "mcx",
            GateKind::Mcz => "mcz",
            GateKind::Su4(_) => "su4",
            GateKind::Unitary(_) => "unitary",
            GateKind::Measure { .. } => "measure",
            GateKind::Barrier => "barrier",
        }
    }

    pub fn is_unitary(&self) -> bool {
        !matches!(self, GateKind::Measure { .. } | GateKind::Barrier)
    }

    /// Required `(targets, controls)` counts; `None` means "any".
    fn arity(&self) -> (Option<usize>, Option<usize>) {
        use GateKind::*;
        match self {
            H | X | Y | Z | S | T | Rx(_) | Ry(_) | Rz(_) | P(_) | U(..) | SqrtX | SqrtY => (Some(1), Some(0)),
            Cx | Cz | Cp(_) => (Some(1), Some(1)),
            Ccx => (Some(1), Some(2)),
            Swap | Su4(_) => (Some(2), Some(0)),
            Mcx | Mcz => (Some(1), None),
            Unitary(m) => (Some(m.nrows().trailing_zeros() as usize), Some(0)),
            Measure { .. } => (Some(1), Some(0)),
            Barrier => (None, Some(0)),
        }
    }
}

/// One instruction: a kind, its target qubits (ordered) and control qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<usize>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, controls: Vec<usize>) -> Self {
        Gate { kind, targets, controls }
    }

    pub fn single(kind: GateKind, target: usize) -> Self {
        Gate::new(kind, vec![target], vec![])
    }

    pub fn h(q: usize) -> Self {
        Gate::single(GateKind::H, q)
    }

    pub fn x(q: usize) -> Self {
        Gate::single(GateKind::X, q)
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cx, vec![target], vec![control])
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cz, vec![target], vec![control])
    }

    pub fn cp(theta: f64, control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cp(theta), vec![target], vec![control])
    }

    pub fn ccx(c0: usize, c1: usize, target: usize) -> Self {
        Gate::new(GateKind::Ccx, vec![target], vec![c0, c1])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Swap, vec![a, b], vec![])
    }

    pub fn mcx(controls: Vec<usize>, target: usize) -> Self {
        Gate::new(GateKind::Mcx, vec![target], controls)
    }

    pub fn mcz(controls: Vec<usize>, target: usize) -> Self {
        Gate::new(GateKind::Mcz, vec![target], controls)
    }

    /// `targets[0]` is the low bit of the matrix index.
    pub fn unitary(matrix: Matrix, targets: Vec<usize>) -> Self {
        Gate::new(GateKind::Unitary(matrix), targets, vec![])
    }

    pub fn su4(matrix: Matrix, q0: usize, q1: usize) -> Self {
        Gate::new(GateKind::Su4(matrix), vec![q0, q1], vec![])
    }

    pub fn measure(q: usize, clbit: usize) -> Self {
        Gate::single(GateKind::Measure { clbit }, q)
    }

    pub fn barrier(qubits: Vec<usize>) -> Self {
        Gate::new(GateKind::Barrier, qubits, vec![])
    }

    /// Targets followed by controls.
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.targets.iter().chain(self.controls.iter()).copied()
    }

    /// Number of distinct qubits touched.
    pub fn span(&self) -> usize {
        self.targets.len() + self.controls.len()
    }

    pub fn is_non_local(&self) -> bool {
        self.kind.is_unitary() && self.span() >= 2
    }

    /// Matrix over the target qubits only (controls are not folded in).
    pub fn matrix(&self) -> Result<Matrix, CircuitError> {
        gate_matrix(self)
    }

    /// Matrix over all operands with controls folded in. Local bit order is
    /// targets followed by controls, matching [`Gate::qubits`].
    pub fn full_matrix(&self) -> Result<(Vec<usize>, Matrix), CircuitError> {
        let m = gate_matrix(self)?;
        let full = if self.controls.is_empty() {
            m
        } else {
            linalg::controlled(&m, self.controls.len())
        };
        Ok((self.qubits().collect(), full))
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        let params: Vec<f64> = match self.kind {
            GateKind::Rx(a) | GateKind::Ry(a) | GateKind::Rz(a) | GateKind::P(a) | GateKind::Cp(a) => vec![a],
            GateKind::U(a, b, c) => vec![a, b, c],
            _ => vec![],
        };
        if !params.is_empty() {
            let p: Vec<String> = params.iter().map(|p| p.to_string()).collect();
            write!(f, "({})", p.join(","))?;
        }
        let ops: Vec<String> = self.controls.iter().chain(&self.targets).map(|q| q.to_string()).collect();
        write!(f, " [{}]", ops.join(","))
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn mat2(a: Complex64, b: Complex64, cc: Complex64, d: Complex64) -> Matrix {
    Matrix::from_row_slice(2, 2, &[a, b, cc, d])
}

/// OpenQASM 2.0 `u3(θ, φ, λ)`.
pub fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Matrix {
    let (s, co) = (theta / 2.0).sin_cos();
    mat2(
        c(co, 0.0),
        -Complex64::from_polar(s, lambda),
        Complex64::from_polar(s, phi),
        Complex64::from_polar(co, phi + lambda),
    )
}

/// Unitary over the gate's targets (`targets[0]` is the low bit).
pub fn gate_matrix(g: &Gate) -> Result<Matrix, CircuitError> {
    let zero = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let m = match &g.kind {
        GateKind::H => mat2(c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)),
        GateKind::X | GateKind::Cx | GateKind::Ccx | GateKind::Mcx => mat2(zero, one, one, zero),
        GateKind::Y => mat2(zero, c(0.0, -1.0), c(0.0, 1.0), zero),
        GateKind::Z | GateKind::Cz | GateKind::Mcz => mat2(one, zero, zero, c(-1.0, 0.0)),
        GateKind::S => mat2(one, zero, zero, c(0.0, 1.0)),
        GateKind::T => mat2(one, zero, zero, Complex64::from_polar(1.0, FRAC_PI_4)),
        GateKind::P(theta) | GateKind::Cp(theta) => mat2(one, zero, zero, Complex64::from_polar(1.0, *theta)),
        GateKind::Rx(theta) => {
            let (s, co) = (theta / 2.0).sin_cos();
            mat2(c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0))
        }
        GateKind::Ry(theta) => {
            let (s, co) = (theta / 2.0).sin_cos();
            mat2(c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0))
        }
        GateKind::Rz(theta) => mat2(
            Complex64::from_polar(1.0, -theta / 2.0),
            zero,
            zero,
            Complex64::from_polar(1.0, theta / 2.0),
        ),
        GateKind::U(theta, phi, lambda) => u3_matrix(*theta, *phi, *lambda),
        GateKind::SqrtX => mat2(c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)),
        GateKind::SqrtY => mat2(c(0.5, 0.5), c(-0.5, -0.5), c(0.5, 0.5), c(0.5, 0.5)),
        GateKind::Swap => {
            let mut m = Matrix::zeros(4, 4);
            m[(0, 0)] = one;
            m[(1, 2)] = one;
            m[(2, 1)] = one;
            m[(3, 3)] = one;
            m
        }
        GateKind::Su4(m) | GateKind::Unitary(m) => m.clone(),
        GateKind::Measure { .. } | GateKind::Barrier => {
            return Err(CircuitError::NotUnitary(g.kind.name()));
        }
    };
    Ok(m)
}

/// `matrix(second) · matrix(first)`: `first` is applied first.
pub fn compose_same_target(first: &Gate, second: &Gate) -> Result<Matrix, CircuitError> {
    if !first.controls.is_empty() || !second.controls.is_empty() {
        return Err(CircuitError::TargetMismatch);
    }
    let mut a = first.targets.clone();
    let mut b = second.targets.clone();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(CircuitError::TargetMismatch);
    }
    let m1 = gate_matrix(first)?;
    let m2 = embed(&gate_matrix(second)?, &second.targets, &first.targets);
    Ok(m2 * m1)
}

/// Operator acting as `g1` on its qubits and `g2` on a disjoint set, laid out over the
/// ascending union of both operand sets.
pub fn tensor_expand(g1: &Gate, g2: &Gate) -> Result<(Vec<usize>, Matrix), CircuitError> {
    let (q1, m1) = g1.full_matrix()?;
    let (q2, m2) = g2.full_matrix()?;
    if q1.iter().any(|q| q2.contains(q)) {
        return Err(CircuitError::OverlappingQubits);
    }
    let mut space: Vec<usize> = q1.iter().chain(&q2).copied().collect();
    space.sort_unstable();
    let m = embed(&m2, &q2, &space) * embed(&m1, &q1, &space);
    Ok((space, m))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub name: String,
    pub seed: Option<u64>,
    pub params: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    pub metadata: Metadata,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
            metadata: Metadata::default(),
        }
    }

    pub fn named(n_qubits: usize, name: impl Into<String>) -> Self {
        let mut c = Circuit::new(n_qubits);
        c.metadata.name = name.into();
        c
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Same qubit count and gate list; metadata is ignored.
    pub fn same_gates(&self, other: &Circuit) -> bool {
        self.n_qubits == other.n_qubits && self.gates == other.gates
    }

    pub fn unitary_gates(&self) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(|g| g.kind.is_unitary())
    }

    pub fn has_measurements(&self) -> bool {
        self.gates.iter().any(|g| matches!(g.kind, GateKind::Measure { .. }))
    }

    pub fn stats(&self) -> CircuitStats {
        stats(self)
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let violations = validate(self);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(CircuitError::Invalid(violations))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    OverlappingOperands,
    Arity { expected: String, found: String },
    NotUnitary { deviation: String },
    MeasureNotTrailing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub gate_index: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.gate_index;
        match &self.kind {
            ViolationKind::QubitOutOfRange { qubit, n_qubits } => {
                write!(f, "qubit {qubit} out of range (circuit has {n_qubits}) at gate {k}")
            }
            ViolationKind::OverlappingOperands => write!(f, "overlapping operands at gate {k}"),
            ViolationKind::Arity { expected, found } => {
                write!(f, "arity mismatch at gate {k}: expected {expected}, found {found}")
            }
            ViolationKind::NotUnitary { deviation } => {
                write!(f, "non-unitary payload at gate {k} (max |M†M - I| = {deviation})")
            }
            ViolationKind::MeasureNotTrailing => {
                write!(f, "gate {k} follows a measurement; only trailing measurement is supported")
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("`{0}` has no unitary matrix")]
    NotUnitary(&'static str),
    #[error("gates do not act on the same target qubits (or carry controls)")]
    TargetMismatch,
    #[error("gates act on overlapping qubit sets")]
    OverlappingQubits,
    #[error("invalid circuit: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
}

/// Every rule violation in `c`, in gate order.
pub fn validate(c: &Circuit) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen_measure = false;
    for (k, g) in c.gates.iter().enumerate() {
        let mut push = |kind| out.push(Violation { gate_index: k, kind });
        let (want_t, want_c) = g.kind.arity();
        let t_ok = want_t.is_none_or(|t| t == g.targets.len());
        let c_ok = want_c.is_none_or(|cc| cc == g.controls.len());
        let payload_ok = match &g.kind {
            GateKind::Su4(m) => m.nrows() == 4 && m.ncols() == 4,
            GateKind::Unitary(m) => m.is_square() && m.nrows().is_power_of_two() && m.nrows() >= 2,
            _ => true,
        };
        if !t_ok || !c_ok || !payload_ok || g.targets.is_empty() {
            let fmt_want = |w: Option<usize>| w.map_or("any".to_string(), |v| v.to_string());
            push(ViolationKind::Arity {
                expected: format!("{} target(s), {} control(s)", fmt_want(want_t), fmt_want(want_c)),
                found: format!("{} target(s), {} control(s)", g.targets.len(), g.controls.len()),
            });
        }
        for q in g.qubits() {
            if q >= c.n_qubits {
                push(ViolationKind::QubitOutOfRange { qubit: q, n_qubits: c.n_qubits });
            }
        }
        let mut ops: Vec<usize> = g.qubits().collect();
        ops.sort_unstable();
        if ops.windows(2).any(|w| w[0] == w[1]) {
            push(ViolationKind::OverlappingOperands);
        }
        if let GateKind::Su4(m) | GateKind::Unitary(m) = &g.kind {
            if payload_ok {
                let dev = linalg::unitarity_error(m);
                // NaN deviations fail too
                #[allow(clippy::neg_cmp_op_on_partial_ord)]
                if !(dev < UNITARITY_TOL) {
                    push(ViolationKind::NotUnitary { deviation: format!("{dev:.3e}") });
                }
            }
        }
        match g.kind {
            GateKind::Measure { .. } => seen_measure = true,
            GateKind::Barrier => {}
            _ if seen_measure => push(ViolationKind::MeasureNotTrailing),
            _ => {}
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitStats {
    pub n_qubits: usize,
    pub total_gates: usize,
    pub depth: usize,
    pub non_local_gates: usize,
    /// Exact ratio `non_local_gates / total_gates` (0 for an empty circuit).
    pub non_local_fraction: f64,
    /// `non_local_fraction` as a rounded whole percentage.
    pub non_local_percent: u32,
    pub histogram: BTreeMap<String, usize>,
}

impl fmt::Display for CircuitStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} gates, depth {}, {} non-local ({}%), {} qubits",
            self.total_gates, self.depth, self.non_local_gates, self.non_local_percent, self.n_qubits
        )
    }
}

/// Gate count, ASAP depth and non-local share. Measurements and barriers are not counted;
/// a barrier aligns the layers of the qubits it spans.
pub fn stats(c: &Circuit) -> CircuitStats {
    let mut level = vec![0usize; c.n_qubits];
    let mut total = 0;
    let mut non_local = 0;
    let mut depth = 0;
    let mut histogram = BTreeMap::new();
    for g in &c.gates {
        match g.kind {
            GateKind::Measure { .. } => continue,
            GateKind::Barrier => {
                let top = g.targets.iter().filter_map(|&q| level.get(q)).copied().max().unwrap_or(0);
                for &q in &g.targets {
                    if let Some(l) = level.get_mut(q) {
                        *l = top;
                    }
                }
                continue;
            }
            _ => {}
        }
        total += 1;
        if g.is_non_local() {
            non_local += 1;
        }
        *histogram.entry(g.kind.name().to_string()).or_insert(0) += 1;
        let layer = 1 + g.qubits().filter_map(|q| level.get(q)).copied().max().unwrap_or(0);
        for q in g.qubits() {
            if let Some(l) = level.get_mut(q) {
                *l = layer;
            }
        }
        depth = depth.max(layer);
    }
    let fraction = if total == 0 { 0.0 } else { non_local as f64 / total as f64 };
    CircuitStats {
        n_qubits: c.n_qubits,
        total_gates: total,
        depth,
        non_local_gates: non_local,
        non_local_fraction: fraction,
        non_local_percent: (fraction * 100.0).round() as u32,
        histogram,
    }
}
