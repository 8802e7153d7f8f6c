//! Complex amplitude storage, initialization, tensor combination and memory accounting.

use std::fmt;
use std::str::FromStr;

use num_complex::{Complex, Complex32, Complex64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Environment variable overriding the memory budget (bytes).
pub const BUDGET_ENV: &str = "SVSIM_MEMORY_BUDGET";
/// Environment variable overriding the maximum qubit count.
pub const MAX_QUBITS_ENV: &str = "SVSIM_MAX_QUBITS";

const DEFAULT_BUDGET_BYTES: u64 = 8 << 30;
const DEFAULT_MAX_QUBITS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Single,
    Double,
}

impl Precision {
    /// Bytes per complex amplitude (two floats).
    pub const fn amplitude_bytes(self) -> u64 {
        match self {
            Precision::Single => 8,
            Precision::Double => 16,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Precision::Single => "single",
            Precision::Double => "double",
        })
    }
}

impl FromStr for Precision {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "single" | "sp" | "f32" => Ok(Precision::Single),
            "double" | "dp" | "f64" => Ok(Precision::Double),
            other => Err(format!("unknown precision `{other}` (expected single or double)")),
        }
    }
}

/// Bytes needed to hold an `n_qubits` state vector: `2^n * amplitude_bytes`.
///
/// Saturates at `u128::MAX` for absurd qubit counts.
pub fn memory_bytes(n_qubits: usize, precision: Precision) -> u128 {
    let amps = if n_qubits >= 120 { return u128::MAX } else { 1u128 << n_qubits };
    amps * precision.amplitude_bytes() as u128
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("a state vector needs at least one qubit")]
    ZeroQubits,
    #[error("{n_qubits} qubits exceeds the configured maximum of {max_qubits}")]
    TooManyQubits { n_qubits: usize, max_qubits: usize },
    #[error(
        "{n_qubits} qubits in {precision} precision require {required_bytes} bytes, \
         over the memory budget of {budget_bytes} bytes"
    )]
    Capacity {
        n_qubits: usize,
        precision: Precision,
        required_bytes: u128,
        budget_bytes: u64,
    },
    #[error("precision mismatch: {0} vs {1}")]
    PrecisionMismatch(Precision, Precision),
    #[error("amplitude count {0} is not a power of two")]
    NotPowerOfTwo(usize),
}

/// Upper bounds on the size of state vectors that may be allocated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryBudget {
    pub max_bytes: u64,
    pub max_qubits: usize,
}

impl Default for MemoryBudget {
    fn default() -> Self {
        MemoryBudget {
            max_bytes: DEFAULT_BUDGET_BYTES,
            max_qubits: DEFAULT_MAX_QUBITS,
        }
    }
}

impl MemoryBudget {
    pub fn new(max_bytes: u64, max_qubits: usize) -> Self {
        MemoryBudget { max_bytes, max_qubits }
    }

    /// Default budget with `SVSIM_MEMORY_BUDGET` / `SVSIM_MAX_QUBITS` applied when set and parseable.
    pub fn from_env() -> Self {
        let mut budget = MemoryBudget::default();
        if let Some(bytes) = std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            budget.max_bytes = bytes;
        }
        if let Some(q) = std::env::var(MAX_QUBITS_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            budget.max_qubits = q;
        }
        budget
    }

    pub fn check(&self, n_qubits: usize, precision: Precision) -> Result<(), StateError> {
        if n_qubits == 0 {
            return Err(StateError::ZeroQubits);
        }
        let required_bytes = memory_bytes(n_qubits, precision);
        if required_bytes > self.max_bytes as u128 {
            return Err(StateError::Capacity {
                n_qubits,
                precision,
                required_bytes,
                budget_bytes: self.max_bytes,
            });
        }
        if n_qubits > self.max_qubits {
            return Err(StateError::TooManyQubits {
                n_qubits,
                max_qubits: self.max_qubits,
            });
        }
        Ok(())
    }
}

/// Floating-point type an amplitude array can be stored in.
///
/// Kernels widen amplitudes to `f64` for the arithmetic and narrow on store.
pub trait Scalar: Copy + Send + Sync + Default + PartialEq + fmt::Debug + 'static {
    const PRECISION: Precision;
    fn widen(c: Complex<Self>) -> Complex64;
    fn narrow(c: Complex64) -> Complex<Self>;
}

impl Scalar for f32 {
    const PRECISION: Precision = Precision::Single;

    #[inline(always)]
    fn widen(c: Complex32) -> Complex64 {
        Complex64::new(c.re as f64, c.im as f64)
    }

    #[inline(always)]
    fn narrow(c: Complex64) -> Complex32 {
        Complex32::new(c.re as f32, c.im as f32)
    }
}

impl Scalar for f64 {
    const PRECISION: Precision = Precision::Double;

    #[inline(always)]
    fn widen(c: Complex64) -> Complex64 {
        c
    }

    #[inline(always)]
    fn narrow(c: Complex64) -> Complex64 {
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Amplitudes {
    Single(Vec<Complex32>),
    Double(Vec<Complex64>),
}

impl Amplitudes {
    pub fn zeros(len: usize, precision: Precision) -> Self {
        match precision {
            Precision::Single => Amplitudes::Single(vec![Complex32::default(); len]),
            Precision::Double => Amplitudes::Double(vec![Complex64::default(); len]),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Amplitudes::Single(v) => v.len(),
            Amplitudes::Double(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn precision(&self) -> Precision {
        match self {
            Amplitudes::Single(_) => Precision::Single,
            Amplitudes::Double(_) => Precision::Double,
        }
    }

    pub fn get(&self, index: usize) -> Complex64 {
        match self {
            Amplitudes::Single(v) => f32::widen(v[index]),
            Amplitudes::Double(v) => v[index],
        }
    }

    pub fn set(&mut self, index: usize, value: Complex64) {
        match self {
            Amplitudes::Single(v) => v[index] = f32::narrow(value),
            Amplitudes::Double(v) => v[index] = value,
        }
    }

    pub fn to_complex64(&self) -> Vec<Complex64> {
        match self {
            Amplitudes::Single(v) => v.iter().map(|&c| f32::widen(c)).collect(),
            Amplitudes::Double(v) => v.clone(),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        match self {
            Amplitudes::Single(v) => v.iter().map(|&c| f32::widen(c).norm_sqr()).sum(),
            Amplitudes::Double(v) => v.iter().map(|c| c.norm_sqr()).sum(),
        }
    }
}

/// The `2^n` complex amplitudes of an `n`-qubit register.
///
/// Index `i` holds the coefficient of basis state `|i⟩`, with bit `q` of `i` giving the
/// value of qubit `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Amplitudes,
}

impl StateVector {
    /// `|0…0⟩` under the default (environment-aware) memory budget.
    pub fn zero(n_qubits: usize, precision: Precision) -> Result<Self, StateError> {
        Self::zero_with_budget(n_qubits, precision, &MemoryBudget::from_env())
    }

    pub fn zero_with_budget(
        n_qubits: usize,
        precision: Precision,
        budget: &MemoryBudget,
    ) -> Result<Self, StateError> {
        budget.check(n_qubits, precision)?;
        let mut amplitudes = Amplitudes::zeros(1 << n_qubits, precision);
        amplitudes.set(0, Complex64::new(1.0, 0.0));
        Ok(StateVector { n_qubits, amplitudes })
    }

    /// Wraps explicit amplitudes. The length must be a power of two (at least 2).
    pub fn from_amplitudes(amps: Vec<Complex64>, precision: Precision) -> Result<Self, StateError> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(StateError::NotPowerOfTwo(len));
        }
        let n_qubits = len.trailing_zeros() as usize;
        let amplitudes = match precision {
            Precision::Double => Amplitudes::Double(amps),
            Precision::Single => Amplitudes::Single(amps.into_iter().map(f32::narrow).collect()),
        };
        Ok(StateVector { n_qubits, amplitudes })
    }

    pub(crate) fn from_raw(n_qubits: usize, amplitudes: Amplitudes) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n_qubits);
        StateVector { n_qubits, amplitudes }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn precision(&self) -> Precision {
        self.amplitudes.precision()
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amplitudes.get(index)
    }

    pub fn amplitudes(&self) -> &Amplitudes {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut Amplitudes {
        &mut self.amplitudes
    }

    pub fn to_complex64(&self) -> Vec<Complex64> {
        self.amplitudes.to_complex64()
    }

    /// `Σ |a_i|²`, accumulated in double precision.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.norm_sq()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.amplitude(i).norm_sqr()).collect()
    }

    pub fn memory_bytes(&self) -> u128 {
        memory_bytes(self.n_qubits, self.precision())
    }

    /// Tensor product `self ⊗ other`: `result[i·2^{n_other} + j] = self[i]·other[j]`.
    ///
    /// `other` ends up on the low qubits `0..n_other` and `self` on the qubits above them.
    pub fn tensor_combine(&self, other: &StateVector, budget: &MemoryBudget) -> Result<Self, StateError> {
        if self.precision() != other.precision() {
            return Err(StateError::PrecisionMismatch(self.precision(), other.precision()));
        }
        let n_qubits = self.n_qubits + other.n_qubits;
        budget.check(n_qubits, self.precision())?;
        let amplitudes = match (&self.amplitudes, &other.amplitudes) {
            (Amplitudes::Single(a), Amplitudes::Single(b)) => Amplitudes::Single(kron_vec(a, b)),
            (Amplitudes::Double(a), Amplitudes::Double(b)) => Amplitudes::Double(kron_vec(a, b)),
            _ => unreachable!("precision checked above"),
        };
        Ok(StateVector { n_qubits, amplitudes })
    }
}

fn kron_vec<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        let x = T::widen(x);
        out.extend(b.iter().map(|&y| T::narrow(x * T::widen(y))));
    }
    out
}
