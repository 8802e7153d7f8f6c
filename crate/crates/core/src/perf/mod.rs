//! FLOP/byte cost model, the per-run performance ledger, roofline evaluation and reports.
//!
//! The cost of a kernel applying a dense `2^k × 2^k` matrix (with `c` extra control qubits)
//! to an `n`-qubit state is modeled as follows. The kernel visits `2^{n-k-c}` amplitude
//! groups; each group is one matrix-vector product costing `4^k` complex multiplies and
//! `2^k (2^k - 1)` complex adds, i.e. `6·4^k + 2·2^k(2^k-1)` real operations. Every
//! touched amplitude is read once and written once. For `k = 1` in single precision this
//! is 14 FLOPs and 16 bytes per amplitude.

mod machine;
mod scaling;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::state::Precision;

pub use machine::{MachineModel, MachineModelError};
pub use scaling::{
    roofline_report, scaling_table, write_roofline_csv, write_scaling_csv, RooflineRow, ScalingRow, Variant,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PerfError {
    #[error("invalid kernel shape: k={k}, controls={controls}, state qubits={n}")]
    InvalidKernel { k: usize, controls: usize, n: usize },
    #[error("intensity must be positive, got {0}")]
    NonPositiveIntensity(f64),
}

/// Serialized as its label so it can key JSON maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum KernelClass {
    OneQubit,
    Controlled,
    TwoQubit,
    ThreeQubit,
    Generic(usize),
}

impl KernelClass {
    pub fn of(k: usize, controls: usize) -> Self {
        match (k, controls) {
            (_, c) if c > 0 => KernelClass::Controlled,
            (1, _) => KernelClass::OneQubit,
            (2, _) => KernelClass::TwoQubit,
            (3, _) => KernelClass::ThreeQubit,
            (k, _) => KernelClass::Generic(k),
        }
    }

    pub fn label(&self) -> String {
        match self {
            KernelClass::OneQubit => "1q".into(),
            KernelClass::Controlled => "controlled".into(),
            KernelClass::TwoQubit => "2q".into(),
            KernelClass::ThreeQubit => "3q".into(),
            KernelClass::Generic(k) => format!("generic-{k}"),
        }
    }
}

impl From<KernelClass> for String {
    fn from(c: KernelClass) -> String {
        c.label()
    }
}

impl TryFrom<String> for KernelClass {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        match s.as_str() {
            "1q" => Ok(KernelClass::OneQubit),
            "controlled" => Ok(KernelClass::Controlled),
            "2q" => Ok(KernelClass::TwoQubit),
            "3q" => Ok(KernelClass::ThreeQubit),
            _ => s
                .strip_prefix("generic-")
                .and_then(|k| k.parse().ok())
                .map(KernelClass::Generic)
                .ok_or_else(|| format!("unknown kernel class `{s}`")),
        }
    }
}

impl fmt::Display for KernelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelCost {
    pub class: KernelClass,
    pub k: usize,
    pub controls: usize,
    pub precision: Precision,
    pub flops: u64,
    pub bytes: u64,
    pub arithmetic_intensity: f64,
}

/// Real operations for one `2^k`-dimensional matrix-vector product.
pub const fn flops_per_group(k: usize) -> u64 {
    let d = 1u64 << k;
    6 * d * d + 2 * d * (d - 1)
}

pub fn kernel_cost(k: usize, controls: usize, n: usize, precision: Precision) -> Result<KernelCost, PerfError> {
    if k == 0 || k + controls > n || n >= 63 {
        return Err(PerfError::InvalidKernel { k, controls, n });
    }
    let groups = 1u64 << (n - k - controls);
    let flops = groups * flops_per_group(k);
    let bytes = (1u64 << (n - controls)) * precision.amplitude_bytes() * 2;
    Ok(KernelCost {
        class: KernelClass::of(k, controls),
        k,
        controls,
        precision,
        flops,
        bytes,
        arithmetic_intensity: flops as f64 / bytes as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bound {
    MemoryBound,
    ComputeBound,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bound::MemoryBound => "memory-bound",
            Bound::ComputeBound => "compute-bound",
        })
    }
}

/// `min(peak_flops, intensity × peak_bandwidth)`.
pub fn roofline_attainable(m: &MachineModel, intensity: f64, precision: Precision) -> Result<f64, PerfError> {
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(intensity > 0.0) {
        return Err(PerfError::NonPositiveIntensity(intensity));
    }
    Ok(m.peak_flops(precision).min(intensity * m.peak_bandwidth))
}

pub fn classify_bound(m: &MachineModel, cost: &KernelCost) -> Bound {
    classify_intensity(m, cost.arithmetic_intensity, cost.precision)
}

pub fn classify_intensity(m: &MachineModel, intensity: f64, precision: Precision) -> Bound {
    if intensity < m.ridge_point(precision) {
        Bound::MemoryBound
    } else {
        Bound::ComputeBound
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassTotals {
    pub gates: u64,
    pub flops: u64,
    pub bytes: u64,
    /// Accumulated kernel time; for chunked runs this is summed over workers.
    pub seconds: f64,
}

/// Wall-clock seconds spent per execution phase.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimes {
    pub initialize: f64,
    pub transfer: f64,
    pub compute: f64,
    pub finalize: f64,
    pub wall: f64,
}

/// Counters accumulated over a run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerfLedger {
    pub flops: u64,
    pub bytes: u64,
    pub inter_chunk_bytes: u64,
    /// Part of `inter_chunk_bytes` moved between chunks owned by different workers.
    pub cross_worker_bytes: u64,
    pub exchanges: u64,
    pub classes: BTreeMap<KernelClass, ClassTotals>,
    pub phases: PhaseTimes,
}

impl PerfLedger {
    pub fn record(&mut self, cost: &KernelCost, seconds: f64) {
        self.flops += cost.flops;
        self.bytes += cost.bytes;
        let entry = self.classes.entry(cost.class).or_default();
        entry.gates += 1;
        entry.flops += cost.flops;
        entry.bytes += cost.bytes;
        entry.seconds += seconds;
    }

    pub fn add_class_time(&mut self, class: KernelClass, seconds: f64) {
        self.classes.entry(class).or_default().seconds += seconds;
    }

    pub fn record_exchange(&mut self, bytes: u64, cross_worker: u64) {
        self.exchanges += 1;
        self.inter_chunk_bytes += bytes;
        self.cross_worker_bytes += cross_worker;
    }

    pub fn gates(&self) -> u64 {
        self.classes.values().map(|c| c.gates).sum()
    }

    /// Totals equal the per-class sums.
    pub fn is_consistent(&self) -> bool {
        self.flops == self.classes.values().map(|c| c.flops).sum::<u64>()
            && self.bytes == self.classes.values().map(|c| c.bytes).sum::<u64>()
    }
}
