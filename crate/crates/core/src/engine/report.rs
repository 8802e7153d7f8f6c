use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::{Counts, RunConfig, RunResult};
use crate::circuit::CircuitStats;
use crate::perf::{ClassTotals, KernelClass, PerfLedger, PhaseTimes};
use crate::state::Precision;
use crate::transpiler::FusionConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub precision: Precision,
    pub shots: u64,
    pub seed: u64,
    pub fusion: FusionConfig,
    pub blocking_qubits: Option<usize>,
    pub workers: usize,
}

impl From<&RunConfig> for ReportConfig {
    fn from(c: &RunConfig) -> Self {
        ReportConfig {
            precision: c.precision,
            shots: c.shots,
            seed: c.seed,
            fusion: c.fusion,
            blocking_qubits: c.blocking_qubits,
            workers: c.workers,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRow {
    pub class: KernelClass,
    pub label: String,
    pub gates: u64,
    pub flops: u64,
    pub bytes: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seconds: Option<f64>,
}

/// Machine-readable summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub circuit: CircuitStats,
    pub config: ReportConfig,
    pub executed_gates: usize,
    pub inserted_swaps: usize,
    pub flops: u64,
    pub bytes: u64,
    pub inter_chunk_bytes: u64,
    pub cross_worker_bytes: u64,
    pub kernel_classes: Vec<ClassRow>,
    pub counts: Counts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_times: Option<PhaseTimes>,
    /// Seconds since the Unix epoch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

impl RunReport {
    /// With `timing = false` every wall-clock field is left out, so reports of the same
    /// run compare equal.
    pub fn new(circuit: CircuitStats, cfg: &RunConfig, r: &RunResult, timing: bool) -> Self {
        let kernel_classes = r
            .ledger
            .classes
            .iter()
            .map(|(class, t)| ClassRow {
                class: *class,
                label: class.label(),
                gates: t.gates,
                flops: t.flops,
                bytes: t.bytes,
                seconds: timing.then_some(t.seconds),
            })
            .collect();
        RunReport {
            circuit,
            config: cfg.into(),
            executed_gates: r.executed_gates,
            inserted_swaps: r.inserted_swaps,
            flops: r.ledger.flops,
            bytes: r.ledger.bytes,
            inter_chunk_bytes: r.ledger.inter_chunk_bytes,
            cross_worker_bytes: r.ledger.cross_worker_bytes,
            kernel_classes,
            counts: r.counts.clone(),
            phase_times: timing.then_some(r.ledger.phases),
            timestamp: timing.then(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())),
        }
    }

    /// Rebuilds the counters of the run; class times are zero when timing was omitted.
    pub fn ledger(&self) -> PerfLedger {
        PerfLedger {
            flops: self.flops,
            bytes: self.bytes,
            inter_chunk_bytes: self.inter_chunk_bytes,
            cross_worker_bytes: self.cross_worker_bytes,
            exchanges: self.inserted_swaps as u64,
            classes: self
                .kernel_classes
                .iter()
                .map(|r| {
                    let totals = ClassTotals {
                        gates: r.gates,
                        flops: r.flops,
                        bytes: r.bytes,
                        seconds: r.seconds.unwrap_or(0.0),
                    };
                    (r.class, totals)
                })
                .collect(),
            phases: self.phase_times.unwrap_or_default(),
        }
    }
}
