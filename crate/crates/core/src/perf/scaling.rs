use std::io::Write;
use std::ops::RangeInclusive;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{classify_intensity, roofline_attainable, Bound, MachineModel, PerfLedger};
use crate::bench::{gen, BenchSpec};
use crate::engine::{run, RunConfig};
use crate::state::Precision;

/// A named engine configuration compared in a scaling table.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub config: RunConfig,
}

impl Variant {
    pub fn new(label: impl Into<String>, config: RunConfig) -> Self {
        Variant {
            label: label.into(),
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub app: String,
    pub qubits: usize,
    pub variant: String,
    pub repeats: usize,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub flops: u64,
    pub bytes: u64,
    pub inter_chunk_bytes: u64,
    /// Why the point was not run (capacity, invalid size, ...); empty when it ran.
    pub skipped: String,
}

/// Runs `spec` at every qubit count in `qubits` under each variant, `repeats` times per point.
///
/// Wall time is measured around the whole run (generation excluded). Points that cannot
/// be generated or run are reported as skipped rows.
pub fn scaling_table(
    spec: &BenchSpec,
    qubits: RangeInclusive<usize>,
    variants: &[Variant],
    repeats: usize,
) -> Vec<ScalingRow> {
    let repeats = repeats.max(1);
    let mut rows = Vec::new();
    for n in qubits {
        let point = BenchSpec { n_qubits: n, ..spec.clone() };
        let circuit = gen(&point);
        for v in variants {
            let mut row = ScalingRow {
                app: spec.app.to_string(),
                qubits: n,
                variant: v.label.clone(),
                repeats: 0,
                mean_seconds: 0.0,
                std_seconds: 0.0,
                flops: 0,
                bytes: 0,
                inter_chunk_bytes: 0,
                skipped: String::new(),
            };
            let circuit = match &circuit {
                Ok(c) => c,
                Err(e) => {
                    row.skipped = e.to_string();
                    rows.push(row);
                    continue;
                }
            };
            let cfg = RunConfig {
                keep_state: false,
                ..v.config
            };
            let mut times = Vec::with_capacity(repeats);
            for _ in 0..repeats {
                let t = Instant::now();
                match run(circuit, &cfg) {
                    Ok(r) => {
                        times.push(t.elapsed().as_secs_f64());
                        row.flops = r.ledger.flops;
                        row.bytes = r.ledger.bytes;
                        row.inter_chunk_bytes = r.ledger.inter_chunk_bytes;
                    }
                    Err(e) => {
                        row.skipped = e.to_string();
                        break;
                    }
                }
            }
            if row.skipped.is_empty() {
                let (mean, std) = mean_std(&times);
                row.repeats = times.len();
                row.mean_seconds = mean;
                row.std_seconds = std;
            }
            rows.push(row);
        }
    }
    rows
}

/// Sample mean and standard deviation (n − 1 denominator; 0 for a single sample).
fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RooflineRow {
    pub class: String,
    pub gates: u64,
    pub flops: u64,
    pub bytes: u64,
    pub intensity: f64,
    pub seconds: f64,
    /// Measured on this host: class flops / class kernel time.
    pub achieved_flops: f64,
    /// Modeled for `model`.
    pub attainable_flops: f64,
    pub bound: Bound,
    /// False when the class accumulated no measurable time.
    pub reliable: bool,
    pub model: String,
}

/// One row per kernel class in the ledger.
pub fn roofline_report(ledger: &PerfLedger, m: &MachineModel, precision: Precision) -> Vec<RooflineRow> {
    ledger
        .classes
        .iter()
        .filter(|(_, t)| t.bytes > 0)
        .map(|(class, t)| {
            let intensity = t.flops as f64 / t.bytes as f64;
            let reliable = t.seconds > 0.0;
            RooflineRow {
                class: class.label(),
                gates: t.gates,
                flops: t.flops,
                bytes: t.bytes,
                intensity,
                seconds: t.seconds,
                achieved_flops: if reliable { t.flops as f64 / t.seconds } else { 0.0 },
                attainable_flops: roofline_attainable(m, intensity, precision).unwrap_or(0.0),
                bound: classify_intensity(m, intensity, precision),
                reliable,
                model: m.name.clone(),
            }
        })
        .collect()
}

fn write_csv<W: Write, R: Serialize>(w: W, rows: &[R]) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_scaling_csv<W: Write>(w: W, rows: &[ScalingRow]) -> Result<(), csv::Error> {
    write_csv(w, rows)
}

pub fn write_roofline_csv<W: Write>(w: W, rows: &[RooflineRow]) -> Result<(), csv::Error> {
    write_csv(w, rows)
}
