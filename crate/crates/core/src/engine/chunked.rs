//! Chunked execution of a blocking plan.
//!
//! The state is split into `2^{n-b}` chunks of `2^b` amplitudes; chunk `c` holds the
//! amplitudes whose physical bits `b..n` spell `c`. Chunks are owned round-robin by
//! `W` workers (`c mod W`). Gates in a plan only touch physical qubits below `b`, so
//! each worker applies them to its own chunks; exchanges move amplitudes between chunk
//! pairs and are the only inter-chunk traffic.

use std::collections::BTreeMap;
use std::time::Instant;

use num_complex::{Complex, Complex32, Complex64};

use super::{apply_gate_slice, class_of, sample_chunked, EngineError, RunConfig, RunResult};
use crate::circuit::Gate;
use crate::perf::{kernel_cost, KernelClass, PerfLedger};
use crate::state::{Amplitudes, Precision, Scalar, StateVector};
use crate::transpiler::{BlockedOp, BlockingPlan};

#[derive(Debug, Clone, PartialEq)]
enum Chunks {
    Single(Vec<Vec<Complex32>>),
    Double(Vec<Vec<Complex64>>),
}

/// A state vector partitioned into equal chunks.
#[derive(Debug, Clone, PartialEq)]
pub struct ChunkedState {
    n_qubits: usize,
    blocking_qubits: usize,
    workers: usize,
    chunks: Chunks,
}

macro_rules! with_chunks {
    ($chunks:expr, $v:ident => $body:expr) => {
        match $chunks {
            Chunks::Single($v) => $body,
            Chunks::Double($v) => $body,
        }
    };
}

impl ChunkedState {
    /// `|0…0⟩` split into `2^{n-b}` chunks. The memory budget must be checked by the caller.
    pub fn zero(n_qubits: usize, blocking_qubits: usize, workers: usize, precision: Precision) -> Self {
        assert!(blocking_qubits >= 1 && blocking_qubits <= n_qubits);
        let count = 1usize << (n_qubits - blocking_qubits);
        let len = 1usize << blocking_qubits;
        let chunks = match precision {
            Precision::Single => Chunks::Single(zero_chunks(count, len)),
            Precision::Double => Chunks::Double(zero_chunks(count, len)),
        };
        ChunkedState {
            n_qubits,
            blocking_qubits,
            workers: workers.max(1),
            chunks,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn blocking_qubits(&self) -> usize {
        self.blocking_qubits
    }

    pub fn precision(&self) -> Precision {
        match self.chunks {
            Chunks::Single(_) => Precision::Single,
            Chunks::Double(_) => Precision::Double,
        }
    }

    pub fn n_chunks(&self) -> usize {
        1 << (self.n_qubits - self.blocking_qubits)
    }

    /// Worker that owns chunk `c`.
    pub fn owner(&self, chunk: usize) -> usize {
        chunk % self.workers
    }

    /// Squared magnitudes of chunk `c`.
    pub fn chunk_probabilities(&self, chunk: usize) -> Vec<f64> {
        with_chunks!(&self.chunks, v => v[chunk].iter().map(|a| Scalar::widen(*a).norm_sqr()).collect())
    }

    pub fn norm_sq(&self) -> f64 {
        (0..self.n_chunks()).map(|c| self.chunk_probabilities(c).iter().sum::<f64>()).sum()
    }

    /// Concatenates the chunks into a monolithic state.
    pub fn into_state_vector(self) -> StateVector {
        let amps = match self.chunks {
            Chunks::Single(v) => Amplitudes::Single(v.concat()),
            Chunks::Double(v) => Amplitudes::Double(v.concat()),
        };
        StateVector::from_raw(self.n_qubits, amps)
    }

    /// Applies `gates` (all on physical qubits `< b`) to every chunk; returns kernel
    /// seconds per class summed over workers.
    fn apply_segment(&mut self, gates: &[Gate]) -> BTreeMap<KernelClass, f64> {
        let w = self.workers;
        with_chunks!(&mut self.chunks, v => apply_segment(v, gates, w))
    }

    /// Exchanges physical qubits `low < b <= high`; returns `(bytes, cross_worker_bytes)`.
    fn exchange(&mut self, low: usize, high: usize) -> (u64, u64) {
        let (b, w) = (self.blocking_qubits, self.workers);
        let amp_bytes = self.precision().amplitude_bytes();
        let cross = with_chunks!(&mut self.chunks, v => exchange(v, b, low, high, w));
        ((1u64 << (self.n_qubits - 1)) * amp_bytes, cross * amp_bytes)
    }
}

fn zero_chunks<T: Scalar>(count: usize, len: usize) -> Vec<Vec<Complex<T>>> {
    let mut chunks = vec![vec![Complex::<T>::default(); len]; count];
    chunks[0][0] = T::narrow(Complex64::new(1.0, 0.0));
    chunks
}

fn run_chunks<T: Scalar>(chunks: &mut [&mut Vec<Complex<T>>], gates: &[Gate]) -> BTreeMap<KernelClass, f64> {
    let mut times = BTreeMap::new();
    for chunk in chunks.iter_mut() {
        for g in gates {
            let Some(class) = class_of(g) else { continue };
            let t = Instant::now();
            apply_gate_slice(chunk, g, false);
            *times.entry(class).or_insert(0.0) += t.elapsed().as_secs_f64();
        }
    }
    times
}

fn apply_segment<T: Scalar>(chunks: &mut [Vec<Complex<T>>], gates: &[Gate], workers: usize) -> BTreeMap<KernelClass, f64> {
    let mut buckets: Vec<Vec<&mut Vec<Complex<T>>>> = (0..workers).map(|_| Vec::new()).collect();
    for (i, ch) in chunks.iter_mut().enumerate() {
        buckets[i % workers].push(ch);
    }
    if workers == 1 {
        return run_chunks(&mut buckets[0], gates);
    }
    let per_worker: Vec<BTreeMap<KernelClass, f64>> = std::thread::scope(|s| {
        let handles: Vec<_> = buckets
            .into_iter()
            .map(|mut bucket| s.spawn(move || run_chunks(&mut bucket, gates)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut total = BTreeMap::new();
    for m in per_worker {
        for (class, secs) in m {
            *total.entry(class).or_insert(0.0) += secs;
        }
    }
    total
}

/// Swaps amplitudes with physical bit `low` = 1, bit `high` = 0 against their partners.
/// Returns the number of amplitudes that moved between different workers.
fn exchange<T: Scalar>(chunks: &mut [Vec<Complex<T>>], b: usize, low: usize, high: usize, workers: usize) -> u64 {
    let cbit = 1usize << (high - b);
    let lbit = 1usize << low;
    let len = 1usize << b;
    let mut cross = 0u64;
    for c0 in 0..chunks.len() {
        if c0 & cbit != 0 {
            continue;
        }
        let c1 = c0 | cbit;
        let (left, right) = chunks.split_at_mut(c1);
        let (a, h) = (&mut left[c0], &mut right[0]);
        for j in 0..len {
            if j & lbit != 0 {
                std::mem::swap(&mut a[j], &mut h[j ^ lbit]);
            }
        }
        if c0 % workers != c1 % workers {
            // half of each chunk travels in each direction
            cross += len as u64;
        }
    }
    cross
}

/// Executes a blocking plan from `|0…0⟩`.
pub fn run_chunked(plan: &BlockingPlan, cfg: &RunConfig) -> Result<RunResult, EngineError> {
    let wall = Instant::now();
    cfg.budget.check(plan.n_qubits, cfg.precision)?;
    execute(plan, cfg, wall)
}

pub(crate) fn execute(plan: &BlockingPlan, cfg: &RunConfig, wall: Instant) -> Result<RunResult, EngineError> {
    if cfg.workers == 0 {
        return Err(EngineError::NoWorkers);
    }
    let n = plan.n_qubits;
    let mut ledger = PerfLedger::default();

    let t = Instant::now();
    let mut state = ChunkedState::zero(n, plan.blocking_qubits, cfg.workers, cfg.precision);
    ledger.phases.initialize = t.elapsed().as_secs_f64();

    let mut executed = 0;
    let mut swaps = 0;
    let mut segment: Vec<Gate> = Vec::new();
    let flush = |state: &mut ChunkedState, segment: &mut Vec<Gate>, ledger: &mut PerfLedger| {
        if segment.is_empty() {
            return;
        }
        let t = Instant::now();
        for g in segment.iter() {
            if let Some((k, c)) = super::kernel_shape(g) {
                let cost = kernel_cost(k, c, n, cfg.precision).expect("validated gate shape");
                ledger.record(&cost, 0.0);
            }
        }
        for (class, secs) in state.apply_segment(segment) {
            ledger.add_class_time(class, secs);
        }
        segment.clear();
        ledger.phases.compute += t.elapsed().as_secs_f64();
    };
    for op in &plan.ops {
        match op {
            BlockedOp::Gate(g) => {
                if g.kind.is_unitary() {
                    executed += 1;
                    segment.push(g.clone());
                }
            }
            BlockedOp::Exchange { low, high } => {
                flush(&mut state, &mut segment, &mut ledger);
                let t = Instant::now();
                let (bytes, cross) = state.exchange(*low, *high);
                ledger.record_exchange(bytes, cross);
                ledger.phases.transfer += t.elapsed().as_secs_f64();
                swaps += 1;
            }
        }
    }
    flush(&mut state, &mut segment, &mut ledger);

    let t = Instant::now();
    let counts = if cfg.shots > 0 {
        sample_chunked(&state, cfg.shots, cfg.seed)?
    } else {
        BTreeMap::new()
    };
    let state = cfg.keep_state.then(|| state.into_state_vector());
    ledger.phases.finalize = t.elapsed().as_secs_f64();
    ledger.phases.wall = wall.elapsed().as_secs_f64();
    Ok(RunResult {
        state,
        counts,
        ledger,
        executed_gates: executed,
        inserted_swaps: swaps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Circuit, GateKind};
    use crate::engine::run;
    use crate::transpiler::{block_pass, FusionConfig};

    fn layered(n: usize) -> Circuit {
        let mut c = Circuit::new(n);
        for layer in 0..4 {
            for q in 0..n {
                c.push(Gate::single(GateKind::U(0.4 + q as f64, 0.1 * layer as f64, 1.3), q));
            }
            for q in (layer % 2..n - 1).step_by(2) {
                c.push(Gate::cx(q, q + 1));
            }
            c.push(Gate::cp(0.77, 0, n - 1));
        }
        c
    }

    fn cfg(b: Option<usize>, w: usize) -> RunConfig {
        RunConfig {
            blocking_qubits: b,
            workers: w,
            fusion: FusionConfig::disabled(),
            ..Default::default()
        }
    }

    #[test]
    fn chunked_matches_monolithic() {
        let c = layered(7);
        let mono = run(&c, &cfg(None, 1)).unwrap().state.unwrap();
        for b in 2..=7 {
            let r = run(&c, &cfg(Some(b), 1)).unwrap();
            let s = r.state.unwrap();
            let dev = s
                .to_complex64()
                .iter()
                .zip(mono.to_complex64())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            assert!(dev < 1e-12, "b={b} dev={dev}");
            assert_eq!(r.ledger.exchanges as usize, r.inserted_swaps);
            assert_eq!(r.inserted_swaps, block_pass(&c, b).unwrap().inserted_swaps());
        }
    }

    #[test]
    fn worker_count_does_not_change_amplitudes() {
        let c = layered(8);
        let base = run(&c, &cfg(Some(3), 1)).unwrap();
        for w in [2, 3, 4] {
            let r = run(&c, &cfg(Some(3), w)).unwrap();
            assert_eq!(r.state, base.state, "W={w}");
            assert_eq!(r.ledger.inter_chunk_bytes, base.ledger.inter_chunk_bytes);
            assert!(r.ledger.cross_worker_bytes <= r.ledger.inter_chunk_bytes);
        }
        assert_eq!(base.ledger.cross_worker_bytes, 0);
    }

    #[test]
    fn exchange_bytes_match_prediction() {
        let c = layered(6);
        for p in [Precision::Single, Precision::Double] {
            let plan = block_pass(&c, 3).unwrap();
            let r = run_chunked(&plan, &RunConfig { precision: p, ..cfg(Some(3), 2) }).unwrap();
            assert_eq!(r.ledger.inter_chunk_bytes, plan.predicted_inter_chunk_bytes(p));
        }
    }

    #[test]
    fn zero_circuit_samples_all_zero_key() {
        let c = Circuit::new(5);
        let r = run(&c, &RunConfig { shots: 7, ..cfg(Some(2), 3) }).unwrap();
        assert_eq!(r.counts, BTreeMap::from([("00000".to_string(), 7)]));
    }
}
