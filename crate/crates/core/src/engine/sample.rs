use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ChunkedState, EngineError};
use crate::state::{Precision, StateVector};

/// Outcome bitstring (qubit `n-1` leftmost) → number of shots.
pub type Counts = BTreeMap<String, u64>;

/// Largest accepted `|‖ψ‖² - 1|` before sampling.
pub fn normalization_tolerance(p: Precision) -> f64 {
    match p {
        Precision::Single => 1e-4,
        Precision::Double => 1e-6,
    }
}

/// Sampling stream `stream` for `seed`; stream 0 is the one used by runs.
pub fn sampling_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn check_norm(norm: f64, p: Precision) -> Result<(), EngineError> {
    let tolerance = normalization_tolerance(p);
    if (norm - 1.0).abs() > tolerance || !norm.is_finite() {
        return Err(EngineError::Normalization { norm, tolerance });
    }
    Ok(())
}

fn prefix_sums(probs: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .into_iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// First index whose cumulative weight exceeds `u`.
fn locate(prefix: &[f64], u: f64) -> usize {
    prefix.partition_point(|&p| p <= u).min(prefix.len() - 1)
}

fn key(index: usize, n: usize) -> String {
    format!("{index:0n$b}")
}

/// Draws `shots` basis outcomes with probability `|a_i|²`.
pub fn sample(state: &StateVector, shots: u64, seed: u64) -> Result<Counts, EngineError> {
    let prefix = prefix_sums(state.probabilities());
    let total = *prefix.last().expect("non-empty state");
    check_norm(total, state.precision())?;
    let mut rng = sampling_rng(seed, 0);
    let mut hits: BTreeMap<usize, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        *hits.entry(locate(&prefix, u)).or_default() += 1;
    }
    Ok(hits.into_iter().map(|(i, c)| (key(i, state.n_qubits()), c)).collect())
}

/// Same distribution as [`sample`], drawn chunk first and then within the chunk.
pub fn sample_chunked(state: &ChunkedState, shots: u64, seed: u64) -> Result<Counts, EngineError> {
    let per_chunk: Vec<Vec<f64>> = (0..state.n_chunks())
        .map(|c| prefix_sums(state.chunk_probabilities(c)))
        .collect();
    let chunk_prefix = prefix_sums(per_chunk.iter().map(|p| *p.last().expect("non-empty chunk")));
    let total = *chunk_prefix.last().expect("at least one chunk");
    check_norm(total, state.precision())?;
    let mut rng = sampling_rng(seed, 0);
    let mut hits: BTreeMap<usize, u64> = BTreeMap::new();
    let b = state.blocking_qubits();
    for _ in 0..shots {
        let u = rng.random::<f64>() * total;
        let mut c = locate(&chunk_prefix, u);
        // skip empty chunks that rounding could land on
        while c > 0 && per_chunk[c].last() == Some(&0.0) {
            c -= 1;
        }
        let start = if c == 0 { 0.0 } else { chunk_prefix[c - 1] };
        let local = locate(&per_chunk[c], (u - start).max(0.0));
        *hits.entry((c << b) | local).or_default() += 1;
    }
    Ok(hits.into_iter().map(|(i, n)| (key(i, state.n_qubits()), n)).collect())
}
