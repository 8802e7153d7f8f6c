//! Deterministic generators for the benchmark circuits.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, Gate, GateKind, Matrix};
use crate::transpiler::decompose_multi_controlled;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchApp {
    Qv,
    Qft,
    Rqc,
    Grover,
    Ghz,
    Qw,
}

impl BenchApp {
    pub const ALL: [BenchApp; 6] = [
        BenchApp::Qv,
        BenchApp::Qft,
        BenchApp::Rqc,
        BenchApp::Grover,
        BenchApp::Ghz,
        BenchApp::Qw,
    ];

    pub fn min_qubits(self) -> usize {
        match self {
            BenchApp::Qv | BenchApp::Qw | BenchApp::Rqc | BenchApp::Grover => 2,
            BenchApp::Qft | BenchApp::Ghz => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchApp::Qv => "qv",
            BenchApp::Qft => "qft",
            BenchApp::Rqc => "rqc",
            BenchApp::Grover => "grover",
            BenchApp::Ghz => "ghz",
            BenchApp::Qw => "qw",
        }
    }
}

impl fmt::Display for BenchApp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchApp {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        BenchApp::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| BenchError::UnknownApp(s.to_string()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BenchError {
    #[error("unknown benchmark `{0}` (expected qv, qft, rqc, grover, ghz or qw)")]
    UnknownApp(String),
    #[error("{app} needs at least {min} qubits, got {n}")]
    TooFewQubits { app: BenchApp, min: usize, n: usize },
    #[error("{app} requires `{param}`")]
    MissingParameter { app: BenchApp, param: &'static str },
    #[error("`{param}` must be at least 1")]
    Zero { param: &'static str },
    #[error("marked state {marked} does not fit in {n} qubits")]
    MarkedOutOfRange { marked: u64, n: usize },
}

/// Parameters of one benchmark instance. `depth` is used by QV and RQC, `iterations` by
/// QW and Grover (default 1), `marked_state` by Grover, `seed` by QV and RQC.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub app: BenchApp,
    pub n_qubits: usize,
    pub depth: Option<usize>,
    pub iterations: Option<usize>,
    pub seed: u64,
    pub marked_state: Option<u64>,
}

impl BenchSpec {
    pub fn new(app: BenchApp, n_qubits: usize) -> Self {
        BenchSpec {
            app,
            n_qubits,
            depth: None,
            iterations: None,
            seed: 0,
            marked_state: None,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let app = self.app;
        if self.n_qubits < app.min_qubits() {
            return Err(BenchError::TooFewQubits {
                app,
                min: app.min_qubits(),
                n: self.n_qubits,
            });
        }
        let need = |v: Option<usize>, param| match v {
            None => Err(BenchError::MissingParameter { app, param }),
            Some(0) => Err(BenchError::Zero { param }),
            Some(_) => Ok(()),
        };
        match app {
            BenchApp::Qv | BenchApp::Rqc => need(self.depth, "depth"),
            BenchApp::Qw => need(self.iterations, "iterations"),
            BenchApp::Grover => {
                let marked = self.marked_state.ok_or(BenchError::MissingParameter { app, param: "marked" })?;
                if self.n_qubits < 64 && marked >> self.n_qubits != 0 {
                    return Err(BenchError::MarkedOutOfRange {
                        marked,
                        n: self.n_qubits,
                    });
                }
                if self.iterations == Some(0) {
                    return Err(BenchError::Zero { param: "iterations" });
                }
                Ok(())
            }
            BenchApp::Qft | BenchApp::Ghz => Ok(()),
        }
    }
}

/// Builds the circuit for `spec` and records the spec in its metadata.
pub fn gen(spec: &BenchSpec) -> Result<Circuit, BenchError> {
    spec.validate()?;
    let n = spec.n_qubits;
    let mut c = match spec.app {
        BenchApp::Qv => gen_qv(n, spec.depth.unwrap_or(1), spec.seed),
        BenchApp::Qft => gen_qft(n),
        BenchApp::Rqc => gen_rqc(n, spec.depth.unwrap_or(1), spec.seed),
        BenchApp::Grover => gen_grover(n, spec.marked_state.unwrap_or(0), spec.iterations.unwrap_or(1)),
        BenchApp::Ghz => gen_ghz(n),
        BenchApp::Qw => gen_qw(n, spec.iterations.unwrap_or(1)),
    };
    let meta = &mut c.metadata;
    meta.name = format!("{}_n{}", spec.app, n);
    if matches!(spec.app, BenchApp::Qv | BenchApp::Rqc) {
        meta.seed = Some(spec.seed);
    }
    if let Some(d) = spec.depth {
        meta.params.insert("depth".into(), d.to_string());
    }
    if let Some(t) = spec.iterations {
        meta.params.insert("iterations".into(), t.to_string());
    }
    if let Some(m) = spec.marked_state {
        meta.params.insert("marked".into(), m.to_string());
    }
    Ok(c)
}

/// Haar-random `U(4)` from the QR factorization of a complex Gaussian matrix, with the
/// phases of `R`'s diagonal moved into `Q`, then scaled to unit determinant.
pub fn haar_su4(rng: &mut impl Rng) -> Matrix {
    let z = DMatrix::from_fn(4, 4, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) / 2f64.sqrt()
    });
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..4 {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..4 {
            q[(i, j)] *= phase;
        }
    }
    let det = q.determinant();
    q / det.powf(0.25)
}

/// Quantum-volume circuit: per layer a seeded permutation pairs qubits and each pair gets
/// a Haar-random SU(4).
pub fn gen_qv(n: usize, depth: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::named(n, "qv");
    let mut perm: Vec<usize> = (0..n).collect();
    for _ in 0..depth {
        perm.shuffle(&mut rng);
        for pair in perm.chunks_exact(2) {
            let u = haar_su4(&mut rng);
            c.push(Gate::su4(u, pair[0], pair[1]));
        }
    }
    c
}

/// Textbook QFT with terminal swaps, qubit 0 taking the role of the most significant bit.
///
/// Basis `|x⟩` maps to `Σ_y e^{2πi·rev(x)·rev(y)/2^n} |y⟩ / √2^n`, where `rev` reverses
/// the `n` index bits.
pub fn gen_qft(n: usize) -> Circuit {
    let mut c = Circuit::named(n, "qft");
    for i in 0..n {
        c.push(Gate::h(i));
        for j in i + 1..n {
            c.push(Gate::cp(PI / (1u64 << (j - i)) as f64, j, i));
        }
    }
    for i in 0..n / 2 {
        c.push(Gate::swap(i, n - 1 - i));
    }
    c
}

/// CZ pairs `(i, i+1)` of layer `layer`: every fourth neighbour pair, shifted by one each layer.
pub fn rqc_pairs(n: usize, layer: usize) -> Vec<(usize, usize)> {
    (0..n.saturating_sub(1)).filter(|i| i % 4 == layer % 4).map(|i| (i, i + 1)).collect()
}

/// Gate count of [`gen_rqc`]: `n·depth + Σ_layer |rqc_pairs(n, layer)|`.
pub fn rqc_gate_count(n: usize, depth: usize) -> usize {
    n * depth + (0..depth).map(|l| rqc_pairs(n, l).len()).sum::<usize>()
}

/// Random circuit: per layer one of √X, √Y, T on every qubit (never the qubit's previous
/// choice), then CZ on the layer's neighbour pairs.
pub fn gen_rqc(n: usize, depth: usize, seed: u64) -> Circuit {
    const CHOICES: [GateKind; 3] = [GateKind::SqrtX, GateKind::SqrtY, GateKind::T];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::named(n, "rqc");
    let mut prev: Vec<Option<usize>> = vec![None; n];
    for layer in 0..depth {
        for (q, p) in prev.iter_mut().enumerate() {
            let pick = match *p {
                None => rng.random_range(0..3),
                Some(last) => (last + rng.random_range(1..3)) % 3,
            };
            *p = Some(pick);
            c.push(Gate::single(CHOICES[pick].clone(), q));
        }
        for (a, b) in rqc_pairs(n, layer) {
            c.push(Gate::cz(a, b));
        }
    }
    c
}

/// Grover search for one marked basis state, with native multi-controlled Z gates.
pub fn gen_grover(n: usize, marked: u64, iterations: usize) -> Circuit {
    let mut c = Circuit::named(n, "grover");
    let controls: Vec<usize> = (0..n - 1).collect();
    let zeros: Vec<usize> = (0..n).filter(|&q| marked >> q & 1 == 0).collect();
    for q in 0..n {
        c.push(Gate::h(q));
    }
    for _ in 0..iterations {
        for &q in &zeros {
            c.push(Gate::x(q));
        }
        c.push(Gate::mcz(controls.clone(), n - 1));
        for &q in &zeros {
            c.push(Gate::x(q));
        }
        for layer in [0, 1] {
            for q in 0..n {
                c.push(if layer == 0 { Gate::h(q) } else { Gate::x(q) });
            }
        }
        c.push(Gate::mcz(controls.clone(), n - 1));
        for layer in [1, 0] {
            for q in 0..n {
                c.push(if layer == 0 { Gate::h(q) } else { Gate::x(q) });
            }
        }
    }
    c
}

/// Iteration count that maximizes the marked-state probability, `⌊(π/4)√2^n⌋`.
pub fn grover_iterations(n: usize) -> usize {
    ((PI / 4.0) * 2f64.powi(n as i32).sqrt()).floor() as usize
}

pub fn gen_ghz(n: usize) -> Circuit {
    let mut c = Circuit::named(n, "ghz");
    c.push(Gate::h(0));
    for i in 0..n - 1 {
        c.push(Gate::cx(i, i + 1));
    }
    c
}

/// Coined walk on a cycle of `2^{n-1}` positions.
///
/// Qubit 0 is the coin and qubit `k + 1` is bit `k` of the position, which starts at 0.
/// Each step applies H to the coin, increments the position when the coin is 1 and
/// decrements it when the coin is 0. The incrementer is a descending cascade of
/// multi-controlled X gates, which are then decomposed over X/CX/CCX/H/CP by borrowing
/// idle qubits (no qubits are added).
pub fn gen_qw(n: usize, iterations: usize) -> Circuit {
    let mut c = Circuit::named(n, "qw");
    let m = n - 1;
    let increment: Vec<Gate> = (0..m)
        .rev()
        .map(|k| {
            let controls: Vec<usize> = std::iter::once(0).chain(1..=k).collect();
            Gate::mcx(controls, k + 1)
        })
        .collect();
    for _ in 0..iterations {
        c.push(Gate::h(0));
        for g in &increment {
            c.push(g.clone());
        }
        c.push(Gate::x(0));
        for g in increment.iter().rev() {
            c.push(g.clone());
        }
        c.push(Gate::x(0));
    }
    decompose_multi_controlled(&c)
}
