//! Reference implementations shared by the integration tests.
//!
//! The dense simulator builds every gate as a full `2^n × 2^n` operator out of Kronecker
//! products of 2×2 factors and multiplies it into the state vector. It shares nothing
//! with the engine's kernels beyond the gate matrices themselves.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use svsim::circuit::{Circuit, Gate, GateKind};
use svsim::state::StateVector;

pub type Dense = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `|a⟩⟨b|` on one qubit.
fn outer(a: usize, b: usize) -> Dense {
    let mut m = Dense::zeros(2, 2);
    m[(a, b)] = c(1.0, 0.0);
    m
}

/// `F_{n-1} ⊗ … ⊗ F_0` with `factor(q)` on qubit `q`.
fn kron_all(n: usize, factor: impl Fn(usize) -> Dense) -> Dense {
    let mut acc = Dense::identity(1, 1);
    for q in (0..n).rev() {
        acc = acc.kronecker(&factor(q));
    }
    acc
}

/// Full operator of a gate with no controls acting on `targets` (local bit `i` = `targets[i]`):
/// `Σ_{a,b} m[a,b] ⊗_i |a_i⟩⟨b_i|_{targets[i]}`.
fn expand_targets(n: usize, m: &Dense, targets: &[usize]) -> Dense {
    let dim = m.nrows();
    let mut full = Dense::zeros(1 << n, 1 << n);
    for a in 0..dim {
        for b in 0..dim {
            let coef = m[(a, b)];
            if coef == c(0.0, 0.0) {
                continue;
            }
            let term = kron_all(n, |q| match targets.iter().position(|&t| t == q) {
                Some(i) => outer((a >> i) & 1, (b >> i) & 1),
                None => Dense::identity(2, 2),
            });
            full += term * coef;
        }
    }
    full
}

/// Full `2^n × 2^n` operator of `g`.
pub fn full_operator(n: usize, g: &Gate) -> Dense {
    let m = g.matrix().expect("unitary gate");
    let u = expand_targets(n, &m, &g.targets);
    if g.controls.is_empty() {
        return u;
    }
    // P·U + (I − P), P projecting every control on |1⟩
    let p = kron_all(n, |q| if g.controls.contains(&q) { outer(1, 1) } else { Dense::identity(2, 2) });
    let id = Dense::identity(1 << n, 1 << n);
    &p * u + (id - &p)
}

/// Final state of `c` from `|0…0⟩`; measurements and barriers are skipped.
pub fn dense_simulate(circ: &Circuit) -> Vec<Complex64> {
    dense_apply(circ, basis(circ.n_qubits, 0))
}

pub fn dense_apply(circ: &Circuit, init: Vec<Complex64>) -> Vec<Complex64> {
    let mut psi = DVector::from_vec(init);
    for g in &circ.gates {
        if matches!(g.kind, GateKind::Measure { .. } | GateKind::Barrier) {
            continue;
        }
        psi = full_operator(circ.n_qubits, g) * psi;
    }
    psi.as_slice().to_vec()
}

pub fn max_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Max deviation after removing the global phase that best aligns `b` with `a`.
pub fn max_dev_up_to_phase(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
    let phase = if overlap.norm() > 0.0 { overlap / overlap.norm() } else { c(1.0, 0.0) };
    let aligned: Vec<Complex64> = b.iter().map(|y| y * phase).collect();
    max_dev(a, &aligned)
}

pub fn amps(s: &StateVector) -> Vec<Complex64> {
    s.to_complex64()
}

pub fn basis(n: usize, index: usize) -> Vec<Complex64> {
    (0..1 << n).map(|i| if i == index { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect()
}

/// Reverses the low `n` bits of `x`.
pub fn rev(x: usize, n: usize) -> usize {
    (0..n).fold(0, |acc, i| acc | (((x >> i) & 1) << (n - 1 - i)))
}

/// Circuit preparing basis state `|x⟩` with X gates.
pub fn prepare_basis(n: usize, x: usize) -> Circuit {
    let mut circ = Circuit::new(n);
    for q in 0..n {
        if x >> q & 1 == 1 {
            circ.push(Gate::x(q));
        }
    }
    circ
}

pub fn concat(a: &Circuit, b: &Circuit) -> Circuit {
    let mut circ = a.clone();
    circ.gates.extend(b.gates.iter().cloned());
    circ
}

/// Haar-ish random unitary of dimension `dim` (QR of a complex Gaussian).
pub fn random_unitary(dim: usize, rng: &mut impl rand::Rng) -> Dense {
    use rand_distr::StandardNormal;
    let z = Dense::from_fn(dim, dim, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = d / d.norm();
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    q
}

fn distinct(n: usize, k: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut qs: Vec<usize> = (0..n).collect();
    qs.shuffle(rng);
    qs.truncate(k);
    qs
}

/// Random circuit over the whole gate library, seeded.
pub fn random_circuit(n: usize, len: usize, seed: u64) -> Circuit {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut circ = Circuit::new(n);
    while circ.len() < len {
        let a: f64 = rng.random_range(-4.0..4.0);
        let pick = rng.random_range(0..22);
        let g = match pick {
            0..=12 => {
                let kind = match pick {
                    0 => GateKind::H,
                    1 => GateKind::X,
                    2 => GateKind::Y,
                    3 => GateKind::Z,
                    4 => GateKind::S,
                    5 => GateKind::T,
                    6 => GateKind::Rx(a),
                    7 => GateKind::Ry(a),
                    8 => GateKind::Rz(a),
                    9 => GateKind::P(a),
                    10 => GateKind::U(a, rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)),
                    11 => GateKind::SqrtX,
                    _ => GateKind::SqrtY,
                };
                Gate::single(kind, rng.random_range(0..n))
            }
            _ if n < 2 => continue,
            13 => {
                let q = distinct(n, 2, &mut rng);
                Gate::cx(q[0], q[1])
            }
            14 => {
                let q = distinct(n, 2, &mut rng);
                Gate::cz(q[0], q[1])
            }
            15 => {
                let q = distinct(n, 2, &mut rng);
                Gate::cp(a, q[0], q[1])
            }
            16 => {
                let q = distinct(n, 2, &mut rng);
                Gate::swap(q[0], q[1])
            }
            17 => {
                let q = distinct(n, 2, &mut rng);
                Gate::su4(random_unitary(4, &mut rng), q[0], q[1])
            }
            _ if n < 3 => continue,
            18 => {
                let q = distinct(n, 3, &mut rng);
                Gate::ccx(q[0], q[1], q[2])
            }
            19 => {
                let q = distinct(n, 3, &mut rng);
                Gate::unitary(random_unitary(8, &mut rng), q)
            }
            20 => {
                let k = rng.random_range(2..=n);
                let q = distinct(n, k, &mut rng);
                Gate::mcx(q[1..].to_vec(), q[0])
            }
            _ => {
                let k = rng.random_range(2..=n);
                let q = distinct(n, k, &mut rng);
                Gate::mcz(q[1..].to_vec(), q[0])
            }
        };
        circ.push(g);
    }
    circ
}

/// Valid programs the fuzz corpus is derived from.
pub const FUZZ_SEEDS: &[&str] = &[
    "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[3];\ncreg c[3];\nh q[0];\ncx q[0],q[1];\nu3(pi/2,-0.5e-1,2*pi) q[2];\nbarrier q;\nmeasure q -> c;\n",
    "OPENQASM 2.0;\nqreg a[2];\nqreg b[2];\ncp(pi/4) a[0],b[1];\nccx a[0],a[1],b[0];\nswap a,b;\n",
    "OPENQASM 2.0;\nqreg q[1];\nrx(-(1+2)*3^2/sin(0.5)) q[0]; // comment\n",
];

/// Random byte-level edits of `src` (deletions, insertions, truncation, duplication).
pub fn mutate(src: &str, rng: &mut rand_chacha::ChaCha8Rng) -> Vec<u8> {
    const ALPHABET: &[u8] = b"qreg[];(),->+-*/^.0123456789epi \n\"xhcu3OPENQASM\xff\xc3";
    use rand::Rng;
    let mut bytes = src.as_bytes().to_vec();
    for _ in 0..rng.random_range(1..6) {
        if bytes.is_empty() {
            bytes.push(ALPHABET[rng.random_range(0..ALPHABET.len())]);
            continue;
        }
        let at = rng.random_range(0..bytes.len());
        match rng.random_range(0..5) {
            0 => {
                bytes.remove(at);
            }
            1 => bytes.insert(at, ALPHABET[rng.random_range(0..ALPHABET.len())]),
            2 => bytes[at] = ALPHABET[rng.random_range(0..ALPHABET.len())],
            3 => bytes.truncate(at),
            _ => {
                let end = (at + rng.random_range(1..20)).min(bytes.len());
                let chunk = bytes[at..end].to_vec();
                bytes.splice(at..at, chunk);
            }
        }
    }
    bytes
}

