//! Benchmark generators: closed forms, numerical behaviour and determinism.

mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use svsim::bench::{gen, gen_ghz, gen_grover, gen_qft, gen_qv, gen_qw, gen_rqc, grover_iterations, rqc_gate_count, BenchApp, BenchSpec};
use svsim::circuit::Circuit;
use svsim::engine::{apply_gate, run, RunConfig};
use svsim::qasm::emit;
use svsim::state::{Precision, StateVector};

fn final_state(c: &Circuit) -> StateVector {
    run(c, &RunConfig::default()).unwrap().state.unwrap()
}

#[test]
fn qft_matches_discrete_fourier_oracle() {
    // basis |x⟩ ↦ Σ_y e^{2πi·rev(x)·rev(y)/2^n} |y⟩ / √2^n
    for n in 1..=10 {
        let dim = 1usize << n;
        let xs: Vec<usize> = if n <= 6 { (0..dim).collect() } else { vec![0, 1, 5, dim / 3, dim - 1] };
        for x in xs {
            let c = concat(&prepare_basis(n, x), &gen_qft(n));
            let got = amps(&final_state(&c));
            let norm = (dim as f64).sqrt().recip();
            let expect: Vec<Complex64> = (0..dim)
                .map(|y| {
                    let k = (rev(x, n) * rev(y, n)) % dim;
                    Complex64::from_polar(norm, 2.0 * PI * k as f64 / dim as f64)
                })
                .collect();
            let dev = max_dev(&got, &expect);
            assert!(dev < 1e-10, "n={n} x={x}: {dev}");
        }
    }
}

#[test]
fn grover_amplifies_marked_state() {
    for n in 2..=10 {
        for marked in [0u64, (1 << n) - 1, 0b101 % (1 << n)] {
            let s = final_state(&gen_grover(n, marked, grover_iterations(n)));
            let p = s.amplitude(marked as usize).norm_sqr();
            assert!(p > 0.9, "n={n} marked={marked}: {p}");
        }
    }
    let p = final_state(&gen_grover(2, 3, 1)).amplitude(3).norm_sqr();
    assert!((p - 1.0).abs() < 1e-12);
    let p = final_state(&gen_grover(3, 6, 1)).amplitude(6).norm_sqr();
    assert!((p - 0.78125).abs() < 1e-12, "{p}");
}

#[test]
fn ghz_has_two_equal_peaks() {
    for n in 1..=16 {
        let s = final_state(&gen_ghz(n));
        let probs = s.probabilities();
        let last = (1 << n) - 1;
        assert!((probs[0] - 0.5).abs() < 1e-12 && (probs[last] - 0.5).abs() < 1e-12);
        assert_eq!(probs.iter().filter(|&&p| p != 0.0).count(), 2);
    }
}

fn position_distribution(s: &StateVector) -> Vec<f64> {
    let probs = s.probabilities();
    let mut pos = vec![0.0; probs.len() / 2];
    for (i, p) in probs.iter().enumerate() {
        pos[i >> 1] += p;
    }
    pos
}

#[test]
fn quantum_walk_one_step() {
    let s = final_state(&gen_qw(2, 1));
    // coin 0 moved left, coin 1 moved right; both land on position 1 of the 2-cycle
    let p = s.probabilities();
    assert!((p[0b10] - 0.5).abs() < 1e-12 && (p[0b11] - 0.5).abs() < 1e-12);
    let s = final_state(&gen_qw(4, 1));
    let pos = position_distribution(&s);
    assert!((pos[1] - 0.5).abs() < 1e-12 && (pos[7] - 0.5).abs() < 1e-12);
}

#[test]
fn quantum_walk_differs_from_classical_walk() {
    let (n, t) = (6, 10);
    let pos = position_distribution(&final_state(&gen_qw(n, t)));
    let cycle = pos.len() as i64;
    let mut classical = vec![0.0; pos.len()];
    for right in 0..=t {
        let d = 2 * right as i64 - t as i64;
        let ways = (0..right).fold(1.0, |acc, i| acc * (t - i) as f64 / (i + 1) as f64);
        classical[d.rem_euclid(cycle) as usize] += ways / 2f64.powi(t as i32);
    }
    let tv: f64 = 0.5 * pos.iter().zip(&classical).map(|(a, b)| (a - b).abs()).sum::<f64>();
    assert!(tv > 0.1, "TV {tv}");
    for n in 2..=10 {
        let s = final_state(&gen_qw(n, 2));
        assert!((position_distribution(&s).iter().sum::<f64>() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn norm_is_preserved_after_every_gate() {
    for p in [Precision::Double, Precision::Single] {
        let tol = if p == Precision::Double { 1e-9 } else { 1e-4 };
        for n in [3, 9, 14] {
            let circuits = [
                gen_qv(n, 4, 1),
                gen_qft(n),
                gen_rqc(n, 6, 2),
                gen_grover(n, 1, 1),
                gen_ghz(n),
                gen_qw(n.min(10), 1),
            ];
            for c in circuits {
                let mut s = StateVector::zero(c.n_qubits, p).unwrap();
                for g in &c.gates {
                    apply_gate(&mut s, g).unwrap();
                    assert!((s.norm_sq() - 1.0).abs() < tol, "{} n={n} {p}", c.metadata.name);
                }
            }
        }
    }
}

#[test]
fn closed_form_counts_and_reference_rows() {
    assert_eq!(gen_rqc(31, 12, 0).len(), rqc_gate_count(31, 12));
    assert_eq!(rqc_gate_count(31, 12), 462);
    let qw = gen_qw(16, 5);
    assert!(qw.len() > 10_000, "{}", qw.len());
    let ghz = gen_ghz(31).stats();
    assert_eq!(ghz.non_local_gates, 30);
}

#[test]
fn generation_is_deterministic_down_to_qasm() {
    for app in BenchApp::ALL {
        let spec = BenchSpec {
            depth: Some(3),
            iterations: Some(2),
            marked_state: Some(5),
            seed: 42,
            ..BenchSpec::new(app, 6)
        };
        let a = gen(&spec).unwrap();
        let b = gen(&spec).unwrap();
        assert_eq!(a, b);
        if let (Ok(x), Ok(y)) = (emit(&a), emit(&b)) {
            assert_eq!(x, y);
        }
    }
    assert_ne!(gen_qv(6, 3, 1), gen_qv(6, 3, 2));
}
