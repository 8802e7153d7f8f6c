//! Fusion and cache-blocking soundness.

mod common;

use common::*;
use proptest::prelude::*;
use svsim::bench::{gen_ghz, gen_grover, gen_qft, gen_qv, gen_qw, gen_rqc};
use svsim::circuit::{Circuit, GateKind};
use svsim::engine::{run, run_chunked, RunConfig};
use svsim::linalg::unitarity_error;
use svsim::state::Precision;
use svsim::transpiler::{block_pass, fuse, sweep_blocking, BlockedOp, FusionConfig};

fn state(c: &Circuit, cfg: &RunConfig) -> Vec<num_complex::Complex64> {
    amps(&run(c, cfg).unwrap().state.unwrap())
}

fn off() -> RunConfig {
    RunConfig {
        fusion: FusionConfig::disabled(),
        ..Default::default()
    }
}

fn with_threshold(t: usize, k: usize) -> RunConfig {
    RunConfig {
        fusion: FusionConfig {
            enabled: true,
            threshold: t,
            max_fused_qubits: k,
        },
        ..Default::default()
    }
}

#[test]
fn fused_groups_are_unitary_and_bounded() {
    for c in [gen_qft(14), gen_rqc(14, 6, 1), gen_qv(14, 3, 2), gen_qw(14, 1)] {
        let out = fuse(&c, &FusionConfig::default());
        assert!(out.circuit.len() <= c.len());
        for g in &out.groups {
            assert!((1..=3).contains(&g.k()));
            assert!(unitarity_error(&g.matrix) < 1e-10);
        }
        let covered: usize = out.groups.iter().map(|g| g.provenance.len()).sum::<usize>()
            + out.circuit.gates.iter().filter(|g| !matches!(g.kind, GateKind::Unitary(_))).count();
        assert_eq!(covered, c.len());
    }
}

#[test]
fn fusion_preserves_state_on_small_circuits() {
    // threshold lowered so fusion actually runs at oracle-checkable sizes
    for n in 2..=6 {
        for k in 1..=3 {
            for c in [gen_qft(n), gen_rqc(n, 5, 3), gen_qv(n, 3, 4), gen_grover(n, 1, 1), gen_ghz(n)] {
                let dev = max_dev(&state(&c, &with_threshold(1, k)), &dense_simulate(&c));
                assert!(dev < 1e-10, "{} n={n} k={k}: {dev}", c.metadata.name);
            }
        }
    }
}

#[test]
fn blocking_plan_invariants() {
    for n in [5, 8] {
        for b in 2..=n {
            let c = random_circuit(n, 80, (n * 31 + b) as u64);
            let c: Circuit = Circuit {
                gates: c.gates.into_iter().filter(|g| g.span() <= b).collect(),
                ..c
            };
            let plan = block_pass(&c, b).unwrap();
            assert_eq!(plan.final_layout, (0..n).collect::<Vec<_>>());
            let mut swaps = 0;
            for op in &plan.ops {
                match op {
                    BlockedOp::Gate(g) => assert!(g.qubits().all(|q| q < b)),
                    BlockedOp::Exchange { low, high } => {
                        assert!(*low < b && *high >= b && *high < n);
                        swaps += 1;
                    }
                }
            }
            assert_eq!(swaps, plan.inserted_swaps());
        }
    }
}

#[test]
fn chunked_matches_oracle() {
    for n in 3..=6 {
        for b in 2..=n {
            let c = random_circuit(n, 40, (n * 7 + b) as u64);
            let c = Circuit {
                gates: c.gates.into_iter().filter(|g| g.span() <= b).collect(),
                ..c
            };
            let cfg = RunConfig {
                blocking_qubits: Some(b),
                workers: 2,
                ..off()
            };
            let dev = max_dev(&state(&c, &cfg), &dense_simulate(&c));
            assert!(dev < 1e-10, "n={n} b={b}: {dev}");
        }
    }
}

#[test]
fn sweep_is_monotone_for_ghz_and_qft() {
    for c in [gen_ghz(12), gen_qft(12)] {
        let rows = sweep_blocking(&c, &(2..=12).collect::<Vec<_>>(), Precision::Single).unwrap();
        for w in rows.windows(2) {
            assert!(w[0].inserted_swaps >= w[1].inserted_swaps, "{}: {:?}", c.metadata.name, rows);
        }
        assert_eq!(rows.last().unwrap().inserted_swaps, 0);
    }
}

#[test]
fn run_chunked_accepts_a_prebuilt_plan() {
    let c = gen_qft(9);
    let plan = block_pass(&c, 5).unwrap();
    let cfg = RunConfig { workers: 3, ..off() };
    let r = run_chunked(&plan, &cfg).unwrap();
    assert_eq!(r.inserted_swaps, plan.inserted_swaps());
    assert!(max_dev(&amps(&r.state.unwrap()), &state(&c, &off())) < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fusion_on_equals_fusion_off(n in 1usize..=7, len in 0usize..50, k in 1usize..=4, seed in any::<u64>()) {
        let c = random_circuit(n, len, seed);
        let dev = max_dev(&state(&c, &with_threshold(0, k)), &state(&c, &off()));
        prop_assert!(dev < 1e-10, "dev {}", dev);
    }

    #[test]
    fn chunked_equals_monolithic(n in 2usize..=8, len in 0usize..50, seed in any::<u64>(), b_off in 0usize..8, w in 1usize..=4) {
        let b = 1 + b_off % n;
        let c = random_circuit(n, len, seed);
        let c = Circuit { gates: c.gates.into_iter().filter(|g| g.span() <= b).collect(), ..c };
        let chunked = RunConfig { blocking_qubits: Some(b), workers: w, ..off() };
        let r = run(&c, &chunked).unwrap();
        let dev = max_dev(&amps(r.state.as_ref().unwrap()), &state(&c, &off()));
        prop_assert!(dev < 1e-12, "dev {}", dev);
        let plan = block_pass(&c, b).unwrap();
        prop_assert_eq!(r.ledger.inter_chunk_bytes, plan.inserted_swaps() as u64 * (1u64 << (n - 1)) * 16);
    }
}
