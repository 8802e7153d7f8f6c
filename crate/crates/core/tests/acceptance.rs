//! End-to-end acceptance checks. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; the process fails if any criterion does.

mod common;

use std::collections::BTreeMap;
use std::time::Instant;

use common::*;
use num_complex::Complex64;
use rand::SeedableRng;
use svsim::bench::{gen_ghz, gen_grover, gen_qft, gen_qv, gen_qw, gen_rqc, grover_iterations};
use svsim::circuit::Circuit;
use svsim::engine::{run, RunConfig};
use svsim::perf::{kernel_cost, MachineModel};
use svsim::qasm::{parse_bytes, roundtrip_check};
use svsim::state::{memory_bytes, Precision};
use svsim::transpiler::{block_pass, decompose_multi_controlled, fuse_pass, sweep_blocking, FusionConfig};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn fusion_off() -> RunConfig {
    RunConfig {
        fusion: FusionConfig::disabled(),
        ..Default::default()
    }
}

fn state(c: &Circuit, cfg: &RunConfig) -> Result<Vec<Complex64>, String> {
    let r = run(c, cfg).map_err(|e| e.to_string())?;
    Ok(amps(&r.state.expect("state kept")))
}

fn benchmark_structure() -> Outcome {
    let t = Instant::now();
    let qft = gen_qft(31).stats();
    let ghz = gen_ghz(31).stats();
    let qv = gen_qv(31, 10, 0).stats();
    let secs = t.elapsed().as_secs_f64();
    ensure!(qft.total_gates == 511 && qft.non_local_percent == 94, "QFT(31): {qft}");
    ensure!(ghz.total_gates == 31 && ghz.depth == 31, "GHZ(31): {ghz}");
    ensure!(
        qv.total_gates == 150 && qv.non_local_percent == 100 && qv.depth == 10,
        "QV(31,10): {qv}"
    );
    ensure!(secs < 1.0, "generation took {secs:.3} s");
    Ok(format!("QFT(31) {qft}; GHZ(31) {ghz}; QV(31,10) {qv}; {secs:.3} s"))
}

fn memory_law() -> Outcome {
    let bytes = memory_bytes(31, Precision::Single);
    let gb = format!("{:.1}", bytes as f64 / 1e9);
    ensure!(bytes == 17_179_869_184, "got {bytes} B");
    ensure!(gb == "17.2", "displayed as {gb} GB");
    Ok(format!("31 qubits single precision = {bytes} B ({gb} GB)"))
}

fn cost_model_anchor() -> Outcome {
    for n in 1..=40 {
        let c = kernel_cost(1, 0, n, Precision::Single).map_err(|e| e.to_string())?;
        let amps = 1u64 << n;
        ensure!(c.flops == 14 * amps && c.bytes == 16 * amps, "n={n}: {} flops {} bytes", c.flops, c.bytes);
    }
    let ridge = MachineModel::a100().ridge_point(Precision::Single);
    ensure!((6.7..=6.8).contains(&ridge), "ridge point {ridge}");
    Ok(format!("1-qubit single precision: 14 FLOP and 16 B per amplitude; A100 ridge point {ridge:.4}"))
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for n in 1..=6 {
        let mut circuits = vec![gen_qft(n), gen_ghz(n)];
        if n >= 2 {
            circuits.push(gen_qv(n, 4, n as u64));
            circuits.push(gen_rqc(n, 5, n as u64));
            circuits.push(gen_grover(n, (1 << n) - 2, grover_iterations(n)));
        }
        if (2..=5).contains(&n) {
            for t in 1..=3 {
                circuits.push(gen_qw(n, t));
            }
        }
        for c in circuits {
            let dev = max_dev(&state(&c, &fusion_off())?, &dense_simulate(&c));
            ensure!(dev < 1e-10, "{} n={n}: deviation {dev:e}", c.metadata.name);
            worst = worst.max(dev);
            checked += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    ensure!(secs < 60.0, "took {secs:.1} s");
    Ok(format!("{checked} circuits, max deviation {worst:.2e}, {secs:.2} s"))
}

fn suite(n: usize) -> Vec<Circuit> {
    vec![
        gen_qv(n, 5, 1),
        gen_qft(n),
        gen_rqc(n, 8, 2),
        gen_grover(n, 5, 1),
        gen_ghz(n),
        gen_qw(n, 1),
    ]
}

fn fusion_soundness() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in [8, 14, 16] {
        for c in suite(n) {
            let on = state(&c, &RunConfig::default())?;
            let off = state(&c, &fusion_off())?;
            let dev = max_dev(&on, &off);
            ensure!(dev < 1e-10, "{} n={n}: deviation {dev:e}", c.metadata.name);
            worst = worst.max(dev);
        }
    }
    for c in suite(13) {
        let fused = fuse_pass(&c, &FusionConfig::default());
        ensure!(fused.same_gates(&c), "{} n=13 was rewritten", c.metadata.name);
    }
    let fused16 = fuse_pass(&gen_qft(16), &FusionConfig::default());
    Ok(format!(
        "max deviation {worst:.2e}; n=13 untouched; QFT(16) {} -> {} gates",
        gen_qft(16).len(),
        fused16.len()
    ))
}

fn blocking_soundness() -> Outcome {
    let mut runs = 0;
    for n in [8, 10, 12] {
        let circuits: Vec<Circuit> = suite(n).iter().map(decompose_multi_controlled).collect();
        for c in &circuits {
            let mono = state(c, &RunConfig { shots: 100, seed: 3, ..fusion_off() })?;
            for b in [4, 6, 8] {
                let plan = block_pass(c, b).map_err(|e| e.to_string())?;
                let mut first: Option<(Vec<Complex64>, BTreeMap<String, u64>)> = None;
                for w in [1, 2, 4] {
                    let cfg = RunConfig {
                        blocking_qubits: Some(b),
                        workers: w,
                        shots: 100,
                        seed: 3,
                        ..fusion_off()
                    };
                    let r = run(c, &cfg).map_err(|e| e.to_string())?;
                    let s = amps(r.state.as_ref().expect("state kept"));
                    let dev = max_dev(&s, &mono);
                    ensure!(dev < 1e-12, "{} n={n} b={b} W={w}: deviation {dev:e}", c.metadata.name);
                    let expect = plan.inserted_swaps() as u64 * (1u64 << (n - 1)) * 16;
                    ensure!(
                        r.ledger.inter_chunk_bytes == expect,
                        "{} n={n} b={b}: ledger {} vs {expect}",
                        c.metadata.name,
                        r.ledger.inter_chunk_bytes
                    );
                    match &first {
                        None => first = Some((s, r.counts)),
                        Some((s0, counts0)) => {
                            let identical = s0.iter().zip(&s).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits());
                            ensure!(identical && *counts0 == r.counts, "{} n={n} b={b}: W={w} differs", c.metadata.name);
                        }
                    }
                    runs += 1;
                }
            }
        }
    }
    Ok(format!("{runs} chunked runs equal monolithic, bitwise identical across W, ledger exact"))
}

fn qft_correctness() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=8 {
        let dim = 1usize << n;
        let qft = gen_qft(n);
        for x in 0..dim {
            let got = state(&concat(&prepare_basis(n, x), &qft), &fusion_off())?;
            let norm = (dim as f64).sqrt().recip();
            let expect: Vec<Complex64> = (0..dim)
                .map(|y| Complex64::from_polar(norm, 2.0 * std::f64::consts::PI * ((rev(x, n) * rev(y, n)) % dim) as f64 / dim as f64))
                .collect();
            let dev = max_dev(&got, &expect);
            ensure!(dev < 1e-10, "n={n} x={x}: deviation {dev:e}");
            worst = worst.max(dev);
        }
    }
    Ok(format!("all basis inputs n<=8, max deviation {worst:.2e}"))
}

fn grover_amplification() -> Outcome {
    let mut lowest: f64 = 1.0;
    for n in 2..=10 {
        let marked = (0b1011 % (1u64 << n)) as usize;
        let s = state(&gen_grover(n, marked as u64, grover_iterations(n)), &fusion_off())?;
        let p = s[marked].norm_sqr();
        ensure!(p > 0.9, "n={n}: P(marked) = {p}");
        lowest = lowest.min(p);
    }
    let p2 = state(&gen_grover(2, 3, 1), &fusion_off())?[3].norm_sqr();
    ensure!((p2 - 1.0).abs() < 1e-12, "n=2: P = {p2}");
    Ok(format!("min P(marked) over n=2..10 is {lowest:.4}; n=2 P = {p2}"))
}

fn ghz_state() -> Outcome {
    let mut secs20 = 0.0;
    for n in 1..=20 {
        let t = Instant::now();
        let s = state(&gen_ghz(n), &fusion_off())?;
        if n == 20 {
            secs20 = t.elapsed().as_secs_f64();
        }
        let last = (1usize << n) - 1;
        let nonzero = s.iter().filter(|a| a.norm() != 0.0).count();
        ensure!(nonzero == 2, "n={n}: {nonzero} nonzero amplitudes");
        for i in [0, last] {
            ensure!((s[i].norm_sqr() - 0.5).abs() < 1e-12, "n={n}: |a_{i}|^2 = {}", s[i].norm_sqr());
        }
    }
    ensure!(secs20 < 10.0, "n=20 took {secs20:.2} s");
    Ok(format!("n<=20 exact two-peak support; n=20 in {secs20:.3} s"))
}

fn sampling_statistics() -> Outcome {
    let mut c = Circuit::new(1);
    c.push(svsim::circuit::Gate::h(0));
    let shots = 1_000_000u64;
    let cfg = RunConfig {
        shots,
        seed: 12345,
        ..fusion_off()
    };
    let a = run(&c, &cfg).map_err(|e| e.to_string())?.counts;
    let b = run(&c, &cfg).map_err(|e| e.to_string())?.counts;
    ensure!(a == b, "counts differ between identical runs");
    let zeros = *a.get("0").unwrap_or(&0) as f64;
    let ones = *a.get("1").unwrap_or(&0) as f64;
    let e = shots as f64 / 2.0;
    let chi2 = (zeros - e).powi(2) / e + (ones - e).powi(2) / e;
    // p > 0.001 with one degree of freedom  <=>  chi2 < 10.828
    ensure!(chi2 < 10.828, "chi2 = {chi2}");
    Ok(format!("{zeros} zeros / {ones} ones, chi2 = {chi2:.3} (< 10.828), reproducible"))
}

fn qasm_round_trip() -> Outcome {
    let mut circuits = 0;
    for n in 1..=12 {
        let mut list = vec![gen_ghz(n), gen_qft(n)];
        if n >= 2 {
            list.push(decompose_multi_controlled(&gen_grover(n, 1, 1)));
            list.push(gen_qw(n, 1));
        }
        for c in list {
            let ok = roundtrip_check(&c).map_err(|e| format!("{} n={n}: {e}", c.metadata.name))?;
            ensure!(ok, "{} n={n}: round trip changed the circuit", c.metadata.name);
            circuits += 1;
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let mut errors = 0;
    for i in 0..1000 {
        let src = mutate(FUZZ_SEEDS[i % FUZZ_SEEDS.len()], &mut rng);
        match std::panic::catch_unwind(|| parse_bytes(&src)) {
            Err(_) => return Err(format!("parser panicked on case {i}")),
            Ok(Err(e)) => {
                ensure!(e.position().is_some(), "case {i}: error without position: {e}");
                errors += 1;
            }
            Ok(Ok(_)) => {}
        }
    }
    Ok(format!("{circuits} circuits round-trip; 1000 fuzz cases, {errors} positioned errors, no panics"))
}

fn blocking_sweep() -> Outcome {
    let c = gen_qv(20, 10, 0);
    let rows = sweep_blocking(&c, &[14, 15, 16, 17, 18], Precision::Single).map_err(|e| e.to_string())?;
    let swaps: Vec<usize> = rows.iter().map(|r| r.inserted_swaps).collect();
    ensure!(swaps.windows(2).all(|w| w[0] >= w[1]), "not monotone: {swaps:?}");
    Ok(format!("inserted swaps for b=14..18: {swaps:?}"))
}

fn main() {
    let std_hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let criteria: [Criterion; 12] = [
        ("benchmark structure", benchmark_structure),
        ("memory law", memory_law),
        ("cost-model anchor", cost_model_anchor),
        ("dense-oracle equivalence", oracle_equivalence),
        ("fusion soundness", fusion_soundness),
        ("blocking soundness", blocking_soundness),
        ("QFT correctness", qft_correctness),
        ("Grover amplification", grover_amplification),
        ("GHZ state", ghz_state),
        ("sampling statistics", sampling_statistics),
        ("QASM round trip and fuzz", qasm_round_trip),
        ("blocking sweep", blocking_sweep),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.2} s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({secs:.2} s): {why}", i + 1);
            }
        }
    }
    std::panic::set_hook(std_hook);
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
