//! Gate decompositions used for export and for the quantum-walk generator.
//!
//! Multi-controlled X and phase gates are rewritten without adding qubits. Qubits of the
//! circuit that a gate does not touch are borrowed as *dirty* ancillas (their state is
//! arbitrary and is restored):
//!
//! * `k` controls with `k - 2` borrowed qubits: a Toffoli V-chain of `4(k - 2)` gates.
//! * `k` controls with one borrowed qubit: split the controls in two halves and apply
//!   four smaller multi-controlled X gates, each of which finds enough borrowed qubits
//!   among the other half.
//! * no borrowed qubit: `H · C^k P(π) · H` where `C^k P(θ)` recurses as
//!   `CP(θ/2)[c_k, t] · C^{k-1}X[→c_k] · CP(-θ/2)[c_k, t] · C^{k-1}X[→c_k] · C^{k-1}P(θ/2)`.
//!   The inner multi-controlled X gates borrow the target, the recursion borrows `c_k`.
//!
//! Gate counts therefore grow quadratically in the number of controls.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::circuit::{Circuit, Gate, GateKind, Matrix};

/// `M = e^{iα} Rz(β) Ry(γ) Rz(δ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Zyz {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Zyz {
    /// `(θ, φ, λ)` with `M = e^{i·phase} u3(θ, φ, λ)`; returns `(θ, φ, λ, phase)`.
    pub fn to_u3(&self) -> (f64, f64, f64, f64) {
        (self.gamma, self.beta, self.delta, self.alpha - (self.beta + self.delta) / 2.0)
    }
}

pub fn zyz_decompose(m: &Matrix) -> Zyz {
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let alpha = det.arg() / 2.0;
    let unphase = Complex64::from_polar(1.0, -alpha);
    let a = m[(0, 0)] * unphase;
    let b = m[(1, 0)] * unphase;
    let gamma = 2.0 * b.norm().atan2(a.norm());
    const EPS: f64 = 1e-14;
    let sum = if a.norm() > EPS { -2.0 * a.arg() } else { 0.0 };
    let diff = if b.norm() > EPS { 2.0 * b.arg() } else { 0.0 };
    Zyz {
        alpha,
        beta: (sum + diff) / 2.0,
        gamma,
        delta: (sum - diff) / 2.0,
    }
}

fn u3_of(m: &Matrix, q: usize) -> Gate {
    let (theta, phi, lambda, _) = zyz_decompose(m).to_u3();
    Gate::single(GateKind::U(theta, phi, lambda), q)
}

fn u1(lambda: f64, q: usize) -> Gate {
    Gate::single(GateKind::U(0.0, 0.0, lambda), q)
}

fn x_native(q: usize) -> Gate {
    Gate::single(GateKind::U(PI, 0.0, PI), q)
}

fn rz(theta: f64) -> Matrix {
    Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::from_polar(1.0, -theta / 2.0),
        Complex64::from_polar(1.0, theta / 2.0),
    ]))
}

fn ry(theta: f64) -> Matrix {
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix::from_row_slice(
        2,
        2,
        &[Complex64::new(c, 0.0), Complex64::new(-s, 0.0), Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    )
}

/// Controlled-`u` over `{u3, cx}`, exact up to a global phase.
fn controlled_u_native(u: &Matrix, control: usize, target: usize, out: &mut Vec<Gate>) {
    let z = zyz_decompose(u);
    let a = rz(z.beta) * ry(z.gamma / 2.0);
    let b = ry(-z.gamma / 2.0) * rz(-(z.delta + z.beta) / 2.0);
    let c = rz((z.delta - z.beta) / 2.0);
    out.push(u3_of(&c, target));
    out.push(Gate::cx(control, target));
    out.push(u3_of(&b, target));
    out.push(Gate::cx(control, target));
    out.push(u3_of(&a, target));
    out.push(u1(z.alpha, control));
}

fn cp_native(lambda: f64, a: usize, b: usize, out: &mut Vec<Gate>) {
    out.push(u1(lambda / 2.0, a));
    out.push(Gate::cx(a, b));
    out.push(u1(-lambda / 2.0, b));
    out.push(Gate::cx(a, b));
    out.push(u1(lambda / 2.0, b));
}

/// A 4×4 unitary on `(q0, q1)` (q0 is the low index bit) as a `{u3, cx}` sequence, exact up
/// to a global phase.
///
/// Givens rotations between Gray-code neighbours (`0, 1, 3, 2`) reduce the matrix to a
/// diagonal; each rotation touches two basis states that differ in one bit and is
/// therefore a controlled single-qubit gate. The diagonal becomes two phase gates and a
/// controlled phase.
pub fn two_qubit_to_native(u: &Matrix, q0: usize, q1: usize) -> Vec<Gate> {
    const GRAY: [usize; 4] = [0, 1, 3, 2];
    let mut w = u.clone();
    // (row_a, row_b, G) with G acting on the (row_a, row_b) amplitude pair
    let mut rotations: Vec<(usize, usize, Matrix)> = Vec::new();
    #[allow(clippy::needless_range_loop)]
    for col_pos in 0..3 {
        let col = GRAY[col_pos];
        for row_pos in (col_pos + 1..4).rev() {
            let (ra, rb) = (GRAY[row_pos - 1], GRAY[row_pos]);
            let (x, y) = (w[(ra, col)], w[(rb, col)]);
            if y.norm() < 1e-15 {
                continue;
            }
            let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
            let g = Matrix::from_row_slice(2, 2, &[x.conj() / r, y.conj() / r, -y / r, x / r]);
            for cc in 0..4 {
                let (va, vb) = (w[(ra, cc)], w[(rb, cc)]);
                w[(ra, cc)] = g[(0, 0)] * va + g[(0, 1)] * vb;
                w[(rb, cc)] = g[(1, 0)] * va + g[(1, 1)] * vb;
            }
            rotations.push((ra, rb, g));
        }
    }

    let mut out = Vec::new();
    // U = G_1† … G_m† D, so D runs first and G_1† last.
    let phase: Vec<f64> = (0..4).map(|i| w[(i, i)].arg()).collect();
    out.push(u1(phase[1] - phase[0], q0));
    out.push(u1(phase[2] - phase[0], q1));
    cp_native(phase[3] - phase[2] - phase[1] + phase[0], q0, q1, &mut out);

    let qubit = [q0, q1];
    for (ra, rb, g) in rotations.into_iter().rev() {
        let v = g.adjoint();
        let bit = (ra ^ rb).trailing_zeros() as usize;
        let other = 1 - bit;
        let control_value = (ra >> other) & 1;
        // orient v as (|bit=0⟩, |bit=1⟩)
        let v = if (ra >> bit) & 1 == 0 {
            v
        } else {
            Matrix::from_row_slice(2, 2, &[v[(1, 1)], v[(1, 0)], v[(0, 1)], v[(0, 0)]])
        };
        let (c, t) = (qubit[other], qubit[bit]);
        if control_value == 0 {
            out.push(x_native(c));
        }
        controlled_u_native(&v, c, t, &mut out);
        if control_value == 0 {
            out.push(x_native(c));
        }
    }
    out
}

/// Replaces every SU4 gate by its `{u3, cx}` sequence.
pub fn su4_decompose(c: &Circuit) -> Circuit {
    let mut out = Circuit {
        n_qubits: c.n_qubits,
        gates: Vec::with_capacity(c.gates.len()),
        metadata: c.metadata.clone(),
    };
    for g in &c.gates {
        match &g.kind {
            GateKind::Su4(m) => out.gates.extend(two_qubit_to_native(m, g.targets[0], g.targets[1])),
            _ => out.gates.push(g.clone()),
        }
    }
    out
}

fn without(pool: &[usize], used: &[usize]) -> Vec<usize> {
    pool.iter().copied().filter(|q| !used.contains(q)).collect()
}

fn with(pool: &[usize], extra: usize) -> Vec<usize> {
    let mut v = pool.to_vec();
    v.push(extra);
    v
}

fn v_chain(controls: &[usize], target: usize, anc: &[usize], out: &mut Vec<Gate>) {
    let k = controls.len();
    let top = Gate::ccx(controls[k - 1], anc[k - 3], target);
    let step = |i: usize| Gate::ccx(controls[i], anc[i - 2], anc[i - 1]);
    for _ in 0..2 {
        out.push(top.clone());
        out.extend((2..k - 1).rev().map(step));
        out.push(Gate::ccx(controls[0], controls[1], anc[0]));
        out.extend((2..k - 1).map(step));
    }
}

/// Multi-controlled X on `target`; `free` lists qubits that may be borrowed.
pub fn mcx_gates(controls: &[usize], target: usize, free: &[usize]) -> Vec<Gate> {
    let mut out = Vec::new();
    push_mcx(controls, target, free, &mut out);
    out
}

fn push_mcx(controls: &[usize], target: usize, free: &[usize], out: &mut Vec<Gate>) {
    let k = controls.len();
    match k {
        0 => out.push(Gate::x(target)),
        1 => out.push(Gate::cx(controls[0], target)),
        2 => out.push(Gate::ccx(controls[0], controls[1], target)),
        _ if free.len() >= k - 2 => v_chain(controls, target, &free[..k - 2], out),
        _ if !free.is_empty() => {
            let anc = free[0];
            let all: Vec<usize> = controls.iter().copied().chain([target]).chain(free.iter().copied()).collect();
            let half = k.div_ceil(2);
            let first = &controls[..half];
            let second: Vec<usize> = controls[half..].iter().copied().chain([anc]).collect();
            let free_first = without(&all, &with(first, anc));
            let free_second = without(&all, &with(&second, target));
            for _ in 0..2 {
                push_mcx(first, anc, &free_first, out);
                push_mcx(&second, target, &free_second, out);
            }
        }
        _ => {
            out.push(Gate::h(target));
            push_mcp(PI, controls, target, free, out);
            out.push(Gate::h(target));
        }
    }
}

/// Multi-controlled phase `diag(1, …, 1, e^{iθ})` over `controls ∪ {target}`.
pub fn mcp_gates(theta: f64, controls: &[usize], target: usize, free: &[usize]) -> Vec<Gate> {
    let mut out = Vec::new();
    push_mcp(theta, controls, target, free, &mut out);
    out
}

fn push_mcp(theta: f64, controls: &[usize], target: usize, free: &[usize], out: &mut Vec<Gate>) {
    match controls.len() {
        0 => out.push(Gate::single(GateKind::P(theta), target)),
        1 => out.push(Gate::cp(theta, controls[0], target)),
        k => {
            let last = controls[k - 1];
            let rest = &controls[..k - 1];
            let borrow_target = with(free, target);
            out.push(Gate::cp(theta / 2.0, last, target));
            push_mcx(rest, last, &borrow_target, out);
            out.push(Gate::cp(-theta / 2.0, last, target));
            push_mcx(rest, last, &borrow_target, out);
            push_mcp(theta / 2.0, rest, target, &with(free, last), out);
        }
    }
}

/// Rewrites MCX/MCZ gates into X, CX, CCX, H and (controlled) phase gates, borrowing the
/// circuit's idle qubits.
pub fn decompose_multi_controlled(c: &Circuit) -> Circuit {
    let mut out = Circuit {
        n_qubits: c.n_qubits,
        gates: Vec::with_capacity(c.gates.len()),
        metadata: c.metadata.clone(),
    };
    let all: Vec<usize> = (0..c.n_qubits).collect();
    for g in &c.gates {
        match g.kind {
            GateKind::Mcx => {
                let free = without(&all, &g.qubits().collect::<Vec<_>>());
                push_mcx(&g.controls, g.targets[0], &free, &mut out.gates);
            }
            GateKind::Mcz => match g.controls.len() {
                0 => out.gates.push(Gate::single(GateKind::Z, g.targets[0])),
                1 => out.gates.push(Gate::cz(g.controls[0], g.targets[0])),
                _ => {
                    let free = without(&all, &g.qubits().collect::<Vec<_>>());
                    push_mcp(PI, &g.controls, g.targets[0], &free, &mut out.gates);
                }
            },
            _ => out.gates.push(g.clone()),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::u3_matrix;
    use crate::linalg::max_abs_diff;

    /// Classical simulation of an X/CX/CCX-only gate list on a bit string.
    fn run_classical(gates: &[Gate], mut bits: usize) -> usize {
        for g in gates {
            let fire = g.controls.iter().all(|&c| (bits >> c) & 1 == 1);
            match g.kind {
                GateKind::X | GateKind::Cx | GateKind::Ccx if fire => bits ^= 1 << g.targets[0],
                GateKind::X | GateKind::Cx | GateKind::Ccx => {}
                ref other => panic!("unexpected {}", other.name()),
            }
        }
        bits
    }

    #[test]
    fn v_chain_truth_table_with_dirty_ancillas() {
        for k in 3..=6 {
            let n = 2 * k - 1;
            let controls: Vec<usize> = (0..k).collect();
            let target = k;
            let free: Vec<usize> = (k + 1..n).collect();
            let gates = mcx_gates(&controls, target, &free);
            assert_eq!(gates.len(), 4 * (k - 2));
            for x in 0..(1usize << n) {
                let all_on = controls.iter().all(|&c| (x >> c) & 1 == 1);
                let expect = if all_on { x ^ (1 << target) } else { x };
                assert_eq!(run_classical(&gates, x), expect, "k={k} x={x:b}");
            }
        }
    }

    #[test]
    fn one_borrowed_qubit_truth_table() {
        for k in 3..=7 {
            let n = k + 2;
            let controls: Vec<usize> = (0..k).collect();
            let gates = mcx_gates(&controls, k, &[k + 1]);
            for x in 0..(1usize << n) {
                let expect = if x & ((1 << k) - 1) == (1 << k) - 1 { x ^ (1 << k) } else { x };
                assert_eq!(run_classical(&gates, x), expect, "k={k} x={x:b}");
            }
        }
    }

    #[test]
    fn zyz_roundtrip() {
        for &(t, p, l) in &[(0.3, 1.2, -0.7), (0.0, 0.0, 0.4), (std::f64::consts::PI, 0.5, 0.1), (2.0, -3.0, 3.0)] {
            let m = u3_matrix(t, p, l) * Complex64::from_polar(1.0, 0.37);
            let z = zyz_decompose(&m);
            let rebuilt = rz(z.beta) * ry(z.gamma) * rz(z.delta) * Complex64::from_polar(1.0, z.alpha);
            assert!(max_abs_diff(&rebuilt, &m) < 1e-12);
            let (th, ph, la, phase) = z.to_u3();
            let via_u3 = u3_matrix(th, ph, la) * Complex64::from_polar(1.0, phase);
            assert!(max_abs_diff(&via_u3, &m) < 1e-12);
        }
    }
}
