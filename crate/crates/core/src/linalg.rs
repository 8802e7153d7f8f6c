//! Dense complex matrix helpers shared by the gate library and the transpiler.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type Matrix = DMatrix<Complex64>;

pub fn identity(dim: usize) -> Matrix {
    Matrix::identity(dim, dim)
}

/// `max |M†M − I|` over all entries.
pub fn unitarity_error(m: &Matrix) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let prod = m.adjoint() * m;
    let mut worst = 0.0f64;
    for r in 0..prod.nrows() {
        for c in 0..prod.ncols() {
            let expect = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((prod[(r, c)] - Complex64::new(expect, 0.0)).norm());
        }
    }
    worst
}

/// Extracts bits of `index` at `positions` into a compact local index (position `i` → bit `i`).
#[inline]
pub fn gather_bits(index: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .fold(0, |acc, (i, &p)| acc | (((index >> p) & 1) << i))
}

/// Embeds `m`, acting on `operands` (local bit `i` is `operands[i]`), into the operator on
/// `space` (local bit `i` is `space[i]`). Every operand must appear in `space`.
pub fn embed(m: &Matrix, operands: &[usize], space: &[usize]) -> Matrix {
    let positions: Vec<usize> = operands
        .iter()
        .map(|q| space.iter().position(|s| s == q).expect("operand outside embedding space"))
        .collect();
    let operand_mask = positions.iter().fold(0usize, |acc, &p| acc | (1 << p));
    let dim = 1usize << space.len();
    Matrix::from_fn(dim, dim, |r, c| {
        if (r & !operand_mask) != (c & !operand_mask) {
            Complex64::new(0.0, 0.0)
        } else {
            m[(gather_bits(r, &positions), gather_bits(c, &positions))]
        }
    })
}

/// Full matrix of `u` (on `targets`) conditioned on every control being 1.
/// Local bit order is `targets` followed by `controls`.
pub fn controlled(u: &Matrix, n_controls: usize) -> Matrix {
    let t = u.nrows();
    let dim = t << n_controls;
    let mut full = identity(dim);
    let offset = dim - t;
    for r in 0..t {
        for c in 0..t {
            // Controls occupy the high local bits, so the active block is the last one.
            full[(offset + r, offset + c)] = u[(r, c)];
        }
    }
    full
}

pub fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
