//! In-place gate kernels over a little-endian amplitude slice.
//!
//! Every kernel visits independent amplitude groups; when `par` is set, blocks of the
//! slice are handed to rayon. Each amplitude is computed by the same arithmetic either
//! way, so results do not depend on the degree of parallelism.

use num_complex::{Complex, Complex64};
use rayon::prelude::*;

use crate::state::Scalar;

/// Below this many amplitudes kernels stay sequential.
pub(crate) const PAR_MIN_LEN: usize = 1 << 14;

pub(crate) type M2 = [[Complex64; 2]; 2];

/// Splits `amps` into independent blocks of `block` amplitudes and runs `f(block_start, block)`.
#[inline]
fn for_blocks<T: Scalar, F>(amps: &mut [Complex<T>], block: usize, par: bool, f: F)
where
    F: Fn(usize, &mut [Complex<T>]) + Sync + Send,
{
    if par && amps.len() >= PAR_MIN_LEN && amps.len() / block >= 2 {
        amps.par_chunks_mut(block).enumerate().for_each(|(i, b)| f(i * block, b));
    } else {
        amps.chunks_mut(block).enumerate().for_each(|(i, b)| f(i * block, b));
    }
}

/// Pair kernel: for every index pair differing only in bit `target`, calls `f(lo_index, a_lo, a_hi)`.
/// When the target is high enough that there are few blocks, the halves are split further
/// so parallel runs still have work to spread.
#[inline]
fn for_pairs<T: Scalar, F>(amps: &mut [Complex<T>], target: usize, par: bool, f: F)
where
    F: Fn(usize, &mut Complex<T>, &mut Complex<T>) + Sync + Send,
{
    let stride = 1usize << target;
    let block = stride << 1;
    let nblocks = amps.len() / block;
    if par && amps.len() >= PAR_MIN_LEN && nblocks < 64 {
        let piece = (stride / 64).max(1024).min(stride);
        for (bi, b) in amps.chunks_mut(block).enumerate() {
            let base = bi * block;
            let (lo, hi) = b.split_at_mut(stride);
            lo.par_chunks_mut(piece)
                .zip(hi.par_chunks_mut(piece))
                .enumerate()
                .for_each(|(pi, (l, h))| {
                    let off = base + pi * piece;
                    for (j, (a, b)) in l.iter_mut().zip(h.iter_mut()).enumerate() {
                        f(off + j, a, b);
                    }
                });
        }
    } else {
        for_blocks(amps, block, par, |base, b| {
            let (lo, hi) = b.split_at_mut(stride);
            for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                f(base + j, a, b);
            }
        });
    }
}

#[inline(always)]
fn mul2<T: Scalar>(m: &M2, a: &mut Complex<T>, b: &mut Complex<T>) {
    let x = T::widen(*a);
    let y = T::widen(*b);
    *a = T::narrow(m[0][0] * x + m[0][1] * y);
    *b = T::narrow(m[1][0] * x + m[1][1] * y);
}

pub(crate) fn apply_1q<T: Scalar>(amps: &mut [Complex<T>], m: &M2, target: usize, par: bool) {
    for_pairs(amps, target, par, |_, a, b| mul2(m, a, b));
}

/// `diag(d0, d1)` on `target`.
pub(crate) fn apply_diag_1q<T: Scalar>(amps: &mut [Complex<T>], d0: Complex64, d1: Complex64, target: usize, par: bool) {
    let one = Complex64::new(1.0, 0.0);
    for_pairs(amps, target, par, |_, a, b| {
        if d0 != one {
            *a = T::narrow(d0 * T::widen(*a));
        }
        *b = T::narrow(d1 * T::widen(*b));
    });
}

pub(crate) fn apply_controlled<T: Scalar>(amps: &mut [Complex<T>], m: &M2, control_mask: usize, target: usize, par: bool) {
    for_pairs(amps, target, par, |i, a, b| {
        if i & control_mask == control_mask {
            mul2(m, a, b);
        }
    });
}

/// Controlled X: a pure permutation of amplitudes.
pub(crate) fn apply_controlled_x<T: Scalar>(amps: &mut [Complex<T>], control_mask: usize, target: usize, par: bool) {
    for_pairs(amps, target, par, |i, a, b| {
        if i & control_mask == control_mask {
            std::mem::swap(a, b);
        }
    });
}

/// Multiplies every amplitude whose bits in `mask` are all set by `phase`.
pub(crate) fn apply_phase_mask<T: Scalar>(amps: &mut [Complex<T>], mask: usize, phase: Complex64, par: bool) {
    let top = usize::BITS as usize - 1 - mask.leading_zeros() as usize;
    let block = (1usize << (top + 1)).min(amps.len());
    for_blocks(amps, block, par, |base, b| {
        for (j, a) in b.iter_mut().enumerate() {
            if (base + j) & mask == mask {
                *a = T::narrow(phase * T::widen(*a));
            }
        }
    });
}

pub(crate) fn apply_swap<T: Scalar>(amps: &mut [Complex<T>], q0: usize, q1: usize, par: bool) {
    let (lo, hi) = if q0 < q1 { (q0, q1) } else { (q1, q0) };
    let (bl, bh) = (1usize << lo, 1usize << hi);
    let block = bh << 1;
    for_blocks(amps, block, par, |_, b| {
        let (l, h) = b.split_at_mut(bh);
        for j in 0..bh {
            if j & bl != 0 {
                std::mem::swap(&mut l[j], &mut h[j ^ bl]);
            }
        }
    });
}

/// Index offsets of the `2^k` amplitudes of a group, local bit `i` ↔ qubit `qubits[i]`.
fn offsets(qubits: &[usize]) -> Vec<usize> {
    (0..1usize << qubits.len())
        .map(|j| qubits.iter().enumerate().fold(0, |acc, (i, &q)| acc | (((j >> i) & 1) << q)))
        .collect()
}

/// Dense `2^k × 2^k` kernel (row-major `m`). `D` is the matrix dimension when known at
/// compile time (2-, 3-qubit specializations); `D = 0` selects the heap-allocated path.
pub(crate) fn apply_dense<T: Scalar, const D: usize>(
    amps: &mut [Complex<T>],
    m: &[Complex64],
    qubits: &[usize],
    par: bool,
) {
    let dim = 1usize << qubits.len();
    debug_assert!(D == 0 || D == dim);
    debug_assert_eq!(m.len(), dim * dim);
    let offs = offsets(qubits);
    let mask = offs[dim - 1];
    let top = *qubits.iter().max().expect("at least one qubit");
    let block = 1usize << (top + 1);
    for_blocks(amps, block, par, |_, b| {
        let mut inp = [Complex64::default(); 8];
        let mut heap = if D == 0 { vec![Complex64::default(); dim] } else { Vec::new() };
        for base in 0..b.len() {
            if base & mask != 0 {
                continue;
            }
            let v: &mut [Complex64] = if D == 0 { &mut heap } else { &mut inp[..dim] };
            for (slot, &o) in v.iter_mut().zip(&offs) {
                *slot = T::widen(b[base + o]);
            }
            for (r, &o) in offs.iter().enumerate() {
                let row = &m[r * dim..(r + 1) * dim];
                let mut acc = Complex64::default();
                for (x, y) in row.iter().zip(v.iter()) {
                    acc += x * y;
                }
                b[base + o] = T::narrow(acc);
            }
        }
    });
}
