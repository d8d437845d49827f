//! Small dense complex matrix helpers shared across the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(p: usize) -> CMatrix {
    CMatrix::identity(p, p)
}

pub fn zeros(p: usize) -> CMatrix {
    CMatrix::zeros(p, p)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    frobenius(&(a - b))
}

pub fn inverse(m: &CMatrix) -> Result<CMatrix> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Input("matrix is singular".into()))
}

/// Ratio of largest to smallest singular value; infinite for singular input.
pub fn condition_number(m: &CMatrix) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0_f64, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    if m.nrows() == 1 {
        return vec![m[(0, 0)]];
    }
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Distance between two eigenvalue multisets: greedy nearest matching,
/// returning the largest matched gap.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut remaining: Vec<Complex64> = b.to_vec();
    let mut worst = 0.0_f64;
    for x in a {
        let (idx, d) = remaining
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm()))
            .fold(
                (0, f64::INFINITY),
                |acc, v| if v.1 < acc.1 { v } else { acc },
            );
        worst = worst.max(d);
        remaining.swap_remove(idx);
    }
    worst
}

/// Flatten a matrix row-major into `out`.
pub fn push_row_major(m: &CMatrix, out: &mut Vec<Complex64>) {
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
}

pub fn from_row_major(p: usize, data: &[Complex64]) -> CMatrix {
    CMatrix::from_row_slice(p, p, &data[..p * p])
}
