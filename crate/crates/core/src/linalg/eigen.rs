//! Cyclic Jacobi eigensolver for small complex Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a[p][q]` with a
//! diagonal unitary, then annihilates the now-real pivot with a plane rotation.
//! The combined 2x2 unitary acting on columns `(p, q)` is
//!
//! ```text
//! J = [[ c,             s           ],
//!      [ -s·e^{-iφ},    c·e^{-iφ}   ]]      with a[p][q] = |a[p][q]|·e^{iφ}
//! ```
//!
//! and `A ← J† A J`, `V ← V J`. Sweeps repeat until the off-diagonal Frobenius
//! mass drops below `1e-30` of the total (or it is exactly zero).

use super::{ComplexMatrix, C64};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;
const MAX_DIM: usize = 64;

/// Eigen-decomposition `A = V·diag(values)·V†`, values ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: ComplexMatrix,
}

fn off_diagonal_mass(a: &[C64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j].norm_sqr();
            }
        }
    }
    s
}

/// Diagonalizes a Hermitian matrix of dimension at most 64.
///
/// The input is symmetrized as `(A + A†)/2` first, so callers should check
/// hermiticity themselves if it matters.
pub fn hermitian_eigen(matrix: &ComplexMatrix) -> Result<HermitianEigen> {
    if !matrix.is_square() {
        return Err(Error::dims(
            "hermitian_eigen",
            format!("{}x{} is not square", matrix.rows(), matrix.cols()),
        ));
    }
    let n = matrix.rows();
    if n > MAX_DIM {
        return Err(Error::InvalidInput(format!(
            "eigensolver supports dimension <= {MAX_DIM}, got {n}"
        )));
    }

    let mut a: Vec<C64> = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = (matrix.get(i, j) + matrix.get(j, i).conj()) * 0.5;
        }
    }
    let mut v = ComplexMatrix::identity(n);
    let total: f64 = a.iter().map(|z| z.norm_sqr()).sum();

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let off = off_diagonal_mass(&a, n);
        if off == 0.0 || off <= 1e-30 * total {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }
    if !converged {
        let off = off_diagonal_mass(&a, n);
        if off > 1e-24 * total {
            return Err(Error::Consistency(format!(
                "Jacobi eigensolver did not converge (off-diagonal mass {off:e})"
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for r in 0..n {
            vectors.set(r, dst, v.get(r, src));
        }
    }
    Ok(HermitianEigen { values, vectors })
}

fn rotate(a: &mut [C64], v: &mut ComplexMatrix, n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let phase = apq / mag;

    let theta = (aqq - app) / (2.0 * mag);
    let t = if theta.is_infinite() {
        0.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let j_pp = C64::new(c, 0.0);
    let j_pq = C64::new(s, 0.0);
    let j_qp = -phase.conj() * s;
    let j_qq = phase.conj() * c;

    // A ← A J (columns p, q)
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * j_pp + akq * j_qp;
        a[k * n + q] = akp * j_pq + akq * j_qq;
    }
    // A ← J† A (rows p, q)
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[q * n + k] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * j_pp + vkq * j_qp);
        v.set(k, q, vkp * j_pq + vkq * j_qq);
    }
}
