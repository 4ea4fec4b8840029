//! Reference computations shared by the integration tests. Nothing here goes
//! through the library's matrix or state types.

#![allow(dead_code, clippy::needless_range_loop)]

use num_complex::Complex64 as C;

pub type Mat = Vec<Vec<C>>;

pub const PAYOFF: [[f64; 2]; 2] = [[1000.0, 1_001_000.0], [0.0, 1_000_000.0]];

pub fn c(re: f64) -> C {
    C::new(re, 0.0)
}

pub fn eye(n: usize) -> Mat {
    (0..n)
        .map(|i| (0..n).map(|j| c(if i == j { 1.0 } else { 0.0 })).collect())
        .collect()
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    let (n, k, m) = (a.len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0); m]; n];
    for i in 0..n {
        for j in 0..m {
            for l in 0..k {
                out[i][j] += a[i][l] * b[l][j];
            }
        }
    }
    out
}

pub fn dagger(a: &Mat) -> Mat {
    (0..a[0].len())
        .map(|j| (0..a.len()).map(|i| a[i][j].conj()).collect())
        .collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (ar, ac, br, bc) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0); ac * bc]; ar * br];
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[i * br + k][j * bc + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn lin(terms: &[(f64, &Mat)]) -> Mat {
    let n = terms[0].1.len();
    let m = terms[0].1[0].len();
    let mut out = vec![vec![c(0.0); m]; n];
    for (w, t) in terms {
        for i in 0..n {
            for j in 0..m {
                out[i][j] += t[i][j] * *w;
            }
        }
    }
    out
}

pub fn conj_by(u: &Mat, rho: &Mat) -> Mat {
    mul(&mul(u, rho), &dagger(u))
}

pub fn f2() -> Mat {
    let h = 0.5f64.sqrt();
    vec![vec![c(h), c(h)], vec![c(h), c(-h)]]
}

pub fn n2() -> Mat {
    vec![vec![c(0.0), c(1.0)], vec![c(1.0), c(0.0)]]
}

pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn from_lib(m: &qnewcomb_core::ComplexMatrix) -> Mat {
    m.row_vecs()
}

/// Brute-force protocol chain on explicit 4×4 matrices. Returns the initial
/// and final joint states and `Σ M_rs ρ_(rs),(rs)` of the final state.
pub fn chain_oracle(v: f64, w: f64) -> (Mat, Mat, f64) {
    let mut rho0 = vec![vec![c(0.0); 4]; 4];
    rho0[0][0] = c(v);
    rho0[3][3] = c(1.0 - v);
    let i2 = eye(2);
    let f = kron(&f2(), &i2);
    let n = kron(&n2(), &i2);
    let rho1 = conj_by(&f, &rho0);
    let rho2 = lin(&[(w, &conj_by(&n, &rho1)), (1.0 - w, &rho1)]);
    let rho3 = conj_by(&f, &rho2);
    let payoff = (0..4).map(|k| PAYOFF[k / 2][k % 2] * rho3[k][k].re).sum();
    (rho0, rho3, payoff)
}

/// Payoff of the product strategy pair from the two Born distributions.
pub fn product_payoff(p1: [f64; 2], p2: [f64; 2]) -> f64 {
    let mut total = 0.0;
    for r in 0..2 {
        for s in 0..2 {
            total += PAYOFF[r][s] * p1[r] * p2[s];
        }
    }
    total
}

fn born(a: C, b: C) -> [f64; 2] {
    let n = a.norm_sqr() + b.norm_sqr();
    [a.norm_sqr() / n, b.norm_sqr() / n]
}

/// Market payoff for human ket `a|0⟩ + b|1⟩` against Omega's `(a+b, a−b)`.
pub fn market_oracle_ab(a: C, b: C) -> f64 {
    product_payoff(born(a, b), born(a + b, a - b))
}

pub fn market_oracle_z(z: Option<C>) -> f64 {
    match z {
        Some(z) => market_oracle_ab(c(1.0), z),
        None => market_oracle_ab(c(0.0), c(1.0)),
    }
}

/// Chordal distance on the Riemann sphere, `None` standing for infinity.
pub fn chordal(z: Option<C>, w: Option<C>) -> f64 {
    match (z, w) {
        (Some(z), Some(w)) => (z - w).norm() / ((1.0 + z.norm_sqr()) * (1.0 + w.norm_sqr())).sqrt(),
        (Some(z), None) | (None, Some(z)) => 1.0 / (1.0 + z.norm_sqr()).sqrt(),
        (None, None) => 0.0,
    }
}

/// Cholesky of `a + shift·I`; success means every eigenvalue of the
/// Hermitian part of `a` is at least `−shift` (up to rounding).
pub fn psd_with_shift(a: &Mat, shift: f64) -> bool {
    let n = a.len();
    let mut l = vec![vec![c(0.0); n]; n];
    for j in 0..n {
        let mut d = a[j][j].re + shift;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        if d.is_nan() || d <= 0.0 {
            return false;
        }
        let d = d.sqrt();
        l[j][j] = c(d);
        for i in j + 1..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / d;
        }
    }
    true
}

pub fn hermitian_dev(a: &Mat) -> f64 {
    max_diff(a, &dagger(a))
}

pub fn trace(a: &Mat) -> C {
    (0..a.len()).map(|i| a[i][i]).sum()
}
