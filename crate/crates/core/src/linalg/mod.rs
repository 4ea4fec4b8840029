//! Small dense complex linear algebra.
//!
//! Everything here is sized for the handful of 2- and 4-dimensional objects a
//! two-player qubit game needs. Storage is row-major and tensor products put
//! player 1's factor first, so `kron(a, b)` places `a(i, j) * b(k, l)` at
//! `(i * b.rows + k, j * b.cols + l)`.

mod eigen;

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::fmt;

pub use eigen::{hermitian_eigen, HermitianEigen};
pub use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default tolerance for structural checks (unitarity, hermiticity, traces).
pub const STRUCTURAL_TOL: f64 = 1e-12;
/// Default tolerance for comparing dollar amounts.
pub const PAYOFF_TOL: f64 = 1e-6;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn check_finite(values: &[C64], what: &str) -> Result<()> {
    if values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} has a non-finite entry"
        )))
    }
}

/// A state vector of dimension `dim >= 1`.
#[derive(Clone, PartialEq)]
pub struct Ket {
    amp: Vec<C64>,
}

impl Ket {
    pub fn new(amp: Vec<C64>) -> Result<Self> {
        if amp.is_empty() {
            return Err(Error::InvalidInput("ket must have dimension >= 1".into()));
        }
        check_finite(&amp, "ket")?;
        Ok(Ket { amp })
    }

    pub fn from_real(amp: &[f64]) -> Result<Self> {
        Ket::new(amp.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidInput(format!(
                "basis index {index} out of range for dimension {dim}"
            )));
        }
        let mut amp = vec![ZERO; dim];
        amp[index] = ONE;
        Ok(Ket { amp })
    }

    pub fn dim(&self) -> usize {
        self.amp.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Rescaled copy with unit norm. Fails on the zero vector.
    pub fn normalized(&self) -> Result<Ket> {
        let n = self.norm_sqr().sqrt();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidInput("cannot normalize the zero ket".into()));
        }
        Ok(Ket {
            amp: self.amp.iter().map(|z| z / n).collect(),
        })
    }

    pub fn kron(&self, other: &Ket) -> Ket {
        let amp = self
            .amp
            .iter()
            .flat_map(|a| other.amp.iter().map(move |b| a * b))
            .collect();
        Ket { amp }
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &Ket) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::dims(
                "inner",
                format!("{} vs {}", self.dim(), other.dim()),
            ));
        }
        Ok(self
            .amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn max_abs_diff(&self, other: &Ket) -> f64 {
        assert_eq!(self.dim(), other.dim(), "ket dimension mismatch");
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for Ket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.amp.iter()).finish()
    }
}

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidInput(
                "matrix dimensions must be positive".into(),
            ));
        }
        if data.len() != rows * cols {
            return Err(Error::dims(
                "from_row_major",
                format!("{} entries for a {rows}x{cols} matrix", data.len()),
            ));
        }
        check_finite(&data, "matrix")?;
        Ok(ComplexMatrix { rows, cols, data })
    }

    /// Builds a matrix from nested rows; all rows must share a length.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(Error::dims(
                "from_rows",
                format!(
                    "row {bad} has length {}, expected {n_cols}",
                    rows[bad].len()
                ),
            ));
        }
        Self::from_row_major(n_rows, n_cols, rows.into_iter().flatten().collect())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn diagonal(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: C64) {
        self.data[r * self.cols + c] = value;
    }

    pub fn row_vecs(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.cols).map(<[C64]>::to_vec).collect()
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != other.rows {
            return Err(Error::dims(
                "mat_mul",
                format!(
                    "{}x{} times {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn kron(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = Self::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.data[(i * other.rows + k) * cols + j * other.cols + l] =
                            a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Result<C64> {
        if !self.is_square() {
            return Err(Error::dims(
                "trace",
                format!("{}x{} is not square", self.rows, self.cols),
            ));
        }
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    /// `|k⟩⟨b|`
    pub fn outer(k: &Ket, b: &Ket) -> ComplexMatrix {
        let rows = k.dim();
        let cols = b.dim();
        let data = k
            .amplitudes()
            .iter()
            .flat_map(|x| b.amplitudes().iter().map(move |y| x * y.conj()))
            .collect();
        ComplexMatrix { rows, cols, data }
    }

    pub fn scale(&self, s: C64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> ComplexMatrix {
        self.scale(C64::new(s, 0.0))
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &ComplexMatrix,
        op: &'static str,
        f: impl Fn(C64, C64) -> C64,
    ) -> Result<ComplexMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::dims(
                op,
                format!(
                    "{}x{} vs {}x{}",
                    self.rows, self.cols, other.rows, other.cols
                ),
            ));
        }
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Largest entrywise modulus of `self - other`. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert!(
            self.rows == other.rows && self.cols == other.cols,
            "max_abs_diff on {}x{} vs {}x{}",
            self.rows,
            self.cols,
            other.rows,
            other.cols
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, k: &Ket) -> Result<Ket> {
        if self.cols != k.dim() {
            return Err(Error::dims(
                "apply",
                format!("{}x{} on ket of dim {}", self.rows, self.cols, k.dim()),
            ));
        }
        let amp = self
            .data
            .chunks(self.cols)
            .map(|row| row.iter().zip(k.amplitudes()).map(|(a, b)| a * b).sum())
            .collect();
        Ok(Ket { amp })
    }

    /// Max entrywise deviation of `A†A` from the identity; `None` if not square.
    pub fn unitary_deviation(&self) -> Option<f64> {
        if !self.is_square() {
            return None;
        }
        let gram = self.adjoint().matmul(self).ok()?;
        Some(gram.max_abs_diff(&Self::identity(self.rows)))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitary_deviation().is_some_and(|d| d <= tol)
    }

    /// Max entrywise deviation of `A` from `A†`; `None` if not square.
    pub fn hermitian_deviation(&self) -> Option<f64> {
        self.is_square().then(|| self.max_abs_diff(&self.adjoint()))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation().is_some_and(|d| d <= tol)
    }

    /// Orthonormalizes the columns (modified Gram-Schmidt, two passes).
    /// Returns `None` for non-square or numerically rank-deficient input.
    pub fn orthonormalize_columns(&self) -> Option<ComplexMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        for j in 0..n {
            let mut v: Vec<C64> = (0..n).map(|i| self.get(i, j)).collect();
            let original = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for _ in 0..2 {
                for u in &cols {
                    let proj: C64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
                    for (x, y) in v.iter_mut().zip(u) {
                        *x -= proj * y;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm.is_nan() || norm <= 1e-8 * original.max(f64::MIN_POSITIVE) {
                return None;
            }
            v.iter_mut().for_each(|z| *z /= norm);
            cols.push(v);
        }
        let mut out = Self::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            for (i, &z) in col.iter().enumerate() {
                out.set(i, j, z);
            }
        }
        Some(out)
    }

    /// Unitary discrete Fourier transform: entry `(s, d) = e^{2πi·s·d/m} / √m`.
    pub fn dft(m: usize) -> Result<ComplexMatrix> {
        if m == 0 {
            return Err(Error::InvalidInput("DFT dimension must be >= 1".into()));
        }
        let norm = (1.0 / m as f64).sqrt();
        let mut out = Self::zeros(m, m);
        for s in 0..m {
            for d in 0..m {
                // reduce s·d mod m first so the phase argument stays small
                let k = (s * d) % m;
                let phase = if (4 * k).is_multiple_of(m) {
                    // quarter turns are exact
                    [ONE, C64::new(0.0, 1.0), -ONE, C64::new(0.0, -1.0)][4 * k / m]
                } else {
                    C64::from_polar(1.0, TAU * k as f64 / m as f64)
                };
                out.data[s * m + d] = phase * norm;
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for row in self.data.chunks(self.cols) {
            write!(f, "  ")?;
            for z in row {
                write!(f, "{:>+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Hadamard transform `(1/√2)[[1, 1], [1, -1]]`.
pub fn hadamard() -> ComplexMatrix {
    let h = C64::new(FRAC_1_SQRT_2, 0.0);
    ComplexMatrix {
        rows: 2,
        cols: 2,
        data: vec![h, h, h, -h],
    }
}

/// Negation (bit flip): `N|0⟩ = |1⟩`, `N|1⟩ = |0⟩`.
pub fn negation() -> ComplexMatrix {
    ComplexMatrix {
        rows: 2,
        cols: 2,
        data: vec![ZERO, ONE, ONE, ZERO],
    }
}
