//! Seeded generators for random kets, unitaries and density operators.

use rand::Rng;

use crate::error::Result;
use crate::game::GameState;
use crate::linalg::{ComplexMatrix, Ket, C64};

fn random_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Normalized ket with uniformly drawn complex amplitudes.
pub fn random_ket<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Ket {
    loop {
        let k = Ket::new((0..dim).map(|_| random_c64(rng)).collect()).expect("finite amplitudes");
        if k.norm_sqr() > 1e-6 {
            return k.normalized().expect("nonzero ket");
        }
    }
}

/// Unitary from Gram-Schmidt orthonormalization of random columns.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> ComplexMatrix {
    loop {
        let data = (0..dim * dim).map(|_| random_c64(rng)).collect();
        let m = ComplexMatrix::from_row_major(dim, dim, data).expect("finite entries");
        if let Some(u) = m.orthonormalize_columns() {
            return u;
        }
    }
}

/// Mixed state `Σ_k p_k |ψ_k⟩⟨ψ_k|` with `rank` random components.
pub fn random_density<R: Rng + ?Sized>(
    rng: &mut R,
    m1: usize,
    m2: usize,
    rank: usize,
) -> Result<GameState> {
    let n = m1 * m2;
    let weights: Vec<f64> = (0..rank.max(1))
        .map(|_| rng.random_range(0.05..1.0))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut rho = ComplexMatrix::zeros(n, n);
    for w in weights {
        let k = random_ket(rng, n);
        rho = rho.add(&ComplexMatrix::outer(&k, &k).scale_real(w / total))?;
    }
    // restore exact hermiticity lost to rounding in the sum
    let rho = rho.add(&rho.adjoint())?.scale_real(0.5);
    GameState::new(m1, m2, rho)
}

/// Product of two random pure strategies.
pub fn random_product_state<R: Rng + ?Sized>(
    rng: &mut R,
    m1: usize,
    m2: usize,
) -> Result<(Ket, Ket, GameState)> {
    let a = random_ket(rng, m1);
    let b = random_ket(rng, m2);
    let state = GameState::product(&a, &b)?;
    Ok((a, b, state))
}
