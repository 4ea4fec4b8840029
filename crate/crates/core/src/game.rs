//! Two-player games in the density-operator picture.
//!
//! A [`GameState`] is a density operator on `H1 ⊗ H2`; joint basis state
//! `|r⟩|s⟩` sits at index `r·m2 + s`. Payoffs are carried by a diagonal
//! [`PayoffObservable`] and the expected payoff is `Tr(𝓜𝓦)`. Players act only
//! on their own factor, either with a single unitary or with a probabilistic
//! mixture of unitaries ([`MixedTactic`]).

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, ComplexMatrix, Ket, C64, STRUCTURAL_TOL};

/// Most negative eigenvalue tolerated in a density operator.
pub const PSD_TOL: f64 = 1e-10;
/// Largest imaginary part tolerated in `Tr(𝓜𝓦)`.
pub const PAYOFF_IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    One,
    Two,
}

impl Player {
    pub fn number(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }
}

impl TryFrom<u8> for Player {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            1 => Ok(Player::One),
            2 => Ok(Player::Two),
            other => Err(Error::InvalidInput(format!(
                "player must be 1 or 2, got {other}"
            ))),
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Dollar payoffs of player 1, rows indexed by player 1's strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    m1: usize,
    m2: usize,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let m1 = rows.len();
        let m2 = rows.first().map_or(0, Vec::len);
        if m1 < 2 || m2 < 2 {
            return Err(Error::InvalidInput(format!(
                "payoff matrix must be at least 2x2, got {m1}x{m2}"
            )));
        }
        if rows.iter().any(|r| r.len() != m2) {
            return Err(Error::dims("payoff_matrix", "ragged payoff rows"));
        }
        let entries: Vec<f64> = rows.into_iter().flatten().collect();
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("payoff entries must be finite".into()));
        }
        Ok(PayoffMatrix { m1, m2, entries })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.entries[r * self.m2 + s]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.m2).map(<[f64]>::to_vec).collect()
    }
}

/// Diagonal Hermitian operator with eigenvalue `M(r, s)` on `|r⟩|s⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffObservable {
    m1: usize,
    m2: usize,
    diag: Vec<f64>,
}

impl PayoffObservable {
    pub fn from_matrix(m: &PayoffMatrix) -> Self {
        PayoffObservable {
            m1: m.m1,
            m2: m.m2,
            diag: m.entries.clone(),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::diagonal(
            &self
                .diag
                .iter()
                .map(|&x| C64::new(x, 0.0))
                .collect::<Vec<_>>(),
        )
    }

    /// `Tr(𝓜𝓦)` in dollars.
    pub fn expected_payoff(&self, state: &GameState) -> Result<f64> {
        if state.dims() != self.dims() {
            return Err(Error::dims(
                "expected_payoff",
                format!("observable {:?} vs state {:?}", self.dims(), state.dims()),
            ));
        }
        let tr: C64 = self
            .diag
            .iter()
            .enumerate()
            .map(|(k, &m)| state.rho.get(k, k) * m)
            .sum();
        if tr.im.abs() > PAYOFF_IMAG_TOL {
            return Err(Error::Consistency(format!(
                "Tr(MW) has imaginary part {:e}",
                tr.im
            )));
        }
        Ok(tr.re)
    }
}

/// Shorthand for [`PayoffObservable::from_matrix`].
pub fn build_payoff_observable(m: &PayoffMatrix) -> PayoffObservable {
    PayoffObservable::from_matrix(m)
}

/// Probability of a joint classical outcome `(r, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub r: usize,
    pub s: usize,
    pub probability: f64,
}

/// Density operator of a two-player game.
#[derive(Clone, PartialEq)]
pub struct GameState {
    m1: usize,
    m2: usize,
    rho: ComplexMatrix,
}

impl fmt::Debug for GameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GameState({}x{}) {:?}", self.m1, self.m2, self.rho)
    }
}

impl GameState {
    /// Validates and wraps a density matrix.
    pub fn new(m1: usize, m2: usize, rho: ComplexMatrix) -> Result<Self> {
        let state = Self::unchecked(m1, m2, rho)?;
        state.validate().map_err(Error::InvalidInput)?;
        Ok(state)
    }

    fn unchecked(m1: usize, m2: usize, rho: ComplexMatrix) -> Result<Self> {
        if m1 == 0 || m2 == 0 {
            return Err(Error::InvalidInput(
                "player dimensions must be positive".into(),
            ));
        }
        let n = m1 * m2;
        if rho.rows() != n || rho.cols() != n {
            return Err(Error::dims(
                "game_state",
                format!("{}x{} matrix for {m1}x{m2} players", rho.rows(), rho.cols()),
            ));
        }
        Ok(GameState { m1, m2, rho })
    }

    /// Wraps a matrix produced by a channel. Invariant violations here are
    /// convention bugs, so they surface as consistency errors.
    fn from_channel(m1: usize, m2: usize, rho: ComplexMatrix) -> Result<Self> {
        let state = Self::unchecked(m1, m2, rho)?;
        state.validate().map_err(Error::Consistency)?;
        Ok(state)
    }

    /// Checks hermiticity, unit trace and positive semidefiniteness.
    pub fn validate(&self) -> std::result::Result<(), String> {
        self.validate_shape()?;
        let min = self.min_eigenvalue().map_err(|e| e.to_string())?;
        if min < -PSD_TOL {
            return Err(format!("state has negative eigenvalue {min:e}"));
        }
        Ok(())
    }

    fn validate_shape(&self) -> std::result::Result<(), String> {
        let herm = self.rho.hermitian_deviation().unwrap_or(f64::INFINITY);
        if herm > STRUCTURAL_TOL {
            return Err(format!("state is not Hermitian (deviation {herm:e})"));
        }
        let tr = self.rho.trace().map_err(|e| e.to_string())?;
        if (tr - C64::new(1.0, 0.0)).norm() > STRUCTURAL_TOL {
            return Err(format!("state trace is {tr}, expected 1"));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(hermitian_eigen(&self.rho)?.values[0])
    }

    /// `|ψ⟩⟨ψ|` for a normalized joint ket.
    ///
    /// A rank-one projector is positive semidefinite by construction, so only
    /// the shape, hermiticity and trace checks run here.
    pub fn pure(m1: usize, m2: usize, psi: &Ket) -> Result<Self> {
        if !psi.is_normalized(STRUCTURAL_TOL) {
            return Err(Error::InvalidInput(
                "pure state ket must be normalized".into(),
            ));
        }
        let state = Self::unchecked(m1, m2, ComplexMatrix::outer(psi, psi))?;
        state.validate_shape().map_err(Error::InvalidInput)?;
        Ok(state)
    }

    /// `|a⟩⟨a| ⊗ |b⟩⟨b|` for normalized per-player kets.
    pub fn product(a: &Ket, b: &Ket) -> Result<Self> {
        Self::pure(a.dim(), b.dim(), &a.kron(b))
    }

    /// `Σ w_k |r_k⟩|s_k⟩⟨r_k|⟨s_k|`: a classically correlated mixture.
    pub fn diagonal_mixture(m1: usize, m2: usize, terms: &[((usize, usize), f64)]) -> Result<Self> {
        let mut diag = vec![C64::new(0.0, 0.0); m1 * m2];
        for &((r, s), w) in terms {
            if r >= m1 || s >= m2 {
                return Err(Error::InvalidInput(format!(
                    "basis ({r}, {s}) out of range for {m1}x{m2}"
                )));
            }
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidInput(format!(
                    "mixture weight {w} not in [0, 1]"
                )));
            }
            diag[r * m2 + s] += w;
        }
        Self::new(m1, m2, ComplexMatrix::diagonal(&diag))
    }

    /// Maximally mixed state `I / (m1·m2)`.
    pub fn maximally_mixed(m1: usize, m2: usize) -> Result<Self> {
        let n = m1 * m2;
        Self::new(
            m1,
            m2,
            ComplexMatrix::identity(n).scale_real(1.0 / n as f64),
        )
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m1, self.m2)
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn player_dim(&self, player: Player) -> usize {
        match player {
            Player::One => self.m1,
            Player::Two => self.m2,
        }
    }

    /// `Tr ρ²`
    pub fn purity(&self) -> f64 {
        // Tr(ρρ) = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ
        self.rho.entries().iter().map(|z| z.norm_sqr()).sum()
    }

    /// Partial trace over player 2: the human's reduced matrix.
    pub fn reduced_player_one(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.m1, self.m1);
        for r in 0..self.m1 {
            for rp in 0..self.m1 {
                let v: C64 = (0..self.m2)
                    .map(|s| self.rho.get(r * self.m2 + s, rp * self.m2 + s))
                    .sum();
                out.set(r, rp, v);
            }
        }
        out
    }

    /// Partial trace over player 1.
    pub fn reduced_player_two(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.m2, self.m2);
        for s in 0..self.m2 {
            for sp in 0..self.m2 {
                let v: C64 = (0..self.m1)
                    .map(|r| self.rho.get(r * self.m2 + s, r * self.m2 + sp))
                    .sum();
                out.set(s, sp, v);
            }
        }
        out
    }

    /// Diagonal of `𝓦` read as joint outcome probabilities, in basis order.
    pub fn classical_outcome_distribution(&self) -> Result<Vec<Outcome>> {
        let out: Vec<Outcome> = (0..self.m1)
            .flat_map(|r| (0..self.m2).map(move |s| (r, s)))
            .map(|(r, s)| {
                let k = r * self.m2 + s;
                Outcome {
                    r,
                    s,
                    probability: self.rho.get(k, k).re,
                }
            })
            .collect();
        let total: f64 = out.iter().map(|o| o.probability).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::Consistency(format!(
                "outcome probabilities sum to {total}"
            )));
        }
        Ok(out)
    }

    fn embed(&self, player: Player, u: &ComplexMatrix) -> ComplexMatrix {
        match player {
            Player::One => u.kron(&ComplexMatrix::identity(self.m2)),
            Player::Two => ComplexMatrix::identity(self.m1).kron(u),
        }
    }

    fn check_tactic(&self, player: Player, u: &ComplexMatrix) -> Result<()> {
        let dim = self.player_dim(player);
        if u.rows() != dim || u.cols() != dim {
            return Err(Error::dims(
                "tactic",
                format!(
                    "{}x{} unitary for player {player} of dimension {dim}",
                    u.rows(),
                    u.cols()
                ),
            ));
        }
        let deviation = u.unitary_deviation().unwrap_or(f64::INFINITY);
        if deviation > STRUCTURAL_TOL {
            return Err(Error::NonUnitary { deviation });
        }
        Ok(())
    }

    fn conjugate_by(&self, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        op.matmul(&self.rho)?.matmul(&op.adjoint())
    }

    /// `(U⊗I) 𝓦 (U⊗I)†` for player 1, `(I⊗U) 𝓦 (I⊗U)†` for player 2.
    pub fn apply_pure_tactic(&self, player: Player, u: &ComplexMatrix) -> Result<GameState> {
        self.check_tactic(player, u)?;
        let rho = self.conjugate_by(&self.embed(player, u))?;
        Self::from_channel(self.m1, self.m2, rho)
    }

    /// `Σ_k p_k U_k 𝓦 U_k†` with each `U_k` embedded on the tactic's player.
    pub fn apply_mixed_tactic(&self, tactic: &MixedTactic) -> Result<GameState> {
        let n = self.m1 * self.m2;
        let mut acc = ComplexMatrix::zeros(n, n);
        for (p, u) in &tactic.branches {
            self.check_tactic(tactic.player, u)?;
            if *p == 0.0 {
                continue;
            }
            let term = self.conjugate_by(&self.embed(tactic.player, u))?;
            acc = acc.add(&term.scale_real(*p))?;
        }
        Self::from_channel(self.m1, self.m2, acc)
    }

    /// Convex combination `α·self + (1−α)·other`.
    pub fn mix(&self, other: &GameState, alpha: f64) -> Result<GameState> {
        if self.dims() != other.dims() {
            return Err(Error::dims("mix", "states of different dimensions"));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidInput(format!(
                "mixing weight {alpha} not in [0, 1]"
            )));
        }
        let rho = self
            .rho
            .scale_real(alpha)
            .add(&other.rho.scale_real(1.0 - alpha))?;
        Self::new(self.m1, self.m2, rho)
    }

    pub fn max_abs_diff(&self, other: &GameState) -> f64 {
        self.rho.max_abs_diff(&other.rho)
    }
}

/// A probabilistic mixture of unitaries acting on one player's space.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTactic {
    player: Player,
    branches: Vec<(f64, ComplexMatrix)>,
}

impl MixedTactic {
    pub fn new(player: Player, branches: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        if branches.is_empty() {
            return Err(Error::InvalidInput(
                "mixed tactic needs at least one branch".into(),
            ));
        }
        let dim = branches[0].1.rows();
        let mut total = 0.0;
        for (p, u) in &branches {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::InvalidInput(format!(
                    "branch probability {p} not in [0, 1]"
                )));
            }
            if u.rows() != dim || u.cols() != dim {
                return Err(Error::dims(
                    "mixed_tactic",
                    "branches act on different dimensions",
                ));
            }
            let deviation = u.unitary_deviation().unwrap_or(f64::INFINITY);
            if deviation > STRUCTURAL_TOL {
                return Err(Error::NonUnitary { deviation });
            }
            total += p;
        }
        if (total - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::InvalidInput(format!(
                "branch probabilities sum to {total}, expected 1"
            )));
        }
        Ok(MixedTactic { player, branches })
    }

    pub fn pure(player: Player, u: ComplexMatrix) -> Result<Self> {
        Self::new(player, vec![(1.0, u)])
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn branches(&self) -> &[(f64, ComplexMatrix)] {
        &self.branches
    }

    pub fn dim(&self) -> usize {
        self.branches[0].1.rows()
    }
}
