//! Market version of the Newcomb game.
//!
//! The human's pure strategy is a point of the Riemann sphere, stored as a
//! homogeneous pair `(a, b)` for the ket `a|0⟩ + b|1⟩` (so `z = b/a`, with
//! `a = 0` the point at infinity). Omega answers with the supply
//! representation of the same strategy, i.e. the Hadamard image
//! `(a + b, a − b)`, which in the affine chart is `z ↦ (1 − z)/(1 + z)`.
//! The game state is the product of the two pure strategies and the human's
//! average payoff is `Tr(𝓜𝓦_z)` with the Newcomb payoff observable.
//!
//! Landscapes are sampled on two square charts: the affine chart `z` and the
//! inverse chart `u = 1/z` which covers the neighbourhood of infinity.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::GameState;
use crate::linalg::{ComplexMatrix, Ket, C64};
use crate::newcomb::newcomb_observable;

/// Homogeneous coordinates of a qubit pure strategy, kept in canonical form:
/// unit norm with the larger-modulus component real and positive (`a` wins
/// ties).
#[derive(Clone, Copy, PartialEq)]
pub struct ProjectivePoint {
    a: C64,
    b: C64,
}

impl ProjectivePoint {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let finite = [a.re, a.im, b.re, b.im].iter().all(|x| x.is_finite());
        if !finite {
            return Err(Error::InvalidInput(
                "projective coordinates must be finite".into(),
            ));
        }
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidInput(
                "(0, 0) is not a projective point".into(),
            ));
        }
        let pivot = if a.norm() >= b.norm() { a } else { b };
        // divide out the pivot's phase and the overall norm
        let scale = pivot.conj() / (pivot.norm() * norm);
        let (mut a, mut b) = (a * scale, b * scale);
        if a.norm() >= b.norm() {
            a = C64::new(a.norm(), 0.0);
        } else {
            b = C64::new(b.norm(), 0.0);
        }
        Ok(ProjectivePoint { a, b })
    }

    /// The strategy `|0⟩ + z|1⟩`.
    pub fn from_z(z: C64) -> Result<Self> {
        Self::new(C64::new(1.0, 0.0), z)
    }

    /// The strategy `|1⟩` (`z = ∞`).
    pub fn infinity() -> Self {
        ProjectivePoint {
            a: C64::new(0.0, 0.0),
            b: C64::new(1.0, 0.0),
        }
    }

    pub fn from_chart(chart: Chart, re: f64, im: f64) -> Result<Self> {
        let c = C64::new(re, im);
        match chart {
            Chart::Z => Self::new(C64::new(1.0, 0.0), c),
            Chart::U => Self::new(c, C64::new(1.0, 0.0)),
        }
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn is_infinity(&self) -> bool {
        self.a == C64::new(0.0, 0.0)
    }

    /// Affine coordinate `z = b/a`, `None` at infinity.
    pub fn z(&self) -> Option<C64> {
        (!self.is_infinity()).then(|| self.b / self.a)
    }

    /// Coordinates in the better-conditioned chart: `z` when `|z| ≤ 1`, else `u = 1/z`.
    pub fn chart_coords(&self) -> (Chart, C64) {
        if self.a.norm() >= self.b.norm() {
            (Chart::Z, self.b / self.a)
        } else {
            (Chart::U, self.a / self.b)
        }
    }

    /// Chordal distance `|z − w| / √((1+|z|²)(1+|w|²))`, which equals
    /// `√(1 − |⟨ψ_z|ψ_w⟩|²)`. Bounded by 1 and finite at infinity.
    pub fn chordal_distance(&self, other: &ProjectivePoint) -> f64 {
        // |a·b' − b·a'| = |z − w|·|a|·|a'| for unit-norm representatives
        (self.a * other.b - self.b * other.a).norm()
    }
}

impl fmt::Debug for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.z() {
            Some(z) => write!(f, "ProjectivePoint(z = {:+.9}{:+.9}i)", z.re, z.im),
            None => write!(f, "ProjectivePoint(z = inf)"),
        }
    }
}

/// Demand to supply representation: the unitary DFT of size `psi.dim()`.
pub fn demand_to_supply(psi: &Ket) -> Result<Ket> {
    ComplexMatrix::dft(psi.dim())?.apply(psi)
}

/// Normalized ket proportional to `a|0⟩ + b|1⟩`.
pub fn strategy_from_projective(p: &ProjectivePoint) -> Ket {
    Ket::new(vec![p.a, p.b])
        .and_then(|k| k.normalized())
        .expect("projective points are finite and nonzero")
}

/// Omega plays the Hadamard image of the human's strategy.
pub fn omega_response(p: &ProjectivePoint) -> ProjectivePoint {
    ProjectivePoint::new(p.a + p.b, p.a - p.b).expect("Hadamard is invertible")
}

/// Pure product state `|ψ_p⟩⟨ψ_p| ⊗ |ψ_ω⟩⟨ψ_ω|` with `ω = omega_response(p)`.
pub fn build_market_state(p: &ProjectivePoint) -> Result<GameState> {
    let human = strategy_from_projective(p);
    let omega = strategy_from_projective(&omega_response(p));
    GameState::product(&human, &omega)
}

/// `Tr(𝓜𝓦)` for the Newcomb observable and the market state at `p`.
pub fn market_payoff(p: &ProjectivePoint) -> Result<f64> {
    newcomb_observable().expected_payoff(&build_market_state(p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Chart {
    /// Affine coordinate `z`.
    Z,
    /// Inverse coordinate `u = 1/z`.
    U,
}

impl Chart {
    pub fn tag(self) -> &'static str {
        match self {
            Chart::Z => "z",
            Chart::U => "u",
        }
    }
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeSample {
    pub chart: Chart,
    pub re: f64,
    pub im: f64,
    pub payoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    /// Points per axis of each chart window.
    pub grid_n: usize,
    /// Half-width of the square window `[−radius, radius]²`.
    pub radius: f64,
    pub inverse_chart: bool,
    /// Grid-shrinking iterations used by [`find_extrema`].
    pub refinement: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            grid_n: 401,
            radius: 4.0,
            inverse_chart: true,
            refinement: 30,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 3 {
            return Err(Error::InvalidInput(format!(
                "grid_n must be >= 3, got {}",
                self.grid_n
            )));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "radius must be > 0, got {}",
                self.radius
            )));
        }
        Ok(())
    }

    /// Coordinate of grid index `i` along one axis.
    fn axis(&self, i: usize) -> f64 {
        // integer numerator keeps the centre exactly at 0 and the grid symmetric
        let n = (self.grid_n - 1) as f64;
        (2.0 * i as f64 - n) * self.radius / n
    }

    fn charts(&self) -> &'static [Chart] {
        if self.inverse_chart {
            &[Chart::Z, Chart::U]
        } else {
            &[Chart::Z]
        }
    }
}

fn sample_at(chart: Chart, re: f64, im: f64) -> Result<LandscapeSample> {
    let payoff = market_payoff(&ProjectivePoint::from_chart(chart, re, im)?)?;
    Ok(LandscapeSample {
        chart,
        re,
        im,
        payoff,
    })
}

/// Payoff samples ordered by (chart, row, column); rows step the imaginary
/// axis and columns the real axis, both ascending. Evaluation is parallel but
/// the output order and values do not depend on the number of workers.
pub fn scan_landscape(cfg: &ScanConfig) -> Result<Vec<LandscapeSample>> {
    cfg.validate()?;
    let n = cfg.grid_n;
    let per_chart = n * n;
    let charts = cfg.charts();
    (0..charts.len() * per_chart)
        .into_par_iter()
        .map(|idx| {
            let chart = charts[idx / per_chart];
            let cell = idx % per_chart;
            let (row, col) = (cell / n, cell % n);
            sample_at(chart, cfg.axis(col), cfg.axis(row))
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct Extrema {
    pub argmax: ProjectivePoint,
    pub max: f64,
    pub argmin: ProjectivePoint,
    pub min: f64,
}

const REFINE_STENCIL: usize = 11;

/// Shrinks a square window around `start` toward the best stencil point.
fn refine(
    start: LandscapeSample,
    half_width: f64,
    iterations: usize,
    better: impl Fn(f64, f64) -> bool,
) -> Result<LandscapeSample> {
    let mut best = start;
    let mut h = half_width;
    let last = (REFINE_STENCIL - 1) as f64;
    for _ in 0..iterations {
        let (cx, cy) = (best.re, best.im);
        for i in 0..REFINE_STENCIL {
            for j in 0..REFINE_STENCIL {
                let x = cx + (2.0 * j as f64 - last) * h / last;
                let y = cy + (2.0 * i as f64 - last) * h / last;
                let s = sample_at(best.chart, x, y)?;
                if better(s.payoff, best.payoff) {
                    best = s;
                }
            }
        }
        h *= 2.0 / last;
        if h < 1e-15 * (1.0 + cx.abs().max(cy.abs())) {
            break;
        }
    }
    Ok(best)
}

/// Coarse scan over the configured charts, then local grid refinement around
/// the best cells for the maximum and the minimum.
pub fn find_extrema(cfg: &ScanConfig) -> Result<Extrema> {
    let samples = scan_landscape(cfg)?;
    let mut hi = samples[0];
    let mut lo = samples[0];
    for s in &samples[1..] {
        if s.payoff > hi.payoff {
            hi = *s;
        }
        if s.payoff < lo.payoff {
            lo = *s;
        }
    }
    let step = 2.0 * cfg.radius / (cfg.grid_n - 1) as f64;
    let hi = refine(hi, step, cfg.refinement, |a, b| a > b)?;
    let lo = refine(lo, step, cfg.refinement, |a, b| a < b)?;
    Ok(Extrema {
        argmax: ProjectivePoint::from_chart(hi.chart, hi.re, hi.im)?,
        max: hi.payoff,
        argmin: ProjectivePoint::from_chart(lo.chart, lo.re, lo.im)?,
        min: lo.payoff,
    })
}
