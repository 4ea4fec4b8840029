//! The Newcomb game played with the Hadamard sandwich tactic.
//!
//! Omega's prediction is encoded as perfect classical correlation in the
//! initial state: with probability `v` both registers hold `|0⟩` (the human
//! intends the female strategy), otherwise both hold `|1⟩`. The protocol then
//! runs three moves on the human's register:
//!
//! 1. the coupling device applies `F⊗I`;
//! 2. the human negates (`N⊗I`) with probability `w`, else does nothing;
//! 3. the device applies `F⊗I` again before the boxes are opened.
//!
//! `F·N·F` is diagonal, so step 2 cannot move the diagonal initial state and
//! the game always ends where it started.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{
    build_payoff_observable, GameState, MixedTactic, PayoffMatrix, PayoffObservable, Player,
};
use crate::linalg::{hadamard, negation, ComplexMatrix};

pub const PAYOFF_BOTH_BOXES_EMPTY: f64 = 1000.0;
pub const PAYOFF_BOTH_BOXES_FULL: f64 = 1_001_000.0;
pub const PAYOFF_OPAQUE_EMPTY: f64 = 0.0;
pub const PAYOFF_OPAQUE_FULL: f64 = 1_000_000.0;

/// Player 1's payoff in the Newcomb game. Row 0 takes both boxes, row 1 only
/// the opaque one; column 1 means Omega filled the opaque box.
pub fn newcomb_payoff_matrix() -> PayoffMatrix {
    PayoffMatrix::new(vec![
        vec![PAYOFF_BOTH_BOXES_EMPTY, PAYOFF_BOTH_BOXES_FULL],
        vec![PAYOFF_OPAQUE_EMPTY, PAYOFF_OPAQUE_FULL],
    ])
    .expect("constant payoff matrix is valid")
}

pub fn newcomb_observable() -> PayoffObservable {
    build_payoff_observable(&newcomb_payoff_matrix())
}

fn check_probability(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{name} = {x} is not in [0, 1]"
        )))
    }
}

/// `v`: probability the human intends the female strategy `|0⟩`.
/// `w`: probability the human applies the negation tactic in step 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    v: f64,
    w: f64,
}

impl ProtocolParams {
    pub fn new(v: f64, w: f64) -> Result<Self> {
        check_probability("v", v)?;
        check_probability("w", w)?;
        Ok(ProtocolParams { v, w })
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn w(&self) -> f64 {
        self.w
    }
}

/// `v|00⟩⟨00| + (1−v)|11⟩⟨11|`
pub fn initial_state(v: f64) -> Result<GameState> {
    check_probability("v", v)?;
    GameState::diagonal_mixture(2, 2, &[((0, 0), v), ((1, 1), 1.0 - v)])
}

/// The human's step-2 channel: `N` with probability `w`, else `I`.
pub fn step_two_tactic(w: f64) -> Result<MixedTactic> {
    check_probability("w", w)?;
    MixedTactic::new(
        Player::One,
        vec![(w, negation()), (1.0 - w, ComplexMatrix::identity(2))],
    )
}

#[derive(Debug, Clone)]
pub struct ProtocolStage {
    pub label: &'static str,
    pub state: GameState,
    /// Partial trace over Omega's register.
    pub human_reduced: ComplexMatrix,
}

impl ProtocolStage {
    fn new(label: &'static str, state: GameState) -> Self {
        let human_reduced = state.reduced_player_one();
        ProtocolStage {
            label,
            state,
            human_reduced,
        }
    }
}

pub const STAGE_LABELS: [&str; 4] = [
    "initial",
    "step 1: F (x) I",
    "step 2: w N (x) I + (1-w) I (x) I",
    "step 3: F (x) I",
];

#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub params: ProtocolParams,
    /// Exactly four stages: initial state and the state after each step.
    pub trace: Vec<ProtocolStage>,
    pub payoff: f64,
}

impl ProtocolRun {
    pub fn initial(&self) -> &GameState {
        &self.trace[0].state
    }

    pub fn final_state(&self) -> &GameState {
        &self.trace[3].state
    }

    /// Max entrywise distance between the final and initial joint states.
    pub fn restoration_deviation(&self) -> f64 {
        self.final_state().max_abs_diff(self.initial())
    }
}

/// Runs the three-step protocol, applying step 2 as the averaged channel.
pub fn run_meyer_protocol(params: ProtocolParams) -> Result<ProtocolRun> {
    let f = hadamard();
    let s0 = initial_state(params.v)?;
    let s1 = s0.apply_pure_tactic(Player::One, &f)?;
    let s2 = s1.apply_mixed_tactic(&step_two_tactic(params.w)?)?;
    let s3 = s2.apply_pure_tactic(Player::One, &f)?;
    let payoff = newcomb_observable().expected_payoff(&s3)?;
    let trace = [s0, s1, s2, s3]
        .into_iter()
        .zip(STAGE_LABELS)
        .map(|(s, label)| ProtocolStage::new(label, s))
        .collect();
    Ok(ProtocolRun {
        params,
        trace,
        payoff,
    })
}

/// Closed-form protocol payoff: `1000·v + 1000000·(1−v)`, whatever `w` is.
pub fn payoff_formula(v: f64) -> Result<f64> {
    check_probability("v", v)?;
    Ok(PAYOFF_BOTH_BOXES_EMPTY * v + PAYOFF_OPAQUE_FULL * (1.0 - v))
}

/// Averages of a sampled run where step 2 draws one branch per shot.
#[derive(Debug, Clone)]
pub struct SampledRun {
    pub shots: usize,
    pub negations: usize,
    pub mean_final_state: GameState,
    pub mean_payoff: f64,
}

/// Monte Carlo variant of [`run_meyer_protocol`]: each shot picks `N` with
/// probability `w` (else `I`) and runs the pure chain. The mean final state
/// converges to the channel result.
pub fn run_meyer_protocol_sampled(
    params: ProtocolParams,
    shots: usize,
    seed: u64,
) -> Result<SampledRun> {
    if shots == 0 {
        return Err(Error::InvalidInput("shots must be positive".into()));
    }
    let f = hadamard();
    let n = negation();
    let s1 = initial_state(params.v)?.apply_pure_tactic(Player::One, &f)?;
    let negated = s1
        .apply_pure_tactic(Player::One, &n)?
        .apply_pure_tactic(Player::One, &f)?;
    let kept = s1.apply_pure_tactic(Player::One, &f)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let negations = (0..shots)
        .filter(|_| rng.random::<f64>() < params.w)
        .count();
    let frac = negations as f64 / shots as f64;
    let mean_final_state = negated.mix(&kept, frac)?;
    let mean_payoff = newcomb_observable().expected_payoff(&mean_final_state)?;
    Ok(SampledRun {
        shots,
        negations,
        mean_final_state,
        mean_payoff,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestorationReport {
    pub grid_n: usize,
    pub tol: f64,
    pub max_deviation: f64,
    /// Grid point (v, w) where `max_deviation` was attained.
    pub worst: (f64, f64),
    /// Largest `max_w payoff − min_w payoff` over the `v` rows.
    pub max_payoff_spread: f64,
    /// Largest gap between the simulated payoff and [`payoff_formula`].
    pub max_formula_gap: f64,
    pub max_payoff: f64,
    pub passed: bool,
}

fn grid_value(i: usize, n: usize) -> f64 {
    i as f64 / (n - 1) as f64
}

/// Runs the protocol on a uniform `grid_n × grid_n` grid over `(v, w) ∈ [0,1]²`
/// and reports the worst restoration deviation. Grid points are evaluated in
/// parallel and reduced in grid order, so the report does not depend on the
/// thread count.
pub fn verify_restoration(grid_n: usize, tol: f64) -> Result<RestorationReport> {
    if grid_n < 2 {
        return Err(Error::InvalidInput(format!(
            "grid_n must be >= 2, got {grid_n}"
        )));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::InvalidInput(format!(
            "tolerance must be >= 0, got {tol}"
        )));
    }
    let points: Vec<(f64, f64, f64, f64)> = (0..grid_n * grid_n)
        .into_par_iter()
        .map(|idx| {
            let v = grid_value(idx / grid_n, grid_n);
            let w = grid_value(idx % grid_n, grid_n);
            let run = run_meyer_protocol(ProtocolParams::new(v, w)?)?;
            Ok((v, w, run.restoration_deviation(), run.payoff))
        })
        .collect::<Result<_>>()?;

    let mut max_deviation = 0.0;
    let mut worst = (points[0].0, points[0].1);
    let mut max_payoff_spread: f64 = 0.0;
    let mut max_formula_gap: f64 = 0.0;
    let mut max_payoff = f64::NEG_INFINITY;
    for row in points.chunks(grid_n) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(v, w, dev, payoff) in row {
            if dev > max_deviation {
                max_deviation = dev;
                worst = (v, w);
            }
            lo = lo.min(payoff);
            hi = hi.max(payoff);
            max_formula_gap = max_formula_gap.max((payoff - payoff_formula(v)?).abs());
        }
        max_payoff_spread = max_payoff_spread.max(hi - lo);
        max_payoff = max_payoff.max(hi);
    }
    Ok(RestorationReport {
        grid_n,
        tol,
        max_deviation,
        worst,
        max_payoff_spread,
        max_formula_gap,
        max_payoff,
        passed: max_deviation <= tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub strategy: &'static str,
    pub tactic: &'static str,
    pub v: f64,
    pub w: f64,
    pub payoff: f64,
}

/// The four pure (initial strategy, step-2 tactic) runs.
pub fn pure_strategy_table() -> Result<Vec<TableRow>> {
    let mut rows = Vec::with_capacity(4);
    for (strategy, v) in [("female", 1.0), ("male", 0.0)] {
        for (tactic, w) in [("negation", 1.0), ("identity", 0.0)] {
            let run = run_meyer_protocol(ProtocolParams::new(v, w)?)?;
            rows.push(TableRow {
                strategy,
                tactic,
                v,
                w,
                payoff: run.payoff,
            });
        }
    }
    Ok(rows)
}
