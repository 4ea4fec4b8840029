//! JSON reports and spec execution.
//!
//! Every report has the top-level keys `params`, `trace` (optional),
//! `payoff_usd` and `checks`. Dollar amounts are written with exactly six
//! decimals so golden files stay stable.

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use super::spec::{compile, GameSpecDoc};
use crate::error::{Error, Result};
use crate::game::{GameState, PayoffObservable};
use crate::linalg::{ComplexMatrix, STRUCTURAL_TOL};
use crate::market::{Extrema, ProjectivePoint};
use crate::newcomb::{ProtocolRun, RestorationReport, TableRow};

/// Dollar amount serialized as a JSON number with six decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dollars(pub f64);

pub fn format_dollars(x: f64) -> String {
    // avoid "-0.000000"
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.6}")
}

impl Serialize for Dollars {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom("non-finite dollar amount"));
        }
        RawValue::from_string(format_dollars(self.0))
            .map_err(S::Error::custom)?
            .serialize(serializer)
    }
}

fn matrix_json(m: &ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    m.row_vecs()
        .into_iter()
        .map(|r| r.into_iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct StateSummary {
    pub label: String,
    pub trace: f64,
    pub purity: f64,
    pub diagonal: Vec<f64>,
}

impl StateSummary {
    pub fn of(label: impl Into<String>, state: &GameState) -> Result<Self> {
        let tr = state.rho().trace()?;
        Ok(StateSummary {
            label: label.into(),
            trace: tr.re,
            purity: state.purity(),
            diagonal: state.rho().diag().iter().map(|z| z.re).collect(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpecChecks {
    pub states_valid: bool,
    pub final_trace_error: f64,
    pub max_hermitian_deviation: f64,
    pub min_eigenvalue: f64,
}

/// Result of executing a game-spec document.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub params: GameSpecDoc,
    pub trace: Vec<StateSummary>,
    pub payoff_usd: Dollars,
    pub checks: SpecChecks,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub report: RunReport,
    /// Initial state followed by the state after each move.
    pub states: Vec<GameState>,
}

impl Execution {
    pub fn final_state(&self) -> &GameState {
        self.states.last().expect("at least the initial state")
    }

    pub fn payoff(&self) -> f64 {
        self.report.payoff_usd.0
    }
}

/// Applies the document's moves in order and reports the expected payoff.
pub fn execute_spec(doc: &GameSpecDoc) -> Result<Execution> {
    let game = compile(doc)?;
    let mut states = vec![game.initial.clone()];
    let mut trace = vec![StateSummary::of("initial", &game.initial)?];
    for mv in &game.moves {
        let next = states.last().unwrap().apply_mixed_tactic(&mv.tactic)?;
        trace.push(StateSummary::of(&mv.label, &next)?);
        states.push(next);
    }

    let mut max_herm: f64 = 0.0;
    let mut min_eig = f64::INFINITY;
    for s in &states {
        max_herm = max_herm.max(s.rho().hermitian_deviation().unwrap_or(f64::INFINITY));
        min_eig = min_eig.min(s.min_eigenvalue()?);
    }
    let last = states.last().unwrap();
    let final_trace_error = (last.rho().trace()? - 1.0).norm();
    let states_valid = states.iter().all(|s| s.validate().is_ok());
    if !states_valid {
        return Err(Error::Consistency(
            "intermediate state violates density invariants".into(),
        ));
    }
    let payoff = PayoffObservable::from_matrix(&game.payoff).expected_payoff(last)?;
    let report = RunReport {
        params: doc.clone(),
        trace,
        payoff_usd: Dollars(payoff),
        checks: SpecChecks {
            states_valid,
            final_trace_error,
            max_hermitian_deviation: max_herm,
            min_eigenvalue: min_eig,
        },
    };
    Ok(Execution { report, states })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolParamsJson {
    pub v: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolStageJson {
    pub step: String,
    pub diagonal: Vec<f64>,
    pub purity: f64,
    pub human_reduced: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolChecks {
    pub restored: bool,
    pub max_restoration_deviation: f64,
    pub formula_payoff_usd: Dollars,
    pub formula_match: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolReport {
    pub params: ProtocolParamsJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<ProtocolStageJson>>,
    pub payoff_usd: Dollars,
    pub checks: ProtocolChecks,
}

impl ProtocolReport {
    pub fn new(run: &ProtocolRun, with_trace: bool) -> Result<Self> {
        let formula = crate::newcomb::payoff_formula(run.params.v())?;
        let deviation = run.restoration_deviation();
        let trace = with_trace.then(|| {
            run.trace
                .iter()
                .map(|st| ProtocolStageJson {
                    step: st.label.to_string(),
                    diagonal: st.state.rho().diag().iter().map(|z| z.re).collect(),
                    purity: st.state.purity(),
                    human_reduced: matrix_json(&st.human_reduced),
                })
                .collect()
        });
        Ok(ProtocolReport {
            params: ProtocolParamsJson {
                v: run.params.v(),
                w: run.params.w(),
            },
            trace,
            payoff_usd: Dollars(run.payoff),
            checks: ProtocolChecks {
                restored: deviation <= STRUCTURAL_TOL,
                max_restoration_deviation: deviation,
                formula_payoff_usd: Dollars(formula),
                formula_match: (run.payoff - formula).abs() <= crate::linalg::PAYOFF_TOL,
            },
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyParamsJson {
    pub grid: usize,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyChecks {
    pub passed: bool,
    pub max_deviation: f64,
    pub worst_v: f64,
    pub worst_w: f64,
    pub max_payoff_spread_usd: Dollars,
    pub max_formula_gap_usd: Dollars,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub params: VerifyParamsJson,
    /// Largest payoff seen on the grid.
    pub payoff_usd: Dollars,
    pub checks: VerifyChecks,
}

impl VerifyReport {
    pub fn new(r: &RestorationReport) -> Self {
        VerifyReport {
            params: VerifyParamsJson {
                grid: r.grid_n,
                tol: r.tol,
            },
            payoff_usd: Dollars(r.max_payoff),
            checks: VerifyChecks {
                passed: r.passed,
                max_deviation: r.max_deviation,
                worst_v: r.worst.0,
                worst_w: r.worst.1,
                max_payoff_spread_usd: Dollars(r.max_payoff_spread),
                max_formula_gap_usd: Dollars(r.max_formula_gap),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TableRowJson {
    pub strategy: &'static str,
    pub tactic: &'static str,
    pub v: f64,
    pub w: f64,
    pub payoff_usd: Dollars,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableChecks {
    pub tactic_independent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TableReport {
    pub params: serde_json::Value,
    pub trace: Vec<TableRowJson>,
    /// Best payoff among the four runs.
    pub payoff_usd: Dollars,
    pub checks: TableChecks,
}

impl TableReport {
    pub fn new(rows: &[TableRow]) -> Self {
        let trace: Vec<TableRowJson> = rows
            .iter()
            .map(|r| TableRowJson {
                strategy: r.strategy,
                tactic: r.tactic,
                v: r.v,
                w: r.w,
                payoff_usd: Dollars(r.payoff),
            })
            .collect();
        let best = rows
            .iter()
            .map(|r| r.payoff)
            .fold(f64::NEG_INFINITY, f64::max);
        let tactic_independent = rows.iter().all(|a| {
            rows.iter()
                .filter(|b| b.strategy == a.strategy)
                .all(|b| (a.payoff - b.payoff).abs() <= crate::linalg::PAYOFF_TOL)
        });
        TableReport {
            params: serde_json::json!({}),
            trace,
            payoff_usd: Dollars(best),
            checks: TableChecks { tactic_independent },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointJson {
    /// `[re, im]` of the affine coordinate, `null` at infinity.
    pub z: Option<[f64; 2]>,
    pub a: [f64; 2],
    pub b: [f64; 2],
}

impl From<&ProjectivePoint> for PointJson {
    fn from(p: &ProjectivePoint) -> Self {
        PointJson {
            z: p.z().map(|z| [z.re, z.im]),
            a: [p.a().re, p.a().im],
            b: [p.b().re, p.b().im],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremaParamsJson {
    pub grid: usize,
    pub radius: f64,
    pub inverse_chart: bool,
    pub refine: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremaChecks {
    pub argmax: PointJson,
    pub max_usd: Dollars,
    pub argmin: PointJson,
    pub min_usd: Dollars,
    /// Chordal distance of the argmax from z = -1.
    pub argmax_distance_to_minus_one: f64,
    /// Chordal distance of the argmin from z = +1.
    pub argmin_distance_to_plus_one: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtremaReport {
    pub params: ExtremaParamsJson,
    /// The maximal average payoff.
    pub payoff_usd: Dollars,
    pub checks: ExtremaChecks,
}

impl ExtremaReport {
    pub fn new(cfg: &crate::market::ScanConfig, e: &Extrema) -> Result<Self> {
        let minus_one = ProjectivePoint::from_z(crate::linalg::C64::new(-1.0, 0.0))?;
        let plus_one = ProjectivePoint::from_z(crate::linalg::C64::new(1.0, 0.0))?;
        Ok(ExtremaReport {
            params: ExtremaParamsJson {
                grid: cfg.grid_n,
                radius: cfg.radius,
                inverse_chart: cfg.inverse_chart,
                refine: cfg.refinement,
            },
            payoff_usd: Dollars(e.max),
            checks: ExtremaChecks {
                argmax: (&e.argmax).into(),
                max_usd: Dollars(e.max),
                argmin: (&e.argmin).into(),
                min_usd: Dollars(e.min),
                argmax_distance_to_minus_one: e.argmax.chordal_distance(&minus_one),
                argmin_distance_to_plus_one: e.argmin.chordal_distance(&plus_one),
            },
        })
    }
}

pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}
