//! Declarative game-spec documents (JSON).
//!
//! ```json
//! {
//!   "dims": [2, 2],
//!   "payoff": [[1000, 1001000], [0, 1000000]],
//!   "initial": {"kind": "mixture", "terms": [{"weight": 1, "basis": [0, 0]}]},
//!   "moves": [
//!     {"player": 1, "tactic": "hadamard"},
//!     {"player": 1, "tactic": {"mixture": [
//!         {"probability": 0.5, "tactic": "negation"},
//!         {"probability": 0.5, "tactic": "identity"}]}},
//!     {"player": 1, "tactic": {"matrix": [[1, 0], [0, [0, 1]]]}}
//!   ]
//! }
//! ```
//!
//! Amplitudes are either a real number or a `[re, im]` pair. Parsing reports
//! three distinct failure kinds: JSON syntax (line/column), schema (field
//! path) and semantics (ranges, probabilities, unitarity).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{GameState, MixedTactic, PayoffMatrix, Player};
use crate::linalg::{hadamard, negation, ComplexMatrix, Ket, C64};

/// Tolerance for probabilities and literal unitaries in documents.
pub const DOC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpecDoc {
    pub dims: [usize; 2],
    pub payoff: Vec<Vec<f64>>,
    pub initial: InitialSpec,
    #[serde(default)]
    pub moves: Vec<MoveSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "kind",
    rename_all = "lowercase",
    deny_unknown_fields,
    try_from = "RawInitial"
)]
pub enum InitialSpec {
    Mixture { terms: Vec<MixtureTerm> },
    Product { kets: [Vec<Amplitude>; 2] },
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum InitialKind {
    Mixture,
    Product,
}

// Flat form of `InitialSpec`. A tagged enum buffers its body before
// dispatching, which hides field paths from schema errors.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: InitialKind,
    terms: Option<Vec<MixtureTerm>>,
    kets: Option<[Vec<Amplitude>; 2]>,
}

impl TryFrom<RawInitial> for InitialSpec {
    type Error = String;

    fn try_from(raw: RawInitial) -> std::result::Result<Self, String> {
        match (raw.kind, raw.terms, raw.kets) {
            (InitialKind::Mixture, Some(terms), None) => Ok(InitialSpec::Mixture { terms }),
            (InitialKind::Product, None, Some(kets)) => Ok(InitialSpec::Product { kets }),
            (InitialKind::Mixture, _, _) => {
                Err("kind `mixture` takes exactly the field `terms`".into())
            }
            (InitialKind::Product, _, _) => {
                Err("kind `product` takes exactly the field `kets`".into())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureTerm {
    pub weight: f64,
    pub basis: [usize; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amplitude {
    Real(f64),
    Complex([f64; 2]),
}

impl Amplitude {
    pub fn value(self) -> C64 {
        match self {
            Amplitude::Real(x) => C64::new(x, 0.0),
            Amplitude::Complex([re, im]) => C64::new(re, im),
        }
    }
}

impl From<C64> for Amplitude {
    fn from(z: C64) -> Self {
        if z.im == 0.0 {
            Amplitude::Real(z.re)
        } else {
            Amplitude::Complex([z.re, z.im])
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoveSpec {
    pub player: u8,
    pub tactic: TacticSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedTactic {
    Hadamard,
    Negation,
    Identity,
    Dft,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TacticSpec {
    Named(NamedTactic),
    Matrix(MatrixTactic),
    Mixture(MixtureTactic),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixTactic {
    pub matrix: Vec<Vec<Amplitude>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureTactic {
    pub mixture: Vec<MixtureBranch>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureBranch {
    pub probability: f64,
    pub tactic: TacticSpec,
}

/// A validated document lowered onto simulator types.
#[derive(Debug, Clone)]
pub struct CompiledGame {
    pub payoff: PayoffMatrix,
    pub initial: GameState,
    pub moves: Vec<CompiledMove>,
}

#[derive(Debug, Clone)]
pub struct CompiledMove {
    pub label: String,
    pub tactic: MixedTactic,
}

/// Parses and fully validates a document.
pub fn parse_game_spec(text: &str) -> Result<GameSpecDoc> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::SpecSyntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let doc: GameSpecDoc = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::SpecSchema {
            path,
            message: e.into_inner().to_string(),
        }
    })?;
    compile(&doc)?;
    Ok(doc)
}

pub fn to_json(doc: &GameSpecDoc) -> String {
    serde_json::to_string_pretty(doc).expect("spec documents always serialize")
}

fn semantic(msg: impl Into<String>) -> Error {
    Error::SpecSemantic(msg.into())
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(semantic(format!("{what} {p} is not in [0, 1]")))
    }
}

fn check_sum(what: &str, total: f64) -> Result<()> {
    if (total - 1.0).abs() <= DOC_TOL {
        Ok(())
    } else {
        Err(semantic(format!("{what} sum to {total}, expected 1")))
    }
}

fn named_matrix(name: NamedTactic, dim: usize) -> Result<ComplexMatrix> {
    match name {
        NamedTactic::Identity => Ok(ComplexMatrix::identity(dim)),
        NamedTactic::Dft => ComplexMatrix::dft(dim),
        NamedTactic::Hadamard | NamedTactic::Negation if dim != 2 => Err(semantic(format!(
            "tactic {name:?} needs a 2-dimensional player, got {dim}"
        ))),
        NamedTactic::Hadamard => Ok(hadamard()),
        NamedTactic::Negation => Ok(negation()),
    }
}

fn literal_matrix(rows: &[Vec<Amplitude>], dim: usize, at: &str) -> Result<ComplexMatrix> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(semantic(format!("{at}: tactic matrix must be {dim}x{dim}")));
    }
    let m = ComplexMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|a| a.value()).collect())
            .collect(),
    )
    .map_err(|e| semantic(format!("{at}: {e}")))?;
    let deviation = m.unitary_deviation().unwrap_or(f64::INFINITY);
    if deviation > DOC_TOL {
        return Err(semantic(format!(
            "{at}: non-unitary tactic (deviation {deviation:e})"
        )));
    }
    // snap to a unitary exact to rounding so channel outputs stay valid states
    m.orthonormalize_columns()
        .ok_or_else(|| semantic(format!("{at}: non-unitary tactic")))
}

/// Flattens nested mixtures into weighted unitary branches.
fn lower_tactic(
    spec: &TacticSpec,
    dim: usize,
    weight: f64,
    at: &str,
    out: &mut Vec<(f64, ComplexMatrix)>,
) -> Result<()> {
    match spec {
        TacticSpec::Named(name) => out.push((weight, named_matrix(*name, dim)?)),
        TacticSpec::Matrix(m) => out.push((weight, literal_matrix(&m.matrix, dim, at)?)),
        TacticSpec::Mixture(mix) => {
            if mix.mixture.is_empty() {
                return Err(semantic(format!("{at}: empty mixture")));
            }
            let mut total = 0.0;
            for (i, branch) in mix.mixture.iter().enumerate() {
                let here = format!("{at}.mixture[{i}]");
                check_probability(&format!("{here}: probability"), branch.probability)?;
                total += branch.probability;
                lower_tactic(&branch.tactic, dim, weight * branch.probability, &here, out)?;
            }
            check_sum(&format!("{at}: mixture probabilities"), total)?;
        }
    }
    Ok(())
}

fn describe(spec: &TacticSpec) -> String {
    match spec {
        TacticSpec::Named(n) => format!("{n:?}").to_lowercase(),
        TacticSpec::Matrix(_) => "matrix".into(),
        TacticSpec::Mixture(m) => {
            let parts: Vec<String> = m
                .mixture
                .iter()
                .map(|b| format!("{}*{}", b.probability, describe(&b.tactic)))
                .collect();
            format!("mixture({})", parts.join(" + "))
        }
    }
}

fn lower_ket(amps: &[Amplitude], dim: usize, at: &str) -> Result<Ket> {
    if amps.len() != dim {
        return Err(semantic(format!(
            "{at}: expected {dim} amplitudes, got {}",
            amps.len()
        )));
    }
    Ket::new(amps.iter().map(|a| a.value()).collect())
        .and_then(|k| k.normalized())
        .map_err(|e| semantic(format!("{at}: {e}")))
}

/// Validates the semantics of a parsed document and lowers it.
pub fn compile(doc: &GameSpecDoc) -> Result<CompiledGame> {
    let [m1, m2] = doc.dims;
    if m1 < 2 || m2 < 2 {
        return Err(semantic(format!(
            "dims must be at least [2, 2], got [{m1}, {m2}]"
        )));
    }
    if doc.payoff.len() != m1 || doc.payoff.iter().any(|r| r.len() != m2) {
        return Err(semantic(format!("payoff must be a {m1}x{m2} matrix")));
    }
    let payoff = PayoffMatrix::new(doc.payoff.clone()).map_err(|e| semantic(e.to_string()))?;

    let initial = match &doc.initial {
        InitialSpec::Mixture { terms } => {
            if terms.is_empty() {
                return Err(semantic("initial.terms must not be empty"));
            }
            let mut total = 0.0;
            for (i, t) in terms.iter().enumerate() {
                check_probability(&format!("initial.terms[{i}].weight"), t.weight)?;
                let [r, s] = t.basis;
                if r >= m1 || s >= m2 {
                    return Err(semantic(format!(
                        "initial.terms[{i}].basis [{r}, {s}] out of range for dims [{m1}, {m2}]"
                    )));
                }
                total += t.weight;
            }
            check_sum("initial.terms weights", total)?;
            let scaled: Vec<((usize, usize), f64)> = terms
                .iter()
                .map(|t| ((t.basis[0], t.basis[1]), t.weight / total))
                .collect();
            GameState::diagonal_mixture(m1, m2, &scaled).map_err(|e| semantic(e.to_string()))?
        }
        InitialSpec::Product { kets } => {
            let a = lower_ket(&kets[0], m1, "initial.kets[0]")?;
            let b = lower_ket(&kets[1], m2, "initial.kets[1]")?;
            GameState::product(&a, &b).map_err(|e| semantic(e.to_string()))?
        }
    };

    let mut moves = Vec::with_capacity(doc.moves.len());
    for (i, mv) in doc.moves.iter().enumerate() {
        let at = format!("moves[{i}]");
        let player = Player::try_from(mv.player).map_err(|e| semantic(format!("{at}: {e}")))?;
        let dim = match player {
            Player::One => m1,
            Player::Two => m2,
        };
        let mut branches = Vec::new();
        lower_tactic(&mv.tactic, dim, 1.0, &format!("{at}.tactic"), &mut branches)?;
        // absorb the document-level slack in the probabilities
        let total: f64 = branches.iter().map(|(p, _)| p).sum();
        let branches = branches.into_iter().map(|(p, u)| (p / total, u)).collect();
        let tactic =
            MixedTactic::new(player, branches).map_err(|e| semantic(format!("{at}: {e}")))?;
        moves.push(CompiledMove {
            label: format!("{}@{}", describe(&mv.tactic), player),
            tactic,
        });
    }

    Ok(CompiledGame {
        payoff,
        initial,
        moves,
    })
}

/// The bundled Newcomb protocol document.
pub const NEWCOMB_SPEC: &str = include_str!("../../specs/newcomb.json");

/// The bundled Newcomb document with the given strategy and tactic
/// probabilities substituted.
pub fn newcomb_spec(v: f64, w: f64) -> Result<GameSpecDoc> {
    let mut doc = parse_game_spec(NEWCOMB_SPEC)?;
    if let InitialSpec::Mixture { terms } = &mut doc.initial {
        terms[0].weight = v;
        terms[1].weight = 1.0 - v;
    }
    if let TacticSpec::Mixture(mix) = &mut doc.moves[1].tactic {
        mix.mixture[0].probability = w;
        mix.mixture[1].probability = 1.0 - w;
    }
    compile(&doc)?;
    Ok(doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ErrorCategory;

    const SIMPLE: &str = r#"{
        "dims": [2, 2],
        "payoff": [[1, 2], [3, 4]],
        "initial": {"kind": "mixture", "terms": [{"weight": 1, "basis": [0, 0]}]},
        "moves": []
    }"#;

    fn category(text: &str) -> ErrorCategory {
        parse_game_spec(text).unwrap_err().category()
    }

    #[test]
    fn bundled_newcomb_spec_parses() {
        let doc = parse_game_spec(NEWCOMB_SPEC).unwrap();
        assert_eq!(doc.dims, [2, 2]);
        assert_eq!(doc.moves.len(), 3);
    }

    #[test]
    fn syntax_error_has_position() {
        let err = parse_game_spec("{\n  \"dims\": [2, 2],,\n}").unwrap_err();
        match err {
            Error::SpecSyntax { line, column, .. } => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_payoff_names_the_field() {
        let text = r#"{"dims": [2, 2], "initial": {"kind": "mixture", "terms": []}}"#;
        let err = parse_game_spec(text).unwrap_err();
        assert_eq!(err.category(), ErrorCategory::Schema);
        assert!(err.to_string().contains("payoff"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = SIMPLE.replace("\"moves\": []", "\"moves\": [], \"extra\": 1");
        assert_eq!(category(&text), ErrorCategory::Schema);
        let text = SIMPLE.replace("\"basis\": [0, 0]", "\"basis\": [0, 0], \"note\": \"x\"");
        let err = parse_game_spec(&text).unwrap_err();
        assert_eq!(err.category(), ErrorCategory::Schema);
        assert!(err.to_string().contains("initial"), "{err}");
        let text = SIMPLE.replace(
            "\"moves\": []",
            "\"moves\": [{\"player\": 1, \"tactic\": \"flip\"}]",
        );
        let err = parse_game_spec(&text).unwrap_err();
        assert_eq!(err.category(), ErrorCategory::Schema);
        assert!(err.to_string().contains("moves[0]"), "{err}");
    }

    #[test]
    fn non_unitary_matrix_is_semantic() {
        let text = SIMPLE.replace(
            "\"moves\": []",
            "\"moves\": [{\"player\": 1, \"tactic\": {\"matrix\": [[1, 0], [0, 2]]}}]",
        );
        let err = parse_game_spec(&text).unwrap_err();
        assert_eq!(err.category(), ErrorCategory::Semantic);
        assert!(err.to_string().contains("non-unitary tactic"), "{err}");
    }

    #[test]
    fn semantic_range_errors() {
        let bad_basis = SIMPLE.replace("[0, 0]}", "[2, 0]}");
        assert_eq!(category(&bad_basis), ErrorCategory::Semantic);
        let bad_weight = SIMPLE.replace("\"weight\": 1", "\"weight\": 0.5");
        assert_eq!(category(&bad_weight), ErrorCategory::Semantic);
        let bad_payoff = SIMPLE.replace("[[1, 2], [3, 4]]", "[[1, 2]]");
        assert_eq!(category(&bad_payoff), ErrorCategory::Semantic);
        let bad_player = SIMPLE.replace(
            "\"moves\": []",
            "\"moves\": [{\"player\": 3, \"tactic\": \"identity\"}]",
        );
        assert_eq!(category(&bad_player), ErrorCategory::Semantic);
        let bad_mix = SIMPLE.replace(
            "\"moves\": []",
            r#""moves": [{"player": 1, "tactic": {"mixture": [
                {"probability": 0.7, "tactic": "negation"},
                {"probability": 0.7, "tactic": "identity"}]}}]"#,
        );
        assert_eq!(category(&bad_mix), ErrorCategory::Semantic);
        let zero_ket = SIMPLE.replace(
            r#"{"kind": "mixture", "terms": [{"weight": 1, "basis": [0, 0]}]}"#,
            r#"{"kind": "product", "kets": [[0, 0], [1, 0]]}"#,
        );
        assert_eq!(category(&zero_ket), ErrorCategory::Semantic);
    }

    #[test]
    fn nearly_unitary_literal_accepted() {
        let h = std::f64::consts::FRAC_1_SQRT_2 * (1.0 + 1e-10);
        let text = SIMPLE.replace(
            "\"moves\": []",
            &format!("\"moves\": [{{\"player\": 2, \"tactic\": {{\"matrix\": [[{h}, {h}], [{h}, {}]]}}}}]", -h),
        );
        let doc = parse_game_spec(&text).unwrap();
        let game = compile(&doc).unwrap();
        assert!(game.moves[0].tactic.branches()[0].1.is_unitary(1e-14));
    }

    #[test]
    fn complex_amplitudes_and_product_initial() {
        let text = r#"{
            "dims": [2, 2],
            "payoff": [[1, 0], [0, 0]],
            "initial": {"kind": "product", "kets": [[1, [0, 1]], [1, 0]]},
            "moves": [{"player": 1, "tactic": {"matrix": [[1, 0], [0, [0, -1]]]}}]
        }"#;
        let doc = parse_game_spec(text).unwrap();
        assert_eq!(
            doc.initial,
            InitialSpec::Product {
                kets: [
                    vec![Amplitude::Real(1.0), Amplitude::Complex([0.0, 1.0])],
                    vec![Amplitude::Real(1.0), Amplitude::Real(0.0)],
                ],
            }
        );
        let game = compile(&doc).unwrap();
        assert!((game.initial.rho().get(0, 0).re - 0.5).abs() < 1e-15);
    }

    #[test]
    fn newcomb_template_substitution() {
        let doc = newcomb_spec(0.25, 0.75).unwrap();
        match &doc.initial {
            InitialSpec::Mixture { terms } => assert_eq!(terms[0].weight, 0.25),
            other => panic!("unexpected {other:?}"),
        }
        assert!(newcomb_spec(1.5, 0.0).is_err());
    }
}
