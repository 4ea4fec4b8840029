//! Python bindings. Matrices cross the boundary as lists of rows of
//! `complex`; kets as lists of `complex`.

use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qnewcomb_core::cli::spec::{newcomb_spec, to_json};
use qnewcomb_core::cli::{emit_landscape_csv, execute_spec, parse_game_spec};
use qnewcomb_core::error::ErrorCategory;
use qnewcomb_core::game::PayoffObservable;
use qnewcomb_core::{linalg, market, newcomb};
use qnewcomb_core::{
    ComplexMatrix, Error, GameState, Ket, MixedTactic, PayoffMatrix, Player, ProjectivePoint,
    ProtocolParams, ScanConfig,
};

fn py_err(e: Error) -> PyErr {
    match e.category() {
        ErrorCategory::InternalConsistency => PyRuntimeError::new_err(e.to_string()),
        ErrorCategory::Io => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for qnewcomb_core::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn matrix(rows: Vec<Vec<C64>>) -> PyResult<ComplexMatrix> {
    ComplexMatrix::from_rows(rows).py()
}

fn rows(m: &ComplexMatrix) -> Vec<Vec<C64>> {
    m.row_vecs()
}

fn player(p: u8) -> PyResult<Player> {
    Player::try_from(p).py()
}

/// Density operator of a two-player game.
#[pyclass(name = "GameState", module = "qnewcomb", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGameState {
    inner: GameState,
}

#[pymethods]
impl PyGameState {
    #[new]
    fn new(m1: usize, m2: usize, rho: Vec<Vec<C64>>) -> PyResult<Self> {
        Ok(PyGameState {
            inner: GameState::new(m1, m2, matrix(rho)?).py()?,
        })
    }

    /// `|ψ⟩⟨ψ|` for a normalized joint ket.
    #[staticmethod]
    fn pure(m1: usize, m2: usize, amplitudes: Vec<C64>) -> PyResult<Self> {
        let k = Ket::new(amplitudes).py()?;
        Ok(PyGameState {
            inner: GameState::pure(m1, m2, &k).py()?,
        })
    }

    /// Product of two pure strategies; the kets are normalized first.
    #[staticmethod]
    fn product(a: Vec<C64>, b: Vec<C64>) -> PyResult<Self> {
        let a = Ket::new(a).and_then(|k| k.normalized()).py()?;
        let b = Ket::new(b).and_then(|k| k.normalized()).py()?;
        Ok(PyGameState {
            inner: GameState::product(&a, &b).py()?,
        })
    }

    #[getter]
    fn dims(&self) -> (usize, usize) {
        self.inner.dims()
    }

    fn rho(&self) -> Vec<Vec<C64>> {
        rows(self.inner.rho())
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    fn min_eigenvalue(&self) -> PyResult<f64> {
        self.inner.min_eigenvalue().py()
    }

    fn reduced(&self, player: u8) -> PyResult<Vec<Vec<C64>>> {
        Ok(match self::player(player)? {
            Player::One => rows(&self.inner.reduced_player_one()),
            Player::Two => rows(&self.inner.reduced_player_two()),
        })
    }

    /// Probabilities of every joint classical outcome as `((r, s), p)`.
    fn outcome_distribution(&self) -> PyResult<Vec<((usize, usize), f64)>> {
        Ok(self
            .inner
            .classical_outcome_distribution()
            .py()?
            .into_iter()
            .map(|o| ((o.r, o.s), o.probability))
            .collect())
    }

    fn apply_tactic(&self, player: u8, unitary: Vec<Vec<C64>>) -> PyResult<Self> {
        let u = matrix(unitary)?;
        Ok(PyGameState {
            inner: self
                .inner
                .apply_pure_tactic(self::player(player)?, &u)
                .py()?,
        })
    }

    /// Mixed-unitary channel from `[(probability, unitary), ...]`.
    fn apply_mixed_tactic(
        &self,
        player: u8,
        branches: Vec<(f64, Vec<Vec<C64>>)>,
    ) -> PyResult<Self> {
        let branches = branches
            .into_iter()
            .map(|(p, u)| Ok((p, matrix(u)?)))
            .collect::<PyResult<Vec<_>>>()?;
        let tactic = MixedTactic::new(self::player(player)?, branches).py()?;
        Ok(PyGameState {
            inner: self.inner.apply_mixed_tactic(&tactic).py()?,
        })
    }

    /// `Tr(𝓜𝓦)` for a real payoff matrix.
    fn expected_payoff(&self, payoff: Vec<Vec<f64>>) -> PyResult<f64> {
        let m = PayoffMatrix::new(payoff).py()?;
        PayoffObservable::from_matrix(&m)
            .expected_payoff(&self.inner)
            .py()
    }

    fn max_abs_diff(&self, other: &PyGameState) -> f64 {
        self.inner.max_abs_diff(&other.inner)
    }

    fn __repr__(&self) -> String {
        let (m1, m2) = self.inner.dims();
        format!("GameState({m1}x{m2}, purity={:.6})", self.inner.purity())
    }
}

/// Result of one protocol run.
#[pyclass(name = "ProtocolRun", module = "qnewcomb", frozen, get_all)]
struct PyProtocolRun {
    v: f64,
    w: f64,
    payoff: f64,
    restoration_deviation: f64,
    labels: Vec<String>,
    states: Vec<PyGameState>,
    human_reduced: Vec<Vec<Vec<C64>>>,
}

#[pymethods]
impl PyProtocolRun {
    fn __repr__(&self) -> String {
        format!(
            "ProtocolRun(v={}, w={}, payoff={:.6}, restoration_deviation={:e})",
            self.v, self.w, self.payoff, self.restoration_deviation
        )
    }
}

/// Runs the three-step protocol with step 2 as the averaged channel.
#[pyfunction]
fn run_protocol(v: f64, w: f64) -> PyResult<PyProtocolRun> {
    let run = newcomb::run_meyer_protocol(ProtocolParams::new(v, w).py()?).py()?;
    Ok(PyProtocolRun {
        v,
        w,
        payoff: run.payoff,
        restoration_deviation: run.restoration_deviation(),
        labels: run.trace.iter().map(|s| s.label.to_string()).collect(),
        states: run
            .trace
            .iter()
            .map(|s| PyGameState {
                inner: s.state.clone(),
            })
            .collect(),
        human_reduced: run.trace.iter().map(|s| rows(&s.human_reduced)).collect(),
    })
}

#[pyfunction]
fn payoff_formula(v: f64) -> PyResult<f64> {
    newcomb::payoff_formula(v).py()
}

#[pyfunction]
fn newcomb_payoff_matrix() -> Vec<Vec<f64>> {
    newcomb::newcomb_payoff_matrix().rows()
}

#[pyfunction]
#[pyo3(signature = (grid_n = 51, tol = 1e-12))]
fn verify_restoration<'py>(
    py: Python<'py>,
    grid_n: usize,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let r = newcomb::verify_restoration(grid_n, tol).py()?;
    let d = PyDict::new(py);
    d.set_item("grid_n", r.grid_n)?;
    d.set_item("tol", r.tol)?;
    d.set_item("max_deviation", r.max_deviation)?;
    d.set_item("worst", r.worst)?;
    d.set_item("max_payoff_spread", r.max_payoff_spread)?;
    d.set_item("max_formula_gap", r.max_formula_gap)?;
    d.set_item("passed", r.passed)?;
    Ok(d)
}

#[pyfunction]
fn hadamard() -> Vec<Vec<C64>> {
    rows(&linalg::hadamard())
}

#[pyfunction]
fn negation() -> Vec<Vec<C64>> {
    rows(&linalg::negation())
}

#[pyfunction]
fn dft_matrix(m: usize) -> PyResult<Vec<Vec<C64>>> {
    Ok(rows(&ComplexMatrix::dft(m).py()?))
}

#[pyfunction]
fn demand_to_supply(amplitudes: Vec<C64>) -> PyResult<Vec<C64>> {
    let k = Ket::new(amplitudes).py()?;
    Ok(market::demand_to_supply(&k).py()?.amplitudes().to_vec())
}

fn point(z: Option<C64>) -> PyResult<ProjectivePoint> {
    match z {
        Some(z) => ProjectivePoint::from_z(z).py(),
        None => Ok(ProjectivePoint::infinity()),
    }
}

fn point_tuple(p: &ProjectivePoint) -> (Option<C64>, C64, C64) {
    (p.z(), p.a(), p.b())
}

/// Market payoff at affine coordinate `z`; `None` means `z = ∞`.
#[pyfunction]
fn market_payoff(z: Option<C64>) -> PyResult<f64> {
    market::market_payoff(&point(z)?).py()
}

/// Market payoff at homogeneous coordinates `(a, b)`.
#[pyfunction]
fn market_payoff_projective(a: C64, b: C64) -> PyResult<f64> {
    market::market_payoff(&ProjectivePoint::new(a, b).py()?).py()
}

/// Omega's response to `z` as `(z, a, b)` with `z = None` at infinity.
#[pyfunction]
fn omega_response(z: Option<C64>) -> PyResult<(Option<C64>, C64, C64)> {
    Ok(point_tuple(&market::omega_response(&point(z)?)))
}

#[pyfunction]
fn market_state(z: Option<C64>) -> PyResult<PyGameState> {
    Ok(PyGameState {
        inner: market::build_market_state(&point(z)?).py()?,
    })
}

fn scan_config(grid_n: usize, radius: f64, inverse_chart: bool, refinement: usize) -> ScanConfig {
    ScanConfig {
        grid_n,
        radius,
        inverse_chart,
        refinement,
    }
}

/// Landscape samples as `(chart, re, im, payoff)` tuples.
#[pyfunction]
#[pyo3(signature = (grid_n = 401, radius = 4.0, inverse_chart = true))]
fn scan_landscape(
    grid_n: usize,
    radius: f64,
    inverse_chart: bool,
) -> PyResult<Vec<(&'static str, f64, f64, f64)>> {
    let cfg = scan_config(grid_n, radius, inverse_chart, 0);
    Ok(market::scan_landscape(&cfg)
        .py()?
        .into_iter()
        .map(|s| (s.chart.tag(), s.re, s.im, s.payoff))
        .collect())
}

#[pyfunction]
#[pyo3(signature = (grid_n = 401, radius = 4.0, inverse_chart = true))]
fn landscape_csv(grid_n: usize, radius: f64, inverse_chart: bool) -> PyResult<String> {
    let cfg = scan_config(grid_n, radius, inverse_chart, 0);
    Ok(emit_landscape_csv(&market::scan_landscape(&cfg).py()?))
}

#[pyfunction]
#[pyo3(signature = (grid_n = 401, radius = 4.0, inverse_chart = true, refinement = 30))]
fn find_extrema<'py>(
    py: Python<'py>,
    grid_n: usize,
    radius: f64,
    inverse_chart: bool,
    refinement: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let e = market::find_extrema(&scan_config(grid_n, radius, inverse_chart, refinement)).py()?;
    let d = PyDict::new(py);
    d.set_item("argmax", point_tuple(&e.argmax))?;
    d.set_item("max", e.max)?;
    d.set_item("argmin", point_tuple(&e.argmin))?;
    d.set_item("min", e.min)?;
    d.set_item(
        "argmax_distance_to_minus_one",
        e.argmax
            .chordal_distance(&point(Some(C64::new(-1.0, 0.0)))?),
    )?;
    d.set_item(
        "argmin_distance_to_plus_one",
        e.argmin.chordal_distance(&point(Some(C64::new(1.0, 0.0)))?),
    )?;
    Ok(d)
}

/// The bundled Newcomb game-spec document for `(v, w)` as JSON text.
#[pyfunction]
fn newcomb_spec_json(v: f64, w: f64) -> PyResult<String> {
    Ok(to_json(&newcomb_spec(v, w).py()?))
}

/// Executes a game-spec document; returns `(payoff, final_state, report_json)`.
#[pyfunction]
fn run_spec(text: &str) -> PyResult<(f64, PyGameState, String)> {
    let doc = parse_game_spec(text).py()?;
    let exec = execute_spec(&doc).py()?;
    let report = qnewcomb_core::cli::report::to_json_string(&exec.report);
    Ok((
        exec.payoff(),
        PyGameState {
            inner: exec.final_state().clone(),
        },
        report,
    ))
}

/// Runs the command-line interface in-process; returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn cli(args: Vec<String>) -> (i32, String, String) {
    let argv = std::iter::once("qnewcomb".to_string()).chain(args);
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = qnewcomb_core::cli::cli_dispatch(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}

#[pymodule]
pub fn qnewcomb(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGameState>()?;
    m.add_class::<PyProtocolRun>()?;
    m.add_function(wrap_pyfunction!(run_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(payoff_formula, m)?)?;
    m.add_function(wrap_pyfunction!(newcomb_payoff_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(verify_restoration, m)?)?;
    m.add_function(wrap_pyfunction!(hadamard, m)?)?;
    m.add_function(wrap_pyfunction!(negation, m)?)?;
    m.add_function(wrap_pyfunction!(dft_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(demand_to_supply, m)?)?;
    m.add_function(wrap_pyfunction!(market_payoff, m)?)?;
    m.add_function(wrap_pyfunction!(market_payoff_projective, m)?)?;
    m.add_function(wrap_pyfunction!(omega_response, m)?)?;
    m.add_function(wrap_pyfunction!(market_state, m)?)?;
    m.add_function(wrap_pyfunction!(scan_landscape, m)?)?;
    m.add_function(wrap_pyfunction!(landscape_csv, m)?)?;
    m.add_function(wrap_pyfunction!(find_extrema, m)?)?;
    m.add_function(wrap_pyfunction!(newcomb_spec_json, m)?)?;
    m.add_function(wrap_pyfunction!(run_spec, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
