//! Python module `loewner`: driving terms, Loewner flows, traces, hitting
//! times, conformal welding and the catching recursions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use loewner_core::driving::{self, DrivingError};
use loewner_core::flow::{self, FlowError, RealStatus};
use loewner_core::recursion::{self, RecursionError, DEFAULT_CAP};
use loewner_core::threshold::{self, ThresholdError, ThresholdOutcome};
use loewner_core::trace::{self, DiagnosticThresholds, TraceError};
use loewner_core::welding::{self, QuasislitGrid, WeldingError};
use loewner_core::{io, svg, Complex64};
use pyo3::create_exception;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

create_exception!(loewner, NumericalError, PyRuntimeError, "Integration or root finding failed.");

fn invalid(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn numerical(e: impl ToString) -> PyErr {
    NumericalError::new_err(e.to_string())
}

fn flow_err(e: FlowError) -> PyErr {
    match e {
        FlowError::InvalidInitial(_) | FlowError::InvalidConfig(_) => invalid(e),
        _ => numerical(e),
    }
}

fn driving_err(e: DrivingError) -> PyErr {
    invalid(e)
}

fn trace_err(e: TraceError) -> PyErr {
    match e {
        TraceError::Flow(f) => flow_err(f),
        other => invalid(other),
    }
}

fn welding_err(e: WeldingError) -> PyErr {
    match e {
        WeldingError::Flow(f) => flow_err(f),
        WeldingError::NoHitWithinBudget { .. } | WeldingError::BracketFailure { .. } => numerical(e),
        _ => invalid(e),
    }
}

fn threshold_err(e: ThresholdError) -> PyErr {
    match e {
        ThresholdError::Flow { source, .. } => flow_err(source),
        other => invalid(other),
    }
}

fn recursion_err(e: RecursionError) -> PyErr {
    match e {
        RecursionError::OutOfRange(_) => invalid(e),
        _ => numerical(e),
    }
}

/// A continuous driving function on `[0, T]`.
#[pyclass(name = "DrivingTerm", module = "loewner", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDrivingTerm {
    inner: driving::DrivingTerm,
}

fn wrap(inner: driving::DrivingTerm) -> PyDrivingTerm {
    PyDrivingTerm { inner }
}

#[pymethods]
impl PyDrivingTerm {
    #[staticmethod]
    #[pyo3(signature = (value, horizon=1.0))]
    fn constant(value: f64, horizon: f64) -> PyResult<Self> {
        driving::DrivingTerm::constant(value, horizon).map(wrap).map_err(driving_err)
    }

    #[staticmethod]
    #[pyo3(signature = (base, slope, horizon=1.0))]
    fn linear(base: f64, slope: f64, horizon: f64) -> PyResult<Self> {
        driving::DrivingTerm::linear(base, slope, horizon).map(wrap).map_err(driving_err)
    }

    /// `base + c sqrt(t)`.
    #[staticmethod]
    #[pyo3(signature = (c, horizon=1.0, base=0.0))]
    fn sqrt_t(c: f64, horizon: f64, base: f64) -> PyResult<Self> {
        driving::DrivingTerm::sqrt_t(base, c, horizon).map(wrap).map_err(driving_err)
    }

    /// `c - c sqrt(1 - t)` on `[0, 1]`.
    #[staticmethod]
    fn catching_family(c: f64) -> PyResult<Self> {
        driving::DrivingTerm::catching_family(c).map(wrap).map_err(driving_err)
    }

    /// `3/2 - 3/2 sqrt(1 - 8t)`, generating the half circle `|z - 1/2| = 1/2`.
    #[staticmethod]
    #[pyo3(signature = (horizon=None))]
    fn half_circle(horizon: Option<f64>) -> PyResult<Self> {
        match horizon {
            None => Ok(wrap(driving::DrivingTerm::half_circle())),
            Some(h) => driving::DrivingTerm::half_circle_until(h).map(wrap).map_err(driving_err),
        }
    }

    #[staticmethod]
    fn tabulated(times: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        driving::DrivingTerm::tabulated(times, values).map(wrap).map_err(driving_err)
    }

    #[staticmethod]
    #[pyo3(signature = (kappa, seed, horizon=1.0, resolution=1000))]
    fn brownian(kappa: f64, seed: u64, horizon: f64, resolution: usize) -> PyResult<Self> {
        driving::brownian(kappa, seed, horizon, resolution).map(wrap).map_err(driving_err)
    }

    /// Reads a `t,value` CSV file.
    #[staticmethod]
    fn from_csv(path: &str) -> PyResult<Self> {
        let file = std::fs::File::open(path).map_err(invalid)?;
        io::read_driving(file).map(wrap).map_err(invalid)
    }

    fn to_csv(&self, path: &str, n: usize) -> PyResult<()> {
        let file = std::fs::File::create(path).map_err(invalid)?;
        io::write_driving(file, &self.inner, n).map_err(invalid)
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.inner.horizon()
    }

    fn __call__(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    fn eval(&self, t: f64) -> f64 {
        self.inner.eval(t)
    }

    /// `(norm, exact)`: the Lip(1/2) norm and whether it is exact or sampled.
    #[pyo3(signature = (grid=256))]
    fn lip_half_norm(&self, grid: usize) -> (f64, bool) {
        let est = self.inner.lip_half_norm(grid);
        (est.norm, est.exact)
    }

    fn rescale(&self, r: f64) -> PyResult<Self> {
        self.inner.rescale(r).map(wrap).map_err(driving_err)
    }

    fn reverse(&self) -> Self {
        wrap(self.inner.reverse())
    }

    fn truncate(&self, t: f64) -> PyResult<Self> {
        self.inner.truncate(t).map(wrap).map_err(driving_err)
    }

    fn sample_uniform(&self, n: usize) -> Vec<f64> {
        self.inner.sample_uniform(n)
    }

    fn __repr__(&self) -> String {
        format!("DrivingTerm(horizon={}, pieces={})", self.inner.horizon(), self.inner.pieces().len())
    }
}

/// Integrator settings.
#[pyclass(name = "SolverConfig", module = "loewner", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySolverConfig {
    inner: flow::SolverConfig,
}

#[pymethods]
impl PySolverConfig {
    #[new]
    #[pyo3(signature = (dt=1e-3, eps_sing=1e-8, max_steps=5_000_000))]
    fn new(dt: f64, eps_sing: f64, max_steps: usize) -> PyResult<Self> {
        let inner = flow::SolverConfig::default()
            .with_dt(dt)
            .with_eps_sing(eps_sing)
            .with_max_steps(max_steps);
        inner.validate().map_err(flow_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt
    }

    #[getter]
    fn eps_sing(&self) -> f64 {
        self.inner.eps_sing
    }

    #[getter]
    fn max_steps(&self) -> usize {
        self.inner.max_steps
    }
}

fn config(cfg: Option<&PySolverConfig>) -> flow::SolverConfig {
    cfg.map(|c| c.inner).unwrap_or_default()
}

/// Outcome of a real flow: `status` is "alive" or "caught".
#[pyclass(name = "RealFlowResult", module = "loewner", frozen, get_all)]
struct PyRealFlowResult {
    status: &'static str,
    /// Final time, or the catch time.
    t: f64,
    /// Final position, or the driving value at the catch.
    x: f64,
    steps: usize,
    trajectory: Option<Vec<(f64, f64)>>,
}

#[pymethods]
impl PyRealFlowResult {
    fn __repr__(&self) -> String {
        format!("RealFlowResult(status={:?}, t={}, x={})", self.status, self.t, self.x)
    }
}

fn real_flow(out: flow::RealFlowOutcome) -> PyRealFlowResult {
    let (status, t, x) = match out.status {
        RealStatus::Alive { t, x } => ("alive", t, x),
        RealStatus::Caught { t_star, value } => ("caught", t_star, value),
    };
    PyRealFlowResult {
        status,
        t,
        x,
        steps: out.steps,
        trajectory: out.trajectory,
    }
}

#[pyfunction]
#[pyo3(signature = (x0, d, t_end, cfg=None, record=false))]
fn advance_bwr(
    x0: f64,
    d: &PyDrivingTerm,
    t_end: f64,
    cfg: Option<&PySolverConfig>,
    record: bool,
) -> PyResult<PyRealFlowResult> {
    let mut c = config(cfg);
    c.record = record;
    flow::advance_bwr(x0, &d.inner, t_end, &c).map(real_flow).map_err(flow_err)
}

#[pyfunction]
#[pyo3(signature = (x0, d, t_end, cfg=None, record=false))]
fn advance_fwr(
    x0: f64,
    d: &PyDrivingTerm,
    t_end: f64,
    cfg: Option<&PySolverConfig>,
    record: bool,
) -> PyResult<PyRealFlowResult> {
    let mut c = config(cfg);
    c.record = record;
    flow::advance_fwr(x0, &d.inner, t_end, &c).map(real_flow).map_err(flow_err)
}

/// `(g_t(z0), swallowing time or None)`.
#[pyfunction]
#[pyo3(signature = (z0, d, t_end, cfg=None))]
fn advance_bw(
    z0: Complex64,
    d: &PyDrivingTerm,
    t_end: f64,
    cfg: Option<&PySolverConfig>,
) -> PyResult<(Complex64, Option<f64>)> {
    let out = flow::advance_bw(z0, &d.inner, t_end, &config(cfg)).map_err(flow_err)?;
    Ok((out.z, out.swallowed_at))
}

#[pyfunction]
#[pyo3(signature = (z0, d, t_end, cfg=None))]
fn advance_fw(
    z0: Complex64,
    d: &PyDrivingTerm,
    t_end: f64,
    cfg: Option<&PySolverConfig>,
) -> PyResult<Complex64> {
    flow::advance_fw(z0, &d.inner, t_end, &config(cfg))
        .map(|o| o.z)
        .map_err(flow_err)
}

#[pyfunction]
fn vertical_slit_map(z: Complex64, xi: f64, dt: f64) -> Complex64 {
    flow::vertical_slit_map(z, xi, dt)
}

#[pyfunction]
fn vertical_slit_inverse(z: Complex64, xi: f64, dt: f64) -> Complex64 {
    flow::vertical_slit_inverse(z, xi, dt)
}

/// Sampled curve `gamma(t)`.
#[pyclass(name = "Trace", module = "loewner", frozen)]
struct PyTrace {
    inner: trace::Trace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn times(&self) -> Vec<f64> {
        self.inner.samples.iter().map(|s| s.0).collect()
    }

    #[getter]
    fn points(&self) -> Vec<Complex64> {
        self.inner.points().collect()
    }

    #[getter]
    fn n_steps(&self) -> usize {
        self.inner.n_steps
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn max_circle_deviation(&self, center: Complex64, radius: f64) -> f64 {
        self.inner.max_circle_deviation(center, radius)
    }

    /// Dict with min_separation, min_im, min_height_ratio, min_chord_arc, simple_plausible.
    #[pyo3(signature = (min_height_ratio=0.1, min_chord_arc=0.05))]
    fn diagnostics<'py>(
        &self,
        py: Python<'py>,
        min_height_ratio: f64,
        min_chord_arc: f64,
    ) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let rep = trace::slit_diagnostics(
            &self.inner,
            DiagnosticThresholds {
                min_height_ratio,
                min_chord_arc,
            },
        )
        .map_err(trace_err)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("min_separation", rep.min_separation)?;
        d.set_item("min_im", rep.min_im)?;
        d.set_item("min_height_ratio", rep.min_height_ratio)?;
        d.set_item("min_chord_arc", rep.min_chord_arc)?;
        d.set_item("simple_plausible", rep.simple_plausible)?;
        Ok(d)
    }

    fn to_csv(&self, path: &str) -> PyResult<()> {
        let file = std::fs::File::create(path).map_err(invalid)?;
        io::write_trace(file, &self.inner).map_err(invalid)
    }

    fn to_svg(&self, path: &str) -> PyResult<()> {
        let text = svg::render(&[&self.inner], &svg::SvgOptions::fitted(&[&self.inner]));
        std::fs::write(path, text).map_err(invalid)
    }
}

#[pyfunction]
fn compose_trace(py: Python<'_>, d: &PyDrivingTerm, n: usize) -> PyResult<PyTrace> {
    let inner = py.detach(|| trace::compose_trace(&d.inner, n)).map_err(trace_err)?;
    Ok(PyTrace { inner })
}

#[pyfunction]
#[pyo3(signature = (d, t, eps, cfg=None))]
fn tip_by_flow(d: &PyDrivingTerm, t: f64, eps: f64, cfg: Option<&PySolverConfig>) -> PyResult<Complex64> {
    trace::tip_by_flow(&d.inner, t, eps, &config(cfg)).map_err(trace_err)
}

#[pyclass(name = "HittingRecord", module = "loewner", frozen, get_all)]
struct PyHittingRecord {
    x0: f64,
    t_hit: f64,
    terminal: f64,
    resolution: f64,
}

#[pyfunction]
#[pyo3(signature = (x0, d, cfg=None))]
fn hitting_time(x0: f64, d: &PyDrivingTerm, cfg: Option<&PySolverConfig>) -> PyResult<PyHittingRecord> {
    let h = welding::hitting_time(x0, &d.inner, &config(cfg)).map_err(welding_err)?;
    Ok(PyHittingRecord {
        x0: h.x0,
        t_hit: h.t_hit,
        terminal: h.terminal,
        resolution: h.resolution,
    })
}

#[pyclass(name = "WeldingPair", module = "loewner", frozen, get_all)]
struct PyWeldingPair {
    x: f64,
    phi_x: f64,
    t_hit: f64,
    residual: f64,
}

#[pyfunction]
#[pyo3(signature = (x, d, cfg=None))]
fn welding_point(x: f64, d: &PyDrivingTerm, cfg: Option<&PySolverConfig>) -> PyResult<PyWeldingPair> {
    let p = welding::welding_point(x, &d.inner, &config(cfg)).map_err(welding_err)?;
    Ok(PyWeldingPair {
        x: p.x,
        phi_x: p.phi_x,
        t_hit: p.t_hit,
        residual: p.residual,
    })
}

type TripleRow = (f64, f64, f64, f64);

/// `(min, max, distortion, rows)` over dyadic triples right of `d(0)`; rows are `(x, y, z, ratio)`.
#[pyfunction]
#[pyo3(signature = (d, max_offset=4.0, levels=4, cfg=None))]
fn quasisymmetry_scan(
    py: Python<'_>,
    d: &PyDrivingTerm,
    max_offset: f64,
    levels: u32,
    cfg: Option<&PySolverConfig>,
) -> PyResult<(f64, f64, f64, Vec<TripleRow>)> {
    let cfg = config(cfg);
    let rep = py
        .detach(|| {
            let triples = welding::dyadic_triples(d.inner.initial(), max_offset, levels);
            welding::quasisymmetry_scan(&d.inner, &triples, &cfg)
        })
        .map_err(welding_err)?;
    let rows = rep.rows.iter().map(|r| (r.x, r.y, r.z, r.ratio)).collect();
    Ok((rep.min, rep.max, rep.constant(), rows))
}

#[pyfunction]
#[pyo3(signature = (d, alpha, beta, cfg=None))]
fn ratio_check(d: &PyDrivingTerm, alpha: f64, beta: f64, cfg: Option<&PySolverConfig>) -> PyResult<f64> {
    welding::ratio_check(&d.inner, alpha, beta, &config(cfg)).map_err(welding_err)
}

/// `(M, passed)` for the two welding conditions on a dyadic grid.
#[pyfunction]
#[pyo3(signature = (d, cap, max_offset=4.0, levels=4, cfg=None))]
fn quasislit_conditions(
    d: &PyDrivingTerm,
    cap: f64,
    max_offset: f64,
    levels: u32,
    cfg: Option<&PySolverConfig>,
) -> PyResult<(f64, bool)> {
    let grid = QuasislitGrid { max_offset, levels };
    let rep = welding::quasislit_conditions(&d.inner, grid, cap, &config(cfg)).map_err(welding_err)?;
    Ok((rep.m, rep.pass))
}

/// `h_n(c)`, or None once undefined.
#[pyfunction]
fn h_n(c: f64, n: usize) -> Option<f64> {
    recursion::h_n(c, n)
}

/// Largest root of `h_n`.
#[pyfunction]
#[pyo3(signature = (n, tol=1e-14))]
fn x_n(n: usize, tol: f64) -> f64 {
    recursion::x_n_root(n, tol)
}

#[pyfunction]
fn e_n(c: f64, eps: f64, n: usize) -> Option<f64> {
    recursion::e_n(c, eps, n)
}

/// `(epsilon, index, c_used)`: the certified gap bound for norm `c < 4`.
#[pyfunction]
#[pyo3(signature = (c, cap=DEFAULT_CAP, tol=1e-6))]
fn epsilon_bound(c: f64, cap: usize, tol: f64) -> PyResult<(f64, usize, f64)> {
    let cert = recursion::epsilon_bound(c, cap, tol).map_err(recursion_err)?;
    Ok((cert.epsilon, cert.index, cert.c_used))
}

/// Per `c`: `(c, "alive", gap)` or `(c, "caught", t_star)` for the family
/// `sqrt1mt` (`c - c sqrt(1 - t)`) or `sqrtt` (`c sqrt(t)` on `[0, horizon]`).
#[pyfunction]
#[pyo3(signature = (cs, x0=1e-4, family="sqrt1mt", horizon=1.0, cfg=None))]
fn threshold_sweep(
    py: Python<'_>,
    cs: Vec<f64>,
    x0: f64,
    family: &str,
    horizon: f64,
    cfg: Option<&PySolverConfig>,
) -> PyResult<Vec<(f64, &'static str, f64)>> {
    let make = |c: f64| match family {
        "sqrt1mt" => driving::DrivingTerm::catching_family(c),
        "sqrtt" => driving::DrivingTerm::sqrt_t(0.0, c, horizon),
        other => Err(DrivingError::InvalidParameter(format!("unknown family `{other}`"))),
    };
    let cfg = config(cfg);
    let rows = py
        .detach(|| threshold::threshold_sweep(&cs, x0, make, &cfg))
        .map_err(threshold_err)?;
    Ok(rows
        .iter()
        .map(|r| match r.outcome {
            ThresholdOutcome::Gap(g) => (r.c, "alive", g),
            ThresholdOutcome::Caught { t_star, .. } => (r.c, "caught", t_star),
        })
        .collect())
}

#[pymodule]
fn loewner(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("NumericalError", m.py().get_type::<NumericalError>())?;
    m.add_class::<PyDrivingTerm>()?;
    m.add_class::<PySolverConfig>()?;
    m.add_class::<PyRealFlowResult>()?;
    m.add_class::<PyTrace>()?;
    m.add_class::<PyHittingRecord>()?;
    m.add_class::<PyWeldingPair>()?;
    m.add_function(wrap_pyfunction!(advance_bwr, m)?)?;
    m.add_function(wrap_pyfunction!(advance_fwr, m)?)?;
    m.add_function(wrap_pyfunction!(advance_bw, m)?)?;
    m.add_function(wrap_pyfunction!(advance_fw, m)?)?;
    m.add_function(wrap_pyfunction!(vertical_slit_map, m)?)?;
    m.add_function(wrap_pyfunction!(vertical_slit_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(compose_trace, m)?)?;
    m.add_function(wrap_pyfunction!(tip_by_flow, m)?)?;
    m.add_function(wrap_pyfunction!(hitting_time, m)?)?;
    m.add_function(wrap_pyfunction!(welding_point, m)?)?;
    m.add_function(wrap_pyfunction!(quasisymmetry_scan, m)?)?;
    m.add_function(wrap_pyfunction!(ratio_check, m)?)?;
    m.add_function(wrap_pyfunction!(quasislit_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(h_n, m)?)?;
    m.add_function(wrap_pyfunction!(x_n, m)?)?;
    m.add_function(wrap_pyfunction!(e_n, m)?)?;
    m.add_function(wrap_pyfunction!(epsilon_bound, m)?)?;
    m.add_function(wrap_pyfunction!(threshold_sweep, m)?)?;
    Ok(())
}
