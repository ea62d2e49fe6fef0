//! Python bindings. Structured results (verdicts, decay reports) come back as
//! plain dicts; curves and profiles as objects with list-valued attributes.

use ::blayer as core;
use core::{
    CurveLabel, EndState as CoreEnd, Engine as CoreEngine, GasParams as CoreGas, PhasePoint,
    PortraitOptions, SweepSpec, Tolerances,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(blayer, BlayerError, PyException);

fn err(e: core::Error) -> PyErr {
    BlayerError::new_err(format!("{}: {}", e.kind(), e))
}

fn to_py<'py>(py: Python<'py>, v: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn label(name: &str) -> PyResult<CurveLabel> {
    match name.to_ascii_lowercase().as_str() {
        "sigma" => Ok(CurveLabel::Sigma),
        "gamma1" => Ok(CurveLabel::Gamma1),
        "gamma2" => Ok(CurveLabel::Gamma2),
        _ => Err(PyValueError::new_err(format!(
            "unknown curve `{name}` (expected sigma, gamma1 or gamma2)"
        ))),
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct GasParams(CoreGas);

#[pymethods]
impl GasParams {
    #[new]
    #[pyo3(signature = (gamma=1.4, r=1.0, mu=1.0, kappa=1.0))]
    fn new(gamma: f64, r: f64, mu: f64, kappa: f64) -> PyResult<Self> {
        CoreGas::new(gamma, r, mu, kappa).map(Self).map_err(err)
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.0.gamma()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.0.r()
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu()
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa()
    }

    fn sound_speed(&self, theta: f64) -> f64 {
        self.0.sound_speed(theta)
    }

    fn __repr__(&self) -> String {
        format!(
            "GasParams(gamma={}, r={}, mu={}, kappa={})",
            self.0.gamma(),
            self.0.r(),
            self.0.mu(),
            self.0.kappa()
        )
    }
}

#[pyclass(frozen, from_py_object)]
#[derive(Clone, Copy)]
struct EndState(CoreEnd);

#[pymethods]
impl EndState {
    #[new]
    fn new(v: f64, u: f64, theta: f64) -> PyResult<Self> {
        CoreEnd::new(v, u, theta).map(Self).map_err(err)
    }

    #[getter]
    fn v(&self) -> f64 {
        self.0.v()
    }

    #[getter]
    fn u(&self) -> f64 {
        self.0.u()
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta()
    }

    fn mach(&self, gas: &GasParams) -> f64 {
        core::mach(&self.0, &gas.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "EndState(v={}, u={}, theta={})",
            self.0.v(),
            self.0.u(),
            self.0.theta()
        )
    }
}

/// A traced existence curve, ordered from S1 outward.
#[pyclass(frozen)]
struct Curve {
    #[pyo3(get)]
    label: String,
    #[pyo3(get)]
    u: Vec<f64>,
    #[pyo3(get)]
    theta: Vec<f64>,
    #[pyo3(get)]
    terminal: String,
    #[pyo3(get)]
    terminal_point: (f64, f64),
    inner: core::Curve,
}

#[pymethods]
impl Curve {
    fn __len__(&self) -> usize {
        self.u.len()
    }

    /// Interpolated non-parameter coordinate at `t` (θ for Γ2, u otherwise).
    fn value_at(&self, t: f64) -> PyResult<f64> {
        self.inner.value_at(t).map_err(err)
    }

    /// `(on_curve, parameter, signed_distance)`.
    fn membership(&self, u: f64, theta: f64, tol: f64) -> PyResult<(bool, f64, f64)> {
        let m = self
            .inner
            .membership(PhasePoint::new(u, theta), tol)
            .map_err(err)?;
        Ok((m.is_on(), m.parameter(), m.distance()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Curve({}, {} samples, {})",
            self.label,
            self.u.len(),
            self.terminal
        )
    }
}

impl Curve {
    fn wrap(c: &core::Curve) -> Self {
        let tp = c.terminal.point();
        Curve {
            label: c.label.as_str().to_string(),
            u: c.samples.iter().map(|p| p.u).collect(),
            theta: c.samples.iter().map(|p| p.theta).collect(),
            terminal: c.terminal.kind().to_string(),
            terminal_point: (tp.u, tp.theta),
            inner: c.clone(),
        }
    }
}

/// Profile samples on a common ξ grid, ξ = 0 at the boundary.
#[pyclass(frozen)]
struct Profile {
    #[pyo3(get)]
    xi: Vec<f64>,
    #[pyo3(get)]
    v: Vec<f64>,
    #[pyo3(get)]
    u: Vec<f64>,
    #[pyo3(get)]
    theta: Vec<f64>,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    endpoint_distance: f64,
    #[pyo3(get)]
    monotone: bool,
    decay: serde_json::Value,
    decay_ok: bool,
}

#[pymethods]
impl Profile {
    fn __len__(&self) -> usize {
        self.xi.len()
    }

    #[getter]
    fn decay<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &self.decay)
    }

    #[getter]
    fn decay_ok(&self) -> bool {
        self.decay_ok
    }
}

/// Far-field state with cached traces of its existence curves.
#[pyclass(frozen)]
struct Engine(CoreEngine);

#[pymethods]
impl Engine {
    #[new]
    #[pyo3(signature = (gas, right, tol_member=None, tol_a=None, tol_m=None))]
    fn new(
        gas: &GasParams,
        right: &EndState,
        tol_member: Option<f64>,
        tol_a: Option<f64>,
        tol_m: Option<f64>,
    ) -> PyResult<Self> {
        let d = Tolerances::default();
        let tol = Tolerances {
            tol_member: tol_member.unwrap_or(d.tol_member),
            tol_a: tol_a.unwrap_or(d.tol_a),
            tol_m: tol_m.unwrap_or(d.tol_m),
        };
        CoreEngine::new(gas.0, right.0, tol).map(Self).map_err(err)
    }

    #[getter]
    fn regime(&self) -> &'static str {
        self.0.regime().tag.as_str()
    }

    #[getter]
    fn mach_plus(&self) -> f64 {
        self.0.system().mach_plus
    }

    /// Linearization at S1 as a dict (matrix, α1, α2, eigenvalues).
    fn linearization<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let s = self.0.system();
        let eig = self.0.eigen().map_err(err)?;
        let v = serde_json::json!({
            "a": [[s.a[0][0], s.a[0][1]], [s.a[1][0], s.a[1][1]]],
            "det": s.det_a(),
            "trace": s.tr_a(),
            "alpha1": s.alpha1,
            "alpha2": s.alpha2,
            "lambda1": eig.lambda1,
            "lambda2": eig.lambda2,
        });
        to_py(py, &v)
    }

    fn labels(&self) -> Vec<&'static str> {
        self.0.labels().iter().map(|l| l.as_str()).collect()
    }

    fn curve(&self, name: &str) -> PyResult<Curve> {
        self.0.curve(label(name)?).map(Curve::wrap).map_err(err)
    }

    fn decide<'py>(&self, py: Python<'py>, left: &EndState) -> PyResult<Bound<'py, PyAny>> {
        let v = self.0.decide(&left.0).map_err(err)?;
        to_py(py, &v.to_json(None))
    }

    fn profile(&self, left: &EndState) -> PyResult<Profile> {
        let verdict = self.0.decide(&left.0).map_err(err)?;
        let p = self.0.compute_profile(&left.0, &verdict).map_err(err)?;
        let decay = core::verify_decay(&p).map_err(err)?;
        Ok(Profile {
            residual: core::verify_residual(&p, self.0.system()),
            endpoint_distance: p.endpoint_distance(),
            monotone: p.monotone_ok(),
            decay: decay.to_json(),
            decay_ok: decay.ok(),
            xi: p.xi,
            v: p.v,
            u: p.u,
            theta: p.theta,
        })
    }

    #[pyo3(signature = (grid=5, span=3.0))]
    fn portrait_svg(&self, grid: usize, span: f64) -> PyResult<String> {
        let opts = PortraitOptions {
            grid,
            trajectory_span: span,
            ..Default::default()
        };
        core::portrait_svg(&self.0, &opts).map_err(err)
    }
}

/// One-shot existence decision for a left/right pair.
#[pyfunction]
fn decide<'py>(
    py: Python<'py>,
    gas: &GasParams,
    left: &EndState,
    right: &EndState,
) -> PyResult<Bound<'py, PyAny>> {
    let v = core::decide(&core::Query::new(gas.0, left.0, right.0)).map_err(err)?;
    to_py(py, &v.to_json(None))
}

/// Mach sweep; returns one dict per grid point.
#[pyfunction]
#[pyo3(signature = (gas, mach_min, mach_max, points=200, v_plus=1.0, theta_plus=1.0, trace=true))]
#[allow(clippy::too_many_arguments)]
fn sweep<'py>(
    py: Python<'py>,
    gas: &GasParams,
    mach_min: f64,
    mach_max: f64,
    points: usize,
    v_plus: f64,
    theta_plus: f64,
    trace: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = SweepSpec {
        gas: gas.0,
        v_plus,
        theta_plus,
        mach_min,
        mach_max,
        points,
        tol_m: Tolerances::default().tol_m,
        trace,
    };
    let rows = py.detach(|| core::sweep(&spec)).map_err(err)?;
    let v = serde_json::to_value(&rows).map_err(|e| PyValueError::new_err(e.to_string()))?;
    to_py(py, &v)
}

#[pymodule]
fn blayer(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("BlayerError", m.py().get_type::<BlayerError>())?;
    m.add_class::<GasParams>()?;
    m.add_class::<EndState>()?;
    m.add_class::<Curve>()?;
    m.add_class::<Profile>()?;
    m.add_class::<Engine>()?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    Ok(())
}
