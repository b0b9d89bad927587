//! Python bindings: `import pyadareg`.
//!
//! Vectors are lists of floats and matrices are lists of rows. Library errors
//! surface as `ValueError` for bad input and `RuntimeError` otherwise.

use adareg::engine::{AdaRegConfig, AdaRegState};
use adareg::harness::{self, ExperimentSpec, SetKind, Suite, VerifyOptions};
use adareg::linalg::{self, SymmetricMatrix, Vector};
use adareg::potentials::{minimize_regularizer, RegularizerDomain, SpectralPotential};
use adareg::problems::{OnlineProblem as CoreProblem, ProblemKind};
use adareg::sets::{FeasibleSet as CoreSet, NormKind};
use adareg::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_)
        | Error::Validation(_)
        | Error::DimensionMismatch { .. }
        | Error::RoundOutOfRange { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<SymmetricMatrix> {
    SymmetricMatrix::from_rows(&rows).map_err(to_py)
}

fn rows(m: &SymmetricMatrix) -> Vec<Vec<f64>> {
    let d = m.dim();
    (0..d)
        .map(|i| (0..d).map(|j| m.get(i, j)).collect())
        .collect()
}

fn domain(name: &str) -> PyResult<RegularizerDomain> {
    match name {
        "full" => Ok(RegularizerDomain::Full),
        "diagonal" => Ok(RegularizerDomain::Diagonal),
        "isotropic" => Ok(RegularizerDomain::Isotropic),
        _ => Err(PyValueError::new_err(format!(
            "unknown domain {name:?}; expected full, diagonal or isotropic"
        ))),
    }
}

/// A spectral potential `Φ(H) = Σ φ(λ_i(H))`.
#[pyclass(name = "Potential", module = "pyadareg", from_py_object)]
#[derive(Clone)]
struct Potential {
    inner: SpectralPotential,
}

#[pymethods]
impl Potential {
    #[staticmethod]
    fn adagrad(eta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SpectralPotential::adagrad(eta).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn ons(beta: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SpectralPotential::ons(beta).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn pnorm(eta: f64, p: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SpectralPotential::pnorm(eta, p).map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    fn phi(&self, x: f64) -> f64 {
        self.inner.phi(x)
    }

    fn phi_prime(&self, x: f64) -> f64 {
        self.inner.phi_prime(x)
    }

    fn phi_prime_inverse(&self, y: f64) -> PyResult<f64> {
        self.inner.phi_prime_inverse(y).map_err(to_py)
    }

    /// `Φ(H)` for a positive definite `H`.
    fn value(&self, h: Vec<Vec<f64>>) -> PyResult<f64> {
        self.inner.value(&matrix(h)?).map_err(to_py)
    }

    /// `argmin_H G • H + Φ(H)` over the given domain.
    #[pyo3(signature = (g, domain = "full"))]
    fn minimize(&self, g: Vec<Vec<f64>>, domain: &str) -> PyResult<Vec<Vec<f64>>> {
        let h =
            minimize_regularizer(&self.inner, &matrix(g)?, self::domain(domain)?).map_err(to_py)?;
        Ok(rows(&h))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "FeasibleSet", module = "pyadareg", from_py_object)]
#[derive(Clone)]
struct FeasibleSet {
    inner: CoreSet,
}

#[pymethods]
impl FeasibleSet {
    #[staticmethod]
    fn ball(center: Vec<f64>, radius: f64) -> PyResult<Self> {
        Ok(Self {
            inner: CoreSet::ball(center, radius).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(name = "box")]
    fn cube(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: CoreSet::cube(lower, upper).map_err(to_py)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (diameter = None))]
    fn unconstrained(diameter: Option<f64>) -> Self {
        Self {
            inner: CoreSet::unconstrained(diameter),
        }
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[pyo3(signature = (x, tol = 1e-9))]
    fn contains(&self, x: Vec<f64>, tol: f64) -> bool {
        self.inner.contains(&Vector::from_vec(x), tol)
    }

    /// `argmin_{y ∈ X} ‖y - x‖_M`.
    fn project(&self, x: Vec<f64>, m: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let y = self
            .inner
            .project(&Vector::from_vec(x), &matrix(m)?)
            .map_err(to_py)?;
        Ok(y.as_slice().to_vec())
    }

    /// Diameter in the `"euclidean"` or `"infinity"` norm.
    #[pyo3(signature = (norm = "euclidean"))]
    fn diameter(&self, norm: &str) -> PyResult<f64> {
        let kind = match norm {
            "euclidean" => NormKind::Euclidean,
            "infinity" => NormKind::Infinity,
            _ => return Err(PyValueError::new_err(format!("unknown norm {norm:?}"))),
        };
        self.inner.diameter(kind).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// The adaptive-regularization engine, stepped one gradient at a time.
#[pyclass(name = "Engine", module = "pyadareg")]
struct Engine {
    inner: AdaRegState,
}

#[pymethods]
impl Engine {
    #[new]
    #[pyo3(signature = (potential, set, x1, domain = "full", g0 = None, epsilon = 0.0))]
    fn new(
        potential: Potential,
        set: FeasibleSet,
        x1: Vec<f64>,
        domain: &str,
        g0: Option<Vec<Vec<f64>>>,
        epsilon: f64,
    ) -> PyResult<Self> {
        let d = x1.len();
        let g0 = match g0 {
            Some(m) => matrix(m)?,
            None => SymmetricMatrix::scaled_identity(d, epsilon),
        };
        let config = AdaRegConfig::new(
            potential.inner,
            self::domain(domain)?,
            set.inner,
            Vector::from_vec(x1),
            g0,
            epsilon,
        )
        .map_err(to_py)?;
        Ok(Self {
            inner: AdaRegState::init(config).map_err(to_py)?,
        })
    }

    /// Builds the engine for a named preset; `eta` only applies to pnorm.
    #[staticmethod]
    #[pyo3(signature = (name, set, x1, b = None, epsilon = 1e-8, p = 2.0, eta = None, beta = None, gamma = None, alpha = None))]
    #[allow(clippy::too_many_arguments)]
    fn preset(
        name: &str,
        set: FeasibleSet,
        x1: Vec<f64>,
        b: Option<f64>,
        epsilon: f64,
        p: f64,
        eta: Option<f64>,
        beta: Option<f64>,
        gamma: Option<f64>,
        alpha: Option<f64>,
    ) -> PyResult<Self> {
        use adareg::Preset;
        let need = |v: Option<f64>, what: &str| {
            v.ok_or_else(|| PyValueError::new_err(format!("{name} needs {what}")))
        };
        let diam = |norm| set.inner.diameter(norm).map_err(to_py);
        let b_or = |norm| b.map(Ok).unwrap_or_else(|| diam(norm));
        let preset = match name {
            "adagrad-full" => Preset::adagrad_full(b_or(NormKind::Euclidean)?, epsilon),
            "adagrad-diag" => Preset::adagrad_diag(b_or(NormKind::Infinity)?, epsilon),
            "adaptive-ogd" => {
                Preset::adaptive_ogd(b_or(NormKind::Euclidean)? / std::f64::consts::SQRT_2)
            }
            "pnorm" => Preset::pnorm(b_or(NormKind::Euclidean)?, p, eta, epsilon),
            "ons-full" => Preset::ons_full(
                need(beta, "beta")?,
                b_or(NormKind::Euclidean)?,
                need(gamma, "gamma")?,
            ),
            "ons-diag" => Preset::ons_diag(
                need(beta, "beta")?,
                b_or(NormKind::Euclidean)?,
                need(gamma, "gamma")?,
            ),
            "sc-ogd" => Preset::sc_ogd(need(alpha, "alpha")?, need(gamma, "gamma")?),
            _ => return Err(PyValueError::new_err(format!("unknown preset {name:?}"))),
        }
        .map_err(to_py)?;
        let config = preset
            .config(set.inner, Vector::from_vec(x1))
            .map_err(to_py)?;
        Ok(Self {
            inner: AdaRegState::init(config).map_err(to_py)?,
        })
    }

    /// Feeds one gradient and returns the next iterate.
    fn step(&mut self, g: Vec<f64>) -> PyResult<Vec<f64>> {
        let out = self.inner.step(&Vector::from_vec(g)).map_err(to_py)?;
        Ok(out.x_next.as_slice().to_vec())
    }

    #[getter]
    fn t(&self) -> usize {
        self.inner.t()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x().as_slice().to_vec()
    }

    #[getter]
    fn g_acc(&self) -> Vec<Vec<f64>> {
        rows(self.inner.g_acc())
    }

    /// The current regularizer `H_t`, or `None` before the first update.
    #[getter]
    fn h(&self) -> Option<Vec<Vec<f64>>> {
        self.inner.regularizer().map(|r| rows(&r.h))
    }
}

/// A seeded synthetic problem family.
#[pyclass(name = "Problem", module = "pyadareg")]
struct Problem {
    inner: CoreProblem,
}

#[pymethods]
impl Problem {
    #[new]
    fn new(kind: &str, dim: usize, seed: u64, set: FeasibleSet) -> PyResult<Self> {
        let kind = ProblemKind::from_id(kind)
            .ok_or_else(|| PyValueError::new_err(format!("unknown problem {kind:?}")))?;
        Ok(Self {
            inner: CoreProblem::new(kind, dim, seed, set.inner).map_err(to_py)?,
        })
    }

    #[getter]
    fn name(&self) -> &'static str {
        self.inner.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    /// `(f_t(x), ∇f_t(x))` for round `t ≥ 1`.
    fn loss_and_gradient(&self, t: usize, x: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
        let (f, g) = self
            .inner
            .loss_and_gradient(t, &Vector::from_vec(x))
            .map_err(to_py)?;
        Ok((f, g.as_slice().to_vec()))
    }

    /// Declared curvature and gradient constants.
    fn constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = self.inner.constants();
        let d = PyDict::new(py);
        d.set_item("gamma", c.gamma)?;
        d.set_item("alpha", c.alpha)?;
        d.set_item("beta", c.beta)?;
        d.set_item("beta_coo", c.beta_coo)?;
        Ok(d)
    }
}

/// Runs one experiment and returns its summary as a dict.
#[pyfunction]
#[pyo3(signature = (algo, problem = None, dim = 10, horizon = 1000, seed = 0, set = "ball", radius = 1.0,
                    lower = -1.0, upper = 1.0, epsilon = None, eta = None, beta = None, p = None, alpha = None, gamma = None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment<'py>(
    py: Python<'py>,
    algo: String,
    problem: Option<String>,
    dim: usize,
    horizon: usize,
    seed: u64,
    set: &str,
    radius: f64,
    lower: f64,
    upper: f64,
    epsilon: Option<f64>,
    eta: Option<f64>,
    beta: Option<f64>,
    p: Option<f64>,
    alpha: Option<f64>,
    gamma: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let set = SetKind::from_id(set)
        .ok_or_else(|| PyValueError::new_err(format!("unknown set {set:?}")))?;
    let spec = ExperimentSpec {
        algo,
        problem,
        dim,
        horizon,
        seed,
        set,
        radius,
        lower,
        upper,
        epsilon,
        eta,
        beta,
        p,
        alpha,
        gamma,
    };
    let r = py.detach(|| harness::run_experiment(spec)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("preset", r.preset.id())?;
    d.set_item("final_regret", r.regret.final_regret())?;
    d.set_item("cumulative_regret", r.regret.cumulative_regret.clone())?;
    d.set_item("bound_prefix", r.bound_prefix.clone())?;
    d.set_item("tuned_eta", r.tuned_eta)?;
    d.set_item("comparator", r.comparator.point.as_slice().to_vec())?;
    match &r.certificate {
        Some(c) => {
            d.set_item("bound", c.bound)?;
            d.set_item("bound_formula", c.formula.id())?;
            d.set_item("certificate", if c.satisfied { "pass" } else { "fail" })?;
        }
        None => {
            d.set_item("bound", py.None())?;
            d.set_item("bound_formula", py.None())?;
            d.set_item("certificate", "not-applicable")?;
        }
    }
    Ok(d)
}

/// Runs the verification suites; returns `(passed, suite_lines, failures)`.
#[pyfunction]
#[pyo3(signature = (suites = None, trials = 20, seed = 0, tolerance = 1e-6))]
fn verify(
    py: Python<'_>,
    suites: Option<Vec<String>>,
    trials: usize,
    seed: u64,
    tolerance: f64,
) -> PyResult<(bool, Vec<String>, Vec<String>)> {
    let suites = match suites {
        None => Suite::ALL.to_vec(),
        Some(names) => names
            .iter()
            .map(|s| {
                Suite::from_id(s)
                    .ok_or_else(|| PyValueError::new_err(format!("unknown suite {s:?}")))
            })
            .collect::<PyResult<_>>()?,
    };
    let opts = VerifyOptions {
        suites: suites.clone(),
        trials,
        tolerance,
        seed,
        inject_fault: false,
    };
    let report = py.detach(|| harness::verify(&opts)).map_err(to_py)?;
    Ok((
        report.passed(),
        report.suite_lines(&suites),
        report.manifest(),
    ))
}

/// Eigendecomposition of a symmetric matrix: `(eigenvalues, eigenvectors as columns)`.
#[pyfunction]
fn eig_sym(a: Vec<Vec<f64>>) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let e = linalg::eig_sym(&matrix(a)?);
    let d = e.eigenvalues.len();
    let vecs = (0..d)
        .map(|i| (0..d).map(|j| e.eigenvectors[(i, j)]).collect())
        .collect();
    Ok((e.eigenvalues.as_slice().to_vec(), vecs))
}

/// `√(xᵀ H x)`.
#[pyfunction]
fn mahalanobis_norm(x: Vec<f64>, h: Vec<Vec<f64>>) -> PyResult<f64> {
    linalg::mahalanobis_norm(&Vector::from_vec(x), &matrix(h)?).map_err(to_py)
}

/// Whether `A - B` is positive semidefinite up to `tol`.
#[pyfunction]
#[pyo3(signature = (a, b, tol = 1e-9))]
fn psd_geq(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>, tol: f64) -> PyResult<bool> {
    linalg::psd_geq(&matrix(a)?, &matrix(b)?, tol).map_err(to_py)
}

#[pymodule]
fn pyadareg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Potential>()?;
    m.add_class::<FeasibleSet>()?;
    m.add_class::<Engine>()?;
    m.add_class::<Problem>()?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(eig_sym, m)?)?;
    m.add_function(wrap_pyfunction!(mahalanobis_norm, m)?)?;
    m.add_function(wrap_pyfunction!(psd_geq, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
