//! Python bindings: weights, measures, scenarios and the four operations
//! of the command line (`evaluate`, `discretize`, `oracle`, `verify`).

use std::path::Path;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use hardykit::cli::scenario_file::Document;
use hardykit::cli::verify as verify_mod;
use hardykit::conditions::evaluate_scenario;
use hardykit::discretize::discretize_scenario;
use hardykit::grid::GridSpec;
use hardykit::oracle::{best_lower, OracleConfig};
use hardykit::scenario::{Form, PathMode, Scenario as CoreScenario};
use hardykit::stieltjes::BorelMeasure;
use hardykit::weights::RadialWeight;
use hardykit::{Error, ExtReal};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Io(e) => PyOSError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn ext(x: ExtReal) -> f64 {
    if x.is_infinite() {
        f64::INFINITY
    } else {
        x.get()
    }
}

/// A radial weight `w(|x|)`.
#[pyclass(module = "hardykit", frozen, from_py_object)]
#[derive(Clone)]
struct Weight(RadialWeight);

#[pymethods]
impl Weight {
    /// `c t^alpha`.
    #[staticmethod]
    fn power(c: f64, alpha: f64) -> Self {
        Weight(RadialWeight::power(c, alpha))
    }

    /// `c_k t^{alpha_k}` between consecutive breaks.
    #[staticmethod]
    fn piecewise(breaks: Vec<f64>, pieces: Vec<(f64, f64)>) -> PyResult<Self> {
        let w = RadialWeight::PiecewisePower { breaks, pieces };
        w.validate().map_err(py_err)?;
        Ok(Weight(w))
    }

    /// Samples joined log-linearly, power tails outside.
    #[staticmethod]
    fn table(radii: Vec<f64>, values: Vec<f64>, tail0: f64, tailinf: f64) -> PyResult<Self> {
        let w = RadialWeight::Tabulated { radii, values, tail0, tailinf };
        w.validate().map_err(py_err)?;
        Ok(Weight(w))
    }

    #[staticmethod]
    fn zero() -> Self {
        Weight(RadialWeight::zero())
    }

    #[staticmethod]
    fn infinite() -> Self {
        Weight(RadialWeight::Infinite)
    }

    fn __call__(&self, t: f64) -> f64 {
        self.0.value(t)
    }

    fn __repr__(&self) -> String {
        format!("Weight({:?})", self.0)
    }
}

/// A Borel measure on `(0, ∞)`: a density plus atoms.
#[pyclass(module = "hardykit", frozen, from_py_object)]
#[derive(Clone)]
struct Measure(BorelMeasure);

#[pymethods]
impl Measure {
    #[new]
    #[pyo3(signature = (density=None, atoms=Vec::new()))]
    fn new(density: Option<Weight>, atoms: Vec<(f64, f64)>) -> PyResult<Self> {
        let m = BorelMeasure { atoms, density: density.map(|w| w.0), stieltjes: None };
        m.validate().map_err(py_err)?;
        Ok(Measure(m))
    }

    fn __repr__(&self) -> String {
        format!("Measure(density={:?}, atoms={:?})", self.0.density, self.0.atoms)
    }
}

#[pyclass(module = "hardykit", frozen, from_py_object)]
#[derive(Clone)]
struct Scenario(CoreScenario);

fn finish(s: CoreScenario, form: &str, path: &str, id: &str) -> PyResult<Scenario> {
    let form: Form = form.parse().map_err(py_err)?;
    let path: PathMode = path.parse().map_err(py_err)?;
    Ok(Scenario(s.with_form(form).with_path(path).with_id(id)))
}

#[pymethods]
impl Scenario {
    #[staticmethod]
    #[pyo3(signature = (n, p1, p2, q, u, v1, v2, *, form="dual", path="auto", id="bilinear"))]
    #[allow(clippy::too_many_arguments)]
    fn bilinear(n: usize, p1: f64, p2: f64, q: f64, u: Weight, v1: Weight, v2: Weight, form: &str, path: &str, id: &str) -> PyResult<Self> {
        let s = CoreScenario::bilinear(n, p1, p2, q, u.0, v1.0, v2.0).map_err(py_err)?;
        finish(s, form, path, id)
    }

    #[staticmethod]
    #[pyo3(signature = (n, p, q, theta, u, v, mu, *, path="auto", id="iterated"))]
    #[allow(clippy::too_many_arguments)]
    fn iterated(n: usize, p: f64, q: f64, theta: f64, u: Weight, v: Weight, mu: Measure, path: &str, id: &str) -> PyResult<Self> {
        let s = CoreScenario::iterated(n, p, q, theta, u.0, v.0, mu.0).map_err(py_err)?;
        finish(s, "dual", path, id)
    }

    /// Every scenario of a scenario file (one unless it declares a sweep).
    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Vec<Scenario>> {
        let doc = Document::read(Path::new(path)).map_err(py_err)?;
        Ok(doc.scenarios().map_err(py_err)?.into_iter().map(Scenario).collect())
    }

    /// Copy with another evaluation grid.
    fn with_grid(&self, t_min: f64, t_max: f64, points: usize) -> Self {
        Scenario(self.0.clone().with_grid(GridSpec { t_min, t_max, points }))
    }

    #[getter]
    fn id(&self) -> String {
        self.0.id.clone()
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n
    }

    #[getter]
    fn is_iterated(&self) -> bool {
        self.0.is_iterated()
    }

    fn __repr__(&self) -> String {
        format!("Scenario(id={:?}, n={}, iterated={})", self.0.id, self.0.n, self.0.is_iterated())
    }
}

#[pyclass(module = "hardykit", frozen, get_all)]
struct Report {
    scenario_id: String,
    case: String,
    constant: f64,
    verdict: String,
    factors: Vec<(String, f64)>,
    preconditions_ok: bool,
    preconditions: String,
    note: Option<String>,
    line: String,
}

/// Classifies a scenario and evaluates its condition constant.
#[pyfunction]
fn evaluate(s: &Scenario) -> Report {
    let r = evaluate_scenario(&s.0);
    Report {
        scenario_id: r.scenario_id.clone(),
        case: r.kind.tag().to_string(),
        constant: ext(r.constant),
        verdict: r.verdict.to_string(),
        factors: r.factors.iter().map(|(k, v)| (k.clone(), ext(*v))).collect(),
        preconditions_ok: r.preconditions.ok(),
        preconditions: r.preconditions.describe(),
        note: r.note.clone(),
        line: r.summary_line(),
    }
}

#[pyclass(module = "hardykit", frozen, get_all)]
struct Discretization {
    lam: f64,
    d: f64,
    ks: Vec<i64>,
    points: Vec<f64>,
    classes: Vec<String>,
    phi: Vec<f64>,
    big_u: Vec<f64>,
    clauses_ok: bool,
}

/// Discretizing sequence of an iterated scenario.
#[pyfunction]
#[pyo3(signature = (s, lam=2.0))]
fn discretize(s: &Scenario, lam: f64) -> PyResult<Discretization> {
    let d = discretize_scenario(&s.0, lam).map_err(py_err)?;
    let seq = &d.seq;
    Ok(Discretization {
        lam: seq.lambda,
        d: seq.d,
        ks: seq.ks().collect(),
        points: seq.points.clone(),
        classes: seq.classes.iter().map(|c| c.to_string()).collect(),
        phi: seq.indices.iter().map(|&i| d.phi.vals[i]).collect(),
        big_u: seq.indices.iter().map(|&i| d.big_u.vals[i]).collect(),
        clauses_ok: seq.check_clauses(&d.phi, &d.b).all(),
    })
}

#[pyclass(module = "hardykit", frozen, get_all)]
struct LowerBound {
    value: f64,
    label: Option<String>,
    nodes: Vec<f64>,
    f: Option<Vec<f64>>,
    g: Option<Vec<f64>>,
}

/// Brute-force lower bound on the best constant.
#[pyfunction]
#[pyo3(signature = (s, cells=64, seed=0, starts=16))]
fn oracle(s: &Scenario, cells: usize, seed: u64, starts: usize) -> PyResult<LowerBound> {
    let cfg = OracleConfig { cells, seed, starts, ..OracleConfig::default() };
    let r = best_lower(&s.0, &cfg).map_err(py_err)?;
    let (label, f, g) = match r.argmax {
        Some(a) => (Some(a.label), Some(a.f), a.g),
        None => (None, None, None),
    };
    Ok(LowerBound { value: ext(r.value), label, nodes: r.nodes, f, g })
}

#[pyclass(module = "hardykit", frozen, get_all)]
struct Verification {
    outcome: String,
    constant: f64,
    lower: Vec<(usize, f64)>,
    ratio: Option<f64>,
    ratio_refined: Option<f64>,
    stable: Option<bool>,
    line: String,
}

/// Condition constant against oracle bounds at `cells` and `2 cells`.
#[pyfunction]
#[pyo3(signature = (s, cells=64, seed=0))]
fn verify(s: &Scenario, cells: usize, seed: u64) -> PyResult<Verification> {
    let v = verify_mod::verify(&s.0, cells, seed).map_err(py_err)?;
    Ok(Verification {
        outcome: v.outcome.to_string(),
        constant: ext(v.report.constant),
        lower: v.lower.iter().map(|(n, l)| (*n, ext(*l))).collect(),
        ratio: v.ratio,
        ratio_refined: v.ratio_refined,
        stable: v.stable,
        line: v.line(),
    })
}

/// `𝒰(x, t) = U(x) / (U(t) + U(x))` from the two values.
#[pyfunction]
fn cal_u(ux: f64, ut: f64) -> f64 {
    hardykit::weights::cal_u(ux, ut)
}

#[pymodule]
#[pyo3(name = "hardykit")]
fn hardykit_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Weight>()?;
    m.add_class::<Measure>()?;
    m.add_class::<Scenario>()?;
    m.add_class::<Report>()?;
    m.add_class::<Discretization>()?;
    m.add_class::<LowerBound>()?;
    m.add_class::<Verification>()?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(discretize, m)?)?;
    m.add_function(wrap_pyfunction!(oracle, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(cal_u, m)?)?;
    Ok(())
}
