//! Python bindings: build constructions, evaluate them exactly or in
//! floating point, read and write network files, and run claims.
//!
//! Exact values cross the boundary as strings (`"3/8"`), floats as `float`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use rand::SeedableRng;

use relucalc::analysis::exact_cpwl_1d;
use relucalc::claims::{find, registry, ClaimError, ClaimOptions};
use relucalc::constructions_1d::{bit_extract_net, hat01, sawtooth as sawtooth_net, BitExtractPlan};
use relucalc::constructions_product::{bspline_net, kproduct_net, product_net, square_net};
use relucalc::net_core::{format_scalar, load_str, parse_scalar, q_to_f64, to_json_string, NetError, ReluNet, StoredNet, Q};

fn value_err(e: NetError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A ReLU network with exact rational weights.
#[pyclass(name = "Net", module = "relucalc_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyNet {
    net: ReluNet<Q>,
}

#[pymethods]
impl PyNet {
    #[getter]
    fn input_dim(&self) -> usize {
        self.net.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.net.output_dim()
    }

    #[getter]
    fn width(&self) -> usize {
        self.net.width()
    }

    #[getter]
    fn depth(&self) -> usize {
        self.net.depth()
    }

    #[getter]
    fn param_count(&self) -> usize {
        self.net.stats().param_count
    }

    /// Evaluate at a point given as floats; the weights are rounded to f64.
    fn eval(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.net.to_mode::<f64>().eval(&x).map_err(value_err)
    }

    /// Evaluate exactly at a point given as rational strings (`"1/3"`).
    fn eval_exact(&self, x: Vec<String>) -> PyResult<Vec<String>> {
        let x: Vec<Q> = x.iter().map(|s| parse_scalar::<Q>(s)).collect::<Result<_, _>>().map_err(value_err)?;
        Ok(self.net.eval(&x).map_err(value_err)?.iter().map(format_scalar).collect())
    }

    /// Breakpoints of a scalar one-variable network in `[a, b]`, exact.
    #[pyo3(signature = (a = "0".to_string(), b = "1".to_string()))]
    fn breakpoints(&self, a: String, b: String) -> PyResult<Vec<String>> {
        let (a, b) = (parse_scalar::<Q>(&a).map_err(value_err)?, parse_scalar::<Q>(&b).map_err(value_err)?);
        let f = exact_cpwl_1d(&self.net).map_err(value_err)?;
        Ok(f.breakpoints_in(&a, &b).iter().map(format_scalar).collect())
    }

    /// The network in the JSON file format.
    fn to_json(&self) -> String {
        to_json_string(&StoredNet::from(self.net.clone()))
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let stored: StoredNet<Q> = load_str(text).map_err(value_err)?;
        Ok(PyNet { net: stored.net().clone() })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        std::fs::write(path, self.to_json()).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Self::from_json(&text)
    }

    fn __repr__(&self) -> String {
        format!("Net(d={}, d_out={}, width={}, depth={})", self.input_dim(), self.output_dim(), self.width(), self.depth())
    }
}

impl From<ReluNet<Q>> for PyNet {
    fn from(net: ReluNet<Q>) -> Self {
        PyNet { net }
    }
}

/// Sawtooth with `2^L - 1` breakpoints on `[0, 1]`; width 2, depth `L`.
#[pyfunction]
fn sawtooth(depth: usize) -> PyResult<PyNet> {
    if depth == 0 {
        return Err(PyValueError::new_err("depth must be at least 1"));
    }
    Ok(sawtooth_net(depth).into())
}

/// Hat function on `[0, 1]` peaking at 1/2.
#[pyfunction]
fn hat() -> PyNet {
    hat01().into()
}

/// Approximate squaring on `[0, 1]` with accuracy level `n`.
#[pyfunction]
fn square(n: usize) -> PyResult<PyNet> {
    Ok(square_net(n).map_err(value_err)?.into())
}

/// Approximate product of two inputs in `[0, 1]`.
#[pyfunction]
fn product(n: usize) -> PyResult<PyNet> {
    Ok(product_net(n).map_err(value_err)?.into())
}

/// Approximate product of `k` inputs in `[0, 1]`.
#[pyfunction]
fn kproduct(k: usize, n: usize) -> PyResult<PyNet> {
    Ok(kproduct_net(k, n).map_err(value_err)?.into())
}

/// Width-11 bit-extraction network interpolating the cumulative sums of
/// `signs` (a string of `n²` characters `+`/`-`), or of a seeded random plan.
#[pyfunction]
#[pyo3(signature = (n, signs = None, seed = 0))]
fn bit_extract(n: usize, signs: Option<&str>, seed: u64) -> PyResult<PyNet> {
    let plan = match signs {
        Some(s) => BitExtractPlan::parse(n, s),
        None => BitExtractPlan::random(n, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed)),
    }
    .map_err(value_err)?;
    Ok(bit_extract_net(&plan).map_err(value_err)?.into())
}

/// Emulation of the cardinal B-spline of order `r` in `d` variables.
#[pyfunction]
#[pyo3(signature = (n, r = 2, d = 1))]
fn bspline(n: usize, r: u32, d: usize) -> PyResult<PyNet> {
    Ok(bspline_net(r, d, n).map_err(value_err)?.into())
}

/// `(number, id, title)` for every registered claim.
#[pyfunction]
fn claims() -> Vec<(usize, String, String)> {
    registry().iter().map(|c| (c.number, c.id.to_string(), c.title.to_string())).collect()
}

/// Run one claim by id or number and return its report as a dict.
#[pyfunction]
#[pyo3(signature = (claim, n = None, f = None, grid = None, tolerance = 0.0, seed = 0, exact = false))]
#[allow(clippy::too_many_arguments)]
fn verify(
    py: Python<'_>,
    claim: &str,
    n: Option<Vec<usize>>,
    f: Option<String>,
    grid: Option<usize>,
    tolerance: f64,
    seed: u64,
    exact: bool,
) -> PyResult<Py<PyAny>> {
    let c = find(claim).ok_or_else(|| PyValueError::new_err(format!("unknown claim '{claim}'")))?;
    let opts = ClaimOptions { n, f, grid, tolerance, seed, exact };
    let report = py.detach(|| c.run(&opts)).map_err(|e| match e {
        ClaimError::Usage(m) => PyValueError::new_err(m),
        other => PyValueError::new_err(other.to_string()),
    })?;
    let text = serde_json::to_string(&report).expect("reports serialize");
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

/// Round an exact value string to the nearest float.
#[pyfunction]
fn to_float(value: &str) -> PyResult<f64> {
    Ok(q_to_f64(&parse_scalar::<Q>(value).map_err(value_err)?))
}

#[pymodule]
fn relucalc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNet>()?;
    m.add_function(wrap_pyfunction!(sawtooth, m)?)?;
    m.add_function(wrap_pyfunction!(hat, m)?)?;
    m.add_function(wrap_pyfunction!(square, m)?)?;
    m.add_function(wrap_pyfunction!(product, m)?)?;
    m.add_function(wrap_pyfunction!(kproduct, m)?)?;
    m.add_function(wrap_pyfunction!(bit_extract, m)?)?;
    m.add_function(wrap_pyfunction!(bspline, m)?)?;
    m.add_function(wrap_pyfunction!(claims, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(to_float, m)?)?;
    Ok(())
}
