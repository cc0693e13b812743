//! Python bindings for sepcert.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sepcert::bank::{named_witness_variant, BANK_IDS};
use sepcert::bloch::{max_over_class, rational_threshold, OptimizerOptions, WitnessSpec};
use sepcert::decomp::{builtin_decomposition, verify_decomposition, BUILTIN_IDS};
use sepcert::graph::{named_pure_state, noisy_mix};
use sepcert::io;
use sepcert::pauli::{char_from_density, CMat, DensityMatrix, PauliString, SeparabilityClass, C64};
use sepcert::suite::{paper_suite, SuiteOptions};
use sepcert::xstate::{decompose_xstate, gm_closed_form, theorem2_verdict, Verdict, XWitnessParams};

fn err(e: sepcert::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn density(rows: Vec<Vec<C64>>) -> PyResult<DensityMatrix> {
    let d = rows.len();
    if rows.iter().any(|r| r.len() != d) {
        return Err(PyValueError::new_err("matrix must be square"));
    }
    DensityMatrix::new(CMat::from_fn(d, d, |r, c| rows[r][c])).map_err(err)
}

fn rows(rho: &DensityMatrix) -> Vec<Vec<C64>> {
    let m = rho.matrix();
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

fn options(starts: usize, seed: u64) -> OptimizerOptions {
    OptimizerOptions { starts, seed, ..OptimizerOptions::default() }
}

/// Nonzero characteristic-function entries R_s = tr(rho s) of a dense state.
#[pyfunction]
#[pyo3(signature = (matrix, tol = 1e-12))]
fn char_function(matrix: Vec<Vec<C64>>, tol: f64) -> PyResult<Vec<(String, f64)>> {
    let r = char_from_density(&density(matrix)?).map_err(err)?;
    Ok(r.nonzero(tol).into_iter().map(|(s, v)| (s.to_string(), v)).collect())
}

/// Dense matrix of a named stabilizer state, optionally mixed with white noise.
#[pyfunction]
#[pyo3(signature = (id, p = 1.0))]
fn named_state(id: &str, p: f64) -> PyResult<Vec<Vec<C64>>> {
    let pure = named_pure_state(id).map_err(err)?;
    Ok(rows(&noisy_mix(&pure, p).map_err(err)?))
}

/// Closed-form maximum G(M) for (M111, M122, M212, M221).
#[pyfunction]
fn gm(m: [f64; 4]) -> f64 {
    gm_closed_form(&XWitnessParams::new(m)).value
}

#[pyfunction]
fn bank_ids() -> Vec<&'static str> {
    BANK_IDS.to_vec()
}

#[pyclass(name = "XState", module = "sepcert_py")]
struct PyXState {
    inner: sepcert::xstate::XState,
}

#[pymethods]
impl PyXState {
    #[new]
    fn new(diag: [f64; 8], anti: [f64; 4]) -> PyResult<Self> {
        Ok(PyXState { inner: sepcert::xstate::XState::new(diag, anti).map_err(err)? })
    }

    #[staticmethod]
    fn noisy_ghz3(p: f64) -> PyResult<Self> {
        Ok(PyXState { inner: sepcert::xstate::XState::noisy_ghz3(p).map_err(err)? })
    }

    #[getter]
    fn diag(&self) -> [f64; 8] {
        self.inner.diag
    }

    #[getter]
    fn anti(&self) -> [f64; 4] {
        self.inner.anti
    }

    fn is_separable(&self) -> bool {
        theorem2_verdict(&self.inner).verdict == Verdict::Separable
    }

    /// Signed distance to the separability boundary (positive inside).
    fn margin(&self) -> f64 {
        theorem2_verdict(&self.inner).margin
    }

    fn rvalue(&self) -> f64 {
        theorem2_verdict(&self.inner).certificate.rvalue
    }

    /// Residual of the explicit product decomposition; raises when entangled.
    fn decomposition_residual(&self) -> PyResult<f64> {
        Ok(decompose_xstate(&self.inner).map_err(err)?.residual)
    }

    fn density(&self) -> Vec<Vec<C64>> {
        rows(&self.inner.to_density())
    }

    fn __repr__(&self) -> String {
        format!("XState(diag={:?}, anti={:?})", self.inner.diag, self.inner.anti)
    }
}

#[pyclass(name = "Witness", module = "sepcert_py")]
struct PyWitness {
    spec: WitnessSpec,
    class: Option<SeparabilityClass>,
}

impl PyWitness {
    fn class_for(&self, class: Option<&str>) -> PyResult<SeparabilityClass> {
        match (class, &self.class) {
            (Some(c), _) => io::class_from_str(c, self.spec.n()).map_err(err),
            (None, Some(c)) => Ok(c.clone()),
            (None, None) => Err(PyValueError::new_err("class is required for this witness")),
        }
    }
}

#[pymethods]
impl PyWitness {
    /// Witness from (pauli string, coefficient) pairs.
    #[new]
    #[pyo3(signature = (n, terms, constant = None))]
    fn new(n: usize, terms: Vec<(String, f64)>, constant: Option<f64>) -> PyResult<Self> {
        let terms = terms.iter().map(|(s, v)| Ok((PauliString::parse(s)?, *v))).collect::<sepcert::Result<Vec<_>>>().map_err(err)?;
        Ok(PyWitness { spec: WitnessSpec::new(n, terms, constant).map_err(err)?, class: None })
    }

    #[staticmethod]
    #[pyo3(signature = (id, repaired = true))]
    fn from_bank(id: &str, repaired: bool) -> PyResult<Self> {
        let w = named_witness_variant(id, repaired).map_err(err)?;
        Ok(PyWitness { spec: w.spec, class: Some(w.class) })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyWitness { spec: io::witness_from_json(text).map_err(err)?, class: None })
    }

    fn to_json(&self) -> String {
        io::witness_to_json(&self.spec)
    }

    #[getter]
    fn n(&self) -> usize {
        self.spec.n()
    }

    fn terms(&self) -> Vec<(String, f64)> {
        self.spec.terms().map(|(s, v)| (s.to_string(), v)).collect()
    }

    /// Maximum expectation over states separable with respect to `class`
    /// ("full", "tri", "bi", or a list like "12|3|4,1|23|4").
    #[pyo3(signature = (class = None, starts = 32, seed = 0))]
    fn bound(&self, class: Option<&str>, starts: usize, seed: u64) -> PyResult<f64> {
        let c = self.class_for(class)?;
        Ok(max_over_class(&self.spec, &c, &options(starts, seed)).map_err(err)?.bound)
    }

    /// Pairing sum_s M_s R_s with a dense state.
    fn inner(&self, matrix: Vec<Vec<C64>>) -> PyResult<f64> {
        let r = char_from_density(&density(matrix)?).map_err(err)?;
        Ok(self.spec.inner(&r))
    }

    /// Critical white-noise weight for a named pure state, with its exact
    /// fraction when bound and overlap are integral.
    #[pyo3(signature = (state, class = None, starts = 32, seed = 0))]
    fn threshold(&self, state: &str, class: Option<&str>, starts: usize, seed: u64) -> PyResult<(f64, Option<String>)> {
        let c = self.class_for(class)?;
        let pure = char_from_density(&named_pure_state(state).map_err(err)?).map_err(err)?;
        let bound = max_over_class(&self.spec, &c, &options(starts, seed)).map_err(err)?.bound;
        let inner = self.spec.inner(&pure);
        if inner <= 0.0 {
            return Err(PyValueError::new_err(format!("overlap {inner} is not positive")));
        }
        Ok((bound / inner, rational_threshold(bound, inner).ok().map(|r| r.to_string())))
    }
}

/// Checks a builtin decomposition against its target; returns (pass, max entry error).
#[pyfunction]
fn verify_builtin(id: &str) -> PyResult<(bool, f64)> {
    if !BUILTIN_IDS.contains(&id) {
        return Err(PyValueError::new_err(format!("unknown decomposition {id}")));
    }
    let b = builtin_decomposition(id).map_err(err)?;
    let v = verify_decomposition(&b.decomposition, &b.target, &b.class, 1e-12).map_err(err)?;
    Ok((v.pass, v.max_abs_error))
}

/// Runs every reproduction check and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (resolution = 48, starts = 32, seed = 0, repair = true))]
fn run_suite(py: Python<'_>, resolution: usize, starts: usize, seed: u64, repair: bool) -> String {
    let opts = SuiteOptions { resolution, starts, seed, repair };
    py.detach(|| paper_suite(&opts).to_json())
}

#[pymodule]
fn sepcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyXState>()?;
    m.add_class::<PyWitness>()?;
    m.add_function(wrap_pyfunction!(char_function, m)?)?;
    m.add_function(wrap_pyfunction!(named_state, m)?)?;
    m.add_function(wrap_pyfunction!(gm, m)?)?;
    m.add_function(wrap_pyfunction!(bank_ids, m)?)?;
    m.add_function(wrap_pyfunction!(verify_builtin, m)?)?;
    m.add_function(wrap_pyfunction!(run_suite, m)?)?;
    Ok(())
}
