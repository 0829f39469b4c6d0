//! Python bindings.

use std::sync::Arc;

use holext_core::catalog::FormCatalog as CoreCatalog;
use holext_core::extension::{self, ExtensionRecipe, Generator, ModularWord, ProductPoint, RecipeSpec};
use holext_core::polarization::{self, DiagonalSampleSet, PolarizedPolynomial};
use holext_core::potential::{cone_potential, ConeQuadrature};
use holext_core::special::{self, HalfPlanePoint, Terms};
use holext_core::spectral::{self, SpectralTruncation, TorusMetric};
use holext_core::suite::{self, Mode};
use holext_core::{Complex64, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    match e {
        Error::InsufficientSamples(_)
        | Error::NotPluriharmonic { .. }
        | Error::SingularMatrix(_)
        | Error::QuadratureNonConvergence(_)
        | Error::BudgetExceeded(_)
        | Error::PathTooCoarse(..) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn upper(z: Complex64) -> PyResult<HalfPlanePoint> {
    HalfPlanePoint::new(z).map_err(err)
}

fn metric(name: &str) -> PyResult<TorusMetric> {
    match name {
        "lattice" => Ok(TorusMetric::Lattice),
        "unit-area" | "unit_area" => Ok(TorusMetric::UnitArea),
        _ => Err(PyValueError::new_err(format!("unknown metric {name:?} (lattice | unit-area)"))),
    }
}

/// Dedekind eta at z in the upper half plane.
#[pyfunction]
fn eta(z: Complex64) -> PyResult<Complex64> {
    special::eta(upper(z)?, Terms::default()).map_err(err)
}

/// Holomorphic log eta, continuous on the upper half plane.
#[pyfunction]
fn log_eta(z: Complex64) -> PyResult<Complex64> {
    special::log_eta(upper(z)?).map_err(err)
}

/// Closed-form log det of the flat torus with modulus z.
#[pyfunction]
fn paper_log_det(z: Complex64) -> PyResult<f64> {
    spectral::paper_det_torus(upper(z)?).map_err(err)
}

/// Zeta-regularized log det' with diagnostics, as a dict.
#[pyfunction]
#[pyo3(signature = (z, metric = "lattice"))]
fn spectral_log_det(py: Python<'_>, z: Complex64, metric: &str) -> PyResult<Py<PyAny>> {
    let r = spectral::zeta_det_torus(upper(z)?, self::metric(metric)?, &SpectralTruncation::default()).map_err(err)?;
    to_py(py, &r)
}

/// Genus-1 holomorphic extension at (z, w), Im z > 0 > Im w.
#[pyfunction]
fn genus1_extension(z: Complex64, w: Complex64) -> PyResult<Complex64> {
    extension::genus1_extension(ProductPoint::new(z, w).map_err(err)?).map_err(err)
}

fn parse_word(word: &[String]) -> PyResult<ModularWord> {
    word.iter()
        .map(|g| match g.as_str() {
            "T" => Ok(Generator::T),
            "T^-1" | "Ti" | "t" => Ok(Generator::TInverse),
            "S" => Ok(Generator::S),
            _ => Err(PyValueError::new_err(format!("unknown generator {g:?} (T | T^-1 | S)"))),
        })
        .collect::<PyResult<_>>()
        .map(ModularWord)
}

/// Invariance of the genus-1 extension under a word in T, T^-1, S.
#[pyfunction]
fn modular_invariance(py: Python<'_>, z: Complex64, w: Complex64, word: Vec<String>) -> PyResult<Py<PyAny>> {
    let p = ProductPoint::new(z, w).map_err(err)?;
    let r = extension::modular_invariance_check(p, &parse_word(&word)?).map_err(err)?;
    to_py(py, &r)
}

/// Built-in and user-supplied closed holomorphic (1,1)-forms.
#[pyclass(name = "FormCatalog")]
struct PyFormCatalog {
    inner: CoreCatalog,
}

#[pymethods]
impl PyFormCatalog {
    #[new]
    #[pyo3(signature = (text = None))]
    fn new(text: Option<&str>) -> PyResult<Self> {
        let mut inner = CoreCatalog::builtin();
        if let Some(t) = text {
            inner.merge(CoreCatalog::parse(t).map_err(err)?);
        }
        Ok(Self { inner })
    }

    fn names(&self) -> Vec<String> {
        self.inner.entries.iter().map(|e| e.name.clone()).collect()
    }

    /// Cone-integrated potential q(z, w).
    #[pyo3(signature = (name, z, w, nodes = 64))]
    fn potential(&self, py: Python<'_>, name: &str, z: Vec<Complex64>, w: Vec<Complex64>, nodes: usize) -> PyResult<Complex64> {
        let form = self.inner.get(name).map_err(err)?.build().map_err(err)?;
        py.detach(|| cone_potential(&form, &z, &w, &ConeQuadrature::fixed(nodes))).map_err(err)
    }

    /// Closed-form potential when the form has one.
    fn closed_form(&self, name: &str, z: Vec<Complex64>, w: Vec<Complex64>) -> PyResult<Option<Complex64>> {
        Ok(self.inner.get(name).map_err(err)?.closed_form_potential(&z, &w))
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }
}

/// Genus-1 extension built from a diagonal log det.
#[pyclass(name = "ExtensionRecipe")]
struct PyRecipe {
    inner: Arc<ExtensionRecipe>,
}

#[pymethods]
impl PyRecipe {
    /// `spec` uses the recipe text format, e.g. "diagonal = paper".
    #[new]
    #[pyo3(signature = (spec = ""))]
    fn new(py: Python<'_>, spec: &str) -> PyResult<Self> {
        let spec = RecipeSpec::parse(spec).map_err(err)?;
        let inner = py.detach(|| spec.build()).map_err(err)?;
        Ok(Self { inner: Arc::new(inner) })
    }

    fn __call__(&self, py: Python<'_>, z: Complex64, w: Complex64) -> PyResult<Complex64> {
        let r = self.inner.clone();
        py.detach(move || extension::assemble_extension(&r, &[z], &[w])).map_err(err)
    }

    fn diagonal(&self, z: Complex64) -> PyResult<f64> {
        self.inner.diagonal_value(&[z]).map_err(err)
    }
}

/// Polynomial P(z, w) fitted to diagonal samples f(z) = P(z, conj z).
#[pyclass(name = "PolarizedPolynomial")]
struct PyPolarized {
    inner: PolarizedPolynomial,
}

#[pymethods]
impl PyPolarized {
    fn __call__(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.inner.eval(z, w)
    }

    #[getter]
    fn degree(&self) -> usize {
        self.inner.degree
    }

    #[getter]
    fn residual(&self) -> f64 {
        self.inner.residual
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank
    }

    #[getter]
    fn condition(&self) -> f64 {
        self.inner.condition
    }

    #[getter]
    fn coefficients(&self) -> Vec<Vec<Complex64>> {
        self.inner.coefficients.clone()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string_pretty(&self.inner).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }
}

/// Least-squares polarization of diagonal samples.
#[pyfunction]
#[pyo3(signature = (points, values, degree, center = None, radius = None, cutoff = polarization::DEFAULT_SVD_CUTOFF))]
fn polarize(
    points: Vec<Complex64>,
    values: Vec<Complex64>,
    degree: usize,
    center: Option<Complex64>,
    radius: Option<f64>,
    cutoff: f64,
) -> PyResult<PyPolarized> {
    let samples = match (center, radius) {
        (Some(c), Some(r)) => DiagonalSampleSet::new(c, r, points, values),
        (None, None) => DiagonalSampleSet::bounding(points, values),
        _ => return Err(PyValueError::new_err("center and radius must be given together")),
    }
    .map_err(err)?;
    let inner = polarization::polarize_fit(&samples, degree, cutoff).map_err(err)?;
    Ok(PyPolarized { inner })
}

/// Runs the verification suite and returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (fast = false))]
fn verify_all(py: Python<'_>, fast: bool) -> PyResult<Py<PyAny>> {
    let mode = if fast { Mode::Fast } else { Mode::Full };
    let report = py.detach(|| suite::verify_all(mode));
    to_py(py, &report)
}

#[pymodule]
fn holext(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(eta, m)?)?;
    m.add_function(wrap_pyfunction!(log_eta, m)?)?;
    m.add_function(wrap_pyfunction!(paper_log_det, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_log_det, m)?)?;
    m.add_function(wrap_pyfunction!(genus1_extension, m)?)?;
    m.add_function(wrap_pyfunction!(modular_invariance, m)?)?;
    m.add_function(wrap_pyfunction!(polarize, m)?)?;
    m.add_function(wrap_pyfunction!(verify_all, m)?)?;
    m.add_class::<PyFormCatalog>()?;
    m.add_class::<PyRecipe>()?;
    m.add_class::<PyPolarized>()?;
    Ok(())
}
