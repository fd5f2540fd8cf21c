//! Python module `decaylab`. Structured results cross the boundary as plain
//! dicts and lists, built from the core crate's serde output.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use decaylab_core::complex_maps::{self as cm, DiskPoint};
use decaylab_core::curvature::{self as cv, FdSteps};
use decaylab_core::gluing::{self as gl, GluedMetricSpec};
use decaylab_core::hyperbolic_models::FermiPoint;
use decaylab_core::linalg::SymMatrix3;
use decaylab_core::{epstein, qc, sweep, verify as vf, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Config(_)
        | Error::Json(_)
        | Error::Domain(_)
        | Error::InvalidMap(_)
        | Error::OutsideDisk(_) => PyValueError::new_err(e.to_string()),
        _ => PyArithmeticError::new_err(e.to_string()),
    }
}

fn to_py<T: Serialize>(py: Python<'_>, v: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn matrix(m: &SymMatrix3) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = m.get(i, j);
        }
    }
    out
}

fn point(x: f64, y: f64, t: f64) -> PyResult<FermiPoint> {
    FermiPoint::from_coords([x, y, t]).map_err(py_err)
}

/// A univalent map of the unit disk.
#[pyclass(name = "UnivalentMap", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMap(cm::UnivalentMap);

#[pymethods]
impl PyMap {
    /// Parse a map spec such as `{"kind": "quadratic", "a": [0.5, 0.0]}`.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn identity() -> Self {
        Self(cm::UnivalentMap::Identity)
    }

    #[staticmethod]
    fn koebe() -> Self {
        Self(cm::UnivalentMap::Koebe)
    }

    #[staticmethod]
    fn quadratic(a: Complex64) -> PyResult<Self> {
        cm::UnivalentMap::quadratic(a).map(Self).map_err(py_err)
    }

    /// `(name, map)` pairs of the built-in catalog.
    #[staticmethod]
    fn catalog() -> Vec<(String, Self)> {
        cm::UnivalentMap::catalog()
            .into_iter()
            .map(|(n, m)| (n, Self(m)))
            .collect()
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.0).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn is_mobius(&self) -> bool {
        self.0.is_mobius()
    }

    fn __call__(&self, z: Complex64) -> PyResult<Complex64> {
        DiskPoint::new(z).map_err(py_err)?;
        Ok(self.0.value(z))
    }

    fn schwarzian(&self, z: Complex64) -> PyResult<Complex64> {
        cm::schwarzian(&self.0, DiskPoint::new(z).map_err(py_err)?).map_err(py_err)
    }

    /// Schwarzian norm in the hyperbolic metric; at most 3/2 for univalent maps.
    fn scaled_schwarzian_norm(&self, z: Complex64) -> PyResult<f64> {
        cm::scaled_schwarzian_norm(&self.0, DiskPoint::new(z).map_err(py_err)?).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("UnivalentMap({})", self.to_json().unwrap_or_default())
    }
}

/// The metric that is the pullback metric below depth `n` and hyperbolic
/// above `n + 1`.
#[pyclass(name = "GluedMetric", frozen)]
struct PyGlued(GluedMetricSpec);

#[pymethods]
impl PyGlued {
    #[new]
    fn new(map: &PyMap, n: f64) -> PyResult<Self> {
        GluedMetricSpec::new(map.0.clone(), n)
            .map(Self)
            .map_err(py_err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(Self)
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn n(&self) -> f64 {
        self.0.n
    }

    /// The glued metric at `(x, y, t)` as a 3×3 nested list.
    fn eta(&self, x: f64, y: f64, t: f64) -> PyResult<[[f64; 3]; 3]> {
        let m = gl::glued_metric_eta(&self.0, point(x, y, t)?).map_err(py_err)?;
        Ok(matrix(&m))
    }

    fn pullback(&self, x: f64, y: f64, t: f64) -> PyResult<[[f64; 3]; 3]> {
        let m = gl::pullback_metric_h(&self.0.map, point(x, y, t)?).map_err(py_err)?;
        Ok(matrix(&m))
    }

    /// Christoffels, Ricci, sectional extremes and traceless norm at a point.
    #[pyo3(signature = (x, y, t, planes = 0, seed = 0))]
    fn curvature_sample(
        &self,
        py: Python<'_>,
        x: f64,
        y: f64,
        t: f64,
        planes: usize,
        seed: u64,
    ) -> PyResult<Py<PyAny>> {
        let planes = cv::sample_planes(planes, seed);
        let s = cv::curvature_sample(&self.0, [x, y, t], &FdSteps::default(), &planes)
            .map_err(py_err)?;
        to_py(py, &s)
    }

    /// Bilipschitz distortion and Jacobian bounds of the identity from the
    /// hyperbolic metric over the given `(x, y, t)` points.
    fn bilipschitz(&self, py: Python<'_>, points: Vec<(f64, f64, f64)>) -> PyResult<Py<PyAny>> {
        let pts = points
            .into_iter()
            .map(|(x, y, t)| point(x, y, t))
            .collect::<PyResult<Vec<_>>>()?;
        to_py(py, &gl::bilipschitz_bounds(&self.0, &pts).map_err(py_err)?)
    }
}

/// Image of the Fermi point `(x, y, t)` on the surface: `(w, height)`.
#[pyfunction]
fn phi(map: &PyMap, x: f64, y: f64, t: f64) -> PyResult<(Complex64, f64)> {
    let p = epstein::phi(&map.0, point(x, y, t)?).map_err(py_err)?;
    Ok((p.w, p.x3))
}

#[pyfunction]
fn principal_curvatures(map: &PyMap, x: f64, y: f64, t: f64) -> PyResult<(f64, f64)> {
    epstein::principal_curvatures(&map.0, point(x, y, t)?).map_err(py_err)
}

#[pyfunction]
fn epstein_sample(py: Python<'_>, map: &PyMap, x: f64, y: f64, t: f64) -> PyResult<Py<PyAny>> {
    to_py(
        py,
        &epstein::epstein_sample(&map.0, point(x, y, t)?).map_err(py_err)?,
    )
}

/// Ratio of singular values of a 2×2 matrix.
#[pyfunction]
fn dilatation(m: [[f64; 2]; 2]) -> PyResult<f64> {
    qc::dilatation(&nalgebra_matrix(m)).map_err(py_err)
}

fn nalgebra_matrix(m: [[f64; 2]; 2]) -> nalgebra::Matrix2<f64> {
    nalgebra::Matrix2::new(m[0][0], m[0][1], m[1][0], m[1][1])
}

#[pyfunction]
#[pyo3(signature = (d, a6, a4 = None, a5 = None))]
fn bound_report(
    py: Python<'_>,
    d: f64,
    a6: f64,
    a4: Option<f64>,
    a5: Option<f64>,
) -> PyResult<Py<PyAny>> {
    let a4 = a4.unwrap_or(a6);
    let c = qc::BoundConstants {
        a4,
        a5: a5.unwrap_or(a4.max(a6)),
        a6,
    };
    let r = qc::bound_report(d, &c, qc::ConstantSource::Supplied, Default::default())
        .map_err(py_err)?;
    to_py(py, &r)
}

/// Runs a decay sweep from a JSON config (defaults when omitted) and returns
/// rows plus exponent fits.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn decay_sweep(py: Python<'_>, config: Option<&str>) -> PyResult<Py<PyAny>> {
    let cfg = sweep::SweepConfig::from_json(config.unwrap_or("{}")).map_err(py_err)?;
    let res = py.detach(|| sweep::run_decay_sweep(&cfg)).map_err(py_err)?;
    to_py(py, &sweep::summarize(&cfg, &res))
}

/// Least-squares slope of `log value` against `n`.
#[pyfunction]
fn fit_exponent(py: Python<'_>, points: Vec<(f64, f64)>) -> PyResult<Py<PyAny>> {
    let s = sweep::DecaySeries {
        metric_name: "series".into(),
        points,
    };
    to_py(py, &sweep::fit_exponent(&s).map_err(py_err)?)
}

/// Runs the acceptance criteria; returns the report dict.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn verify(py: Python<'_>, config: Option<&str>) -> PyResult<Py<PyAny>> {
    let cfg = vf::VerifyConfig::from_json(config.unwrap_or("{}")).map_err(py_err)?;
    let report = py.detach(|| vf::verify(&cfg));
    to_py(py, &report)
}

#[pymodule]
fn decaylab(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMap>()?;
    m.add_class::<PyGlued>()?;
    m.add_function(wrap_pyfunction!(phi, m)?)?;
    m.add_function(wrap_pyfunction!(principal_curvatures, m)?)?;
    m.add_function(wrap_pyfunction!(epstein_sample, m)?)?;
    m.add_function(wrap_pyfunction!(dilatation, m)?)?;
    m.add_function(wrap_pyfunction!(bound_report, m)?)?;
    m.add_function(wrap_pyfunction!(decay_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
