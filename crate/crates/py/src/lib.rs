// Python bindings. Reports cross the boundary as dicts and lists, decoded
// from the same 17-digit JSON the CLI writes, so values round-trip exactly.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use abmetric::classifier::{classify, s_e_equivalence, sample_set};
use abmetric::cli::{self, report};
use abmetric::curvature::PointCurvature;
use abmetric::scalar::{cone_grid, xi_profile};
use abmetric::tolerances::TolProfile;
use abmetric::verify::verify_fixture;
use abmetric::{Error, Fixture, PhiFamily, PhiSpec, ScalarPack};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Parse { .. } | Error::Validation { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (report::to_json(value),))
}

fn profile(name: &str) -> PyResult<TolProfile> {
    match name {
        "strict" => Ok(TolProfile::Strict),
        "fd" => Ok(TolProfile::Fd),
        other => Err(PyValueError::new_err(format!("unknown tolerance profile `{other}` (strict, fd)"))),
    }
}

#[pymodule]
mod abmetric_py {
    use super::*;

    #[pymodule_export]
    const SCHEMA_VERSION: &str = report::SCHEMA_VERSION;

    /// A φ-profile, `F = α φ(β/α)`.
    #[pyclass(name = "Phi", frozen)]
    struct PyPhi {
        inner: PhiSpec,
    }

    #[pymethods]
    impl PyPhi {
        #[staticmethod]
        fn riemannian() -> Self {
            Self { inner: PhiSpec::riemannian() }
        }
        #[staticmethod]
        fn randers() -> Self {
            Self { inner: PhiSpec::randers() }
        }
        /// φ = (1 + s)^(m+1)
        #[staticmethod]
        fn power(m: f64) -> PyResult<Self> {
            PhiSpec::new(PhiFamily::Power { m }, None).map(|inner| Self { inner }).map_err(py_err)
        }
        #[staticmethod]
        fn quadratic() -> Self {
            Self { inner: PhiSpec::quadratic() }
        }
        /// φ = k1 √(1 + k2 s²) + k3 s
        #[staticmethod]
        fn randers_type(k1: f64, k2: f64, k3: f64) -> PyResult<Self> {
            PhiSpec::randers_type(k1, k2, k3).map(|inner| Self { inner }).map_err(py_err)
        }
        /// φ = Σ coeffs[k] s^k on |s| < radius
        #[staticmethod]
        fn taylor(coeffs: Vec<f64>, radius: f64) -> PyResult<Self> {
            PhiSpec::taylor(coeffs, radius).map(|inner| Self { inner }).map_err(py_err)
        }

        #[getter]
        fn b0(&self) -> f64 {
            self.inner.b0
        }

        fn value(&self, s: f64) -> f64 {
            self.inner.value(s)
        }

        /// Q, Δ, Φ, Ψ, Ω, Θ, Ξ and Υ at one `(s, b²)`.
        fn scalars<'py>(&self, py: Python<'py>, s: f64, b2: f64, n: usize) -> PyResult<Bound<'py, PyAny>> {
            let pack = ScalarPack::new(&self.inner, s, b2, n).map_err(py_err)?;
            to_py(py, &cli::ScalarRow::new(&pack))
        }

        /// Ξ over `count` points of the cone `|s| < b`.
        #[pyo3(signature = (b2, n, count=81))]
        fn xi_profile<'py>(&self, py: Python<'py>, b2: f64, n: usize, count: usize) -> PyResult<Bound<'py, PyAny>> {
            let grid = cone_grid(b2, count);
            to_py(py, &xi_profile(&self.inner, b2, n, &grid).map_err(py_err)?)
        }

        fn __repr__(&self) -> String {
            format!("Phi({})", self.inner.label())
        }
    }

    /// A concrete metric with probe points.
    #[pyclass(name = "Fixture", frozen)]
    struct PyFixture {
        inner: Fixture,
    }

    #[pymethods]
    impl PyFixture {
        #[staticmethod]
        fn builtin(name: &str) -> PyResult<Self> {
            Fixture::builtin(name)
                .map(|inner| Self { inner })
                .ok_or_else(|| PyValueError::new_err(format!("unknown fixture `{name}`")))
        }

        #[staticmethod]
        fn builtin_names() -> Vec<&'static str> {
            Fixture::builtin_names().to_vec()
        }

        /// Every fixture in a TOML config document.
        #[staticmethod]
        fn from_config(text: &str) -> PyResult<Vec<Self>> {
            let config = cli::parse_config(text).map_err(py_err)?;
            Ok(config.fixtures.into_iter().map(|fc| Self { inner: fc.fixture }).collect())
        }

        #[getter]
        fn name(&self) -> String {
            self.inner.name.clone()
        }

        #[getter]
        fn n(&self) -> usize {
            self.inner.n
        }

        #[getter]
        fn points(&self) -> Vec<Vec<f64>> {
            self.inner.points.clone()
        }

        #[getter]
        fn phi(&self) -> PyPhi {
            PyPhi { inner: self.inner.phi.clone() }
        }

        fn finsler(&self, x: Vec<f64>, y: Vec<f64>) -> f64 {
            self.inner.finsler(&x, &y)
        }

        /// Spray, S, E, g and h at `(x, y)`, with oracle values when asked.
        #[pyo3(signature = (x, y, oracles=false))]
        fn curvature<'py>(&self, py: Python<'py>, x: Vec<f64>, y: Vec<f64>, oracles: bool) -> PyResult<Bound<'py, PyAny>> {
            if y.len() != self.inner.n {
                return Err(PyValueError::new_err(format!("y has {} components, expected {}", y.len(), self.inner.n)));
            }
            let pc = PointCurvature::new(&self.inner, &x).map_err(py_err)?;
            let y = nalgebra::DVector::from_vec(y);
            to_py(py, &pc.report(&y, oracles).map_err(py_err)?)
        }

        /// Isotropy fits and branch flags at a probe point.
        #[pyo3(signature = (point=0, tol_profile="strict", seed=0))]
        fn classify<'py>(&self, py: Python<'py>, point: usize, tol_profile: &str, seed: u64) -> PyResult<Bound<'py, PyAny>> {
            let x = self.point(point)?;
            to_py(py, &classify(&self.inner, x, profile(tol_profile)?, seed).map_err(py_err)?)
        }

        /// Whether S-isotropy and E-isotropy agree at a probe point.
        #[pyo3(signature = (point=0, tol_profile="strict", seed=0))]
        fn equivalence<'py>(&self, py: Python<'py>, point: usize, tol_profile: &str, seed: u64) -> PyResult<Bound<'py, PyAny>> {
            let x = self.point(point)?;
            let pc = PointCurvature::new(&self.inner, x).map_err(py_err)?;
            let set = sample_set(&pc, profile(tol_profile)?, seed).map_err(py_err)?;
            to_py(py, &s_e_equivalence(&self.inner, &set).map_err(py_err)?)
        }

        /// Every oracle and identity check, passing or not.
        #[pyo3(signature = (seed=0))]
        fn verify<'py>(&self, py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
            to_py(py, &verify_fixture(&self.inner, seed).map_err(py_err)?)
        }

        fn __repr__(&self) -> String {
            format!("Fixture({}, n={}, phi={})", self.inner.name, self.inner.n, self.inner.phi.label())
        }
    }

    impl PyFixture {
        fn point(&self, i: usize) -> PyResult<&[f64]> {
            self.inner
                .points
                .get(i)
                .map(Vec::as_slice)
                .ok_or_else(|| PyValueError::new_err(format!("fixture has {} probe points", self.inner.points.len())))
        }
    }

    /// Runs a CLI command and returns `(exit_code, report_text)`.
    #[pyfunction]
    #[pyo3(signature = (command, config, point=None, grid=None, tol_profile="strict", format="json", seed=0))]
    fn run(
        command: &str,
        config: std::path::PathBuf,
        point: Option<String>,
        grid: Option<usize>,
        tol_profile: &str,
        format: &str,
        seed: u64,
    ) -> PyResult<(u8, String)> {
        let mut args = vec!["abmetric".to_string(), command.to_string(), "--config".into(), config.display().to_string()];
        if let Some(p) = point {
            args.extend(["--point".into(), p]);
        }
        if let Some(g) = grid {
            args.extend(["--grid".into(), g.to_string()]);
        }
        args.extend(["--tol-profile".into(), tol_profile.into(), "--format".into(), format.into(), "--seed".into(), seed.to_string()]);
        let cli = cli::parse_args(&args).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let outcome = cli::execute(&cli);
        if outcome.output.is_empty() {
            return Ok((outcome.code, outcome.diagnostics.join("\n")));
        }
        Ok((outcome.code, outcome.output))
    }
}
