//! Python bindings for `crack_imaging`.
//!
//! Points cross the boundary as `(x, y)` tuples, matrices as lists of rows
//! of Python `complex`.

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use crack_imaging as core;
use crack_imaging::cli::{self, ScenarioConfig};
use crack_imaging::{Convention, Point2};

fn to_py_err(e: core::Error) -> PyErr {
    match e {
        core::Error::Invalid(_) | core::Error::Config(_) => PyValueError::new_err(e.to_string()),
        core::Error::Numeric(_) => PyRuntimeError::new_err(e.to_string()),
        core::Error::Io { .. } => PyIOError::new_err(e.to_string()),
    }
}

fn point(p: (f64, f64)) -> Point2 {
    Point2::new(p.0, p.1)
}

fn parse_convention(s: &str) -> PyResult<Convention> {
    s.parse().map_err(to_py_err)
}

/// Converts a list of rows into an MSR matrix.
pub fn matrix_from_rows(
    rows: &[Vec<Complex64>],
    omega: f64,
    convention: Convention,
) -> Result<core::MsrMatrix, core::Error> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(core::Error::Invalid("matrix must be square".into()));
    }
    let mut m = core::MsrMatrix::zeros(n, omega, convention);
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m.entries[(i, j)] = *v;
        }
    }
    Ok(m)
}

pub fn matrix_to_rows(m: &core::MsrMatrix) -> Vec<Vec<Complex64>> {
    (0..m.dim())
        .map(|i| (0..m.dim()).map(|j| m.entries[(i, j)]).collect())
        .collect()
}

#[pyfunction]
fn bessel_j0(z: f64) -> f64 {
    core::bessel_j0(z)
}

#[pyfunction]
fn bessel_j1(z: f64) -> f64 {
    core::bessel_j1(z)
}

#[pyfunction]
fn psf_closed_form(r: f64, omega1: f64, omega_k: f64) -> f64 {
    core::psf_closed_form(r, omega1, omega_k)
}

#[pyfunction]
#[pyo3(signature = (r, omega1, omega_k, panels=4096))]
fn quadrature_oracle_psf(r: f64, omega1: f64, omega_k: f64, panels: usize) -> PyResult<f64> {
    core::quadrature_oracle_psf(r, omega1, omega_k, panels).map_err(to_py_err)
}

#[pyfunction]
fn circle_sum(y: (f64, f64), omega: f64, n: usize) -> PyResult<Complex64> {
    let dirs = core::make_directions(n).map_err(to_py_err)?;
    Ok(core::circle_sum(point(y), omega, &dirs))
}

#[pyfunction]
fn make_directions(n: usize) -> PyResult<Vec<(f64, f64)>> {
    let dirs = core::make_directions(n).map_err(to_py_err)?;
    Ok(dirs.as_slice().iter().map(|d| (d.x, d.y)).collect())
}

#[pyfunction]
fn make_frequencies(lambda_min: f64, lambda_max: f64, k: usize) -> PyResult<Vec<f64>> {
    core::make_frequencies(lambda_min, lambda_max, k)
        .map(|f| f.omegas().to_vec())
        .map_err(to_py_err)
}

/// MSR matrix of point scatterers at `points` with common half-length `rho`.
#[pyfunction]
#[pyo3(signature = (points, rho, omega, n, convention="symmetric"))]
fn assemble_msr(
    points: Vec<(f64, f64)>,
    rho: f64,
    omega: f64,
    n: usize,
    convention: &str,
) -> PyResult<Vec<Vec<Complex64>>> {
    let cloud = core::ScattererCloud::from_points(points.into_iter().map(point).collect(), rho)
        .map_err(to_py_err)?;
    let dirs = core::make_directions(n).map_err(to_py_err)?;
    let m = core::assemble_msr(&cloud, omega, &dirs, parse_convention(convention)?)
        .map_err(to_py_err)?;
    Ok(matrix_to_rows(&m))
}

#[pyfunction]
#[pyo3(signature = (matrix, snr_db, seed, stream=0))]
fn add_noise(
    matrix: Vec<Vec<Complex64>>,
    snr_db: f64,
    seed: u64,
    stream: u64,
) -> PyResult<Vec<Vec<Complex64>>> {
    let m = matrix_from_rows(&matrix, 0.0, Convention::Symmetric).map_err(to_py_err)?;
    let spec = core::NoiseSpec::new(snr_db, seed).map_err(to_py_err)?;
    Ok(matrix_to_rows(&core::add_noise(&m, &spec, stream)))
}

/// Descending singular values of a square complex matrix.
#[pyfunction]
fn singular_values(matrix: Vec<Vec<Complex64>>) -> PyResult<Vec<f64>> {
    let m = matrix_from_rows(&matrix, 0.0, Convention::Symmetric).map_err(to_py_err)?;
    Ok(core::svd(&m).map_err(to_py_err)?.singular_values)
}

/// A sampled `|E|` map.
#[pyclass(name = "ImagingMap", frozen)]
struct PyImagingMap {
    inner: core::ImagingMap,
}

#[pymethods]
impl PyImagingMap {
    #[getter]
    fn nx(&self) -> usize {
        self.inner.grid.nx
    }

    #[getter]
    fn ny(&self) -> usize {
        self.inner.grid.ny
    }

    #[getter]
    fn origin(&self) -> (f64, f64) {
        (self.inner.grid.origin.x, self.inner.grid.origin.y)
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.grid.spacing
    }

    #[getter]
    fn ranks(&self) -> Vec<usize> {
        self.inner.metadata.ranks.clone()
    }

    #[getter]
    fn omegas(&self) -> Vec<f64> {
        self.inner.metadata.omegas.clone()
    }

    /// `ny` rows of `nx` magnitudes.
    fn magnitude(&self) -> Vec<Vec<f64>> {
        self.inner
            .magnitude
            .chunks(self.inner.grid.nx)
            .map(|r| r.to_vec())
            .collect()
    }

    fn values(&self) -> Vec<Vec<Complex64>> {
        self.inner
            .values
            .chunks(self.inner.grid.nx)
            .map(|r| r.to_vec())
            .collect()
    }

    fn argmax(&self) -> (f64, f64) {
        let p = self.inner.grid.point_at(self.inner.argmax());
        (p.x, p.y)
    }

    fn top_peaks(&self, count: usize) -> Vec<(f64, f64)> {
        self.inner
            .top_peaks(count)
            .into_iter()
            .map(|p| (p.x, p.y))
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "ImagingMap(nx={}, ny={}, K={}, N={})",
            self.inner.grid.nx, self.inner.grid.ny, self.inner.metadata.k, self.inner.metadata.n
        )
    }
}

/// A validated scenario parsed from TOML.
#[pyclass(name = "Scenario")]
struct PyScenario {
    inner: ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: cli::parse_config(text).map_err(to_py_err)?,
        })
    }

    fn to_toml(&self) -> String {
        cli::render_config(&self.inner)
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[setter]
    fn set_seed(&mut self, seed: u64) -> PyResult<()> {
        let mut next = self.inner.clone();
        next.seed = seed;
        next.validate().map_err(to_py_err)?;
        self.inner = next;
        Ok(())
    }

    #[getter]
    fn snr_db(&self) -> f64 {
        self.inner.snr_db
    }

    #[setter]
    fn set_snr_db(&mut self, snr_db: f64) -> PyResult<()> {
        let mut next = self.inner.clone();
        next.snr_db = snr_db;
        next.validate().map_err(to_py_err)?;
        self.inner = next;
        Ok(())
    }

    /// Runs the full pipeline; releases the GIL while computing.
    fn run(&self, py: Python<'_>) -> PyResult<PyImagingMap> {
        let cfg = self.inner.clone();
        let out = py
            .detach(move || cli::run_pipeline(&cfg))
            .map_err(to_py_err)?;
        Ok(PyImagingMap { inner: out.map })
    }

    /// Runs the pipeline and writes `<base>.csv`, `<base>.json` (and `<base>.pgm`).
    #[pyo3(signature = (base, pgm=false))]
    fn export(&self, py: Python<'_>, base: std::path::PathBuf, pgm: bool) -> PyResult<Vec<String>> {
        let cfg = self.inner.clone();
        let paths = py
            .detach(move || {
                let out = cli::run_pipeline(&cfg)?;
                cli::export_map(&out.map, &cfg, &base, pgm)
            })
            .map_err(to_py_err)?;
        let mut files = vec![
            paths.csv.display().to_string(),
            paths.metadata.display().to_string(),
        ];
        files.extend(paths.pgm.map(|p| p.display().to_string()));
        Ok(files)
    }
}

#[pymodule(name = "crack_imaging")]
fn py_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bessel_j0, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j1, m)?)?;
    m.add_function(wrap_pyfunction!(psf_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(quadrature_oracle_psf, m)?)?;
    m.add_function(wrap_pyfunction!(circle_sum, m)?)?;
    m.add_function(wrap_pyfunction!(make_directions, m)?)?;
    m.add_function(wrap_pyfunction!(make_frequencies, m)?)?;
    m.add_function(wrap_pyfunction!(assemble_msr, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    m.add_function(wrap_pyfunction!(singular_values, m)?)?;
    m.add_class::<PyScenario>()?;
    m.add_class::<PyImagingMap>()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip() {
        let rows = vec![
            vec![Complex64::new(1.0, 2.0), Complex64::new(0.5, -1.0)],
            vec![Complex64::new(-3.0, 0.0), Complex64::new(0.0, 4.0)],
        ];
        let m = matrix_from_rows(&rows, 1.0, Convention::Paper).unwrap();
        assert_eq!(matrix_to_rows(&m), rows);
    }

    #[test]
    fn ragged_rows_rejected() {
        let rows = vec![vec![Complex64::new(1.0, 0.0)], vec![]];
        assert!(matrix_from_rows(&rows, 1.0, Convention::Paper).is_err());
    }
}
