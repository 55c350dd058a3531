//! Python bindings for the `dsl-core` laboratory.
//!
//! Validation failures raise `ValueError`; numerical failures raise
//! `RuntimeError`.

use std::path::PathBuf;

use dsl_core::born::{self, BipartiteState, CMatrix, CollapseRule};
use dsl_core::field::{self, make_grid, ComplexField};
use dsl_core::nls::{self, NlsConvention, SolitonParams};
use dsl_core::pilotwave::{branch_experiment, BranchSetup};
use dsl_core::resonance::{self, ResonanceParams};
use dsl_core::runner::{self, ConfigSource};
use dsl_core::sn::{self, RadialGrid, SnParams};
use dsl_core::Error;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;

fn py_err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse_convention(tag: &str) -> PyResult<NlsConvention> {
    match tag {
        "unit-dispersion" => Ok(NlsConvention::UnitDispersion),
        "self-focusing" => Ok(NlsConvention::SelfFocusing),
        other => Err(PyValueError::new_err(format!(
            "unknown convention '{other}'; expected 'unit-dispersion' or 'self-focusing'"
        ))),
    }
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    use serde_json::Value;
    Ok(match value {
        Value::Null => py.None().into_bound(py),
        Value::Bool(b) => b.into_bound_py_any(py)?,
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_bound_py_any(py)?,
            None => n.as_f64().unwrap_or(f64::NAN).into_bound_py_any(py)?,
        },
        Value::String(s) => s.into_bound_py_any(py)?,
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

/// Complex field sampled on a periodic grid.
#[pyclass(name = "ComplexField", frozen, from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: ComplexField,
}

#[pymethods]
impl PyField {
    #[new]
    #[pyo3(signature = (values, z_min, z_max, time = 0.0))]
    fn new(values: Vec<Complex64>, z_min: f64, z_max: f64, time: f64) -> PyResult<Self> {
        let grid = make_grid(values.len(), z_min, z_max).map_err(py_err)?;
        Ok(Self { inner: ComplexField::new(grid, values, time).map_err(py_err)? })
    }

    /// Boosted soliton `sqrt(2) lam sech(lam z + delta)` at time `t`.
    #[staticmethod]
    #[pyo3(signature = (lam, n, z_min, z_max, delta = 0.0, boost_v = 0.0, t = 0.0))]
    fn soliton(lam: f64, n: usize, z_min: f64, z_max: f64, delta: f64, boost_v: f64, t: f64) -> PyResult<Self> {
        let p = SolitonParams::new(lam, delta, boost_v).map_err(py_err)?;
        let grid = make_grid(n, z_min, z_max).map_err(py_err)?;
        Ok(Self { inner: nls::soliton_exact(&p, &grid, t) })
    }

    #[getter]
    fn values(&self) -> Vec<Complex64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn z(&self) -> Vec<f64> {
        self.inner.grid().points().collect()
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    fn __len__(&self) -> usize {
        self.inner.values().len()
    }

    /// Noether charges `{N, P, E_K, E_P, E, R}`; `R` is `None` for a zero field.
    fn observables<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let o = field::observables(&self.inner, 1.0);
        let d = PyDict::new(py);
        d.set_item("N", o.norm_n)?;
        d.set_item("P", o.momentum_p)?;
        d.set_item("E_K", o.kinetic_ek)?;
        d.set_item("E_P", o.potential_ep)?;
        d.set_item("E", o.energy_e)?;
        d.set_item("R", o.center_r)?;
        Ok(d)
    }

    /// Phase-aligned sup-norm distance to `other`.
    fn shape_distance(&self, other: &PyField) -> PyResult<f64> {
        field::shape_distance(&self.inner, &other.inner, field::Metric::Linf).map_err(py_err)
    }
}

/// Split-step evolution. Returns `(final_field, times, norms, energies, norm_drift, energy_drift)`.
#[pyfunction]
#[pyo3(signature = (field, t_final, dt = 1e-3, convention = "unit-dispersion", record_every = 100))]
#[allow(clippy::type_complexity)]
fn evolve(
    py: Python<'_>,
    field: &PyField,
    t_final: f64,
    dt: f64,
    convention: &str,
    record_every: usize,
) -> PyResult<(PyField, Vec<f64>, Vec<f64>, Vec<f64>, f64, f64)> {
    let conv = parse_convention(convention)?;
    let run = py.detach(|| nls::evolve(&field.inner, t_final, dt, conv, record_every)).map_err(py_err)?;
    let times = run.records.iter().map(|r| r.time).collect();
    let norms = run.records.iter().map(|r| r.obs.norm_n).collect();
    let energies = run.records.iter().map(|r| r.obs.energy_e).collect();
    Ok((PyField { inner: run.final_field }, times, norms, energies, run.norm_drift, run.energy_drift))
}

/// Peregrine breather sampled over `tau` at evolution variable `xi`.
#[pyfunction]
fn peregrine(tau: Vec<f64>, xi: f64) -> Vec<Complex64> {
    tau.into_iter().map(|t| nls::peregrine_value(t, xi)).collect()
}

/// Schrödinger-Newton ground state as a dict with `r`, `psi` and energies.
#[pyfunction]
#[pyo3(signature = (norm = 1.0, n = 4096, r_max = 80.0, hbar = 1.0, mass = 1.0, grav = 1.0, tol = 1e-12))]
#[allow(clippy::too_many_arguments)]
fn sn_ground_state<'py>(
    py: Python<'py>,
    norm: f64,
    n: usize,
    r_max: f64,
    hbar: f64,
    mass: f64,
    grav: f64,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let params = SnParams::new(hbar, mass, grav).map_err(py_err)?;
    let grid = RadialGrid::new(n, r_max).map_err(py_err)?;
    let g = py.detach(|| sn::sn_ground_state(&params, norm, &grid, tol)).map_err(py_err)?;
    let d = json_to_py(py, &g.to_json())?.cast_into::<PyDict>()?;
    d.set_item("eigenvalue", g.eigenvalue)?;
    d.set_item("virial_residual", g.virial_residual)?;
    d.set_item("rms_radius", g.field.rms_radius())?;
    d.set_item("r", grid.radii().collect::<Vec<_>>())?;
    d.set_item("psi", g.field.values().to_vec())?;
    Ok(d)
}

/// `(collapses, threshold)` for the rms-radius collapse prediction.
#[pyfunction]
#[pyo3(signature = (rms_radius, hbar = 1.0, mass = 1.0, grav = 1.0))]
fn collapse_criterion(rms_radius: f64, hbar: f64, mass: f64, grav: f64) -> PyResult<(bool, f64)> {
    let params = SnParams::new(hbar, mass, grav).map_err(py_err)?;
    let v = sn::collapse_criterion(rms_radius, &params).map_err(py_err)?;
    Ok((v.collapses, v.threshold))
}

/// Pure state of a two-party system.
#[pyclass(name = "BipartiteState", frozen)]
struct PyState {
    inner: BipartiteState,
}

#[pymethods]
impl PyState {
    /// Row-major complex coefficients, `d_a` rows of `d_b`.
    #[new]
    fn new(d_a: usize, d_b: usize, coeffs: Vec<Complex64>) -> PyResult<Self> {
        if coeffs.len() != d_a * d_b {
            return Err(PyValueError::new_err(format!("expected {} coefficients, got {}", d_a * d_b, coeffs.len())));
        }
        let m = CMatrix::from_row_slice(d_a, d_b, &coeffs);
        Ok(Self { inner: BipartiteState::new(m).map_err(py_err)? })
    }

    #[staticmethod]
    fn bell() -> Self {
        Self { inner: BipartiteState::bell() }
    }

    #[staticmethod]
    fn schmidt_example() -> Self {
        Self { inner: BipartiteState::schmidt_example() }
    }

    #[getter]
    fn dims(&self) -> (usize, usize) {
        (self.inner.dim_a(), self.inner.dim_b())
    }

    /// Bob's reduced density matrix as nested lists.
    fn reduced_b(&self) -> Vec<Vec<Complex64>> {
        let rho = born::partial_trace_a(&self.inner);
        let e = rho.entries();
        (0..e.nrows()).map(|i| (0..e.ncols()).map(|j| e[(i, j)]).collect()).collect()
    }

    /// Bob's averaged post-measurement state after Alice rotates by
    /// `unitary` and measures under the collapse rule with exponent `p`.
    #[pyo3(signature = (unitary, exponent = 2.0))]
    fn measure_average(&self, unitary: Vec<Vec<Complex64>>, exponent: f64) -> PyResult<Vec<Vec<Complex64>>> {
        let u = matrix(unitary)?;
        let rule = CollapseRule::new(exponent).map_err(py_err)?;
        let rho = born::measure_average(&self.inner, &u, rule).map_err(py_err)?;
        let e = rho.entries();
        Ok((0..e.nrows()).map(|i| (0..e.ncols()).map(|j| e[(i, j)]).collect()).collect())
    }

    /// `[(p, gap)]` over `exponents`, comparing Alice's identity with a
    /// Hadamard rotation, or with `unitaries` when given.
    #[pyo3(signature = (exponents, unitaries = None))]
    fn gap_scan(&self, exponents: Vec<f64>, unitaries: Option<Vec<Vec<Vec<Complex64>>>>) -> PyResult<Vec<(f64, f64)>> {
        let us = match unitaries {
            Some(list) => list.into_iter().map(matrix).collect::<PyResult<Vec<_>>>()?,
            None => vec![CMatrix::identity(2, 2), born::hadamard()],
        };
        born::gap_scan(&self.inner, &us, &exponents).map_err(py_err)
    }
}

fn matrix(rows: Vec<Vec<Complex64>>) -> PyResult<CMatrix> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("unitary must be a square nested list"));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

/// Resonant solitary wave `u(x, t)` sampled at `x`.
#[pyfunction]
#[pyo3(signature = (x, t, k, delta = 0.0))]
fn resonant_wave(x: Vec<f64>, t: f64, k: f64, delta: f64) -> PyResult<Vec<f64>> {
    let p = ResonanceParams::new(k, delta).map_err(py_err)?;
    Ok(x.into_iter().map(|xi| resonance::resonant_value(xi, t, &p)).collect())
}

/// Hump speeds and heights before and after the fission.
#[pyfunction]
#[pyo3(signature = (k, delta = 0.0, n = 32768, x_min = -150.0, x_max = 150.0))]
fn track_resonance<'py>(py: Python<'py>, k: f64, delta: f64, n: usize, x_min: f64, x_max: f64) -> PyResult<Bound<'py, PyAny>> {
    let p = ResonanceParams::new(k, delta).map_err(py_err)?;
    let grid = make_grid(n, x_min, x_max).map_err(py_err)?;
    let s = p.fission_time_shift().unwrap_or(0.0);
    let summary = resonance::track_resonance(&p, &grid, (-300.0 + s, -250.0 + s), (210.0 + s, 260.0 + s), 1e-3).map_err(py_err)?;
    let value = serde_json::to_value(&summary).map_err(|e| py_err(e.into()))?;
    json_to_py(py, &value)
}

/// Branch frequencies `(frequencies, weights, crossings)` for two free
/// Gaussian branches at ±8 with real amplitudes `sqrt(w)`, `sqrt(1 - w)`.
#[pyfunction]
#[pyo3(signature = (weight, samples = 2000, seed = 0))]
fn branch_frequencies(py: Python<'_>, weight: f64, samples: usize, seed: u64) -> PyResult<(Vec<f64>, Vec<f64>, usize)> {
    if !(0.0..=1.0).contains(&weight) {
        return Err(PyValueError::new_err("weight must lie in [0, 1]"));
    }
    let setup = BranchSetup::two_branch(Complex64::new(weight.sqrt(), 0.0), Complex64::new((1.0 - weight).sqrt(), 0.0), samples, seed);
    let o = py.detach(|| branch_experiment(&setup)).map_err(py_err)?;
    Ok((o.frequencies, o.weights, o.crossings))
}

/// Runs a TOML config file; returns the report as a dict.
#[pyfunction]
#[pyo3(signature = (path, overrides = Vec::new(), output_dir = None))]
fn run_config<'py>(py: Python<'py>, path: PathBuf, overrides: Vec<String>, output_dir: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let text = std::fs::read_to_string(&path).map_err(|e| py_err(e.into()))?;
    let source = ConfigSource { text, path: Some(path), experiment: None, overrides, output_dir };
    let config = runner::parse_config(&source).map_err(py_err)?;
    let report = py.detach(|| runner::run(&config)).map_err(py_err)?;
    let value = serde_json::to_value(&report).map_err(|e| py_err(e.into()))?;
    let d = json_to_py(py, &value)?;
    d.set_item("report_path", report.report_path)?;
    Ok(d)
}

#[pymodule]
fn double_solution(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(peregrine, m)?)?;
    m.add_function(wrap_pyfunction!(sn_ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(collapse_criterion, m)?)?;
    m.add_function(wrap_pyfunction!(resonant_wave, m)?)?;
    m.add_function(wrap_pyfunction!(track_resonance, m)?)?;
    m.add_function(wrap_pyfunction!(branch_frequencies, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
