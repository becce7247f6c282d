//! Python bindings: device and probe parameters, the closed-form spectra,
//! temperature inversion and the simulate/analyze/thermometry pipeline.
//! Arrays cross the boundary as plain lists.

use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use omthermo::commands::{cmd_analyze, cmd_simulate, cmd_thermometry};
use omthermo::io::RunConfig;
use omthermo::selftest::{run_all, Scale};
use omthermo::{model, ComplexSpectrum, Error};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Validation { .. } | Error::Format { .. } => PyValueError::new_err(e.to_string()),
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

type Parts = (Vec<f64>, Vec<f64>);

fn parts(s: ComplexSpectrum) -> Parts {
    (s.re(), s.values.iter().map(|z| z.im).collect())
}

#[pyclass(name = "DeviceParams", from_py_object)]
#[derive(Clone)]
struct PyDevice(model::DeviceParams);

#[pymethods]
impl PyDevice {
    /// Defaults are the GaAs disk of the reference experiment; all rates in rad/s.
    #[new]
    #[pyo3(signature = (*, mass=None, omega_m=None, gamma_m=None, g0=None, kappa=None, kappa_out=None))]
    fn new(
        mass: Option<f64>,
        omega_m: Option<f64>,
        gamma_m: Option<f64>,
        g0: Option<f64>,
        kappa: Option<f64>,
        kappa_out: Option<f64>,
    ) -> PyResult<Self> {
        let mut d = model::DeviceParams::default();
        d.m = mass.unwrap_or(d.m);
        d.omega_m = omega_m.unwrap_or(d.omega_m);
        d.gamma_m = gamma_m.unwrap_or(d.gamma_m);
        d.g0 = g0.unwrap_or(d.g0);
        d.kappa = kappa.unwrap_or(d.kappa);
        d.kappa_out = kappa_out.unwrap_or(d.kappa_out);
        d.validate().map_err(py_err)?;
        Ok(PyDevice(d))
    }

    #[getter]
    fn mass(&self) -> f64 {
        self.0.m
    }
    #[getter]
    fn omega_m(&self) -> f64 {
        self.0.omega_m
    }
    #[getter]
    fn gamma_m(&self) -> f64 {
        self.0.gamma_m
    }
    #[getter]
    fn g0(&self) -> f64 {
        self.0.g0
    }
    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa
    }
    #[getter]
    fn kappa_out(&self) -> f64 {
        self.0.kappa_out
    }

    fn cooperativity(&self, nbar: f64) -> f64 {
        self.0.cooperativity(nbar)
    }

    fn nbar_for_cooperativity(&self, c: f64) -> f64 {
        self.0.nbar_for_cooperativity(c)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

#[pyclass(name = "ProbeParams", from_py_object)]
#[derive(Clone)]
struct PyProbe(model::ProbeParams);

#[pymethods]
impl PyProbe {
    #[new]
    #[pyo3(signature = (*, nbar=None, t_bath=None, delta_p=None, delta_lo=None, efficiency=None))]
    fn new(
        nbar: Option<f64>,
        t_bath: Option<f64>,
        delta_p: Option<f64>,
        delta_lo: Option<f64>,
        efficiency: Option<f64>,
    ) -> PyResult<Self> {
        let mut p = model::ProbeParams::default();
        p.nbar = nbar.unwrap_or(p.nbar);
        p.t_bath = t_bath.unwrap_or(p.t_bath);
        p.delta_p = delta_p.unwrap_or(p.delta_p);
        p.delta_lo = delta_lo.unwrap_or(p.delta_lo);
        p.eps = efficiency.unwrap_or(p.eps);
        p.validate().map_err(py_err)?;
        Ok(PyProbe(p))
    }

    #[getter]
    fn nbar(&self) -> f64 {
        self.0.nbar
    }
    #[getter]
    fn t_bath(&self) -> f64 {
        self.0.t_bath
    }
    #[getter]
    fn delta_p(&self) -> f64 {
        self.0.delta_p
    }
    #[getter]
    fn delta_lo(&self) -> f64 {
        self.0.delta_lo
    }
    #[getter]
    fn efficiency(&self) -> f64 {
        self.0.eps
    }
    #[getter]
    fn lo_sign(&self) -> i8 {
        self.0.lo_sign()
    }

    fn with_lo_sign(&self, sign: i8) -> Self {
        PyProbe(self.0.with_lo_sign(sign))
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.0)
    }
}

/// Amplitude–phase cross-spectrum on `freqs` (rad/s), as (re, im) lists.
#[pyfunction]
fn quantum_correlation_spectrum(freqs: Vec<f64>, device: &PyDevice, probe: &PyProbe) -> PyResult<Parts> {
    model::quantum_correlation_spectrum(&freqs, &device.0, &probe.0)
        .map(parts)
        .map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (freqs, device, probe, include_rpsn=false))]
fn thermal_correlation_spectrum(freqs: Vec<f64>, device: &PyDevice, probe: &PyProbe, include_rpsn: bool) -> PyResult<Parts> {
    model::thermal_correlation_spectrum(&freqs, &device.0, &probe.0, include_rpsn)
        .map(parts)
        .map_err(py_err)
}

/// S_{θ1,θ2}(ω) between two rotated quadratures.
#[pyfunction]
fn general_cross_spectrum(theta1: f64, theta2: f64, freqs: Vec<f64>, device: &PyDevice, probe: &PyProbe) -> PyResult<Parts> {
    model::general_cross_spectrum(theta1, theta2, &freqs, &device.0, &probe.0)
        .map(parts)
        .map_err(py_err)
}

#[pyfunction]
fn coth_ratio(omega: f64, t: f64) -> PyResult<f64> {
    model::coth_ratio(omega, t).map_err(py_err)
}

#[pyfunction]
fn thermal_occupation(omega: f64, t: f64) -> PyResult<f64> {
    model::thermal_occupation(omega, t).map_err(py_err)
}

/// Peak heights (quantum, thermal) of the two correlation spectra at ω_m.
#[pyfunction]
fn peaks(device: &PyDevice, probe: &PyProbe) -> PyResult<(f64, f64)> {
    let t = model::thermal_peak(&device.0, &probe.0).map_err(py_err)?;
    Ok((model::quantum_peak(&device.0, &probe.0), t))
}

/// Temperature and error from a coth-ratio measurement r ± sr at ω.
#[pyfunction]
fn temperature_from_coth_ratio(r: f64, sr: f64, omega: f64) -> PyResult<(f64, f64)> {
    let e = omthermo::fit::temperature_from_coth_ratio(r, sr, omega).map_err(py_err)?;
    Ok((e.t, e.sigma_t))
}

/// Canonical form of a configuration text (empty text gives the defaults).
#[pyfunction]
fn canonical_config(text: &str) -> PyResult<String> {
    RunConfig::parse(text).map(|c| c.canonical()).map_err(py_err)
}

/// Writes records under `out`; returns the manifest paths.
#[pyfunction]
fn simulate(py: Python<'_>, config: &str, out: PathBuf) -> PyResult<Vec<String>> {
    let cfg = RunConfig::parse(config).map_err(py_err)?;
    let m = py.detach(|| cmd_simulate(&cfg, &out)).map_err(py_err)?;
    Ok(m.files.into_iter().map(|f| f.path).collect())
}

#[pyfunction]
#[pyo3(signature = (config, records, out, skip_calibration=false))]
fn analyze(py: Python<'_>, config: &str, records: PathBuf, out: PathBuf, skip_calibration: bool) -> PyResult<Vec<String>> {
    let cfg = RunConfig::parse(config).map_err(py_err)?;
    let m = py.detach(|| cmd_analyze(&cfg, &records, &out, skip_calibration)).map_err(py_err)?;
    Ok(m.files.into_iter().map(|f| f.path).collect())
}

/// Runs thermometry and returns the report as a JSON string.
#[pyfunction]
fn thermometry(py: Python<'_>, config: &str, spectra: PathBuf, out: PathBuf) -> PyResult<String> {
    let cfg = RunConfig::parse(config).map_err(py_err)?;
    let r = py.detach(|| cmd_thermometry(&cfg, &spectra, &out)).map_err(py_err)?;
    serde_json::to_string(&r).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Acceptance checks; returns (id, passed, details) per criterion.
#[pyfunction]
#[pyo3(signature = (full=false))]
fn selftest(py: Python<'_>, full: bool) -> Vec<(String, bool, String)> {
    let scale = if full { Scale::Full } else { Scale::Reduced };
    py.detach(|| run_all(scale))
        .into_iter()
        .map(|v| (v.id.to_string(), v.pass, v.to_string()))
        .collect()
}

#[pymodule]
fn omthermo_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDevice>()?;
    m.add_class::<PyProbe>()?;
    m.add_function(wrap_pyfunction!(quantum_correlation_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_correlation_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(general_cross_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(coth_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(thermal_occupation, m)?)?;
    m.add_function(wrap_pyfunction!(peaks, m)?)?;
    m.add_function(wrap_pyfunction!(temperature_from_coth_ratio, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_config, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(thermometry, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    m.add("__version__", omthermo::TOOL_VERSION)?;
    Ok(())
}
