//! Python bindings for the `kinex` simulation and statistics library.
//!
//! Long-running simulations release the GIL. Library errors surface as
//! `kinex.KinexError` (a `ValueError` subclass), I/O failures as `OSError`.

use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use kinex::entropy;
use kinex::exchange::{self, ExchangeParams, WealthEnsemble};
use kinex::gas::{self, GasParams, GasState};
use kinex::harness::{self, ExperimentConfig, Mode};
use kinex::stats::{self, BinSpec, FitMethod};

create_exception!(kinex, KinexError, PyValueError);

fn to_py(e: kinex::Error) -> PyErr {
    match e {
        kinex::Error::Io(msg) => PyOSError::new_err(msg),
        other => KinexError::new_err(other.to_string()),
    }
}

trait IntoPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for kinex::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

fn parse_fit(method: &str) -> PyResult<FitMethod> {
    match method {
        "moments" => Ok(FitMethod::Moments),
        "mle" => Ok(FitMethod::MaximumLikelihood),
        _ => Err(KinexError::new_err(format!("unknown fit method '{method}' (moments | mle)"))),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

fn serde_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| KinexError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

/// Gamma law with shape `n` and rate `beta`.
#[pyclass(name = "GammaParams", module = "kinex", frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct PyGammaParams {
    inner: stats::GammaParams,
}

#[pymethods]
impl PyGammaParams {
    #[new]
    fn new(shape: f64, rate: f64) -> PyResult<Self> {
        Ok(Self { inner: stats::GammaParams::new(shape, rate).py_err()? })
    }

    /// Fits a gamma law to samples (`method` is "moments" or "mle").
    #[staticmethod]
    #[pyo3(signature = (samples, method = "moments"))]
    fn fit(samples: Vec<f64>, method: &str) -> PyResult<Self> {
        Ok(Self { inner: stats::fit_gamma(&samples, parse_fit(method)?).py_err()? })
    }

    #[getter]
    fn shape(&self) -> f64 {
        self.inner.shape
    }

    #[getter]
    fn rate(&self) -> f64 {
        self.inner.rate
    }

    fn mean(&self) -> f64 {
        self.inner.mean()
    }

    fn variance(&self) -> f64 {
        self.inner.variance()
    }

    fn scale(&self) -> f64 {
        self.inner.scale()
    }

    fn pdf(&self, x: f64) -> PyResult<f64> {
        self.inner.pdf(x).py_err()
    }

    fn cdf(&self, x: f64) -> PyResult<f64> {
        self.inner.cdf(x).py_err()
    }

    fn __repr__(&self) -> String {
        format!("GammaParams(shape={}, rate={})", self.inner.shape, self.inner.rate)
    }
}

/// Density histogram.
#[pyclass(name = "Histogram", module = "kinex", frozen)]
struct PyHistogram {
    #[pyo3(get)]
    edges: Vec<f64>,
    #[pyo3(get)]
    densities: Vec<f64>,
    #[pyo3(get)]
    counts: Vec<u64>,
}

#[pymethods]
impl PyHistogram {
    /// Bins `samples` by a spec string: "default", "linear:N[:lo:hi]" or "log:N[:lo:hi]".
    #[new]
    #[pyo3(signature = (samples, spec = "default"))]
    fn new(py: Python<'_>, samples: Vec<f64>, spec: &str) -> PyResult<Self> {
        let spec: BinSpec = spec.parse().py_err()?;
        let h = py.detach(|| stats::histogram(&samples, &spec)).py_err()?;
        let stats::Histogram { edges, densities, counts, .. } = h;
        Ok(Self { edges, densities, counts })
    }

    fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    fn __len__(&self) -> usize {
        self.densities.len()
    }
}

/// Experiment configuration; `run()` writes outputs and returns the report as a dict.
#[pyclass(name = "Experiment", module = "kinex")]
struct PyExperiment {
    config: ExperimentConfig,
}

#[pymethods]
impl PyExperiment {
    /// `Experiment("exchange", lambda_=0.5, agents=1000, out="results")`; keyword
    /// names are configuration keys (`lambda_` for `lambda`).
    #[new]
    #[pyo3(signature = (mode, **settings))]
    fn new(mode: &str, settings: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mode: Mode = mode.parse().py_err()?;
        let mut exp = Self { config: ExperimentConfig::new(mode) };
        if let Some(settings) = settings {
            for (k, v) in settings.iter() {
                let key: String = k.extract()?;
                exp.set(&key, &v)?;
            }
        }
        Ok(exp)
    }

    /// Parses `key = value` text, as read from a configuration file.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { config: ExperimentConfig::from_text(None, text).py_err()? })
    }

    fn set(&mut self, key: &str, value: &Bound<'_, PyAny>) -> PyResult<()> {
        let key = key.trim_end_matches('_');
        let text = if let Ok(list) = value.cast::<PyList>() {
            let parts: Vec<String> = list.iter().map(|x| x.str().map(|s| s.to_string())).collect::<PyResult<_>>()?;
            parts.join(",")
        } else if let Ok(b) = value.extract::<bool>() {
            b.to_string()
        } else {
            value.str()?.to_string()
        };
        self.config.set(key, &text).py_err()
    }

    fn get(&self, key: &str) -> Option<String> {
        self.config.to_pairs().remove(key.trim_end_matches('_'))
    }

    fn to_text(&self) -> String {
        self.config.to_text()
    }

    fn validate(&self) -> PyResult<()> {
        self.config.validate().py_err()
    }

    /// Runs the experiment; returns `(report, written_files)`.
    fn run<'py>(&self, py: Python<'py>) -> PyResult<(Bound<'py, PyAny>, Vec<String>)> {
        let config = self.config.clone();
        let out = py.detach(move || harness::run_experiment(&config)).py_err()?;
        let report = json_to_py(py, &out.report.to_json().py_err()?)?;
        Ok((report, out.files.iter().map(|p| p.display().to_string()).collect()))
    }

    fn __repr__(&self) -> String {
        format!("Experiment({})", self.config.mode)
    }
}

/// Trade without saving: `(eps s, (1 - eps) s)`.
#[pyfunction]
fn trade_no_saving(xi: f64, xj: f64, eps: f64) -> PyResult<(f64, f64)> {
    exchange::trade_no_saving(xi, xj, eps).py_err()
}

/// Trade with saving propensity `lambda_`.
#[pyfunction]
fn trade_with_saving(xi: f64, xj: f64, lambda_: f64, eps: f64) -> PyResult<(f64, f64)> {
    exchange::trade_with_saving(xi, xj, lambda_, eps).py_err()
}

/// Gamma shape `n(lambda) = (1 + 2 lambda) / (1 - lambda)` of the equilibrium wealth law.
#[pyfunction]
fn effective_shape(lambda_: f64) -> PyResult<f64> {
    exchange::effective_shape(lambda_).py_err()
}

/// Effective dimension `N(lambda) = 2 n(lambda)`.
#[pyfunction]
fn effective_dimension(lambda_: f64) -> PyResult<f64> {
    exchange::effective_dimension(lambda_).py_err()
}

#[pyfunction]
fn lambda_of_dimension(dimension: f64) -> PyResult<f64> {
    exchange::lambda_of_dimension(dimension).py_err()
}

/// `T = 2 <x> / N`.
#[pyfunction]
fn effective_temperature(mean_wealth: f64, dimension: f64) -> PyResult<f64> {
    exchange::effective_temperature(mean_wealth, dimension).py_err()
}

/// Runs the exchange model and returns the final wealths.
#[pyfunction]
#[pyo3(signature = (wealths, lambda_, trades, seed, stream = 0))]
fn run_exchange(
    py: Python<'_>,
    wealths: Vec<f64>,
    lambda_: f64,
    trades: u64,
    seed: u64,
    stream: u64,
) -> PyResult<Vec<f64>> {
    let ensemble = WealthEnsemble::new(wealths).py_err()?;
    let params = ExchangeParams::new(lambda_, trades, seed).py_err()?.with_stream(stream);
    let out = py.detach(|| exchange::run_exchange(ensemble, &params)).py_err()?;
    Ok(out.into_wealths())
}

/// Pooled equilibrium wealth samples over independent replicates.
#[pyfunction]
#[pyo3(signature = (lambda_, agents, trades, seed, replicates = 1, mean = 1.0))]
fn sample_exchange(
    py: Python<'_>,
    lambda_: f64,
    agents: usize,
    trades: u64,
    seed: u64,
    replicates: usize,
    mean: f64,
) -> PyResult<Vec<f64>> {
    let initial = WealthEnsemble::uniform(agents, mean).py_err()?;
    let params = ExchangeParams::new(lambda_, trades, seed).py_err()?;
    let runs = py.detach(|| exchange::sample_replicates(&initial, &params, replicates)).py_err()?;
    Ok(runs.into_iter().flat_map(|r| r.values).collect())
}

/// Elastic collision; returns `(v1', v2', dv)`.
#[pyfunction]
fn collide(v1: Vec<f64>, v2: Vec<f64>, u_hat: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let c = gas::collide(&v1, &v2, &u_hat).py_err()?;
    Ok((c.v1, c.v2, c.transfer))
}

/// Cosines `(r1, r2)` between each velocity and the transfer; `None` where undefined.
#[pyfunction]
fn collision_cosines(v1: Vec<f64>, v2: Vec<f64>, delta_v: Vec<f64>) -> PyResult<(Option<f64>, Option<f64>)> {
    let c = gas::collision_cosines(&v1, &v2, &delta_v).py_err()?;
    Ok((c.r1, c.r2))
}

/// Monte Carlo `<r1^2>` in `dimension` dimensions; returns `(mean, standard_error)`.
#[pyfunction]
#[pyo3(signature = (dimension, samples = 1_000_000, seed = 1))]
fn mean_square_cosine(py: Python<'_>, dimension: usize, samples: usize, seed: u64) -> PyResult<(f64, f64)> {
    let e = py.detach(|| gas::mean_square_cosine(dimension, samples, seed)).py_err()?;
    Ok((e.mean, e.std_error))
}

/// Pooled equilibrium kinetic energies of the N-dimensional gas, started at
/// equal speeds `sqrt(2 mean)` in random directions.
#[pyfunction]
#[pyo3(signature = (dimension, particles, collisions, seed, replicates = 1, mean = 1.0))]
fn sample_gas(
    py: Python<'_>,
    dimension: usize,
    particles: usize,
    collisions: u64,
    seed: u64,
    replicates: usize,
    mean: f64,
) -> PyResult<Vec<f64>> {
    if !(mean > 0.0 && mean.is_finite()) {
        return Err(KinexError::new_err(format!("mean must be positive, got {mean}")));
    }
    let state = GasState::equal_speeds(particles, dimension, (2.0 * mean).sqrt(), seed).py_err()?;
    let params = GasParams::new(collisions, seed);
    let runs = py.detach(|| gas::sample_gas_replicates(&state, &params, replicates)).py_err()?;
    Ok(runs.into_iter().flat_map(|r| r.values).collect())
}

#[pyfunction]
fn gamma_pdf(x: f64, shape: f64, rate: f64) -> PyResult<f64> {
    stats::GammaParams::new(shape, rate).and_then(|p| p.pdf(x)).py_err()
}

#[pyfunction]
fn gamma_cdf(x: f64, shape: f64, rate: f64) -> PyResult<f64> {
    stats::GammaParams::new(shape, rate).and_then(|p| p.cdf(x)).py_err()
}

#[pyfunction]
fn gini(wealths: Vec<f64>) -> PyResult<f64> {
    stats::gini(&wealths).py_err()
}

/// Lorenz curve points `(population share, wealth share)`.
#[pyfunction]
fn lorenz_curve(wealths: Vec<f64>) -> PyResult<Vec<(f64, f64)>> {
    stats::lorenz_curve(&wealths).py_err()
}

/// Gini coefficient of the gamma law with the given shape.
#[pyfunction]
fn gini_of_gamma(shape: f64) -> PyResult<f64> {
    stats::gini_of_gamma(shape).py_err()
}

/// Kolmogorov-Smirnov distance between samples and a gamma law.
#[pyfunction]
fn ks_statistic(samples: Vec<f64>, params: &PyGammaParams) -> PyResult<f64> {
    let law = params.inner;
    stats::ks_statistic(&samples, |x| law.cdf(x).unwrap_or(f64::NAN)).py_err()
}

/// Fit, Gini, Lorenz curve and KS distance as a dict.
#[pyfunction]
#[pyo3(signature = (samples, method = "moments"))]
fn inequality_report<'py>(py: Python<'py>, samples: Vec<f64>, method: &str) -> PyResult<Bound<'py, PyAny>> {
    let method = parse_fit(method)?;
    let report = py.detach(|| stats::inequality_report(&samples, method)).py_err()?;
    serde_to_py(py, &report)
}

/// `ln W` for the given occupation numbers.
#[pyfunction]
fn multinomial_entropy(occupations: Vec<u64>) -> PyResult<f64> {
    entropy::multinomial_entropy(&occupations).py_err()
}

#[pyfunction]
fn canonical_occupancy(levels: Vec<f64>, beta: f64) -> PyResult<Vec<f64>> {
    entropy::canonical_occupancy(&levels, beta).py_err()
}

/// Surface area of the unit sphere in `dimension` dimensions.
#[pyfunction]
fn hypersphere_surface(dimension: f64) -> PyResult<f64> {
    entropy::hypersphere_surface(dimension).py_err()
}

/// Constrained-perturbation check of the gamma law's extremality; returns a dict.
#[pyfunction]
#[pyo3(signature = (dimension, beta = 1.0, trials = 100, amplitude = 1e-2, seed = 1))]
fn stationarity_check<'py>(
    py: Python<'py>,
    dimension: f64,
    beta: f64,
    trials: usize,
    amplitude: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| entropy::stationarity_check(dimension, beta, trials, amplitude, seed)).py_err()?;
    serde_to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (beta = 1.0))]
fn maxwell_boltzmann_check<'py>(py: Python<'py>, beta: f64) -> PyResult<Bound<'py, PyAny>> {
    serde_to_py(py, &entropy::maxwell_boltzmann_check(beta).py_err()?)
}

#[pymodule]
#[pyo3(name = "kinex")]
fn kinex_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("KinexError", m.py().get_type::<KinexError>())?;
    m.add_class::<PyGammaParams>()?;
    m.add_class::<PyHistogram>()?;
    m.add_class::<PyExperiment>()?;
    m.add_function(wrap_pyfunction!(trade_no_saving, m)?)?;
    m.add_function(wrap_pyfunction!(trade_with_saving, m)?)?;
    m.add_function(wrap_pyfunction!(effective_shape, m)?)?;
    m.add_function(wrap_pyfunction!(effective_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_of_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(effective_temperature, m)?)?;
    m.add_function(wrap_pyfunction!(run_exchange, m)?)?;
    m.add_function(wrap_pyfunction!(sample_exchange, m)?)?;
    m.add_function(wrap_pyfunction!(collide, m)?)?;
    m.add_function(wrap_pyfunction!(collision_cosines, m)?)?;
    m.add_function(wrap_pyfunction!(mean_square_cosine, m)?)?;
    m.add_function(wrap_pyfunction!(sample_gas, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_pdf, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(gini, m)?)?;
    m.add_function(wrap_pyfunction!(lorenz_curve, m)?)?;
    m.add_function(wrap_pyfunction!(gini_of_gamma, m)?)?;
    m.add_function(wrap_pyfunction!(ks_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(inequality_report, m)?)?;
    m.add_function(wrap_pyfunction!(multinomial_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(canonical_occupancy, m)?)?;
    m.add_function(wrap_pyfunction!(hypersphere_surface, m)?)?;
    m.add_function(wrap_pyfunction!(stationarity_check, m)?)?;
    m.add_function(wrap_pyfunction!(maxwell_boltzmann_check, m)?)?;
    Ok(())
}
