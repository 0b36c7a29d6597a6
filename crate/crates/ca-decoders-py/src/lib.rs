//! Python module `ca_decoders`: decoder simulations, reference oracles and the
//! closed-form lifetime models.

use ca_decoders::harness::{self, DecoderKind, ExperimentSpec, NoiseModel, NoiseParams, ResetPolicy, ShotsPolicy};
use ca_decoders::harrington::HierConstants;
use ca_decoders::record::ResultRecord;
use ca_decoders::{markov, oracles, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidDistance { .. } | Error::Domain(_) | Error::InvalidSpec(_) | Error::OddDefectCount(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Bit-flip errors on a distance-`d` repetition code, as an integer mask.
#[pyclass(module = "ca_decoders", skip_from_py_object)]
#[derive(Clone)]
struct RepetitionState {
    inner: ca_decoders::RepetitionState,
}

#[pymethods]
impl RepetitionState {
    #[new]
    #[pyo3(signature = (d, bits = 0))]
    fn new(d: usize, bits: u128) -> PyResult<Self> {
        let inner = ca_decoders::RepetitionState::from_bits(d, bits).map_err(py_err)?;
        Ok(RepetitionState { inner })
    }

    #[getter]
    fn d(&self) -> usize {
        self.inner.d()
    }

    #[getter]
    fn bits(&self) -> u128 {
        self.inner.bits()
    }

    fn weight(&self) -> usize {
        self.inner.weight()
    }

    fn flip(&mut self, i: usize) -> PyResult<()> {
        if i >= self.inner.d() {
            return Err(PyValueError::new_err(format!("qubit {i} is outside the code")));
        }
        self.inner.flip(i);
        Ok(())
    }

    /// Indices of the violated parity checks.
    fn syndrome(&self) -> Vec<usize> {
        self.inner.syndrome().defects()
    }

    fn logical_failure(&self) -> bool {
        self.inner.logical_failure()
    }

    fn __repr__(&self) -> String {
        format!("RepetitionState(d={}, bits=0b{:0w$b})", self.inner.d(), self.inner.bits(), w = self.inner.d())
    }
}

/// SCALA automaton on a repetition code.
#[pyclass(module = "ca_decoders")]
struct Scala1D {
    inner: ca_decoders::Scala1D,
}

#[pymethods]
impl Scala1D {
    #[new]
    fn new(d: usize) -> PyResult<Self> {
        ca_decoders::RepetitionState::new(d).map_err(py_err)?;
        Ok(Scala1D { inner: ca_decoders::Scala1D::new(d) })
    }

    /// Measures `state`, applies one update to it and returns the mask of flipped qubits.
    fn step(&mut self, state: &mut RepetitionState) -> PyResult<u128> {
        if state.inner.d() != self.inner.d() {
            return Err(PyValueError::new_err("state and automaton sizes differ"));
        }
        let s = state.inner.syndrome();
        Ok(self.inner.step(&s, &mut state.inner))
    }

    fn reset(&mut self) {
        self.inner.reset();
    }

    #[getter]
    fn n_sigs(&self) -> usize {
        self.inner.n_sigs()
    }

    /// Noiseless decoding for `d - 2` steps; returns the final state and the signal count.
    #[staticmethod]
    fn run_code_capacity(initial: &RepetitionState) -> (RepetitionState, usize) {
        let (fin, n) = ca_decoders::Scala1D::run_code_capacity(&initial.inner);
        (RepetitionState { inner: fin }, n)
    }
}

/// Exact minimum-weight matching of defects on a `d x d` torus.
#[pyclass(module = "ca_decoders")]
struct MatchingOracle {
    inner: oracles::MatchingOracle,
}

#[pymethods]
impl MatchingOracle {
    #[new]
    fn new(d: usize) -> Self {
        MatchingOracle { inner: oracles::MatchingOracle::new(d) }
    }

    /// Returns `(pairs, weight)` with pairs given as indices into `defects`.
    fn match_defects(&self, defects: Vec<(usize, usize)>) -> PyResult<(Vec<(usize, usize)>, usize)> {
        let m = self.inner.match_defects(&defects).map_err(py_err)?;
        Ok((m.pairs, m.weight))
    }
}

fn record_dict<'py>(py: Python<'py>, r: &ResultRecord) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    let value = serde_json::to_value(r).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    if let serde_json::Value::Object(map) = value {
        for (k, v) in map {
            match v {
                serde_json::Value::Null => dict.set_item(k, py.None())?,
                serde_json::Value::String(s) => dict.set_item(k, s)?,
                serde_json::Value::Number(n) => match n.as_u64() {
                    Some(u) => dict.set_item(k, u)?,
                    None => dict.set_item(k, n.as_f64())?,
                },
                other => dict.set_item(k, other.to_string())?,
            }
        }
    }
    Ok(dict)
}

fn parse_reset(s: &str) -> PyResult<ResetPolicy> {
    match s {
        "never" => Ok(ResetPolicy::Never),
        "ramp" => Ok(ResetPolicy::Ramp),
        "auto" => Ok(ResetPolicy::Auto),
        n => n
            .parse()
            .map(ResetPolicy::Fixed)
            .map_err(|_| PyValueError::new_err(format!("`{n}` is not never, ramp, auto or a period"))),
    }
}

/// Runs one experiment and returns its result record as a dict.
///
/// `q` defaults to `p` outside code capacity. `reset` is `never`, `ramp`, `auto` or a period.
#[pyfunction]
#[pyo3(signature = (decoder, d, model, p, seed, q = None, p_sig = 0.0, p_cs = 0.0, p_fs = 0.0, shots = 1000, adaptive = false, reset = None, t_max = harness::DEFAULT_T_MAX))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    decoder: &str,
    d: usize,
    model: &str,
    p: f64,
    seed: u64,
    q: Option<f64>,
    p_sig: f64,
    p_cs: f64,
    p_fs: f64,
    shots: u64,
    adaptive: bool,
    reset: Option<&str>,
    t_max: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let decoder: DecoderKind = decoder.parse().map_err(py_err)?;
    let model: NoiseModel = model.parse().map_err(py_err)?;
    let q = q.unwrap_or(if model == NoiseModel::CodeCapacity { 0.0 } else { p });
    let noise = NoiseParams { p, q, p_sig, p_cs, p_fs };
    let policy = if adaptive {
        ShotsPolicy::Adaptive { target_rel_se: 0.05, n_min: shots, n_max: shots.saturating_mul(1000) }
    } else {
        ShotsPolicy::Fixed(shots)
    };
    let mut spec = ExperimentSpec::new(decoder, d, model, noise, seed).with_shots(policy).with_t_max(t_max);
    if let Some(r) = reset {
        spec = spec.with_reset(parse_reset(r)?);
    }
    let run = py.detach(|| harness::run(&spec)).map_err(py_err)?;
    record_dict(py, &ResultRecord::from_run(&spec, &run))
}

/// Majority-vote logical error rate of a distance-`d` repetition code.
#[pyfunction]
fn ml_pl_repetition(p: f64, d: usize) -> PyResult<f64> {
    oracles::ml_pl_repetition(p, d).map_err(py_err)
}

#[pyfunction]
fn p_maj(p: f64) -> f64 {
    oracles::p_maj(p)
}

#[pyfunction]
fn concat_majority_pl(p: f64, m: u32) -> PyResult<f64> {
    oracles::concat_majority_pl(p, m).map_err(py_err)
}

#[pyfunction]
fn lifetime_level1(d: usize, p: f64) -> PyResult<f64> {
    markov::lifetime_level1(d, p).map_err(py_err)
}

#[pyfunction]
fn lifetime_d9_total(p: f64) -> PyResult<f64> {
    markov::lifetime_d9_total(p).map_err(py_err)
}

/// `(upper, lower)` bounds on reaching a fraction `f_c` of `window` counts.
#[pyfunction]
fn chernoff_bounds(window: u64, f_c: f64, p: f64) -> PyResult<(f64, f64)> {
    let b = markov::chernoff_bounds(window, f_c, p).map_err(py_err)?;
    Ok((b.upper, b.lower))
}

#[pyfunction]
fn lifetime_lower_bound(d: usize, q: f64) -> PyResult<f64> {
    let c = HierConstants::for_distance(d).map_err(py_err)?;
    markov::lifetime_lower_bound(&c, q).map_err(py_err)
}

/// `(lambda, amplitude, lambda_se)` of a power law through `(rate, estimate)` points.
#[pyfunction]
fn fit_scaling_exponent(points: Vec<(f64, f64)>) -> PyResult<(f64, f64, f64)> {
    let f = harness::fit_scaling_exponent(&points).map_err(py_err)?;
    Ok((f.lambda, f.amplitude, f.lambda_se))
}

#[pyfunction]
fn crossing(a: Vec<(f64, f64)>, b: Vec<(f64, f64)>) -> Option<f64> {
    harness::crossing(&a, &b)
}

#[pymodule]
#[pyo3(name = "ca_decoders")]
fn ca_decoders_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<RepetitionState>()?;
    m.add_class::<Scala1D>()?;
    m.add_class::<MatchingOracle>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(ml_pl_repetition, m)?)?;
    m.add_function(wrap_pyfunction!(p_maj, m)?)?;
    m.add_function(wrap_pyfunction!(concat_majority_pl, m)?)?;
    m.add_function(wrap_pyfunction!(lifetime_level1, m)?)?;
    m.add_function(wrap_pyfunction!(lifetime_d9_total, m)?)?;
    m.add_function(wrap_pyfunction!(chernoff_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(lifetime_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(fit_scaling_exponent, m)?)?;
    m.add_function(wrap_pyfunction!(crossing, m)?)?;
    Ok(())
}
