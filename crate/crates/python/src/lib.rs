//! Python bindings. Exact rationals cross the boundary as `"p/q"` strings,
//! which `fractions.Fraction` parses directly.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use lilypad::chain::{self, parse_ratio, SolveOptions};
use lilypad::montecarlo::{self, ExperimentConfig, SummaryStats};
use lilypad::{lcs, signed, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Parse(_) | Error::Alphabet(_) | Error::SymbolRange { .. } | Error::Invalid(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn ratio(s: &str) -> PyResult<lilypad::BigRational> {
    parse_ratio(s).map_err(to_py)
}

/// A finite word over {0, ..., alphabet-1}.
#[pyclass(frozen, skip_from_py_object)]
#[derive(Clone)]
struct Word {
    inner: lilypad::Word,
}

#[pymethods]
impl Word {
    #[new]
    #[pyo3(signature = (text, alphabet=None))]
    fn new(text: &str, alphabet: Option<usize>) -> PyResult<Self> {
        Ok(Word { inner: lilypad::Word::parse(text, alphabet).map_err(to_py)? })
    }

    #[staticmethod]
    fn from_symbols(symbols: Vec<u8>, alphabet: usize) -> PyResult<Self> {
        let a = lilypad::Alphabet::new(alphabet).map_err(to_py)?;
        Ok(Word { inner: lilypad::Word::new(symbols, a).map_err(to_py)? })
    }

    #[getter]
    fn symbols(&self) -> Vec<u8> {
        self.inner.symbols().to_vec()
    }

    #[getter]
    fn alphabet(&self) -> usize {
        self.inner.alphabet().size()
    }

    fn is_irreducible(&self) -> PyResult<bool> {
        self.inner.is_irreducible().map_err(to_py)
    }

    fn periodic_expand(&self, n: usize) -> PyResult<Word> {
        Ok(Word { inner: self.inner.periodic_expand(n).map_err(to_py)? })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Word({:?}, alphabet={})", self.inner.symbols(), self.inner.alphabet().size())
    }
}

/// The frog chain of a word, with its stationary law solved.
#[pyclass(frozen)]
struct FrogChain {
    inner: lilypad::ChainSolution,
}

#[pymethods]
impl FrogChain {
    #[new]
    #[pyo3(signature = (word, alphabet=None))]
    fn new(word: &Word, alphabet: Option<usize>) -> PyResult<Self> {
        let a = match alphabet {
            Some(q) => lilypad::Alphabet::new(q).map_err(to_py)?,
            None => word.inner.alphabet(),
        };
        let inner = lilypad::ChainSolution::solve(&word.inner, a, &SolveOptions::default()).map_err(to_py)?;
        Ok(FrogChain { inner })
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    fn speeds(&self) -> Vec<String> {
        self.inner.speeds().unwrap_or_default().iter().map(|s| s.to_string()).collect()
    }

    fn gamma(&self, rho: &str) -> PyResult<String> {
        Ok(self.inner.gamma(&ratio(rho)?).map_err(to_py)?.to_string())
    }

    fn tau(&self, rho: &str) -> PyResult<f64> {
        self.inner.tau(&ratio(rho)?, &SolveOptions::default()).map_err(to_py)
    }

    fn sigmas(&self) -> PyResult<Vec<f64>> {
        self.inner.sigmas(&SolveOptions::default()).map_err(to_py)
    }

    /// The whole curve as JSON.
    fn curve_json(&self) -> PyResult<String> {
        Ok(self.inner.curve(&SolveOptions::default()).map_err(to_py)?.to_json())
    }
}

/// Summary of a Monte Carlo sample.
#[pyclass(frozen, get_all)]
struct Summary {
    count: usize,
    mean: f64,
    stddev: f64,
    min: f64,
    max: f64,
}

impl From<SummaryStats> for Summary {
    fn from(s: SummaryStats) -> Self {
        Summary { count: s.count, mean: s.mean, stddev: s.stddev, min: s.min, max: s.max }
    }
}

#[pymethods]
impl Summary {
    fn __repr__(&self) -> String {
        format!("Summary(count={}, mean={}, stddev={}, min={}, max={})", self.count, self.mean, self.stddev, self.min, self.max)
    }
}

fn config(seed: u64, trials: usize, n: usize, alphabet: usize, threads: usize) -> ExperimentConfig {
    ExperimentConfig::new(seed, trials, n, alphabet).with_threads(threads)
}

#[pyfunction]
fn lcs_length(v: &Word, w: &Word) -> usize {
    lcs::lcs_bitparallel(&v.inner, &w.inner)
}

#[pyfunction]
fn lcs_banded(v: &Word, w: &Word, band: i64) -> PyResult<usize> {
    lcs::lcs_banded(&v.inner, &w.inner, band).map_err(to_py)
}

/// LCS(r, W^(x)).
#[pyfunction]
fn lcs_periodic(r: &Word, w: &Word, x: usize) -> PyResult<usize> {
    lcs::lcs_periodic(&r.inner, &w.inner, x).map_err(to_py)
}

#[pyfunction]
fn delta_statistic(v: &Word, w: &Word) -> PyResult<usize> {
    lcs::delta_statistic(&v.inner, &w.inner).map_err(to_py)
}

/// Ledges of the k-height after feeding `r` to the ring of `w`.
#[pyfunction]
fn ledges_after(r: &Word, w: &Word) -> Vec<i64> {
    lilypad::frogs::ledges_after(&r.inner, &w.inner).ledges().to_vec()
}

#[pyfunction]
fn speeds_closed_form(k: usize, alphabet: usize) -> PyResult<Vec<String>> {
    Ok(chain::speeds_closed_form(k, alphabet).map_err(to_py)?.iter().map(|q| q.to_string()).collect())
}

#[pyfunction]
fn margins_formula(k: usize, m: usize, positions: Vec<i64>) -> PyResult<String> {
    Ok(signed::margins_formula(k, m, &positions).map_err(to_py)?.to_string())
}

#[pyfunction]
fn margins_bruteforce(k: usize, m: usize, positions: Vec<i64>) -> PyResult<String> {
    Ok(signed::margins_bruteforce(k, m, &positions).map_err(to_py)?.to_string())
}

/// Runs the coupled chain and returns (CSV table, max conditional TV).
#[pyfunction]
#[pyo3(signature = (k, m, steps, seed=0))]
fn coupled_run(py: Python<'_>, k: usize, m: usize, steps: u64, seed: u64) -> PyResult<(String, f64)> {
    let run = py.detach(|| signed::coupled_run(k, m, steps, seed)).map_err(to_py)?;
    let tv = run.max_conditional_tv().map_err(to_py)?;
    Ok((run.to_csv(), tv))
}

#[pyfunction]
#[pyo3(signature = (word, n, trials, seed=0, threads=0))]
fn estimate_speeds(py: Python<'_>, word: &Word, n: usize, trials: usize, seed: u64, threads: usize) -> PyResult<Vec<Summary>> {
    let cfg = config(seed, trials, n, word.inner.alphabet().size(), threads);
    let stats = py.detach(|| montecarlo::estimate_speeds(&word.inner, &cfg)).map_err(to_py)?;
    Ok(stats.into_iter().map(Summary::from).collect())
}

#[pyfunction]
#[pyo3(signature = (word, rho, n, trials, seed=0, threads=0))]
fn lambda_samples(py: Python<'_>, word: &Word, rho: &str, n: usize, trials: usize, seed: u64, threads: usize) -> PyResult<Vec<f64>> {
    let cfg = config(seed, trials, n, word.inner.alphabet().size(), threads);
    let rho = ratio(rho)?;
    py.detach(|| montecarlo::lambda_samples(&word.inner, &rho, &cfg)).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (n, trials, alphabet=2, seed=0, use_heuristic=false, threads=0))]
fn delta_experiment(
    py: Python<'_>,
    n: usize,
    trials: usize,
    alphabet: usize,
    seed: u64,
    use_heuristic: bool,
    threads: usize,
) -> PyResult<Summary> {
    let cfg = config(seed, trials, n, alphabet, threads);
    Ok(py.detach(|| montecarlo::delta_experiment(&cfg, use_heuristic)).map_err(to_py)?.into())
}

#[pyfunction]
#[pyo3(signature = (n, trials, alphabet=2, seed=0, threads=0))]
fn estimate_gamma_cs(py: Python<'_>, n: usize, trials: usize, alphabet: usize, seed: u64, threads: usize) -> PyResult<Summary> {
    let cfg = config(seed, trials, n, alphabet, threads);
    Ok(py.detach(|| montecarlo::estimate_gamma_cs(&cfg)).map_err(to_py)?.into())
}

#[pymodule]
fn lilypad_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Word>()?;
    m.add_class::<FrogChain>()?;
    m.add_class::<Summary>()?;
    m.add_function(wrap_pyfunction!(lcs_length, m)?)?;
    m.add_function(wrap_pyfunction!(lcs_banded, m)?)?;
    m.add_function(wrap_pyfunction!(lcs_periodic, m)?)?;
    m.add_function(wrap_pyfunction!(delta_statistic, m)?)?;
    m.add_function(wrap_pyfunction!(ledges_after, m)?)?;
    m.add_function(wrap_pyfunction!(speeds_closed_form, m)?)?;
    m.add_function(wrap_pyfunction!(margins_formula, m)?)?;
    m.add_function(wrap_pyfunction!(margins_bruteforce, m)?)?;
    m.add_function(wrap_pyfunction!(coupled_run, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_speeds, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_samples, m)?)?;
    m.add_function(wrap_pyfunction!(delta_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_gamma_cs, m)?)?;
    Ok(())
}
