//! Python bindings: expose sample construction, training, classification and
//! the verification suites to Python as the `widc_py` extension module.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use widc::bits::Bits;
use widc::data;
use widc::pipeline::{self, PruneMode, RunConfig};
use widc::verify::{run_all, VerifyOptions};
use widc::{DecisionCommittee, GrowLimits};

fn err(e: widc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn obs_from_py(bits: Vec<bool>) -> Bits {
    Bits::from_bools(&bits)
}

/// A weighted boolean learning sample.
#[pyclass(name = "Sample")]
struct PySample {
    inner: widc::Sample,
}

#[pymethods]
impl PySample {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Number of boolean variables.
    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// Number of classes.
    #[getter]
    fn c(&self) -> usize {
        self.inner.c()
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.inner.class_names().to_vec()
    }

    /// Observation bits of one example.
    fn observation(&self, index: usize) -> PyResult<Vec<bool>> {
        let e = self
            .inner
            .examples()
            .get(index)
            .ok_or_else(|| PyValueError::new_err(format!("index {index} out of range")))?;
        Ok((0..self.inner.n()).map(|i| e.observation().get(i)).collect())
    }

    /// Class indices one example belongs to.
    fn classes(&self, index: usize) -> PyResult<Vec<usize>> {
        let e = self
            .inner
            .examples()
            .get(index)
            .ok_or_else(|| PyValueError::new_err(format!("index {index} out of range")))?;
        Ok(e.classes().ones().collect())
    }

    /// The booleanized CSV dump of this sample.
    fn dump_csv(&self) -> String {
        data::dump_sample_csv(&self.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Sample(len={}, n={}, c={})",
            self.inner.len(),
            self.inner.n(),
            self.inner.c()
        )
    }
}

/// A trained decision committee.
#[pyclass(name = "Committee")]
struct PyCommittee {
    inner: DecisionCommittee,
}

#[pymethods]
impl PyCommittee {
    /// Class index assigned to an observation.
    #[pyo3(signature = (observation, tie_seed = 0))]
    fn classify(&self, observation: Vec<bool>, tie_seed: u64) -> PyResult<usize> {
        self.inner
            .classify(&obs_from_py(observation), tie_seed)
            .map_err(err)
    }

    /// Summed vote vector of an observation.
    fn vote(&self, observation: Vec<bool>) -> PyResult<Vec<i32>> {
        self.inner.vote(&obs_from_py(observation)).map_err(err)
    }

    /// Weighted error on a sample.
    #[pyo3(signature = (sample, tie_seed = 0))]
    fn error_rate(&self, sample: &PySample, tie_seed: u64) -> PyResult<f64> {
        self.inner.error_rate(&sample.inner, tie_seed).map_err(err)
    }

    /// (rule count, total literal count).
    fn size_metrics(&self) -> (usize, usize) {
        self.inner.size_metrics()
    }

    #[getter]
    fn class_names(&self) -> Vec<String> {
        self.inner.class_names().to_vec()
    }

    /// Rules as (positive variable indices, negative variable indices,
    /// votes) triples.
    fn rules(&self) -> Vec<(Vec<usize>, Vec<usize>, Vec<i8>)> {
        self.inner
            .rules()
            .iter()
            .map(|r| {
                (
                    r.monomial.positive_vars(),
                    r.monomial.negative_vars(),
                    r.votes.components().to_vec(),
                )
            })
            .collect()
    }

    #[getter]
    fn default_vector(&self) -> Vec<f64> {
        self.inner.default().components().to_vec()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: DecisionCommittee::from_json(text).map_err(err)?,
        })
    }

    fn __repr__(&self) -> String {
        let (r, l) = self.inner.size_metrics();
        format!("Committee(rules={r}, literals={l}, classes={})", self.inner.c())
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }
}

fn config_from_args(
    mode: &str,
    delta: f64,
    resample: usize,
    seed: u64,
    folds: usize,
    max_rules: usize,
    max_literals: usize,
) -> PyResult<RunConfig> {
    Ok(RunConfig {
        mode: PruneMode::parse(mode).map_err(err)?,
        delta,
        resample_target: resample,
        seed,
        folds,
        limits: GrowLimits {
            max_rules,
            max_literals,
        },
    })
}

/// Generate an XD6 sample.
#[pyfunction]
#[pyo3(signature = (n_examples = 512, class_noise = 0.0, attr_noise = 0.0, seed = 0))]
fn gen_xd6(n_examples: usize, class_noise: f64, attr_noise: f64, seed: u64) -> PyResult<PySample> {
    Ok(PySample {
        inner: data::gen_xd6(n_examples, class_noise, attr_noise, seed).map_err(err)?,
    })
}

/// Load a CSV dataset with its sidecar schema.
#[pyfunction]
fn load_csv(data_path: &str, schema_path: &str) -> PyResult<PySample> {
    let schema = data::DatasetSchema::load(std::path::Path::new(schema_path)).map_err(err)?;
    let loaded = data::load_csv(std::path::Path::new(data_path), &schema).map_err(err)?;
    Ok(PySample {
        inner: loaded.sample,
    })
}

/// Train a committee: grow, assign votes, prune, set the default vector.
#[pyfunction]
#[pyo3(signature = (sample, mode = "p", delta = 0.05, resample = 5000, seed = 0,
                    max_rules = 256, max_literals = 32))]
#[allow(clippy::too_many_arguments)]
fn train(
    sample: &PySample,
    mode: &str,
    delta: f64,
    resample: usize,
    seed: u64,
    max_rules: usize,
    max_literals: usize,
) -> PyResult<PyCommittee> {
    let config = config_from_args(mode, delta, resample, seed, 10, max_rules, max_literals)?;
    let model = pipeline::train(&sample.inner, &config).map_err(err)?;
    Ok(PyCommittee {
        inner: model.committee,
    })
}

/// Stratified k-fold cross validation; returns a dict with per-fold rows and
/// means.
#[pyfunction]
#[pyo3(signature = (sample, mode = "p", folds = 10, delta = 0.05, resample = 5000,
                    seed = 0, max_rules = 256, max_literals = 32))]
#[allow(clippy::too_many_arguments)]
fn cross_validate<'py>(
    py: Python<'py>,
    sample: &PySample,
    mode: &str,
    folds: usize,
    delta: f64,
    resample: usize,
    seed: u64,
    max_rules: usize,
    max_literals: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let config = config_from_args(mode, delta, resample, seed, folds, max_rules, max_literals)?;
    let report = pipeline::cross_validate(&sample.inner, &config).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("mode", &report.mode)?;
    out.set_item("seed", report.seed)?;
    out.set_item("mean_error", report.mean_error)?;
    out.set_item("mean_r_dc", report.mean_r_dc)?;
    out.set_item("mean_l_dc", report.mean_l_dc)?;
    let rows: Vec<(usize, f64, usize, usize)> = report
        .folds
        .iter()
        .map(|f| (f.fold, f.error, f.r_dc, f.l_dc))
        .collect();
    out.set_item("folds", rows)?;
    Ok(out)
}

/// Run the verification suites; returns the rendered report. Raises when a
/// suite fails.
#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn verify(seed: u64) -> PyResult<String> {
    let report = run_all(&VerifyOptions {
        seed,
        ..VerifyOptions::default()
    })
    .map_err(err)?;
    if !report.passed() {
        return Err(PyValueError::new_err(report.render()));
    }
    Ok(report.render())
}

#[pymodule]
fn widc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySample>()?;
    m.add_class::<PyCommittee>()?;
    m.add_function(wrap_pyfunction!(gen_xd6, m)?)?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(cross_validate, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
