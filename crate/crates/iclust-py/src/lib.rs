//! Python bindings for the iclust library.
//!
//! Matrices cross the boundary as lists of float rows and results come
//! back as plain Python structures, so the module has no numpy
//! dependency. Errors surface as `ValueError`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use iclust::{
    evaluate_with_baselines, pairwise_distances, CvStrategy, DataMatrix, InitMethod, MergeConfig,
    MetricSet, Partition, PipelineConfig,
};

fn to_py_err(err: iclust::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<DataMatrix> {
    DataMatrix::from_rows(rows).map_err(to_py_err)
}

/// Final clustering of one pipeline run.
#[pyclass(frozen)]
struct ClusterResult {
    /// Cluster id per observation, in input row order.
    #[pyo3(get)]
    assignment: Vec<usize>,
    #[pyo3(get)]
    k_init: usize,
    #[pyo3(get)]
    k_final: usize,
    #[pyo3(get)]
    merges: usize,
    #[pyo3(get)]
    rejections: usize,
}

#[pymethods]
impl ClusterResult {
    fn __repr__(&self) -> String {
        format!(
            "ClusterResult(n={}, k_init={}, k_final={}, merges={}, rejections={})",
            self.assignment.len(),
            self.k_init,
            self.k_final,
            self.merges,
            self.rejections
        )
    }
}

/// Reads a headered CSV and returns `(rows, labels)`. Without a label
/// column every row is labeled `"_"`.
#[pyfunction]
#[pyo3(signature = (path, label_column=None))]
fn load_csv(path: &str, label_column: Option<&str>) -> PyResult<(Vec<Vec<f64>>, Vec<String>)> {
    let ds = iclust::load_csv(std::path::Path::new(path), label_column).map_err(to_py_err)?;
    let rows = ds.matrix.rows().map(<[f64]>::to_vec).collect();
    Ok((rows, ds.labels))
}

/// Column-wise z-scoring (n−1 denominator); returns
/// `(rows, means, sds, constant_columns)`. Constant columns map to zeros.
#[pyfunction]
fn standardize(
    rows: Vec<Vec<f64>>,
) -> PyResult<(Vec<Vec<f64>>, Vec<f64>, Vec<f64>, Vec<usize>)> {
    let matrix = matrix_from_rows(rows)?;
    let s = iclust::standardize(&matrix).map_err(to_py_err)?;
    let rows = s.matrix.rows().map(<[f64]>::to_vec).collect();
    Ok((rows, s.means, s.sds, s.constant_columns))
}

/// LOF scores of every observation at q = 1..=q_max with the whole
/// dataset as scope; returns `(scores, representative)` where `scores`
/// has one row of q_max values per observation and `representative` is
/// the per-observation mean across q.
#[pyfunction]
#[pyo3(signature = (rows, q_max=5))]
fn lof_profile(rows: Vec<Vec<f64>>, q_max: usize) -> PyResult<(Vec<Vec<f64>>, Vec<f64>)> {
    let matrix = matrix_from_rows(rows)?;
    let dm = pairwise_distances(&matrix);
    let scope: Vec<usize> = (0..matrix.n()).collect();
    let profile = iclust::lof_profile(&dm, &scope, q_max).map_err(to_py_err)?;

    let columns: Vec<Vec<f64>> = (1..=q_max).map(|q| profile.scores_for_q(q)).collect();
    let scores = (0..matrix.n())
        .map(|i| columns.iter().map(|c| c[i]).collect())
        .collect();
    Ok((scores, profile.representative().to_vec()))
}

/// Full pipeline: over-cluster with `init`, then merge gated by the
/// two-sided LOF test. `initial` supplies the starting assignment for
/// `init="external"`.
#[pyfunction]
#[pyo3(signature = (rows, *, standardize=true, init="ward", k_init=None, q_max=5, cv="cv1",
                    mad_scale=1.4826, spread=2.0, seed=0, initial=None))]
#[allow(clippy::too_many_arguments)]
fn cluster(
    rows: Vec<Vec<f64>>,
    standardize: bool,
    init: &str,
    k_init: Option<usize>,
    q_max: usize,
    cv: &str,
    mad_scale: f64,
    spread: f64,
    seed: u64,
    initial: Option<Vec<usize>>,
) -> PyResult<ClusterResult> {
    let matrix = matrix_from_rows(rows)?;
    let init = match init {
        "ward" => InitMethod::Ward,
        "complete" => InitMethod::Complete,
        "single" => InitMethod::Single,
        "kmeans" => InitMethod::Kmeans,
        "external" => {
            let assignment = initial
                .ok_or_else(|| PyValueError::new_err("init=\"external\" requires initial"))?;
            InitMethod::External(Partition::from_assignment(assignment).map_err(to_py_err)?)
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown init {other:?}; expected ward, complete, single, kmeans or external"
            )))
        }
    };
    let cv_strategy: CvStrategy = cv.parse().map_err(to_py_err)?;

    let config = PipelineConfig {
        standardize,
        init,
        k_init,
        merge: MergeConfig {
            q_max_cap: q_max,
            cv_strategy,
            mad_scale,
            spread_multiplier: spread,
        },
        seed,
    };
    let result = iclust::cluster(&matrix, &config).map_err(to_py_err)?;
    Ok(ClusterResult {
        assignment: result.final_partition().assignment().to_vec(),
        k_init: result.k_init,
        k_final: result.final_partition().k(),
        merges: result.trace.merges,
        rejections: result.trace.rejections,
    })
}

fn metric_dict<'py>(py: Python<'py>, m: &MetricSet) -> PyResult<Bound<'py, PyDict>> {
    let weighted = PyDict::new(py);
    for (name, c) in [("big", &m.weighted.big), ("small", &m.weighted.small)] {
        let d = PyDict::new(py);
        d.set_item("f", c.f)?;
        d.set_item("precision", c.precision)?;
        d.set_item("recall", c.recall)?;
        weighted.set_item(name, d)?;
    }
    let out = PyDict::new(py);
    out.set_item("purity", m.purity)?;
    out.set_item("f_measure", m.f_measure)?;
    out.set_item("homogeneity", m.homogeneity)?;
    out.set_item("completeness", m.completeness)?;
    out.set_item("v_measure", m.v_measure)?;
    out.set_item("weighted", weighted)?;
    out.set_item("k_detected", m.k_detected)?;
    Ok(out)
}

/// Every evaluation measure for a labeling, plus the all-singletons and
/// one-cluster baselines, as nested dicts.
#[pyfunction]
#[pyo3(signature = (truth, pred, small_threshold=10))]
fn evaluate<'py>(
    py: Python<'py>,
    truth: Vec<String>,
    pred: Vec<usize>,
    small_threshold: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let report = evaluate_with_baselines(&truth, &pred, small_threshold).map_err(to_py_err)?;
    let out = PyDict::new(py);
    out.set_item("metrics", metric_dict(py, &report.metrics)?)?;
    out.set_item("all_singletons", metric_dict(py, &report.all_singletons)?)?;
    out.set_item("one_cluster", metric_dict(py, &report.one_cluster)?)?;
    Ok(out)
}

#[pymodule]
fn iclust_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ClusterResult>()?;
    m.add_function(wrap_pyfunction!(load_csv, m)?)?;
    m.add_function(wrap_pyfunction!(standardize, m)?)?;
    m.add_function(wrap_pyfunction!(lof_profile, m)?)?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    Ok(())
}
