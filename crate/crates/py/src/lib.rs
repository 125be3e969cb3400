use std::collections::BTreeMap;
use std::path::PathBuf;

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use tkg_core::centrality::centrality_report;
use tkg_core::corpus::{self, partition_by_period, PeriodSpec};
use tkg_core::dynamics::{self, DecayConfig};
use tkg_core::error::TkgError;
use tkg_core::graph::{build_period_graph, ComponentKey};
use tkg_core::null_model::{self, NullConfig};
use tkg_core::taxonomy::{CategoryCode, Taxonomy};
use tkg_core::temporal::{kendall_tau_b_values, StatKind};

fn to_py(e: TkgError) -> PyErr {
    match e {
        TkgError::Io { .. } => PyOSError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// A validated paper corpus.
#[pyclass(frozen)]
struct Corpus {
    inner: corpus::Corpus,
}

#[pymethods]
impl Corpus {
    /// Loads a CSV or JSON corpus; bundled taxonomy and periods by default.
    #[staticmethod]
    #[pyo3(signature = (path, taxonomy=None, periods=None))]
    fn load(path: PathBuf, taxonomy: Option<PathBuf>, periods: Option<PathBuf>) -> PyResult<Self> {
        let taxonomy = match taxonomy {
            Some(p) => Taxonomy::from_json_file(&p).map_err(to_py)?,
            None => Taxonomy::default(),
        };
        let periods = match periods {
            Some(p) => PeriodSpec::from_json_file(&p).map_err(to_py)?,
            None => PeriodSpec::default(),
        };
        let inner = corpus::load_corpus_file(&path, taxonomy, periods).map_err(to_py)?;
        Ok(Corpus { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Period labels in order.
    fn periods(&self) -> Vec<String> {
        self.inner.period_spec().periods().iter().map(|p| p.label.clone()).collect()
    }

    /// `(paper_id, year, measure, data_type, rq_type)` tuples.
    fn records(&self) -> Vec<(String, i32, String, String, String)> {
        self.inner
            .records()
            .iter()
            .map(|r| {
                (
                    r.paper_id.clone(),
                    r.year,
                    r.measure.to_string(),
                    r.data_type.to_string(),
                    r.rq_type.to_string(),
                )
            })
            .collect()
    }

    /// Builds the graph of one period.
    fn graph(&self, period: &str) -> PyResult<PeriodGraph> {
        let bucket = partition_by_period(&self.inner)
            .into_iter()
            .find(|b| b.label == period)
            .ok_or_else(|| PyValueError::new_err(format!("unknown period `{period}`")))?;
        let (graph, table) = build_period_graph(&bucket.label, &bucket.records).map_err(to_py)?;
        Ok(PeriodGraph { graph, table })
    }

    /// Time-decayed weight per year for a component such as `M1` or `M1-R4`.
    #[pyo3(signature = (key, mode="counts", half_life=5.0))]
    fn decay(&self, key: &str, mode: &str, half_life: f64) -> PyResult<BTreeMap<i32, f64>> {
        let key: ComponentKey = key.parse().map_err(to_py)?;
        let spec = self.inner.period_spec();
        let config = DecayConfig {
            lambda: DecayConfig::lambda_for_half_life(half_life),
            year_min: spec.year_min(),
            year_max: spec.year_max(),
            count_mode: mode.parse().map_err(to_py)?,
        };
        let series = dynamics::decay_series(self.inner.records(), key, &config).map_err(to_py)?;
        Ok(series.values)
    }

    /// Runs the null model and returns one dict per comparison.
    #[pyo3(signature = (min_samples=1000, max_samples=250_000, ci_threshold=0.01, seed=0, targets=None))]
    fn null_model(
        &self,
        py: Python<'_>,
        min_samples: usize,
        max_samples: usize,
        ci_threshold: f64,
        seed: u64,
        targets: Option<Vec<String>>,
    ) -> PyResult<(usize, String, Vec<NullRow>)> {
        let targets = match targets {
            Some(t) => t
                .iter()
                .map(|s| s.parse::<StatKind>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(to_py)?,
            None => StatKind::ALL.to_vec(),
        };
        let config = NullConfig {
            targets,
            min_samples,
            max_samples,
            ci_width_threshold: ci_threshold,
            seed,
            ..NullConfig::default()
        };
        let inner = &self.inner;
        let summary = py
            .detach(|| null_model::run_null_analysis(inner, &config))
            .map_err(to_py)?;
        let rows = summary
            .comparisons
            .iter()
            .map(|c| {
                (
                    c.kind.to_string(),
                    c.period_a.clone(),
                    c.period_b.clone(),
                    c.observed_tau,
                    c.null_mean_tau,
                    c.p_value,
                )
            })
            .collect();
        Ok((summary.n_samples, summary.stop_reason.name().to_string(), rows))
    }
}

/// `(kind, period_a, period_b, observed_tau, null_mean_tau, p_value)`
type NullRow = (String, String, String, Option<f64>, Option<f64>, Option<f64>);

/// One period's co-occurrence graph.
#[pyclass(frozen)]
struct PeriodGraph {
    graph: tkg_core::graph::PeriodGraph,
    table: tkg_core::graph::TriangleTable,
}

#[pymethods]
impl PeriodGraph {
    fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    fn edges(&self) -> Vec<(String, String, u64)> {
        self.graph
            .edges()
            .map(|((u, v), w)| (u.to_string(), v.to_string(), w))
            .collect()
    }

    /// Node measures keyed by code: degree, strength, betweenness and capacitance.
    fn node_centrality(&self) -> BTreeMap<String, BTreeMap<&'static str, f64>> {
        centrality_report(&self.graph)
            .nodes
            .iter()
            .map(|(c, n)| {
                (
                    c.to_string(),
                    BTreeMap::from([
                        ("degree", n.degree as f64),
                        ("strength", n.strength as f64),
                        ("btw_unw", n.btw_unweighted),
                        ("btw_w", n.btw_weighted),
                        ("cap_unw", n.cap_unweighted),
                        ("cap_w", n.cap_weighted),
                    ]),
                )
            })
            .collect()
    }

    /// Edge measures keyed by `(u, v)`.
    fn edge_centrality(&self) -> BTreeMap<(String, String), BTreeMap<&'static str, f64>> {
        centrality_report(&self.graph)
            .edges
            .iter()
            .map(|((u, v), e)| {
                (
                    (u.to_string(), v.to_string()),
                    BTreeMap::from([
                        ("weight", e.weight as f64),
                        ("edge_degree", e.edge_degree as f64),
                        ("ebtw_unw", e.btw_unweighted),
                        ("ebtw_w", e.btw_weighted),
                        ("ecap", e.capacitance),
                    ]),
                )
            })
            .collect()
    }

    /// Triangle dispersion per node.
    fn dispersion(&self) -> BTreeMap<String, f64> {
        dynamics::dispersion_table(&self.graph, &self.table)
            .into_iter()
            .map(|(x, d)| (x.to_string(), d.eta))
            .collect()
    }
}

/// Tau-b of two equally long sequences; `None` when a ranking is constant.
#[pyfunction]
fn kendall_tau_b(x: Vec<f64>, y: Vec<f64>) -> PyResult<Option<f64>> {
    if x.len() != y.len() {
        return Err(PyValueError::new_err("sequences must have equal length"));
    }
    Ok(kendall_tau_b_values(&x, &y))
}

#[pyfunction]
fn cohens_kappa(a: Vec<String>, b: Vec<String>) -> PyResult<f64> {
    let parse = |v: &[String]| {
        v.iter()
            .map(|s| s.parse::<CategoryCode>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(to_py)
    };
    tkg_core::agreement::cohens_kappa(&parse(&a)?, &parse(&b)?).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (successes, trials, level=0.95))]
fn clopper_pearson(successes: u64, trials: u64, level: f64) -> PyResult<(f64, f64)> {
    null_model::clopper_pearson(successes, trials, level).map_err(to_py)
}

#[pymodule]
fn tkg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Corpus>()?;
    m.add_class::<PeriodGraph>()?;
    m.add_function(wrap_pyfunction!(kendall_tau_b, m)?)?;
    m.add_function(wrap_pyfunction!(cohens_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(clopper_pearson, m)?)?;
    Ok(())
}
