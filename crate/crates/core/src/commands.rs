//! Pipeline stages behind the `tkg` subcommands.
//!
//! Every stage reads the corpus named in a [`RunConfig`], writes fixed-header
//! CSV tables under the output directory, and returns a short summary. All
//! outputs depend only on the inputs, the configuration and the seed.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::agreement::cohens_kappa;
use crate::centrality::{centrality_report, CentralityWarning};
use crate::corpus::{load_corpus_file, partition_by_period, Corpus, PeriodBucket, PeriodSpec};
use crate::dynamics::{decay_all, dispersion_table, inactive_after, CountMode, DecayConfig};
use crate::error::{Result, TkgError};
use crate::graph::{
    aggregate_graph, build_period_graph, connectivity_report, ComponentKey, ComponentKind, ComponentStats,
};
use crate::null_model::{run_null_analysis, NullConfig};
use crate::report::{fmt_float, fmt_opt, write_table};
use crate::taxonomy::{CategoryCode, Partition, Taxonomy};
use crate::temporal::{bootstrap_tau_series, consecutive_tau_series, period_stats, CommonSet, StatKind};

/// Years of inactivity after which a half-life check row is written.
pub const HALF_LIFE_GAP: i32 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub corpus_path: PathBuf,
    /// Bundled taxonomy when unset.
    pub taxonomy_path: Option<PathBuf>,
    /// Bundled periods when unset.
    pub periods_path: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub bootstrap_n: usize,
    pub level: f64,
    pub null_max_samples: usize,
    pub null_ci_threshold: f64,
    pub null_min_samples: usize,
    pub null_batch_size: usize,
    pub null_band_samples: usize,
    pub null_excluded_codes: Vec<String>,
    pub decay_lambda: f64,
    pub decay_mode: CountMode,
    pub include_zero_nodes: bool,
    pub tau_common_set: CommonSet,
}

impl Default for RunConfig {
    fn default() -> Self {
        let null = NullConfig::default();
        RunConfig {
            corpus_path: PathBuf::new(),
            taxonomy_path: None,
            periods_path: None,
            output_dir: PathBuf::from("out"),
            seed: 0,
            bootstrap_n: 1000,
            level: 0.95,
            null_max_samples: null.max_samples,
            null_ci_threshold: null.ci_width_threshold,
            null_min_samples: null.min_samples,
            null_batch_size: null.batch_size,
            null_band_samples: null.band_samples,
            null_excluded_codes: null.excluded_codes.iter().map(|c| c.to_string()).collect(),
            decay_lambda: DecayConfig::default().lambda,
            decay_mode: CountMode::default(),
            include_zero_nodes: false,
            tau_common_set: CommonSet::default(),
        }
    }
}

/// TOML configuration file; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    corpus: Option<PathBuf>,
    taxonomy: Option<PathBuf>,
    periods: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    bootstrap_n: Option<usize>,
    level: Option<f64>,
    null_max_samples: Option<usize>,
    null_ci_threshold: Option<f64>,
    null_min_samples: Option<usize>,
    null_batch_size: Option<usize>,
    null_band_samples: Option<usize>,
    null_excluded_codes: Option<Vec<String>>,
    decay_lambda: Option<f64>,
    decay_mode: Option<String>,
    include_zero_nodes: Option<bool>,
    tau_common_set: Option<String>,
}

impl RunConfig {
    /// Reads a TOML file. Relative paths inside it resolve against its directory.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| TkgError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Self::from_toml_str(&text, base)
    }

    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let file: ConfigFile =
            toml::from_str(text).map_err(|e| TkgError::Malformed(format!("config: {e}")))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let mut c = RunConfig::default();
        if let Some(p) = file.corpus {
            c.corpus_path = resolve(p);
        }
        c.taxonomy_path = file.taxonomy.map(resolve);
        c.periods_path = file.periods.map(resolve);
        if let Some(p) = file.out {
            c.output_dir = resolve(p);
        }
        c.seed = file.seed.unwrap_or(c.seed);
        c.bootstrap_n = file.bootstrap_n.unwrap_or(c.bootstrap_n);
        c.level = file.level.unwrap_or(c.level);
        c.null_max_samples = file.null_max_samples.unwrap_or(c.null_max_samples);
        c.null_ci_threshold = file.null_ci_threshold.unwrap_or(c.null_ci_threshold);
        c.null_min_samples = file.null_min_samples.unwrap_or(c.null_min_samples);
        c.null_batch_size = file.null_batch_size.unwrap_or(c.null_batch_size);
        c.null_band_samples = file.null_band_samples.unwrap_or(c.null_band_samples);
        if let Some(codes) = file.null_excluded_codes {
            c.null_excluded_codes = codes;
        }
        c.decay_lambda = file.decay_lambda.unwrap_or(c.decay_lambda);
        if let Some(m) = file.decay_mode {
            c.decay_mode = m.parse()?;
        }
        c.include_zero_nodes = file.include_zero_nodes.unwrap_or(c.include_zero_nodes);
        if let Some(m) = file.tau_common_set {
            c.tau_common_set = m.parse()?;
        }
        Ok(c)
    }

    pub fn load_taxonomy(&self) -> Result<Taxonomy> {
        match &self.taxonomy_path {
            Some(p) => Taxonomy::from_json_file(p),
            None => Ok(Taxonomy::default()),
        }
    }

    pub fn load_periods(&self) -> Result<PeriodSpec> {
        match &self.periods_path {
            Some(p) => PeriodSpec::from_json_file(p),
            None => Ok(PeriodSpec::default()),
        }
    }

    pub fn load_corpus(&self) -> Result<Corpus> {
        if self.corpus_path.as_os_str().is_empty() {
            return Err(TkgError::InvalidArgument("no corpus path given".into()));
        }
        let taxonomy = self.load_taxonomy()?;
        let periods = self.load_periods()?;
        load_corpus_file(&self.corpus_path, taxonomy, periods)
    }

    pub fn null_config(&self, taxonomy: &Taxonomy) -> Result<NullConfig> {
        let excluded = self
            .null_excluded_codes
            .iter()
            .map(|s| s.parse::<CategoryCode>())
            .filter(|c| c.as_ref().map_or(true, |c| taxonomy.contains(*c)))
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(NullConfig {
            targets: StatKind::ALL.to_vec(),
            max_samples: self.null_max_samples,
            ci_width_threshold: self.null_ci_threshold,
            min_samples: self.null_min_samples,
            batch_size: self.null_batch_size,
            seed: self.seed,
            excluded_codes: excluded,
            common_set: self.tau_common_set,
            band_samples: self.null_band_samples,
            level: self.level,
            global_bootstrap_n: self.bootstrap_n,
        })
    }

    pub fn decay_config(&self, periods: &PeriodSpec) -> DecayConfig {
        DecayConfig {
            lambda: self.decay_lambda,
            year_min: periods.year_min(),
            year_max: periods.year_max(),
            count_mode: self.decay_mode,
        }
    }

    fn out(&self, name: &str) -> PathBuf {
        self.output_dir.join(name)
    }
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

fn warning_name(w: CentralityWarning) -> &'static str {
    match w {
        CentralityWarning::Disconnected => "disconnected graph; pairs in different components contribute 0",
        CentralityWarning::Degenerate => "fewer than 3 nodes; betweenness reported unnormalized",
    }
}

const EMPTY_PERIOD: &str = "no papers in period; skipped";

fn non_empty(buckets: Vec<PeriodBucket>, warnings: &mut Vec<Vec<String>>, stage: &str) -> Vec<PeriodBucket> {
    buckets
        .into_iter()
        .filter(|b| {
            if b.records.is_empty() {
                warnings.push(vec![b.label.clone(), s(stage), s(EMPTY_PERIOD)]);
            }
            !b.records.is_empty()
        })
        .collect()
}

const WARNING_HEADER: [&str; 3] = ["period", "stage", "message"];

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodShape {
    pub label: String,
    pub nodes: usize,
    pub edges: usize,
    pub components: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuildSummary {
    pub periods: Vec<PeriodShape>,
    pub skipped: Vec<String>,
}

impl BuildSummary {
    /// One `label: n nodes, m edges` line per built period.
    pub fn lines(&self) -> Vec<String> {
        self.periods
            .iter()
            .map(|p| format!("{}: {} nodes, {} edges", p.label, p.nodes, p.edges))
            .collect()
    }
}

/// Writes per-period edge lists and triangle tables, the aggregate edge list
/// with per-period contributions, and a connectivity report.
pub fn cmd_build(config: &RunConfig) -> Result<BuildSummary> {
    let corpus = config.load_corpus()?;
    let mut warnings = Vec::new();
    let buckets = non_empty(partition_by_period(&corpus), &mut warnings, "build");
    let skipped = warnings.iter().map(|w| w[0].clone()).collect();

    let mut graphs = Vec::new();
    let mut shapes = Vec::new();
    let mut connectivity = Vec::new();
    for b in &buckets {
        let (graph, table) = build_period_graph(&b.label, &b.records)?;
        let edges: Vec<Vec<String>> = graph
            .edges()
            .map(|((u, v), w)| vec![b.label.clone(), s(u), s(v), s(w)])
            .collect();
        write_table(
            &config.out(&format!("edges/{}.csv", b.label)),
            &["period", "u", "v", "weight"],
            &edges,
        )?;
        let triangles: Vec<Vec<String>> = table
            .triangles
            .iter()
            .map(|((m, d, r), n)| vec![b.label.clone(), s(m), s(d), s(r), s(n)])
            .collect();
        write_table(
            &config.out(&format!("triangles/{}.csv", b.label)),
            &["period", "m", "d", "r", "count"],
            &triangles,
        )?;
        let conn = connectivity_report(&graph);
        connectivity.push(vec![
            b.label.clone(),
            s(b.records.len()),
            s(graph.node_count()),
            s(graph.edge_count()),
            s(conn.component_sizes.len()),
            s(conn.component_sizes.first().copied().unwrap_or(0)),
            s(conn.is_connected),
        ]);
        shapes.push(PeriodShape {
            label: b.label.clone(),
            nodes: graph.node_count(),
            edges: graph.edge_count(),
            components: conn.component_sizes.len(),
        });
        graphs.push(graph);
    }
    write_table(
        &config.out("connectivity.csv"),
        &["period", "papers", "nodes", "edges", "components", "largest_component", "connected"],
        &connectivity,
    )?;

    if !graphs.is_empty() {
        let all = aggregate_graph(&graphs)?;
        let rows: Vec<Vec<String>> = all
            .edges()
            .map(|((u, v), w)| {
                let parts = all
                    .contributions(u, v)
                    .map(|c| {
                        // Period order, not label order.
                        buckets
                            .iter()
                            .filter_map(|b| c.get(&b.label).map(|n| format!("{}:{n}", b.label)))
                            .collect::<Vec<_>>()
                            .join(";")
                    })
                    .unwrap_or_default();
                vec![s(u), s(v), s(w), parts]
            })
            .collect();
        write_table(
            &config.out("aggregate_edges.csv"),
            &["u", "v", "weight", "contributions"],
            &rows,
        )?;
    }
    write_table(&config.out("build_warnings.csv"), &WARNING_HEADER, &warnings)?;

    let summary = BuildSummary {
        periods: shapes,
        skipped,
    };
    let mut text = summary.lines().join("\n");
    text.push('\n');
    fs::write(config.out("build_summary.txt"), text).map_err(|e| TkgError::io(config.out("build_summary.txt"), e))?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyzeSummary {
    pub periods_analyzed: usize,
    pub periods_skipped: Vec<String>,
    /// `(kind, period_a, period_b)` whose tau changes with the common-set rule.
    pub tau_sensitive: Vec<(StatKind, String, String)>,
}

fn node_kind_name(code: CategoryCode) -> &'static str {
    code.partition.name()
}

fn count_rows(stats: &ComponentStats, taxonomy: &Taxonomy, include_zero_nodes: bool) -> Vec<Vec<String>> {
    let mut values = stats.values.clone();
    if include_zero_nodes && stats.kind == ComponentKind::Node {
        for c in taxonomy.all_codes() {
            values.entry(ComponentKey::Node(c)).or_insert(0.0);
        }
    }
    values
        .iter()
        .map(|(k, v)| vec![stats.period_label.clone(), s(stats.kind.name()), s(k), fmt_float(*v)])
        .collect()
}

/// Counts, centrality, capacitance, dispersion and tau series with bootstrap
/// intervals.
pub fn cmd_analyze(config: &RunConfig) -> Result<AnalyzeSummary> {
    let corpus = config.load_corpus()?;
    let taxonomy = corpus.taxonomy();
    let mut warnings = Vec::new();
    let buckets = non_empty(partition_by_period(&corpus), &mut warnings, "analyze");
    let periods_skipped: Vec<String> = warnings.iter().map(|w| w[0].clone()).collect();

    let mut counts = Vec::new();
    let mut node_rows = Vec::new();
    let mut edge_rows = Vec::new();
    let mut dispersion_rows = Vec::new();
    let mut per_period_stats: Vec<Vec<ComponentStats>> = Vec::new();
    for b in &buckets {
        let (graph, table) = build_period_graph(&b.label, &b.records)?;
        let stats = period_stats(&StatKind::ALL, &b.label, &b.records);
        for st in stats.iter().take(StatKind::COUNTS.len()) {
            counts.extend(count_rows(st, taxonomy, config.include_zero_nodes));
        }
        per_period_stats.push(stats);

        let report = centrality_report(&graph);
        for w in &report.warnings {
            warnings.push(vec![b.label.clone(), s("centrality"), s(warning_name(*w))]);
        }
        let mut nodes: BTreeMap<CategoryCode, Vec<String>> = report
            .nodes
            .iter()
            .map(|(c, n)| {
                (
                    *c,
                    vec![
                        b.label.clone(),
                        s(node_kind_name(*c)),
                        s(c),
                        s(n.degree),
                        s(n.strength),
                        fmt_float(n.btw_unweighted),
                        fmt_float(n.btw_weighted),
                        fmt_float(n.cap_unweighted),
                        fmt_float(n.cap_weighted),
                    ],
                )
            })
            .collect();
        if config.include_zero_nodes {
            for c in taxonomy.all_codes() {
                nodes.entry(c).or_insert_with(|| {
                    vec![
                        b.label.clone(),
                        s(node_kind_name(c)),
                        s(c),
                        s(0),
                        s(0),
                        s(0),
                        s(0),
                        fmt_float(f64::NAN),
                        fmt_float(f64::NAN),
                    ]
                });
            }
        }
        node_rows.extend(nodes.into_values());
        edge_rows.extend(report.edges.iter().map(|((u, v), e)| {
            vec![
                b.label.clone(),
                s(u),
                s(v),
                s(e.weight),
                s(e.edge_degree),
                fmt_float(e.btw_unweighted),
                fmt_float(e.btw_weighted),
                fmt_float(e.capacitance),
            ]
        }));
        dispersion_rows.extend(dispersion_table(&graph, &table).iter().map(|(x, d)| {
            vec![b.label.clone(), s(x), s(d.degree), s(d.n_triplets), fmt_float(d.eta)]
        }));
    }

    write_table(&config.out("counts.csv"), &["period", "kind", "key", "count"], &counts)?;
    write_table(
        &config.out("centrality_nodes.csv"),
        &["period", "kind", "key", "degree", "strength", "btw_unw", "btw_w", "cap_unw", "cap_w"],
        &node_rows,
    )?;
    write_table(
        &config.out("centrality_edges.csv"),
        &["period", "u", "v", "weight", "edge_degree", "ebtw_unw", "ebtw_w", "ecap"],
        &edge_rows,
    )?;
    write_table(
        &config.out("dispersion.csv"),
        &["period", "node", "degree", "n_triplets", "eta"],
        &dispersion_rows,
    )?;

    let series = bootstrap_tau_series(
        &buckets,
        &StatKind::ALL,
        config.bootstrap_n,
        config.level,
        config.seed,
        config.tau_common_set,
    )?;
    let mut tau_rows = Vec::new();
    for ts in &series {
        for c in &ts.comparisons {
            tau_rows.push(vec![
                s(ts.kind),
                c.period_a.clone(),
                c.period_b.clone(),
                fmt_opt(c.tau),
                fmt_opt(c.ci.map(|ci| ci.0)),
                fmt_opt(c.ci.map(|ci| ci.1)),
            ]);
        }
        tau_rows.push(vec![
            s(ts.kind),
            s("MEAN"),
            s("MEAN"),
            fmt_opt(ts.global_mean),
            fmt_opt(ts.global_ci.map(|ci| ci.0)),
            fmt_opt(ts.global_ci.map(|ci| ci.1)),
        ]);
    }
    write_table(
        &config.out("tau.csv"),
        &["kind", "period_a", "period_b", "tau", "ci_low", "ci_high"],
        &tau_rows,
    )?;

    let mut sensitivity_rows = Vec::new();
    let mut tau_sensitive = Vec::new();
    for (k, &kind) in StatKind::ALL.iter().enumerate() {
        let stats: Vec<ComponentStats> = per_period_stats.iter().map(|p| p[k].clone()).collect();
        let inter = consecutive_tau_series(kind, &stats, CommonSet::Intersection);
        let union = consecutive_tau_series(kind, &stats, CommonSet::Union);
        for (a, b) in inter.comparisons.iter().zip(&union.comparisons) {
            let differs = match (a.tau, b.tau) {
                (Some(x), Some(y)) => (x - y).abs() > 1e-12,
                (None, None) => false,
                _ => true,
            };
            if differs {
                tau_sensitive.push((kind, a.period_a.clone(), a.period_b.clone()));
            }
            sensitivity_rows.push(vec![
                s(kind),
                a.period_a.clone(),
                a.period_b.clone(),
                fmt_opt(a.tau),
                fmt_opt(b.tau),
                s(differs),
            ]);
        }
    }
    write_table(
        &config.out("tau_sensitivity.csv"),
        &["kind", "period_a", "period_b", "tau_intersection", "tau_union", "differs"],
        &sensitivity_rows,
    )?;
    write_table(&config.out("warnings.csv"), &WARNING_HEADER, &warnings)?;

    let mut text = format!(
        "periods analyzed: {}\nperiods skipped: {}\ncommon set: {}\nbootstrap resamples: {}\n",
        buckets.len(),
        if periods_skipped.is_empty() { "none".into() } else { periods_skipped.join(" ") },
        config.tau_common_set,
        config.bootstrap_n,
    );
    text.push_str(&format!(
        "tau comparisons that differ between intersection and union: {}\n",
        tau_sensitive.len()
    ));
    for (kind, a, b) in &tau_sensitive {
        text.push_str(&format!("  {kind} {a}->{b}\n"));
    }
    let path = config.out("analyze_summary.txt");
    fs::write(&path, text).map_err(|e| TkgError::io(&path, e))?;

    Ok(AnalyzeSummary {
        periods_analyzed: buckets.len(),
        periods_skipped,
        tau_sensitive,
    })
}

// ---------------------------------------------------------------------------
// null
// ---------------------------------------------------------------------------

pub use crate::null_model::NullSummary;

pub fn cmd_null(config: &RunConfig) -> Result<NullSummary> {
    let corpus = config.load_corpus()?;
    let null_config = config.null_config(corpus.taxonomy())?;
    let summary = run_null_analysis(&corpus, &null_config)?;

    let rows: Vec<Vec<String>> = summary
        .comparisons
        .iter()
        .map(|c| {
            let band = |i: usize| fmt_opt(c.null_tau_band.map(|b| b[i]));
            vec![
                s(c.kind),
                c.period_a.clone(),
                c.period_b.clone(),
                s(summary.n_samples),
                s(c.n_defined),
                s(c.n_undefined),
                fmt_opt(c.observed_tau),
                fmt_opt(c.null_mean_tau),
                band(0),
                band(1),
                band(2),
                s(c.exceed),
                fmt_opt(c.cp_interval.map(|i| i.0)),
                fmt_opt(c.cp_interval.map(|i| i.1)),
                fmt_opt(c.p_value),
                fmt_opt(c.p_interval.map(|i| i.0)),
                fmt_opt(c.p_interval.map(|i| i.1)),
            ]
        })
        .collect();
    write_table(
        &config.out("null_summary.csv"),
        &[
            "kind",
            "period_a",
            "period_b",
            "n_samples",
            "n_defined",
            "n_undefined",
            "observed_tau",
            "null_mean_tau",
            "null_tau_p025",
            "null_tau_p50",
            "null_tau_p975",
            "exceed",
            "cp_low",
            "cp_high",
            "p_value",
            "p_low",
            "p_high",
        ],
        &rows,
    )?;

    let global_rows: Vec<Vec<String>> = summary
        .globals
        .iter()
        .map(|g| {
            vec![
                s(g.kind),
                fmt_opt(g.observed_mean),
                fmt_opt(g.null_mean),
                fmt_opt(g.null_mean_ci.map(|i| i.0)),
                fmt_opt(g.null_mean_ci.map(|i| i.1)),
            ]
        })
        .collect();
    write_table(
        &config.out("null_global.csv"),
        &["kind", "observed_mean_tau", "null_mean_tau", "ci_low", "ci_high"],
        &global_rows,
    )?;

    let period_order: BTreeMap<&str, usize> = corpus
        .period_spec()
        .periods()
        .iter()
        .enumerate()
        .map(|(i, p)| (p.label.as_str(), i))
        .collect();
    let mut bands = summary.bands.clone();
    bands.sort_by(|a, b| {
        (period_order[a.period_label.as_str()], StatKind::ALL.iter().position(|k| *k == a.kind), &a.key).cmp(&(
            period_order[b.period_label.as_str()],
            StatKind::ALL.iter().position(|k| *k == b.kind),
            &b.key,
        ))
    });
    let band_rows: Vec<Vec<String>> = bands
        .iter()
        .map(|b| {
            let mut row = vec![b.period_label.clone(), s(b.kind), s(b.key)];
            row.extend(b.quantiles.iter().map(|q| fmt_float(*q)));
            row
        })
        .collect();
    write_table(
        &config.out("null_bands.csv"),
        &["period", "kind", "key", "p025", "p25", "p50", "p75", "p975"],
        &band_rows,
    )?;

    let excluded: Vec<String> = null_config.excluded_codes.iter().map(|c| c.to_string()).collect();
    let run_rows = vec![
        vec![s("n_samples"), s(summary.n_samples)],
        vec![s("stop_reason"), s(summary.stop_reason.name())],
        vec![s("seed"), s(config.seed)],
        vec![s("min_samples"), s(config.null_min_samples)],
        vec![s("max_samples"), s(config.null_max_samples)],
        vec![s("ci_threshold"), fmt_float(config.null_ci_threshold)],
        vec![s("batch_size"), s(config.null_batch_size)],
        vec![s("band_samples"), s(config.null_band_samples)],
        vec![s("excluded_codes"), excluded.join(";")],
        vec![s("common_set"), s(config.tau_common_set)],
    ];
    write_table(&config.out("null_run.csv"), &["key", "value"], &run_rows)?;
    Ok(summary)
}

// ---------------------------------------------------------------------------
// decay
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySummary {
    pub series: usize,
    pub half_life_rows: usize,
}

/// Decayed weights for every node, pair and triangle, plus half-life checks
/// for components that go quiet for at least [`HALF_LIFE_GAP`] years.
pub fn cmd_decay(config: &RunConfig) -> Result<DecaySummary> {
    let corpus = config.load_corpus()?;
    let decay = config.decay_config(corpus.period_spec());
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut n_series = 0;
    for kind in [ComponentKind::Node, ComponentKind::Pair, ComponentKind::Triangle] {
        for series in decay_all(corpus.records(), kind, &decay)? {
            n_series += 1;
            for (year, w) in &series.values {
                rows.push(vec![s(kind.name()), s(series.key), s(year), fmt_float(*w), s(decay.count_mode)]);
            }
            if let Some(last) = inactive_after(corpus.records(), &series.key, &decay, HALF_LIFE_GAP) {
                let before = series.values[&last];
                let after = series.values[&(last + HALF_LIFE_GAP)];
                checks.push(vec![
                    s(kind.name()),
                    s(series.key),
                    s(last),
                    fmt_float(before),
                    s(HALF_LIFE_GAP),
                    fmt_float(after),
                    fmt_float(after / before),
                    fmt_float((-decay.lambda * HALF_LIFE_GAP as f64).exp()),
                ]);
            }
        }
    }
    write_table(&config.out("decay.csv"), &["kind", "key", "year", "weight", "mode"], &rows)?;
    write_table(
        &config.out("decay_halflife.csv"),
        &["kind", "key", "last_year", "weight_at_last", "gap_years", "weight_after_gap", "ratio", "expected_ratio"],
        &checks,
    )?;
    Ok(DecaySummary {
        series: n_series,
        half_life_rows: checks.len(),
    })
}

// ---------------------------------------------------------------------------
// agreement
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
struct LabelRow {
    paper_id: String,
    measure: String,
    data_type: String,
    rq_type: String,
}

fn read_labels(path: &Path, taxonomy: &Taxonomy) -> Result<BTreeMap<String, [CategoryCode; 3]>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| TkgError::io(path, std::io::Error::other(e)))?;
    let mut out = BTreeMap::new();
    for (i, row) in reader.deserialize::<LabelRow>().enumerate() {
        let row = row.map_err(|e| TkgError::MalformedRow {
            line: i as u64 + 2,
            field: "row".into(),
            message: e.to_string(),
        })?;
        let codes = [
            taxonomy.resolve(&row.measure)?,
            taxonomy.resolve(&row.data_type)?,
            taxonomy.resolve(&row.rq_type)?,
        ];
        for (code, partition) in codes.iter().zip(Partition::ALL) {
            if code.partition != partition {
                return Err(TkgError::MalformedRow {
                    line: i as u64 + 2,
                    field: partition.name().into(),
                    message: format!("{code} is not a {partition} code"),
                });
            }
        }
        if out.insert(row.paper_id.trim().to_string(), codes).is_some() {
            return Err(TkgError::DuplicatePaperId(row.paper_id));
        }
    }
    Ok(out)
}

/// Cohen's kappa per partition between two label files joined on `paper_id`.
pub fn cmd_agreement(
    rater_a: &Path,
    rater_b: &Path,
    taxonomy: &Taxonomy,
    output_dir: &Path,
) -> Result<BTreeMap<Partition, f64>> {
    let a = read_labels(rater_a, taxonomy)?;
    let b = read_labels(rater_b, taxonomy)?;
    let shared: Vec<&String> = a.keys().filter(|k| b.contains_key(*k)).collect();
    if shared.is_empty() {
        return Err(TkgError::InvalidArgument("the two label files share no paper_id".into()));
    }
    let mut kappas = BTreeMap::new();
    let mut rows = Vec::new();
    for (i, partition) in Partition::ALL.into_iter().enumerate() {
        let la: Vec<_> = shared.iter().map(|k| a[*k][i]).collect();
        let lb: Vec<_> = shared.iter().map(|k| b[*k][i]).collect();
        let kappa = cohens_kappa(&la, &lb)?;
        rows.push(vec![s(partition.name()), s(shared.len()), fmt_float(kappa)]);
        kappas.insert(partition, kappa);
    }
    write_table(&output_dir.join("agreement.csv"), &["partition", "n", "kappa"], &rows)?;
    Ok(kappas)
}
