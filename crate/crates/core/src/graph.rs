//! Per-period tripartite co-occurrence graphs and component counts.
//!
//! Every paper contributes one triangle: its measure, data type and research
//! question are pairwise linked, each link gaining weight 1. Within a period
//! parallel contributions collapse into a single weighted edge.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use crate::corpus::PaperRecord;
use crate::error::{Result, TkgError};
use crate::taxonomy::{CategoryCode, Partition};

/// Canonical unordered edge key: the smaller code first.
pub type EdgeKey = (CategoryCode, CategoryCode);

pub type Triplet = (CategoryCode, CategoryCode, CategoryCode);

pub fn edge_key(a: CategoryCode, b: CategoryCode) -> EdgeKey {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// A node, a cross-partition pair, or a (measure, data type, rq type) triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKey {
    Node(CategoryCode),
    Pair(CategoryCode, CategoryCode),
    Triangle(CategoryCode, CategoryCode, CategoryCode),
}

impl ComponentKey {
    pub fn pair(a: CategoryCode, b: CategoryCode) -> Self {
        let (u, v) = edge_key(a, b);
        ComponentKey::Pair(u, v)
    }

    pub fn kind(&self) -> ComponentKind {
        match self {
            ComponentKey::Node(_) => ComponentKind::Node,
            ComponentKey::Pair(..) => ComponentKind::Pair,
            ComponentKey::Triangle(..) => ComponentKind::Triangle,
        }
    }

    /// Whether the paper's triplet contains this component.
    pub fn appears_in(&self, record: &PaperRecord) -> bool {
        let codes = record.codes();
        match *self {
            ComponentKey::Node(c) => codes.contains(&c),
            ComponentKey::Pair(a, b) => codes.contains(&a) && codes.contains(&b),
            ComponentKey::Triangle(m, d, r) => record.triplet() == (m, d, r),
        }
    }
}

impl fmt::Display for ComponentKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComponentKey::Node(c) => write!(f, "{c}"),
            ComponentKey::Pair(a, b) => write!(f, "{a}-{b}"),
            ComponentKey::Triangle(m, d, r) => write!(f, "{m}-{d}-{r}"),
        }
    }
}

/// Parses `M1`, `M1-R4` (either order) or `M1-D13-R4`.
impl FromStr for ComponentKey {
    type Err = TkgError;

    fn from_str(s: &str) -> Result<Self> {
        let codes = s
            .split('-')
            .map(|c| c.trim().parse::<CategoryCode>())
            .collect::<Result<Vec<_>>>()?;
        let bad = || TkgError::InvalidArgument(format!("`{s}` is not a node, pair or triangle key"));
        match codes[..] {
            [c] => Ok(ComponentKey::Node(c)),
            [a, b] if a.partition != b.partition => Ok(ComponentKey::pair(a, b)),
            [m, d, r]
                if m.partition == Partition::Measure
                    && d.partition == Partition::DataType
                    && r.partition == Partition::RqType =>
            {
                Ok(ComponentKey::Triangle(m, d, r))
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ComponentKind {
    Node,
    Pair,
    Triangle,
}

impl ComponentKind {
    pub fn name(self) -> &'static str {
        match self {
            ComponentKind::Node => "node",
            ComponentKind::Pair => "pair",
            ComponentKind::Triangle => "triangle",
        }
    }

    /// All components of this kind present in a record.
    pub fn keys_of(self, record: &PaperRecord) -> Vec<ComponentKey> {
        let (m, d, r) = record.triplet();
        match self {
            ComponentKind::Node => vec![
                ComponentKey::Node(m),
                ComponentKey::Node(d),
                ComponentKey::Node(r),
            ],
            ComponentKind::Pair => vec![
                ComponentKey::pair(m, d),
                ComponentKey::pair(d, r),
                ComponentKey::pair(m, r),
            ],
            ComponentKind::Triangle => vec![ComponentKey::Triangle(m, d, r)],
        }
    }
}

/// Per-period values keyed by component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    pub kind: ComponentKind,
    pub period_label: String,
    pub values: BTreeMap<ComponentKey, f64>,
}

impl ComponentStats {
    pub fn new(kind: ComponentKind, period_label: impl Into<String>) -> Self {
        ComponentStats {
            kind,
            period_label: period_label.into(),
            values: BTreeMap::new(),
        }
    }

    pub fn get(&self, key: &ComponentKey) -> Option<f64> {
        self.values.get(key).copied()
    }
}

/// Counts of identical (measure, data type, rq type) triplets in one period.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TriangleTable {
    pub period_label: String,
    pub triangles: BTreeMap<Triplet, u64>,
}

impl TriangleTable {
    pub fn total(&self) -> u64 {
        self.triangles.values().sum()
    }

    /// Number of distinct triplets containing `x`.
    pub fn unique_triplets_at(&self, x: CategoryCode) -> usize {
        self.triangles
            .keys()
            .filter(|(m, d, r)| *m == x || *d == x || *r == x)
            .count()
    }
}

/// A period's tripartite, undirected, weighted graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodGraph {
    period_label: String,
    adjacency: BTreeMap<CategoryCode, BTreeMap<CategoryCode, u64>>,
    edges: BTreeMap<EdgeKey, u64>,
    /// Per-period weight contributions; populated on aggregated graphs.
    contributions: BTreeMap<EdgeKey, BTreeMap<String, u64>>,
    /// Paper ids per edge; populated only when requested at build time.
    edge_papers: BTreeMap<EdgeKey, Vec<String>>,
}

impl PeriodGraph {
    fn empty(period_label: impl Into<String>) -> Self {
        PeriodGraph {
            period_label: period_label.into(),
            adjacency: BTreeMap::new(),
            edges: BTreeMap::new(),
            contributions: BTreeMap::new(),
            edge_papers: BTreeMap::new(),
        }
    }

    fn add_weight(&mut self, a: CategoryCode, b: CategoryCode, w: u64) -> Result<()> {
        if a.partition == b.partition {
            return Err(TkgError::NotTripartite(a, b));
        }
        if w == 0 {
            return Err(TkgError::InvalidArgument(format!(
                "edge ({a}, {b}) has zero weight"
            )));
        }
        *self.edges.entry(edge_key(a, b)).or_default() += w;
        *self.adjacency.entry(a).or_default().entry(b).or_default() += w;
        *self.adjacency.entry(b).or_default().entry(a).or_default() += w;
        Ok(())
    }

    /// Builds a graph directly from weighted edges; repeated pairs add up.
    pub fn from_edges(
        period_label: impl Into<String>,
        edges: impl IntoIterator<Item = (CategoryCode, CategoryCode, u64)>,
    ) -> Result<Self> {
        let mut g = PeriodGraph::empty(period_label);
        for (a, b, w) in edges {
            g.add_weight(a, b, w)?;
        }
        Ok(g)
    }

    pub fn period_label(&self) -> &str {
        &self.period_label
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = CategoryCode> + '_ {
        self.adjacency.keys().copied()
    }

    pub fn contains_node(&self, x: CategoryCode) -> bool {
        self.adjacency.contains_key(&x)
    }

    /// Edges in canonical order with their weights.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeKey, u64)> + '_ {
        self.edges.iter().map(|(k, w)| (*k, *w))
    }

    pub fn weight(&self, a: CategoryCode, b: CategoryCode) -> Option<u64> {
        self.edges.get(&edge_key(a, b)).copied()
    }

    pub fn neighbors(&self, x: CategoryCode) -> impl Iterator<Item = (CategoryCode, u64)> + '_ {
        self.adjacency
            .get(&x)
            .into_iter()
            .flat_map(|m| m.iter().map(|(v, w)| (*v, *w)))
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    /// Per-period contributions to an aggregated edge, keyed by period label.
    pub fn contributions(&self, a: CategoryCode, b: CategoryCode) -> Option<&BTreeMap<String, u64>> {
        self.contributions.get(&edge_key(a, b))
    }

    /// Paper ids behind an edge when the graph was built with id tracking.
    pub fn edge_papers(&self, a: CategoryCode, b: CategoryCode) -> Option<&[String]> {
        self.edge_papers.get(&edge_key(a, b)).map(Vec::as_slice)
    }
}

fn build(
    period_label: &str,
    records: &[PaperRecord],
    track_papers: bool,
) -> Result<(PeriodGraph, TriangleTable)> {
    if records.is_empty() {
        return Err(TkgError::EmptyPeriod);
    }
    let mut graph = PeriodGraph::empty(period_label);
    let mut triangles: BTreeMap<Triplet, u64> = BTreeMap::new();
    for r in records {
        let (m, d, q) = r.triplet();
        for (a, b) in [(m, d), (d, q), (q, m)] {
            graph.add_weight(a, b, 1)?;
            if track_papers {
                graph
                    .edge_papers
                    .entry(edge_key(a, b))
                    .or_default()
                    .push(r.paper_id.clone());
            }
        }
        *triangles.entry((m, d, q)).or_default() += 1;
    }
    Ok((
        graph,
        TriangleTable {
            period_label: period_label.to_string(),
            triangles,
        },
    ))
}

/// Builds the period graph and its triangle table from one period's records.
pub fn build_period_graph(
    period_label: &str,
    records: &[PaperRecord],
) -> Result<(PeriodGraph, TriangleTable)> {
    build(period_label, records, false)
}

/// Like [`build_period_graph`], additionally recording the paper ids behind each edge.
pub fn build_period_graph_with_papers(
    period_label: &str,
    records: &[PaperRecord],
) -> Result<(PeriodGraph, TriangleTable)> {
    build(period_label, records, true)
}

/// Number of papers containing each node.
pub fn node_occurrences(table: &TriangleTable) -> ComponentStats {
    let mut stats = ComponentStats::new(ComponentKind::Node, &table.period_label);
    for (&(m, d, r), &count) in &table.triangles {
        for c in [m, d, r] {
            *stats.values.entry(ComponentKey::Node(c)).or_default() += count as f64;
        }
    }
    stats
}

/// Number of papers containing each cross-partition pair.
pub fn pair_cooccurrences(table: &TriangleTable) -> ComponentStats {
    let mut stats = ComponentStats::new(ComponentKind::Pair, &table.period_label);
    for (&(m, d, r), &count) in &table.triangles {
        for (a, b) in [(m, d), (d, r), (m, r)] {
            *stats.values.entry(ComponentKey::pair(a, b)).or_default() += count as f64;
        }
    }
    stats
}

/// Number of papers per distinct triplet.
pub fn triangle_counts(table: &TriangleTable) -> ComponentStats {
    let mut stats = ComponentStats::new(ComponentKind::Triangle, &table.period_label);
    for (&(m, d, r), &count) in &table.triangles {
        stats
            .values
            .insert(ComponentKey::Triangle(m, d, r), count as f64);
    }
    stats
}

/// Collapses period graphs into one simple graph with summed weights.
///
/// Each aggregated edge remembers how much weight each period contributed.
pub fn aggregate_graph(graphs: &[PeriodGraph]) -> Result<PeriodGraph> {
    if graphs.is_empty() {
        return Err(TkgError::InvalidArgument("no graphs to aggregate".into()));
    }
    let mut out = PeriodGraph::empty("ALL");
    for g in graphs {
        for ((a, b), w) in g.edges() {
            out.add_weight(a, b, w)?;
            *out
                .contributions
                .entry((a, b))
                .or_default()
                .entry(g.period_label.clone())
                .or_default() += w;
        }
        for (k, ids) in &g.edge_papers {
            out.edge_papers.entry(*k).or_default().extend(ids.iter().cloned());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectivityReport {
    pub is_connected: bool,
    /// Component sizes, largest first.
    pub component_sizes: Vec<usize>,
}

pub fn connectivity_report(graph: &PeriodGraph) -> ConnectivityReport {
    let mut seen: BTreeSet<CategoryCode> = BTreeSet::new();
    let mut sizes = Vec::new();
    for start in graph.nodes() {
        if !seen.insert(start) {
            continue;
        }
        let mut size = 0;
        let mut queue = VecDeque::from([start]);
        while let Some(x) = queue.pop_front() {
            size += 1;
            for (v, _) in graph.neighbors(x) {
                if seen.insert(v) {
                    queue.push_back(v);
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    ConnectivityReport {
        is_connected: sizes.len() == 1,
        component_sizes: sizes,
    }
}
