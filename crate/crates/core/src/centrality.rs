//! Degree, strength, betweenness and capacitance of period graphs.
//!
//! Betweenness uses Brandes' dependency accumulation over all shortest paths.
//! The weighted variant runs Dijkstra on edge lengths `1/w`. Since weights
//! are integers, lengths are scaled by the lcm of all weights so every
//! distance is an exact integer and ties between paths are never missed.
//!
//! Scores are summed over unordered `(s, t)` pairs and multiplied by
//! `2 / ((n - 1)(n - 2))`. The same constant is applied to edges, so
//! normalized edge betweenness may exceed 1.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};
use std::ops::Add;

use num_bigint::BigUint;

use crate::error::{Result, TkgError};
use crate::graph::{connectivity_report, edge_key, EdgeKey, PeriodGraph};
use crate::taxonomy::CategoryCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CentralityWarning {
    /// Pairs in different components contribute nothing.
    Disconnected,
    /// Fewer than three nodes: the normalization constant is undefined and
    /// raw values are reported.
    Degenerate,
}

pub fn degree(graph: &PeriodGraph, x: CategoryCode) -> Result<usize> {
    if !graph.contains_node(x) {
        return Err(TkgError::UnknownNode(x));
    }
    Ok(graph.neighbors(x).count())
}

pub fn strength(graph: &PeriodGraph, x: CategoryCode) -> Result<u64> {
    if !graph.contains_node(x) {
        return Err(TkgError::UnknownNode(x));
    }
    Ok(graph.neighbors(x).map(|(_, w)| w).sum())
}

/// `k_u + k_v - 2`: nodes adjacent to either endpoint, endpoints excluded.
pub fn edge_degree(graph: &PeriodGraph, u: CategoryCode, v: CategoryCode) -> Result<usize> {
    if graph.weight(u, v).is_none() {
        let (a, b) = edge_key(u, v);
        return Err(TkgError::UnknownEdge(a, b));
    }
    Ok(degree(graph, u)? + degree(graph, v)? - 2)
}

/// Dense index view of a period graph.
struct Indexed {
    codes: Vec<CategoryCode>,
    /// (neighbor, weight, edge id)
    adj: Vec<Vec<(usize, u64, usize)>>,
    edges: Vec<EdgeKey>,
    weights: Vec<u64>,
}

impl Indexed {
    fn new(graph: &PeriodGraph) -> Self {
        let codes: Vec<CategoryCode> = graph.nodes().collect();
        let index: BTreeMap<CategoryCode, usize> =
            codes.iter().enumerate().map(|(i, c)| (*c, i)).collect();
        let mut adj = vec![Vec::new(); codes.len()];
        let mut edges = Vec::with_capacity(graph.edge_count());
        let mut weights = Vec::with_capacity(graph.edge_count());
        for (id, ((a, b), w)) in graph.edges().enumerate() {
            let (ia, ib) = (index[&a], index[&b]);
            adj[ia].push((ib, w, id));
            adj[ib].push((ia, w, id));
            edges.push((a, b));
            weights.push(w);
        }
        Indexed {
            codes,
            adj,
            edges,
            weights,
        }
    }

    fn len(&self) -> usize {
        self.codes.len()
    }
}

/// Shortest-path DAG from one source, vertices in non-decreasing distance.
struct PathDag {
    order: Vec<usize>,
    sigma: Vec<f64>,
    /// (predecessor, edge id)
    preds: Vec<Vec<(usize, usize)>>,
}

fn bfs_dag(g: &Indexed, s: usize) -> PathDag {
    let n = g.len();
    let mut dist = vec![usize::MAX; n];
    let mut sigma = vec![0.0; n];
    let mut preds = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    dist[s] = 0;
    sigma[s] = 1.0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(w, _, e) in &g.adj[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push((v, e));
            }
        }
    }
    PathDag {
        order,
        sigma,
        preds,
    }
}

fn dijkstra_dag<L>(g: &Indexed, lengths: &[L], s: usize) -> PathDag
where
    L: Ord + Clone + Default,
    for<'a> &'a L: Add<&'a L, Output = L>,
{
    let n = g.len();
    let mut dist: Vec<Option<L>> = vec![None; n];
    let mut done = vec![false; n];
    let mut sigma = vec![0.0; n];
    let mut preds: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut order = Vec::with_capacity(n);
    let mut heap = BinaryHeap::new();
    dist[s] = Some(L::default());
    sigma[s] = 1.0;
    heap.push(Reverse((L::default(), s)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if done[v] {
            continue;
        }
        done[v] = true;
        order.push(v);
        for &(w, _, e) in &g.adj[v] {
            let candidate = &d + &lengths[e];
            match &dist[w] {
                Some(cur) if candidate > *cur => {}
                Some(cur) if candidate == *cur => {
                    sigma[w] += sigma[v];
                    preds[w].push((v, e));
                }
                _ => {
                    dist[w] = Some(candidate.clone());
                    sigma[w] = sigma[v];
                    preds[w].clear();
                    preds[w].push((v, e));
                    heap.push(Reverse((candidate, w)));
                }
            }
        }
    }
    PathDag {
        order,
        sigma,
        preds,
    }
}

/// Adds one source's dependencies to the node and edge accumulators.
fn accumulate(dag: &PathDag, s: usize, node_acc: &mut [f64], edge_acc: &mut [f64]) {
    let mut delta = vec![0.0; node_acc.len()];
    for &w in dag.order.iter().rev() {
        for &(v, e) in &dag.preds[w] {
            let c = dag.sigma[v] / dag.sigma[w] * (1.0 + delta[w]);
            edge_acc[e] += c;
            delta[v] += c;
        }
        if w != s {
            node_acc[w] += delta[w];
        }
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Integer edge lengths proportional to `1/w`: `lcm(all w) / w`.
enum ScaledLengths {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

fn scaled_lengths(g: &Indexed) -> ScaledLengths {
    let small = g.weights.iter().try_fold(1u128, |l, &w| {
        let w = w as u128;
        (l / gcd(l, w)).checked_mul(w)
    });
    // A shortest path has at most n - 1 edges, so n * lcm bounds every distance.
    match small.filter(|l| l.checked_mul(g.len().max(1) as u128).is_some()) {
        Some(l) => ScaledLengths::Small(g.weights.iter().map(|&w| l / w as u128).collect()),
        None => ScaledLengths::Big(big_lengths(&g.weights)),
    }
}

fn big_lengths(weights: &[u64]) -> Vec<BigUint> {
    let gcd_big = |a: &BigUint, b: &BigUint| {
        let (mut a, mut b) = (a.clone(), b.clone());
        while b != BigUint::ZERO {
            let r = &a % &b;
            a = b;
            b = r;
        }
        a
    };
    let mut l = BigUint::from(1u32);
    for &w in weights {
        let w = BigUint::from(w);
        let g = gcd_big(&l, &w);
        l = &l / g * &w;
    }
    weights.iter().map(|&w| &l / BigUint::from(w)).collect()
}

fn accumulate_all(g: &Indexed, weighted: bool) -> (Vec<f64>, Vec<f64>) {
    let n = g.len();
    let mut node_acc = vec![0.0; n];
    let mut edge_acc = vec![0.0; g.edges.len()];
    if !weighted {
        for s in 0..n {
            accumulate(&bfs_dag(g, s), s, &mut node_acc, &mut edge_acc);
        }
        return (node_acc, edge_acc);
    }
    match scaled_lengths(g) {
        ScaledLengths::Small(lengths) => {
            for s in 0..n {
                accumulate(&dijkstra_dag(g, &lengths, s), s, &mut node_acc, &mut edge_acc);
            }
        }
        ScaledLengths::Big(lengths) => {
            for s in 0..n {
                accumulate(&dijkstra_dag(g, &lengths, s), s, &mut node_acc, &mut edge_acc);
            }
        }
    }
    (node_acc, edge_acc)
}

/// Node and edge betweenness of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Betweenness {
    pub weighted: bool,
    /// Normalized node scores.
    pub nodes: BTreeMap<CategoryCode, f64>,
    /// Normalized edge scores.
    pub edges: BTreeMap<EdgeKey, f64>,
    pub warnings: Vec<CentralityWarning>,
}

pub fn betweenness(graph: &PeriodGraph, weighted: bool) -> Betweenness {
    let g = Indexed::new(graph);
    let n = g.len();
    let (node_acc, edge_acc) = accumulate_all(&g, weighted);

    let mut warnings = Vec::new();
    if n > 0 && !connectivity_report(graph).is_connected {
        warnings.push(CentralityWarning::Disconnected);
    }
    // Accumulators count every unordered pair twice (once per source).
    let scale = if n >= 3 {
        2.0 / ((n - 1) as f64 * (n - 2) as f64) / 2.0
    } else {
        warnings.push(CentralityWarning::Degenerate);
        0.5
    };
    Betweenness {
        weighted,
        nodes: g
            .codes
            .iter()
            .zip(&node_acc)
            .map(|(c, b)| (*c, b * scale))
            .collect(),
        edges: g
            .edges
            .iter()
            .zip(&edge_acc)
            .map(|(k, b)| (*k, b * scale))
            .collect(),
        warnings,
    }
}

pub fn node_betweenness(graph: &PeriodGraph, weighted: bool) -> BTreeMap<CategoryCode, f64> {
    betweenness(graph, weighted).nodes
}

pub fn edge_betweenness(graph: &PeriodGraph, weighted: bool) -> BTreeMap<EdgeKey, f64> {
    betweenness(graph, weighted).edges
}

fn require_nodes(graph: &PeriodGraph, required: usize) -> Result<()> {
    if graph.node_count() < required {
        return Err(TkgError::TooFewNodes {
            required,
            actual: graph.node_count(),
        });
    }
    Ok(())
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::NAN
    } else {
        num / den
    }
}

fn node_capacitance_from(
    graph: &PeriodGraph,
    btw: &BTreeMap<CategoryCode, f64>,
    connectivity: impl Fn(CategoryCode) -> f64,
) -> BTreeMap<CategoryCode, f64> {
    let max = graph.nodes().map(&connectivity).fold(0.0, f64::max);
    graph
        .nodes()
        .map(|x| (x, ratio(btw[&x], ratio(connectivity(x), max))))
        .collect()
}

fn degree_of(graph: &PeriodGraph) -> impl Fn(CategoryCode) -> f64 + '_ {
    move |x| graph.neighbors(x).count() as f64
}

fn strength_of(graph: &PeriodGraph) -> impl Fn(CategoryCode) -> f64 + '_ {
    move |x| graph.neighbors(x).map(|(_, w)| w as f64).sum()
}

/// Unweighted betweenness over degree normalized by the maximum degree.
pub fn capacitance_node_unweighted(graph: &PeriodGraph) -> Result<BTreeMap<CategoryCode, f64>> {
    require_nodes(graph, 3)?;
    let btw = node_betweenness(graph, false);
    Ok(node_capacitance_from(graph, &btw, degree_of(graph)))
}

/// Weighted betweenness over strength normalized by the maximum strength.
pub fn capacitance_node_weighted(graph: &PeriodGraph) -> Result<BTreeMap<CategoryCode, f64>> {
    require_nodes(graph, 3)?;
    let btw = node_betweenness(graph, true);
    Ok(node_capacitance_from(graph, &btw, strength_of(graph)))
}

fn edge_capacitance_from(graph: &PeriodGraph, ebtw: &BTreeMap<EdgeKey, f64>) -> BTreeMap<EdgeKey, f64> {
    let n = graph.node_count() as f64;
    let deg = degree_of(graph);
    graph
        .edges()
        .map(|((u, v), _)| {
            let k_e = deg(u) + deg(v) - 2.0;
            ((u, v), ratio(ebtw[&(u, v)], k_e / (2.0 * (n - 2.0))))
        })
        .collect()
}

/// Unweighted edge betweenness over edge degree normalized by `2(n - 2)`.
pub fn capacitance_edge(graph: &PeriodGraph) -> Result<BTreeMap<EdgeKey, f64>> {
    require_nodes(graph, 3)?;
    Ok(edge_capacitance_from(graph, &edge_betweenness(graph, false)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeCentrality {
    pub degree: usize,
    pub strength: u64,
    pub btw_unweighted: f64,
    pub btw_weighted: f64,
    pub cap_unweighted: f64,
    pub cap_weighted: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCentrality {
    pub weight: u64,
    pub edge_degree: usize,
    pub btw_unweighted: f64,
    pub btw_weighted: f64,
    pub capacitance: f64,
}

/// Every node and edge measure of one period graph.
#[derive(Debug, Clone, PartialEq)]
pub struct CentralityReport {
    pub period_label: String,
    pub nodes: BTreeMap<CategoryCode, NodeCentrality>,
    pub edges: BTreeMap<EdgeKey, EdgeCentrality>,
    pub warnings: Vec<CentralityWarning>,
}

/// Computes all measures, running each betweenness pass once.
///
/// Capacitances of graphs with fewer than three nodes are NaN.
pub fn centrality_report(graph: &PeriodGraph) -> CentralityReport {
    let unw = betweenness(graph, false);
    let wtd = betweenness(graph, true);
    let defined = graph.node_count() >= 3;
    let nan_nodes = || graph.nodes().map(|x| (x, f64::NAN)).collect();
    let (cap_unw, cap_w, cap_e) = if defined {
        (
            node_capacitance_from(graph, &unw.nodes, degree_of(graph)),
            node_capacitance_from(graph, &wtd.nodes, strength_of(graph)),
            edge_capacitance_from(graph, &unw.edges),
        )
    } else {
        (
            nan_nodes(),
            nan_nodes(),
            graph.edges().map(|(k, _)| (k, f64::NAN)).collect(),
        )
    };
    let deg = degree_of(graph);
    let nodes = graph
        .nodes()
        .map(|x| {
            (
                x,
                NodeCentrality {
                    degree: deg(x) as usize,
                    strength: graph.neighbors(x).map(|(_, w)| w).sum(),
                    btw_unweighted: unw.nodes[&x],
                    btw_weighted: wtd.nodes[&x],
                    cap_unweighted: cap_unw[&x],
                    cap_weighted: cap_w[&x],
                },
            )
        })
        .collect();
    let edges = graph
        .edges()
        .map(|((u, v), w)| {
            (
                (u, v),
                EdgeCentrality {
                    weight: w,
                    edge_degree: (deg(u) + deg(v)) as usize - 2,
                    btw_unweighted: unw.edges[&(u, v)],
                    btw_weighted: wtd.edges[&(u, v)],
                    capacitance: cap_e[&(u, v)],
                },
            )
        })
        .collect();
    let mut warnings = unw.warnings;
    warnings.extend(wtd.warnings);
    warnings.sort();
    warnings.dedup();
    CentralityReport {
        period_label: graph.period_label().to_string(),
        nodes,
        edges,
        warnings,
    }
}
