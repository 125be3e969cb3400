//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use tkg_core::corpus::PaperRecord;
use tkg_core::graph::{edge_key, EdgeKey, PeriodGraph};
use tkg_core::taxonomy::{CategoryCode, Partition};

pub struct Oracle {
    pub nodes: BTreeMap<CategoryCode, f64>,
    pub edges: BTreeMap<EdgeKey, f64>,
}

/// Random connected tripartite graph with `n` nodes and weights in `1..=max_w`.
pub fn random_tripartite<R: Rng>(rng: &mut R, n: usize, max_w: u64, density: f64) -> PeriodGraph {
    assert!(n >= 3);
    loop {
        let mut codes = Vec::new();
        let mut next = [1u16; 3];
        for i in 0..n {
            // First three nodes cover all partitions.
            let p = if i < 3 { i } else { rng.gen_range(0..3) };
            codes.push(CategoryCode::new(Partition::ALL[p], next[p]).unwrap());
            next[p] += 1;
        }
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if codes[i].partition != codes[j].partition && rng.gen_bool(density) {
                    edges.push((codes[i], codes[j], rng.gen_range(1..=max_w)));
                }
            }
        }
        let g = PeriodGraph::from_edges("R", edges).unwrap();
        if g.node_count() == n && tkg_core::graph::connectivity_report(&g).is_connected {
            return g;
        }
    }
}

fn adjacency(g: &PeriodGraph) -> BTreeMap<CategoryCode, Vec<(CategoryCode, u64)>> {
    g.nodes().map(|x| (x, g.neighbors(x).collect())).collect()
}

fn accumulate(paths: &[Vec<CategoryCode>], nodes: &mut BTreeMap<CategoryCode, f64>, edges: &mut BTreeMap<EdgeKey, f64>) {
    if paths.is_empty() {
        return;
    }
    let share = 1.0 / paths.len() as f64;
    for p in paths {
        for x in &p[1..p.len() - 1] {
            *nodes.get_mut(x).unwrap() += share;
        }
        for w in p.windows(2) {
            *edges.get_mut(&edge_key(w[0], w[1])).unwrap() += share;
        }
    }
}

fn normalized(g: &PeriodGraph, mut nodes: BTreeMap<CategoryCode, f64>, mut edges: BTreeMap<EdgeKey, f64>) -> Oracle {
    let n = g.node_count() as f64;
    let c = 2.0 / ((n - 1.0) * (n - 2.0));
    nodes.values_mut().for_each(|v| *v *= c);
    edges.values_mut().for_each(|v| *v *= c);
    Oracle { nodes, edges }
}

fn zeroed(g: &PeriodGraph) -> (BTreeMap<CategoryCode, f64>, BTreeMap<EdgeKey, f64>) {
    (
        g.nodes().map(|x| (x, 0.0)).collect(),
        g.edges().map(|(k, _)| (k, 0.0)).collect(),
    )
}

/// Lists every shortest path explicitly (depth-first along BFS layers) and
/// counts how often each node and edge appears, per unordered pair.
pub fn unweighted_betweenness(g: &PeriodGraph) -> Oracle {
    let adj = adjacency(g);
    let (mut nodes, mut edges) = zeroed(g);
    let all: Vec<CategoryCode> = g.nodes().collect();
    for (i, &s) in all.iter().enumerate() {
        let mut dist = BTreeMap::from([(s, 0usize)]);
        let mut frontier = vec![s];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for u in frontier {
                for &(v, _) in &adj[&u] {
                    if !dist.contains_key(&v) {
                        dist.insert(v, dist[&u] + 1);
                        next.push(v);
                    }
                }
            }
            frontier = next;
        }
        for &t in &all[i + 1..] {
            let Some(&dt) = dist.get(&t) else { continue };
            let mut paths = Vec::new();
            let mut stack = vec![vec![s]];
            while let Some(path) = stack.pop() {
                let u = *path.last().unwrap();
                if u == t {
                    paths.push(path);
                    continue;
                }
                for &(v, _) in &adj[&u] {
                    if dist.get(&v) == Some(&(dist[&u] + 1)) && dist[&v] <= dt {
                        let mut p = path.clone();
                        p.push(v);
                        stack.push(p);
                    }
                }
            }
            accumulate(&paths, &mut nodes, &mut edges);
        }
    }
    normalized(g, nodes, edges)
}

/// Enumerates every simple path and keeps the shortest under length `1/w`.
/// Lengths are compared exactly as integers in units of `1/lcm(1..=5)`.
pub fn weighted_betweenness(g: &PeriodGraph) -> Oracle {
    const UNIT: u64 = 60;
    let adj = adjacency(g);
    assert!(g.edges().all(|(_, w)| UNIT.is_multiple_of(w)), "weights must divide 60");
    let (mut nodes, mut edges) = zeroed(g);
    let all: Vec<CategoryCode> = g.nodes().collect();
    for (i, &s) in all.iter().enumerate() {
        for &t in &all[i + 1..] {
            let mut best = u64::MAX;
            let mut paths: Vec<Vec<CategoryCode>> = Vec::new();
            let mut stack: Vec<(Vec<CategoryCode>, u64)> = vec![(vec![s], 0)];
            while let Some((path, len)) = stack.pop() {
                let u = *path.last().unwrap();
                if u == t {
                    if len < best {
                        best = len;
                        paths.clear();
                    }
                    if len == best {
                        paths.push(path);
                    }
                    continue;
                }
                for &(v, w) in &adj[&u] {
                    if !path.contains(&v) {
                        let mut p = path.clone();
                        p.push(v);
                        stack.push((p, len + UNIT / w));
                    }
                }
            }
            accumulate(&paths, &mut nodes, &mut edges);
        }
    }
    normalized(g, nodes, edges)
}

pub struct TauCounts {
    pub concordant: i64,
    pub discordant: i64,
    pub ties_x: i64,
    pub ties_y: i64,
    pub pairs: i64,
}

/// Pair-by-pair concordance count.
pub fn tau_counts(x: &[f64], y: &[f64]) -> TauCounts {
    let mut c = TauCounts {
        concordant: 0,
        discordant: 0,
        ties_x: 0,
        ties_y: 0,
        pairs: 0,
    };
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            c.pairs += 1;
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 {
                c.ties_x += 1;
            }
            if dy == 0.0 {
                c.ties_y += 1;
            }
            if dx * dy > 0.0 {
                c.concordant += 1;
            } else if dx * dy < 0.0 {
                c.discordant += 1;
            }
        }
    }
    c
}

pub fn tau_b_oracle(x: &[f64], y: &[f64]) -> Option<f64> {
    let c = tau_counts(x, y);
    let dx = c.pairs - c.ties_x;
    let dy = c.pairs - c.ties_y;
    if dx == 0 || dy == 0 {
        return None;
    }
    Some((c.concordant as f64 - c.discordant as f64) / ((dx as f64) * (dy as f64)).sqrt())
}

/// `sum_t c_t e^{-lambda (T - t)}` evaluated independently for every year.
pub fn decay_closed_form(counts: &BTreeMap<i32, f64>, year: i32, lambda: f64) -> f64 {
    counts
        .range(..=year)
        .map(|(&t, &c)| c * (-lambda * (year - t) as f64).exp())
        .sum()
}

/// Dispersion from first principles: distinct neighbours over twice the
/// distinct triplets.
pub fn dispersion_oracle(records: &[PaperRecord], x: CategoryCode) -> Option<f64> {
    let triplets: BTreeSet<_> = records
        .iter()
        .map(|r| r.triplet())
        .filter(|t| [t.0, t.1, t.2].contains(&x))
        .collect();
    if triplets.is_empty() {
        return None;
    }
    let neighbours: BTreeSet<CategoryCode> = triplets
        .iter()
        .flat_map(|t| [t.0, t.1, t.2])
        .filter(|c| *c != x)
        .collect();
    Some(neighbours.len() as f64 / (2 * triplets.len()) as f64)
}

pub fn random_records<R: Rng>(rng: &mut R, n: usize, sizes: (u16, u16, u16), years: (i32, i32)) -> Vec<PaperRecord> {
    (0..n)
        .map(|i| {
            PaperRecord::new(
                format!("p{i}"),
                rng.gen_range(years.0..=years.1),
                CategoryCode::measure(rng.gen_range(1..=sizes.0)),
                CategoryCode::data_type(rng.gen_range(1..=sizes.1)),
                CategoryCode::rq_type(rng.gen_range(1..=sizes.2)),
            )
            .unwrap()
        })
        .collect()
}
