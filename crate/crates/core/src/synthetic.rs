//! Synthetic corpora for tests, benchmarks and demonstrations.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::corpus::{Corpus, PaperRecord, PeriodSpec};
use crate::error::{Result, TkgError};
use crate::graph::{edge_key, EdgeKey};
use crate::null_model::{null_records, LabelPools};
use crate::rng::stream_rng;
use crate::taxonomy::{CategoryCode, Partition, Taxonomy};

/// Papers per default period used for corpus-shaped fixtures (617 in total).
pub const CORPUS_PERIOD_COUNTS: [usize; 6] = [30, 40, 70, 130, 160, 187];

/// Node and edge counts per default period of the reference corpus.
pub const CORPUS_PERIOD_SHAPES: [(usize, usize); 6] = [(16, 32), (18, 41), (23, 64), (27, 103), (27, 120), (28, 123)];

/// Years spread evenly over a period, in paper order.
fn years_in(year_min: i32, year_max: i32, n: usize) -> impl Iterator<Item = i32> {
    let span = (year_max - year_min + 1) as usize;
    (0..n).map(move |i| year_min + (i * span / n.max(1)) as i32)
}

/// A corpus with `counts[p]` papers in period `p` and labels drawn uniformly
/// from the taxonomy minus `excluded`.
pub fn uniform_corpus(
    counts: &[usize],
    taxonomy: &Taxonomy,
    period_spec: &PeriodSpec,
    excluded: &BTreeSet<CategoryCode>,
    seed: u64,
) -> Result<Corpus> {
    if counts.len() != period_spec.len() {
        return Err(TkgError::InvalidArgument(format!(
            "{} period counts for {} periods",
            counts.len(),
            period_spec.len()
        )));
    }
    let mut skeleton = Vec::new();
    for (p, &n) in period_spec.periods().iter().zip(counts) {
        for (i, year) in years_in(p.year_min, p.year_max, n).enumerate() {
            skeleton.push(PaperRecord {
                paper_id: format!("{}-{i:04}", p.label),
                year,
                measure: CategoryCode::measure(1),
                data_type: CategoryCode::data_type(1),
                rq_type: CategoryCode::rq_type(1),
            });
        }
    }
    let pools = LabelPools::new(taxonomy, excluded)?;
    let records = null_records(&skeleton, &pools, &mut stream_rng(seed, u64::MAX));
    Corpus::new(records, taxonomy.clone(), period_spec.clone())
}

/// Triplets whose union graph has exactly `nodes` nodes and `edges` edges.
///
/// Nodes are taken from the front of each partition's pool in proportion to
/// the pool sizes. Starting from one triangle, each further node joins an
/// existing edge (two new edges); the remaining edges are closed greedily.
pub fn shaped_triplets(
    taxonomy: &Taxonomy,
    excluded: &BTreeSet<CategoryCode>,
    nodes: usize,
    edges: usize,
) -> Result<Vec<(CategoryCode, CategoryCode, CategoryCode)>> {
    let pools = LabelPools::new(taxonomy, excluded)?;
    let sizes: Vec<usize> = Partition::ALL.iter().map(|p| pools.codes(*p).len()).collect();
    let total: usize = sizes.iter().sum();
    if nodes < 3 || nodes > total {
        return Err(TkgError::InvalidArgument(format!("cannot place {nodes} nodes")));
    }
    // Largest-remainder split, at least one node per partition.
    let mut take: Vec<usize> = sizes.iter().map(|s| (nodes * s / total).max(1)).collect();
    while take.iter().sum::<usize>() > nodes {
        let i = (0..3).filter(|&i| take[i] > 1).max_by_key(|&i| take[i]).expect("reducible");
        take[i] -= 1;
    }
    while take.iter().sum::<usize>() < nodes {
        let i = (0..3)
            .filter(|&i| take[i] < sizes[i])
            .max_by_key(|&i| sizes[i] - take[i])
            .expect("room left");
        take[i] += 1;
    }
    let chosen: Vec<&[CategoryCode]> = (0..3).map(|i| &pools.codes(Partition::ALL[i])[..take[i]]).collect();
    let max_edges = take[0] * take[1] + take[1] * take[2] + take[2] * take[0];
    if edges < 2 * nodes - 3 || edges > max_edges {
        return Err(TkgError::InvalidArgument(format!(
            "{edges} edges is outside [{}, {max_edges}] for {nodes} nodes",
            2 * nodes - 3
        )));
    }

    let mut present: BTreeSet<EdgeKey> = BTreeSet::new();
    let mut triplets = Vec::new();
    let mut add = |t: (CategoryCode, CategoryCode, CategoryCode), present: &mut BTreeSet<EdgeKey>| {
        present.insert(edge_key(t.0, t.1));
        present.insert(edge_key(t.1, t.2));
        present.insert(edge_key(t.0, t.2));
        triplets.push(t);
    };
    add((chosen[0][0], chosen[1][0], chosen[2][0]), &mut present);
    // Round-robin over partitions; each new node joins the first edge
    // between the other two partitions.
    let mut next = [1usize; 3];
    loop {
        let mut progressed = false;
        for p in 0..3 {
            if next[p] >= take[p] {
                continue;
            }
            let x = chosen[p][next[p]];
            next[p] += 1;
            progressed = true;
            let (a, b) = match p {
                0 => (chosen[1][0], chosen[2][0]),
                1 => (chosen[0][0], chosen[2][0]),
                _ => (chosen[0][0], chosen[1][0]),
            };
            let t = match p {
                0 => (x, a, b),
                1 => (a, x, b),
                _ => (a, b, x),
            };
            add(t, &mut present);
        }
        if !progressed {
            break;
        }
    }
    while present.len() < edges {
        let remaining = edges - present.len();
        let mut best: Option<((CategoryCode, CategoryCode, CategoryCode), usize)> = None;
        'search: for &m in chosen[0] {
            for &d in chosen[1] {
                for &r in chosen[2] {
                    let missing = [edge_key(m, d), edge_key(d, r), edge_key(m, r)]
                        .iter()
                        .filter(|e| !present.contains(e))
                        .count();
                    if missing == 0 || missing > remaining {
                        continue;
                    }
                    if best.is_none_or(|(_, k)| missing > k) {
                        best = Some(((m, d, r), missing));
                    }
                    if missing == remaining.min(3) {
                        break 'search;
                    }
                }
            }
        }
        let (t, _) = best.ok_or_else(|| TkgError::InvalidArgument(format!("cannot reach {edges} edges")))?;
        add(t, &mut present);
    }
    Ok(triplets)
}

/// A corpus whose period graphs have the given `(nodes, edges)` shapes.
///
/// Each period's distinct triplets come from [`shaped_triplets`]; the
/// remaining papers repeat them with random choice, which changes weights
/// but not the graph shape.
pub fn shaped_corpus(
    shapes: &[(usize, usize)],
    counts: &[usize],
    taxonomy: &Taxonomy,
    period_spec: &PeriodSpec,
    seed: u64,
) -> Result<Corpus> {
    if shapes.len() != period_spec.len() || counts.len() != period_spec.len() {
        return Err(TkgError::InvalidArgument("one shape and count per period required".into()));
    }
    let excluded = BTreeSet::from([CategoryCode::data_type(8)]);
    let mut records = Vec::new();
    let mut rng = stream_rng(seed, 0);
    for ((p, &(nodes, edges)), &n) in period_spec.periods().iter().zip(shapes).zip(counts) {
        let base = shaped_triplets(taxonomy, &excluded, nodes, edges)?;
        if base.len() > n {
            return Err(TkgError::InvalidArgument(format!(
                "period {} needs at least {} papers for its shape",
                p.label,
                base.len()
            )));
        }
        let mut triplets = base.clone();
        triplets.extend((base.len()..n).map(|_| base[rng.gen_range(0..base.len())]));
        for (i, (year, (m, d, r))) in years_in(p.year_min, p.year_max, n).zip(triplets).enumerate() {
            records.push(PaperRecord::new(format!("{}-{i:04}", p.label), year, m, d, r)?);
        }
    }
    Corpus::new(records, taxonomy.clone(), period_spec.clone())
}

/// Per-period paper counts of a corpus, in period order.
pub fn period_counts(corpus: &Corpus) -> Vec<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in corpus.records() {
        let p = corpus.period_spec().period_of(r.year).expect("validated corpus");
        *counts.entry(p).or_default() += 1;
    }
    (0..corpus.period_spec().len()).map(|p| counts.get(&p).copied().unwrap_or(0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::partition_by_period;
    use crate::graph::{build_period_graph, connectivity_report};

    #[test]
    fn uniform_corpus_has_requested_counts() {
        let c = uniform_corpus(
            &CORPUS_PERIOD_COUNTS,
            &Taxonomy::default(),
            &PeriodSpec::default(),
            &BTreeSet::from([CategoryCode::data_type(8)]),
            3,
        )
        .unwrap();
        assert_eq!(c.len(), 617);
        assert_eq!(period_counts(&c), CORPUS_PERIOD_COUNTS.to_vec());
    }

    #[test]
    fn shaped_corpus_matches_reference_shapes() {
        let c = shaped_corpus(
            &CORPUS_PERIOD_SHAPES,
            &CORPUS_PERIOD_COUNTS,
            &Taxonomy::default(),
            &PeriodSpec::default(),
            1,
        )
        .unwrap();
        for (b, &(n, e)) in partition_by_period(&c).iter().zip(&CORPUS_PERIOD_SHAPES) {
            let (g, _) = build_period_graph(&b.label, &b.records).unwrap();
            assert_eq!((g.node_count(), g.edge_count()), (n, e), "{}", b.label);
            assert!(connectivity_report(&g).is_connected);
        }
    }

    #[test]
    fn every_reachable_edge_count_is_hit() {
        let t = Taxonomy::default();
        let ex = BTreeSet::new();
        for nodes in [3, 5, 9] {
            let triplets = shaped_triplets(&t, &ex, nodes, 2 * nodes - 3).unwrap();
            assert_eq!(triplets.len(), nodes - 2);
        }
        // 10 nodes split 2 / 6 / 2 allow at most 12 + 12 + 4 edges.
        for edges in 17..=28 {
            let triplets = shaped_triplets(&t, &ex, 10, edges).unwrap();
            let set: BTreeSet<_> = triplets
                .iter()
                .flat_map(|&(m, d, r)| [edge_key(m, d), edge_key(d, r), edge_key(m, r)])
                .collect();
            assert_eq!(set.len(), edges);
        }
        assert!(shaped_triplets(&t, &ex, 10, 16).is_err());
        assert!(shaped_triplets(&t, &ex, 10, 29).is_err());
    }
}
