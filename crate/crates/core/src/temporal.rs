//! Rank stability between consecutive periods.
//!
//! Component rankings of two periods are compared with Kendall's tau-b over
//! their common components. Confidence intervals come from resampling the
//! papers of each period with replacement.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::centrality::betweenness;
use crate::corpus::{PaperRecord, PeriodBucket};
use crate::error::{Result, TkgError};
use crate::graph::{
    build_period_graph, node_occurrences, pair_cooccurrences, triangle_counts, ComponentKey,
    ComponentKind, ComponentStats,
};
use crate::rng::stream_rng;

/// Which per-period statistic is ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StatKind {
    NodeCount,
    PairCount,
    TriangleCount,
    NodeBtwUnweighted,
    NodeBtwWeighted,
    EdgeBtwUnweighted,
    EdgeBtwWeighted,
}

impl StatKind {
    pub const ALL: [StatKind; 7] = [
        StatKind::NodeCount,
        StatKind::PairCount,
        StatKind::TriangleCount,
        StatKind::NodeBtwUnweighted,
        StatKind::NodeBtwWeighted,
        StatKind::EdgeBtwUnweighted,
        StatKind::EdgeBtwWeighted,
    ];

    pub const COUNTS: [StatKind; 3] = [
        StatKind::NodeCount,
        StatKind::PairCount,
        StatKind::TriangleCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StatKind::NodeCount => "node_count",
            StatKind::PairCount => "pair_count",
            StatKind::TriangleCount => "triangle_count",
            StatKind::NodeBtwUnweighted => "node_btw_unw",
            StatKind::NodeBtwWeighted => "node_btw_w",
            StatKind::EdgeBtwUnweighted => "edge_btw_unw",
            StatKind::EdgeBtwWeighted => "edge_btw_w",
        }
    }

    pub fn component_kind(self) -> ComponentKind {
        match self {
            StatKind::NodeCount | StatKind::NodeBtwUnweighted | StatKind::NodeBtwWeighted => {
                ComponentKind::Node
            }
            StatKind::PairCount | StatKind::EdgeBtwUnweighted | StatKind::EdgeBtwWeighted => {
                ComponentKind::Pair
            }
            StatKind::TriangleCount => ComponentKind::Triangle,
        }
    }

    fn needs_betweenness(self) -> Option<bool> {
        match self {
            StatKind::NodeBtwUnweighted | StatKind::EdgeBtwUnweighted => Some(false),
            StatKind::NodeBtwWeighted | StatKind::EdgeBtwWeighted => Some(true),
            _ => None,
        }
    }
}

impl fmt::Display for StatKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StatKind {
    type Err = TkgError;

    fn from_str(s: &str) -> Result<Self> {
        StatKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| TkgError::InvalidArgument(format!("unknown statistic `{s}`")))
    }
}

/// How the component set of two periods is chosen before ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CommonSet {
    /// Components with a positive value in both periods.
    #[default]
    Intersection,
    /// Components positive in either period; absent ones count as 0.
    Union,
}

impl FromStr for CommonSet {
    type Err = TkgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "intersection" => Ok(CommonSet::Intersection),
            "union" => Ok(CommonSet::Union),
            _ => Err(TkgError::InvalidArgument(format!(
                "common set must be `intersection` or `union`, got `{s}`"
            ))),
        }
    }
}

impl fmt::Display for CommonSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CommonSet::Intersection => "intersection",
            CommonSet::Union => "union",
        })
    }
}

/// Computes several statistics for one period, building the graph once.
///
/// An empty record list yields empty statistics.
pub fn period_stats(kinds: &[StatKind], label: &str, records: &[PaperRecord]) -> Vec<ComponentStats> {
    if records.is_empty() {
        return kinds
            .iter()
            .map(|k| ComponentStats::new(k.component_kind(), label))
            .collect();
    }
    let (graph, table) = build_period_graph(label, records).expect("non-empty records");
    let mut btw = [None, None];
    kinds
        .iter()
        .map(|&kind| match kind {
            StatKind::NodeCount => node_occurrences(&table),
            StatKind::PairCount => pair_cooccurrences(&table),
            StatKind::TriangleCount => triangle_counts(&table),
            _ => {
                let weighted = kind.needs_betweenness().expect("betweenness kind");
                let b = btw[weighted as usize].get_or_insert_with(|| betweenness(&graph, weighted));
                let mut stats = ComponentStats::new(kind.component_kind(), label);
                stats.values = match kind.component_kind() {
                    ComponentKind::Node => b
                        .nodes
                        .iter()
                        .map(|(c, v)| (ComponentKey::Node(*c), *v))
                        .collect(),
                    _ => b
                        .edges
                        .iter()
                        .map(|((u, v), s)| (ComponentKey::Pair(*u, *v), *s))
                        .collect(),
                };
                stats
            }
        })
        .collect()
}

/// Tau-b of two equally long value vectors; `None` when a ranking is constant
/// or fewer than two values are given.
///
/// Runs in O(n log n): sort by `(x, y)`, count discordant pairs as the
/// inversions of `y` left by that order, and correct for ties.
pub fn kendall_tau_b_values(x: &[f64], y: &[f64]) -> Option<f64> {
    assert_eq!(x.len(), y.len(), "value vectors must align");
    let n = x.len();
    if n < 2 {
        return None;
    }
    // `+ 0.0` folds -0.0 into 0.0 so sorting and tie detection agree.
    let mut pairs: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a + 0.0, b + 0.0)).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let tie_pairs = |t: u64| t * (t - 1) / 2;
    let (mut x_ties, mut xy_ties) = (0u64, 0u64);
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for i in 1..n {
        if pairs[i].0 == pairs[i - 1].0 {
            run_x += 1;
            if pairs[i].1 == pairs[i - 1].1 {
                run_xy += 1;
            } else {
                xy_ties += tie_pairs(run_xy);
                run_xy = 1;
            }
        } else {
            x_ties += tie_pairs(run_x);
            xy_ties += tie_pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    x_ties += tie_pairs(run_x);
    xy_ties += tie_pairs(run_xy);

    let mut ys: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let mut buf = vec![0.0; n];
    let discordant = count_inversions(&mut ys, &mut buf);

    // ys is now sorted.
    let mut y_ties = 0u64;
    let mut run_y = 1u64;
    for i in 1..n {
        if ys[i] == ys[i - 1] {
            run_y += 1;
        } else {
            y_ties += tie_pairs(run_y);
            run_y = 1;
        }
    }
    y_ties += tie_pairs(run_y);

    let n0 = tie_pairs(n as u64);
    let concordant = n0 + xy_ties - x_ties - y_ties - discordant;
    let denom_x = n0 - x_ties;
    let denom_y = n0 - y_ties;
    if denom_x == 0 || denom_y == 0 {
        return None;
    }
    let num = concordant as f64 - discordant as f64;
    Some(num / ((denom_x as f64) * (denom_y as f64)).sqrt())
}

/// Stable merge sort counting strict inversions.
fn count_inversions(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (left, right) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        count_inversions(left, bl) + count_inversions(right, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            inv += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    inv
}

/// Aligns two value maps on the chosen component set.
pub fn common_values<K: Ord + Clone>(
    a: &BTreeMap<K, f64>,
    b: &BTreeMap<K, f64>,
    mode: CommonSet,
) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    match mode {
        CommonSet::Intersection => {
            for (k, &va) in a {
                if va <= 0.0 {
                    continue;
                }
                if let Some(&vb) = b.get(k) {
                    if vb > 0.0 {
                        xs.push(va);
                        ys.push(vb);
                    }
                }
            }
        }
        CommonSet::Union => {
            let mut keys: Vec<&K> = a
                .iter()
                .chain(b.iter())
                .filter(|(_, v)| **v > 0.0)
                .map(|(k, _)| k)
                .collect();
            keys.sort();
            keys.dedup();
            for k in keys {
                xs.push(a.get(k).copied().unwrap_or(0.0));
                ys.push(b.get(k).copied().unwrap_or(0.0));
            }
        }
    }
    (xs, ys)
}

/// Kendall tau-b between two periods' values over their common components.
pub fn kendall_tau_b<K: Ord + Clone>(
    values_a: &BTreeMap<K, f64>,
    values_b: &BTreeMap<K, f64>,
    mode: CommonSet,
) -> Option<f64> {
    let (x, y) = common_values(values_a, values_b, mode);
    kendall_tau_b_values(&x, &y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauComparison {
    pub period_a: String,
    pub period_b: String,
    pub tau: Option<f64>,
    pub ci: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TauSeries {
    pub kind: StatKind,
    pub comparisons: Vec<TauComparison>,
    /// Mean of the defined comparison values.
    pub global_mean: Option<f64>,
    pub global_ci: Option<(f64, f64)>,
}

fn mean_defined(values: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    let (sum, count) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// One tau per pair of consecutive periods, without confidence intervals.
pub fn consecutive_tau_series(kind: StatKind, stats: &[ComponentStats], mode: CommonSet) -> TauSeries {
    let comparisons: Vec<TauComparison> = stats
        .windows(2)
        .map(|w| TauComparison {
            period_a: w[0].period_label.clone(),
            period_b: w[1].period_label.clone(),
            tau: kendall_tau_b(&w[0].values, &w[1].values, mode),
            ci: None,
        })
        .collect();
    TauSeries {
        kind,
        global_mean: mean_defined(comparisons.iter().map(|c| c.tau)),
        comparisons,
        global_ci: None,
    }
}

/// Percentile interval from order statistics, widened outward so both ends
/// are observed values. `None` for an empty sample.
pub fn percentile_interval(values: &[f64], level: f64) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    let last = (sorted.len() - 1) as f64;
    let lo = (last * alpha / 2.0).floor() as usize;
    let hi = (last * (1.0 - alpha / 2.0)).ceil() as usize;
    Some((sorted[lo], sorted[hi.min(sorted.len() - 1)]))
}

fn resample<R: Rng>(records: &[PaperRecord], rng: &mut R) -> Vec<PaperRecord> {
    (0..records.len())
        .map(|_| records[rng.gen_range(0..records.len())].clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapCi {
    pub tau_obs: Option<f64>,
    pub ci: Option<(f64, f64)>,
    /// Resamples whose tau was defined.
    pub n_defined: usize,
}

/// Bootstrap percentile interval for the tau between two periods.
pub fn bootstrap_tau_ci(
    records_a: &[PaperRecord],
    records_b: &[PaperRecord],
    kind: StatKind,
    n_resamples: usize,
    level: f64,
    seed: u64,
    mode: CommonSet,
) -> Result<BootstrapCi> {
    if records_a.is_empty() || records_b.is_empty() {
        return Err(TkgError::EmptyPeriod);
    }
    check_level(level)?;
    let observe = |a: &[PaperRecord], b: &[PaperRecord]| {
        let sa = period_stats(&[kind], "a", a);
        let sb = period_stats(&[kind], "b", b);
        kendall_tau_b(&sa[0].values, &sb[0].values, mode)
    };
    let tau_obs = observe(records_a, records_b);
    let taus: Vec<Option<f64>> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let ra = resample(records_a, &mut rng);
            let rb = resample(records_b, &mut rng);
            observe(&ra, &rb)
        })
        .collect();
    let defined: Vec<f64> = taus.into_iter().flatten().collect();
    Ok(BootstrapCi {
        tau_obs,
        ci: percentile_interval(&defined, level),
        n_defined: defined.len(),
    })
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(TkgError::InvalidArgument(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    Ok(())
}

/// Observed tau series for every kind with bootstrap intervals.
///
/// Resample `i` redraws every period once from stream `i`, so all
/// comparisons and the global mean of one resample share the same draw.
/// The global interval is the percentile interval of per-resample means.
pub fn bootstrap_tau_series(
    buckets: &[PeriodBucket],
    kinds: &[StatKind],
    n_resamples: usize,
    level: f64,
    seed: u64,
    mode: CommonSet,
) -> Result<Vec<TauSeries>> {
    check_level(level)?;
    let all_stats = |periods: &[Vec<PaperRecord>]| -> Vec<Vec<ComponentStats>> {
        // [period][kind]
        periods
            .iter()
            .zip(buckets)
            .map(|(recs, b)| period_stats(kinds, &b.label, recs))
            .collect()
    };
    let taus_of = |stats: &[Vec<ComponentStats>]| -> Vec<Vec<Option<f64>>> {
        // [kind][comparison]
        (0..kinds.len())
            .map(|k| {
                stats
                    .windows(2)
                    .map(|w| kendall_tau_b(&w[0][k].values, &w[1][k].values, mode))
                    .collect()
            })
            .collect()
    };

    let observed: Vec<Vec<PaperRecord>> = buckets.iter().map(|b| b.records.clone()).collect();
    let observed_taus = taus_of(&all_stats(&observed));

    let resampled: Vec<Vec<Vec<Option<f64>>>> = (0..n_resamples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let periods: Vec<Vec<PaperRecord>> = buckets
                .iter()
                .map(|b| {
                    if b.records.is_empty() {
                        Vec::new()
                    } else {
                        resample(&b.records, &mut rng)
                    }
                })
                .collect();
            taus_of(&all_stats(&periods))
        })
        .collect();

    Ok(kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| {
            let comparisons = buckets
                .windows(2)
                .enumerate()
                .map(|(c, w)| {
                    let boot: Vec<f64> = resampled.iter().filter_map(|r| r[k][c]).collect();
                    TauComparison {
                        period_a: w[0].label.clone(),
                        period_b: w[1].label.clone(),
                        tau: observed_taus[k][c],
                        ci: percentile_interval(&boot, level),
                    }
                })
                .collect::<Vec<_>>();
            let boot_means: Vec<f64> = resampled
                .iter()
                .filter_map(|r| mean_defined(r[k].iter().copied()))
                .collect();
            TauSeries {
                kind,
                global_mean: mean_defined(observed_taus[k].iter().copied()),
                global_ci: percentile_interval(&boot_means, level),
                comparisons,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::CategoryCode as C;

    fn map(values: &[f64]) -> BTreeMap<usize, f64> {
        values.iter().copied().enumerate().collect()
    }

    fn rec(id: &str, m: u16, d: u16, r: u16) -> PaperRecord {
        PaperRecord::new(id, 2000, C::measure(m), C::data_type(d), C::rq_type(r)).unwrap()
    }

    #[test]
    fn perfect_and_reversed() {
        let a = map(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        let b = map(&[5.0, 4.0, 3.0, 2.0, 1.0]);
        assert_eq!(kendall_tau_b(&a, &a, CommonSet::Intersection), Some(1.0));
        assert_eq!(kendall_tau_b(&a, &b, CommonSet::Intersection), Some(-1.0));
    }

    #[test]
    fn hand_counted_ties() {
        // pairs of a=[1,2,2,3], b=[1,3,2,2]:
        // (0,1) C, (0,2) C, (0,3) C, (1,2) tied in a, (1,3) D, (2,3) tied in b
        // n_c = 3, n_d = 1, n1 = 1, n2 = 1 -> 2 / sqrt(5 * 5)
        let tau = kendall_tau_b_values(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 2.0]).unwrap();
        assert!((tau - 0.4).abs() < 1e-15);
    }

    #[test]
    fn undefined_cases() {
        assert_eq!(kendall_tau_b_values(&[1.0], &[2.0]), None);
        assert_eq!(kendall_tau_b_values(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]), None);
        let a = map(&[1.0, 2.0]);
        let b: BTreeMap<usize, f64> = [(5, 1.0), (6, 2.0)].into();
        assert_eq!(kendall_tau_b(&a, &b, CommonSet::Intersection), None);
    }

    #[test]
    fn intersection_drops_zero_and_missing() {
        let a: BTreeMap<&str, f64> = [("x", 1.0), ("y", 2.0), ("z", 0.0), ("w", 3.0)].into();
        let b: BTreeMap<&str, f64> = [("x", 1.0), ("y", 5.0), ("z", 9.0), ("v", 1.0)].into();
        let (xs, ys) = common_values(&a, &b, CommonSet::Intersection);
        assert_eq!(xs, vec![1.0, 2.0]);
        assert_eq!(ys, vec![1.0, 5.0]);
        let (xs, ys) = common_values(&a, &b, CommonSet::Union);
        // keys v, w, x, y, z
        assert_eq!(xs, vec![0.0, 3.0, 1.0, 2.0, 0.0]);
        assert_eq!(ys, vec![1.0, 0.0, 1.0, 5.0, 9.0]);
    }

    #[test]
    fn constant_series() {
        let recs = vec![rec("a", 1, 1, 1), rec("b", 2, 2, 2), rec("c", 2, 1, 3), rec("d", 1, 1, 1)];
        let stats: Vec<ComponentStats> = (0..4)
            .map(|i| period_stats(&[StatKind::NodeCount], &format!("T{i}"), &recs).remove(0))
            .collect();
        let series = consecutive_tau_series(StatKind::NodeCount, &stats, CommonSet::Intersection);
        assert_eq!(series.comparisons.len(), 3);
        assert!(series.comparisons.iter().all(|c| c.tau == Some(1.0)));
        assert_eq!(series.global_mean, Some(1.0));
    }

    #[test]
    fn empty_overlap_is_undefined() {
        let a = period_stats(&[StatKind::TriangleCount], "a", &[rec("a", 1, 1, 1), rec("b", 2, 2, 2)]);
        let b = period_stats(&[StatKind::TriangleCount], "b", &[rec("c", 3, 3, 3), rec("d", 4, 4, 4)]);
        let series = consecutive_tau_series(
            StatKind::TriangleCount,
            &[a[0].clone(), b[0].clone()],
            CommonSet::Intersection,
        );
        assert_eq!(series.comparisons[0].tau, None);
        assert_eq!(series.global_mean, None);
    }

    #[test]
    fn percentile_interval_uses_observed_values() {
        assert_eq!(percentile_interval(&[], 0.95), None);
        assert_eq!(percentile_interval(&[0.3], 0.95), Some((0.3, 0.3)));
        assert_eq!(percentile_interval(&[0.2, 0.1], 0.95), Some((0.1, 0.2)));
        let v: Vec<f64> = (0..1000).map(f64::from).collect();
        // floor(999 * 0.025) = 24, ceil(999 * 0.975) = 975
        assert_eq!(percentile_interval(&v, 0.95), Some((24.0, 975.0)));
    }

    #[test]
    fn bootstrap_single_triplet_is_undefined() {
        let ci = bootstrap_tau_ci(
            &[rec("a", 1, 1, 1)],
            &[rec("b", 1, 1, 1)],
            StatKind::TriangleCount,
            50,
            0.95,
            3,
            CommonSet::Intersection,
        )
        .unwrap();
        assert_eq!(ci.tau_obs, None);
        assert_eq!(ci.ci, None);
        assert_eq!(ci.n_defined, 0);
    }

    #[test]
    fn bootstrap_errors() {
        assert!(bootstrap_tau_ci(&[], &[rec("a", 1, 1, 1)], StatKind::NodeCount, 10, 0.95, 1, CommonSet::Intersection).is_err());
        assert!(bootstrap_tau_ci(&[rec("a", 1, 1, 1)], &[rec("a", 1, 1, 1)], StatKind::NodeCount, 10, 1.5, 1, CommonSet::Intersection).is_err());
    }

    #[test]
    fn stat_kind_names_round_trip() {
        for k in StatKind::ALL {
            assert_eq!(k.name().parse::<StatKind>().unwrap(), k);
        }
        assert!("bogus".parse::<StatKind>().is_err());
    }
}
