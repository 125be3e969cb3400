//! Random-label null model with sequential Monte Carlo stopping.
//!
//! Each null corpus keeps every paper's id and year but draws its measure,
//! data type and research question uniformly and independently from the
//! enabled codes. The number of samples grows in batches until the exact
//! binomial interval of every exceedance proportion is narrower than the
//! threshold, or the sample cap is hit.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rayon::prelude::*;

use crate::corpus::{partition_by_period, Corpus, PaperRecord};
use crate::error::{Result, TkgError};
use crate::graph::{ComponentKey, ComponentStats};
use crate::rng::stream_rng;
use crate::taxonomy::{CategoryCode, Partition, Taxonomy};
use crate::temporal::{kendall_tau_b, percentile_interval, period_stats, CommonSet, StatKind};

/// Codes a null corpus may draw, per partition.
#[derive(Debug, Clone)]
pub struct LabelPools {
    pools: [Vec<CategoryCode>; 3],
}

impl LabelPools {
    pub fn new(taxonomy: &Taxonomy, excluded: &BTreeSet<CategoryCode>) -> Result<Self> {
        let pool = |p: Partition| -> Result<Vec<CategoryCode>> {
            let codes: Vec<_> = taxonomy
                .codes(p)
                .iter()
                .copied()
                .filter(|c| !excluded.contains(c))
                .collect();
            if codes.is_empty() {
                return Err(TkgError::InvalidArgument(format!(
                    "no {p} codes left for the null model"
                )));
            }
            Ok(codes)
        };
        Ok(LabelPools {
            pools: [
                pool(Partition::Measure)?,
                pool(Partition::DataType)?,
                pool(Partition::RqType)?,
            ],
        })
    }

    pub fn codes(&self, partition: Partition) -> &[CategoryCode] {
        &self.pools[partition as usize]
    }
}

/// Relabels every record with uniformly drawn codes, keeping id and year.
pub fn null_records<R: Rng>(records: &[PaperRecord], pools: &LabelPools, rng: &mut R) -> Vec<PaperRecord> {
    let mut draw = |p: Partition| {
        let pool = pools.codes(p);
        pool[rng.gen_range(0..pool.len())]
    };
    records
        .iter()
        .map(|r| PaperRecord {
            paper_id: r.paper_id.clone(),
            year: r.year,
            measure: draw(Partition::Measure),
            data_type: draw(Partition::DataType),
            rq_type: draw(Partition::RqType),
        })
        .collect()
}

/// One null corpus, identical to sample `stream` of a null run with `seed`.
pub fn generate_null_corpus(
    observed: &Corpus,
    excluded: &BTreeSet<CategoryCode>,
    seed: u64,
    stream: u64,
) -> Result<Corpus> {
    let pools = LabelPools::new(observed.taxonomy(), excluded)?;
    let records = null_records(observed.records(), &pools, &mut stream_rng(seed, stream));
    Corpus::new(records, observed.taxonomy().clone(), observed.period_spec().clone())
}

// ---------------------------------------------------------------------------
// Clopper-Pearson
// ---------------------------------------------------------------------------

/// Lanczos approximation (g = 7, 9 terms).
fn ln_gamma(x: f64) -> f64 {
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let t = x + 7.5;
    let series = COEF
        .iter()
        .enumerate()
        .skip(1)
        .fold(COEF[0], |acc, (i, c)| acc + c / (x + i as f64));
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + series.ln()
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..100_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(a, b, x) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Quantile of Beta(a, b) by bisection on the regularized incomplete beta.
fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if reg_inc_beta(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Exact binomial confidence interval for `successes / trials`.
pub fn clopper_pearson(successes: u64, trials: u64, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(TkgError::InvalidArgument(format!(
            "invalid binomial counts {successes}/{trials}"
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(TkgError::InvalidArgument(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    let alpha = 1.0 - level;
    let (s, t) = (successes as f64, trials as f64);
    let low = if successes == 0 {
        0.0
    } else {
        beta_quantile(alpha / 2.0, s, t - s + 1.0)
    };
    let high = if successes == trials {
        1.0
    } else {
        beta_quantile(1.0 - alpha / 2.0, s + 1.0, t - s)
    };
    Ok((low, high))
}

// ---------------------------------------------------------------------------
// Sequential null analysis
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct NullConfig {
    pub targets: Vec<StatKind>,
    pub max_samples: usize,
    pub ci_width_threshold: f64,
    pub min_samples: usize,
    /// Stopping is checked only at batch boundaries.
    pub batch_size: usize,
    pub seed: u64,
    /// Codes never drawn by the null model.
    pub excluded_codes: BTreeSet<CategoryCode>,
    pub common_set: CommonSet,
    /// Samples kept for percentile bands (the first ones drawn).
    pub band_samples: usize,
    pub level: f64,
    /// Bootstrap resamples for the interval of the null global mean.
    pub global_bootstrap_n: usize,
}

impl Default for NullConfig {
    fn default() -> Self {
        NullConfig {
            targets: StatKind::ALL.to_vec(),
            max_samples: 250_000,
            ci_width_threshold: 0.01,
            min_samples: 1000,
            batch_size: 100,
            seed: 0,
            excluded_codes: BTreeSet::from([CategoryCode::data_type(8)]),
            common_set: CommonSet::Intersection,
            band_samples: 1000,
            level: 0.95,
            global_bootstrap_n: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    CiWidth,
    MaxSamples,
    FixedCount,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::CiWidth => "ci_width",
            StopReason::MaxSamples => "max_samples",
            StopReason::FixedCount => "fixed_count",
        }
    }
}

/// Null results for one consecutive-period comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct NullComparison {
    pub kind: StatKind,
    pub period_a: String,
    pub period_b: String,
    pub observed_tau: Option<f64>,
    pub n_defined: u64,
    pub n_undefined: u64,
    pub null_mean_tau: Option<f64>,
    /// 2.5 / 50 / 97.5 percentiles of null tau over the band samples.
    pub null_tau_band: Option<[f64; 3]>,
    /// Null samples with tau at least the observed one.
    pub exceed: u64,
    /// Exact interval of `exceed / n_defined`; drives the stopping rule.
    pub cp_interval: Option<(f64, f64)>,
    /// `(exceed + 1) / (n_defined + 1)`.
    pub p_value: Option<f64>,
    pub p_interval: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullGlobal {
    pub kind: StatKind,
    pub observed_mean: Option<f64>,
    /// Mean over samples of the per-sample mean tau.
    pub null_mean: Option<f64>,
    pub null_mean_ci: Option<(f64, f64)>,
}

/// Percentiles (2.5, 25, 50, 75, 97.5) of one component's null values.
#[derive(Debug, Clone, PartialEq)]
pub struct NullBand {
    pub kind: StatKind,
    pub period_label: String,
    pub key: ComponentKey,
    pub quantiles: [f64; 5],
}

#[derive(Debug, Clone, PartialEq)]
pub struct NullSummary {
    pub n_samples: usize,
    pub stop_reason: StopReason,
    pub comparisons: Vec<NullComparison>,
    pub globals: Vec<NullGlobal>,
    pub bands: Vec<NullBand>,
}

impl NullSummary {
    pub fn comparison(&self, kind: StatKind, period_a: &str) -> Option<&NullComparison> {
        self.comparisons
            .iter()
            .find(|c| c.kind == kind && c.period_a == period_a)
    }

    pub fn global(&self, kind: StatKind) -> Option<&NullGlobal> {
        self.globals.iter().find(|g| g.kind == kind)
    }
}

struct SampleOutcome {
    /// [kind][comparison]
    taus: Vec<Vec<Option<f64>>>,
    /// [period][kind], kept only for band samples
    stats: Option<Vec<Vec<ComponentStats>>>,
}

#[derive(Default, Clone)]
struct ComparisonTally {
    sum: f64,
    defined: u64,
    undefined: u64,
    exceed: u64,
    kept: Vec<f64>,
}

const BAND_QUANTILES: [f64; 5] = [0.025, 0.25, 0.5, 0.75, 0.975];

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn cp_width(tally: &ComparisonTally, level: f64) -> Option<f64> {
    clopper_pearson(tally.exceed, tally.defined, level)
        .ok()
        .map(|(lo, hi)| hi - lo)
}

/// Runs the null model until every exceedance interval is narrower than the
/// threshold (checked per batch after `min_samples`), or `max_samples`.
///
/// When `min_samples >= max_samples` exactly `max_samples` are drawn.
pub fn run_null_analysis(observed: &Corpus, config: &NullConfig) -> Result<NullSummary> {
    if config.targets.is_empty() {
        return Err(TkgError::InvalidArgument("no null-model targets".into()));
    }
    if config.max_samples == 0 || config.batch_size == 0 {
        return Err(TkgError::InvalidArgument(
            "max_samples and batch_size must be positive".into(),
        ));
    }
    let pools = LabelPools::new(observed.taxonomy(), &config.excluded_codes)?;
    // Periods without papers stay empty in every null corpus and are skipped.
    let all_buckets = partition_by_period(observed);
    let mut slot_of_period = vec![None; all_buckets.len()];
    let buckets: Vec<_> = all_buckets
        .into_iter()
        .enumerate()
        .filter(|(_, b)| !b.records.is_empty())
        .enumerate()
        .map(|(slot, (p, b))| {
            slot_of_period[p] = Some(slot);
            b
        })
        .collect();
    let labels: Vec<String> = buckets.iter().map(|b| b.label.clone()).collect();
    let kinds = &config.targets;
    let n_cmp = labels.len().saturating_sub(1);

    let stats_of = |periods: &[Vec<PaperRecord>]| -> Vec<Vec<ComponentStats>> {
        periods
            .iter()
            .zip(&labels)
            .map(|(recs, label)| period_stats(kinds, label, recs))
            .collect()
    };
    let taus_of = |stats: &[Vec<ComponentStats>]| -> Vec<Vec<Option<f64>>> {
        (0..kinds.len())
            .map(|k| {
                stats
                    .windows(2)
                    .map(|w| kendall_tau_b(&w[0][k].values, &w[1][k].values, config.common_set))
                    .collect()
            })
            .collect()
    };

    let observed_periods: Vec<Vec<PaperRecord>> = buckets.iter().map(|b| b.records.clone()).collect();
    let observed_taus = taus_of(&stats_of(&observed_periods));

    let spec = observed.period_spec();
    let run_sample = |i: usize| -> SampleOutcome {
        let records = null_records(observed.records(), &pools, &mut stream_rng(config.seed, i as u64));
        let mut periods: Vec<Vec<PaperRecord>> = vec![Vec::new(); labels.len()];
        for r in records {
            let p = spec.period_of(r.year).expect("validated corpus");
            periods[slot_of_period[p].expect("non-empty period")].push(r);
        }
        let stats = stats_of(&periods);
        SampleOutcome {
            taus: taus_of(&stats),
            stats: (i < config.band_samples).then_some(stats),
        }
    };

    let mut tallies = vec![vec![ComparisonTally::default(); n_cmp]; kinds.len()];
    let mut sample_means: Vec<Vec<f64>> = vec![Vec::new(); kinds.len()];
    // (kind, period, key) -> non-zero values over band samples
    let mut band_values: BTreeMap<(usize, usize, ComponentKey), Vec<f64>> = BTreeMap::new();

    let fixed = config.min_samples >= config.max_samples;
    let first_check = config.min_samples.min(config.max_samples);
    let eligible = |k: usize, c: usize, t: &ComparisonTally| observed_taus[k][c].is_some() && t.defined > 0;
    let converged = |tallies: &[Vec<ComparisonTally>]| -> Option<bool> {
        let mut any = false;
        for (k, row) in tallies.iter().enumerate() {
            for (c, t) in row.iter().enumerate() {
                if !eligible(k, c, t) {
                    continue;
                }
                any = true;
                match cp_width(t, config.level) {
                    Some(w) if w < config.ci_width_threshold => {}
                    _ => return Some(false),
                }
            }
        }
        any.then_some(true)
    };

    let mut n = 0usize;
    let stop_reason = loop {
        let end = if n < first_check {
            (n + config.batch_size).min(first_check)
        } else {
            (n + config.batch_size).min(config.max_samples)
        };
        let outcomes: Vec<SampleOutcome> = (n..end).into_par_iter().map(run_sample).collect();
        for outcome in outcomes {
            for (k, row) in outcome.taus.iter().enumerate() {
                for (c, tau) in row.iter().enumerate() {
                    let tally = &mut tallies[k][c];
                    match tau {
                        Some(t) => {
                            tally.sum += t;
                            tally.defined += 1;
                            if tally.kept.len() < config.band_samples {
                                tally.kept.push(*t);
                            }
                            if let Some(obs) = observed_taus[k][c] {
                                if *t >= obs {
                                    tally.exceed += 1;
                                }
                            }
                        }
                        None => tally.undefined += 1,
                    }
                }
                let defined: Vec<f64> = row.iter().flatten().copied().collect();
                if !defined.is_empty() {
                    sample_means[k].push(defined.iter().sum::<f64>() / defined.len() as f64);
                }
            }
            if let Some(stats) = outcome.stats {
                for (p, per_kind) in stats.iter().enumerate() {
                    for (k, s) in per_kind.iter().enumerate() {
                        for (key, v) in &s.values {
                            if *v != 0.0 {
                                band_values.entry((k, p, *key)).or_default().push(*v);
                            }
                        }
                    }
                }
            }
        }
        n = end;
        if n < first_check {
            continue;
        }
        if fixed {
            if n >= config.max_samples {
                break StopReason::FixedCount;
            }
            continue;
        }
        match converged(&tallies) {
            None => break StopReason::FixedCount,
            Some(true) => break StopReason::CiWidth,
            Some(false) if n >= config.max_samples => break StopReason::MaxSamples,
            Some(false) => {}
        }
    };
    if stop_reason == StopReason::CiWidth {
        debug_assert_eq!(converged(&tallies), Some(true));
    }

    let comparisons = kinds
        .iter()
        .enumerate()
        .flat_map(|(k, &kind)| {
            let tallies = &tallies;
            let labels = &labels;
            let observed_taus = &observed_taus;
            (0..n_cmp).map(move |c| {
                let t = &tallies[k][c];
                let observed_tau = observed_taus[k][c];
                let mut kept = t.kept.clone();
                kept.sort_by(f64::total_cmp);
                let with_obs = observed_tau.is_some() && t.defined > 0;
                NullComparison {
                    kind,
                    period_a: labels[c].clone(),
                    period_b: labels[c + 1].clone(),
                    observed_tau,
                    n_defined: t.defined,
                    n_undefined: t.undefined,
                    null_mean_tau: (t.defined > 0).then(|| t.sum / t.defined as f64),
                    null_tau_band: (!kept.is_empty()).then(|| {
                        [
                            quantile_sorted(&kept, 0.025),
                            quantile_sorted(&kept, 0.5),
                            quantile_sorted(&kept, 0.975),
                        ]
                    }),
                    exceed: t.exceed,
                    cp_interval: if with_obs {
                        clopper_pearson(t.exceed, t.defined, config.level).ok()
                    } else {
                        None
                    },
                    p_value: with_obs.then(|| (t.exceed + 1) as f64 / (t.defined + 1) as f64),
                    p_interval: if with_obs {
                        clopper_pearson(t.exceed + 1, t.defined + 1, config.level).ok()
                    } else {
                        None
                    },
                }
            })
        })
        .collect();

    let globals = kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| {
            let obs: Vec<f64> = observed_taus[k].iter().flatten().copied().collect();
            let means = &sample_means[k];
            NullGlobal {
                kind,
                observed_mean: (!obs.is_empty()).then(|| obs.iter().sum::<f64>() / obs.len() as f64),
                null_mean: (!means.is_empty()).then(|| means.iter().sum::<f64>() / means.len() as f64),
                null_mean_ci: bootstrap_mean_ci(
                    means,
                    config.global_bootstrap_n,
                    config.level,
                    config.seed,
                    k as u64,
                ),
            }
        })
        .collect();

    let n_band = n.min(config.band_samples);
    let bands = band_values
        .into_iter()
        .map(|((k, p, key), nonzero)| {
            let mut all = vec![0.0; n_band - nonzero.len()];
            all.extend(nonzero);
            all.sort_by(f64::total_cmp);
            NullBand {
                kind: kinds[k],
                period_label: labels[p].clone(),
                key,
                quantiles: BAND_QUANTILES.map(|q| quantile_sorted(&all, q)),
            }
        })
        .collect();

    Ok(NullSummary {
        n_samples: n,
        stop_reason,
        comparisons,
        globals,
        bands,
    })
}

/// Streams above this offset are reserved for bootstrap draws, never samples.
const BOOTSTRAP_STREAM_BASE: u64 = 1 << 62;

fn bootstrap_mean_ci(values: &[f64], n_resamples: usize, level: f64, seed: u64, slot: u64) -> Option<(f64, f64)> {
    if values.is_empty() || n_resamples == 0 {
        return None;
    }
    let mut rng = stream_rng(seed, BOOTSTRAP_STREAM_BASE + slot);
    let means: Vec<f64> = (0..n_resamples)
        .map(|_| {
            let sum: f64 = (0..values.len())
                .map(|_| values[rng.gen_range(0..values.len())])
                .sum();
            sum / values.len() as f64
        })
        .collect();
    percentile_interval(&means, level)
}
