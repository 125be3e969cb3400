//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p tkg-core --test acceptance -- --nocapture`.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, ContinuousCDF};

use tkg_core::agreement::cohens_kappa;
use tkg_core::centrality::{betweenness, capacitance_node_unweighted, capacitance_node_weighted};
use tkg_core::commands::{cmd_analyze, cmd_null, RunConfig};
use tkg_core::corpus::{write_corpus_csv, PaperRecord, PeriodSpec};
use tkg_core::dynamics::{decay_series, triangle_dispersion, CountMode, DecayConfig};
use tkg_core::graph::{build_period_graph, edge_key, ComponentKey, PeriodGraph};
use tkg_core::null_model::{clopper_pearson, generate_null_corpus, run_null_analysis, NullConfig, StopReason};
use tkg_core::synthetic::{period_counts, uniform_corpus, CORPUS_PERIOD_COUNTS};
use tkg_core::taxonomy::{CategoryCode as C, Taxonomy};
use tkg_core::temporal::{kendall_tau_b, CommonSet, StatKind};

fn rec(id: &str, year: i32, m: u16, d: u16, r: u16) -> PaperRecord {
    PaperRecord::new(id, year, C::measure(m), C::data_type(d), C::rq_type(r)).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn criterion_1() -> Result<(), String> {
    let records = [rec("a", 2001, 1, 1, 1), rec("b", 2001, 1, 2, 1)];
    let (g, _) = build_period_graph("T2", &records).map_err(|e| e.to_string())?;
    let got: BTreeMap<_, _> = g.edges().collect();
    let want = BTreeMap::from([
        (edge_key(C::measure(1), C::data_type(1)), 1),
        (edge_key(C::measure(1), C::data_type(2)), 1),
        (edge_key(C::data_type(1), C::rq_type(1)), 1),
        (edge_key(C::data_type(2), C::rq_type(1)), 1),
        (edge_key(C::rq_type(1), C::measure(1)), 2),
    ]);
    if got != want {
        return Err(format!("edges {got:?}"));
    }
    Ok(())
}

fn compare_oracle(g: &PeriodGraph, weighted: bool) -> Result<(), String> {
    let ours = betweenness(g, weighted);
    let oracle = if weighted {
        common::weighted_betweenness(g)
    } else {
        common::unweighted_betweenness(g)
    };
    for (x, v) in &oracle.nodes {
        if !close(ours.nodes[x], *v, 1e-9) {
            return Err(format!("node {x}: {} vs oracle {v} (weighted={weighted})", ours.nodes[x]));
        }
    }
    for (e, v) in &oracle.edges {
        if !close(ours.edges[e], *v, 1e-9) {
            return Err(format!("edge {e:?}: {} vs oracle {v} (weighted={weighted})", ours.edges[e]));
        }
    }
    Ok(())
}

fn criterion_2() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let n = rng.gen_range(3..=12);
        let density = rng.gen_range(0.25..0.8);
        let g = common::random_tripartite(&mut rng, n, 1, density);
        compare_oracle(&g, false)?;
    }
    for _ in 0..100 {
        let n = rng.gen_range(3..=8);
        let density = rng.gen_range(0.3..0.9);
        let g = common::random_tripartite(&mut rng, n, 5, density);
        compare_oracle(&g, true)?;
        compare_oracle(&g, false)?;
    }
    Ok(())
}

fn criterion_3() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 4..=30u16 {
        let center = C::measure(1);
        let leaves = n - 1;
        let edges: Vec<_> = (1..=leaves)
            .map(|i| {
                let leaf = if i % 2 == 0 { C::data_type(i) } else { C::rq_type(i) };
                (center, leaf, rng.gen_range(1..=9))
            })
            .collect();
        let g = PeriodGraph::from_edges("S", edges).map_err(|e| e.to_string())?;
        let unw = capacitance_node_unweighted(&g).map_err(|e| e.to_string())?[&center];
        let w = capacitance_node_weighted(&g).map_err(|e| e.to_string())?[&center];
        if !close(unw, 1.0, 1e-12) || !close(w, 1.0, 1e-12) {
            return Err(format!("n={n}: {unw}, {w}"));
        }
    }
    Ok(())
}

fn criterion_4() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..500 {
        let n = rng.gen_range(2..=50);
        let levels = rng.gen_range(2..=8);
        let a: BTreeMap<usize, f64> = (0..n).map(|k| (k, rng.gen_range(1..=levels) as f64)).collect();
        let b: BTreeMap<usize, f64> = (0..n).map(|k| (k, rng.gen_range(1..=levels) as f64)).collect();
        let x: Vec<f64> = a.values().copied().collect();
        let y: Vec<f64> = b.values().copied().collect();
        let want = common::tau_b_oracle(&x, &y);
        let got = kendall_tau_b(&a, &b, CommonSet::Intersection);
        if got != want {
            return Err(format!("case {i}: {got:?} vs oracle {want:?}"));
        }
        if want.is_some() {
            let reversed: BTreeMap<usize, f64> = a.iter().map(|(k, v)| (*k, 100.0 - v)).collect();
            if kendall_tau_b(&a, &a, CommonSet::Intersection) != Some(1.0) {
                return Err(format!("case {i}: identical ranking is not +1"));
            }
            if kendall_tau_b(&a, &reversed, CommonSet::Intersection) != Some(-1.0) {
                return Err(format!("case {i}: reversed ranking is not -1"));
            }
        }
    }
    Ok(())
}

fn criterion_5() -> Result<(), String> {
    let config = DecayConfig::default();
    let key = ComponentKey::Node(C::measure(1));
    for year in [1976, 1990, 2020] {
        let s = decay_series(&[rec("a", year, 1, 1, 1)], key, &config).map_err(|e| e.to_string())?;
        let (w0, w5) = (s.at(year).unwrap(), s.at(year + 5).unwrap());
        if !close(w5, 0.5 * w0, 1e-12) {
            return Err(format!("appearance {year}: {w0} -> {w5}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for pattern in 0..100 {
        let mut records = Vec::new();
        for year in config.year_min..=config.year_max {
            if rng.gen_bool(0.2) {
                for k in 0..rng.gen_range(1..=3) {
                    records.push(rec(&format!("{year}-{k}"), year, 1, 1 + k, 1));
                }
            }
        }
        for mode in [CountMode::Binary, CountMode::PaperCounts] {
            let cfg = DecayConfig { count_mode: mode, ..config };
            let s = decay_series(&records, key, &cfg).map_err(|e| e.to_string())?;
            let mut counts: BTreeMap<i32, f64> = BTreeMap::new();
            for r in &records {
                *counts.entry(r.year).or_default() += 1.0;
            }
            if mode == CountMode::Binary {
                counts.values_mut().for_each(|c| *c = 1.0);
            }
            for (&year, &w) in &s.values {
                let want = common::decay_closed_form(&counts, year, cfg.lambda);
                if (w - want).abs() > 1e-12 * want.max(f64::MIN_POSITIVE) && !(w == 0.0 && want == 0.0) {
                    return Err(format!("pattern {pattern}, {year}: {w} vs {want}"));
                }
            }
        }
    }
    Ok(())
}

fn criterion_6() -> Result<(), String> {
    let eta = |records: &[PaperRecord], x: C| -> f64 {
        let (g, t) = build_period_graph("T", records).unwrap();
        triangle_dispersion(&g, &t, x).unwrap()
    };
    let m1 = C::measure(1);
    let cases = [
        (vec![rec("a", 2000, 1, 1, 1)], 1.0),
        (vec![rec("a", 2000, 1, 1, 1), rec("b", 2000, 1, 2, 2)], 1.0),
        (vec![rec("a", 2000, 1, 1, 1), rec("b", 2000, 1, 1, 2)], 0.75),
    ];
    for (records, want) in &cases {
        let got = eta(records, m1);
        if got != *want {
            return Err(format!("{records:?}: {got} vs {want}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..1000 {
        let n = rng.gen_range(1..=25);
        let records = common::random_records(&mut rng, n, (4, 5, 4), (2000, 2000));
        let (g, t) = build_period_graph("T", &records).unwrap();
        for x in g.nodes() {
            let got = triangle_dispersion(&g, &t, x).unwrap();
            let want = common::dispersion_oracle(&records, x).unwrap();
            if got > 1.0 || got != want {
                return Err(format!("fixture {i}, {x}: {got} (oracle {want})"));
            }
        }
    }
    Ok(())
}

fn criterion_7() -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let records: Vec<PaperRecord> = (0..90)
        .map(|i| {
            let year = [1990, 2003, 2004, 2009, 2014, 2019, 2023][i % 7];
            rec(
                &format!("p{i}"),
                year,
                rng.gen_range(1..=4),
                rng.gen_range(1..=5),
                rng.gen_range(1..=4),
            )
        })
        .collect();
    let observed = tkg_core::corpus::Corpus::new(records, Taxonomy::default(), PeriodSpec::default())
        .map_err(|e| e.to_string())?;
    let want = period_counts(&observed);
    let excluded = BTreeSet::from([C::data_type(8)]);
    for i in 0..1000 {
        let null = generate_null_corpus(&observed, &excluded, 70, i).map_err(|e| e.to_string())?;
        if period_counts(&null) != want {
            return Err(format!("null sample {i} changed period counts"));
        }
    }

    let summary = run_null_analysis(
        &observed,
        &NullConfig {
            ci_width_threshold: 1.0,
            seed: 71,
            ..NullConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    if summary.n_samples != 1000 || summary.stop_reason != StopReason::CiWidth {
        return Err(format!("threshold 1.0 stopped at {} ({:?})", summary.n_samples, summary.stop_reason));
    }

    for t in 1..=500u64 {
        let (lo, hi) = clopper_pearson(0, t, 0.95).map_err(|e| e.to_string())?;
        let want = 1.0 - 0.025f64.powf(1.0 / t as f64);
        if lo != 0.0 || !close(hi, want, 1e-9) {
            return Err(format!("zero successes of {t}: ({lo}, {hi}) vs (0, {want})"));
        }
    }
    for t in [1u64, 2, 5, 10, 37, 100, 1000, 25_000] {
        for s in [0, 1, t / 3, t / 2, t.saturating_sub(1), t] {
            let (lo, hi) = clopper_pearson(s, t, 0.95).map_err(|e| e.to_string())?;
            let (s_f, t_f) = (s as f64, t as f64);
            let want_lo = if s == 0 {
                0.0
            } else {
                Beta::new(s_f, t_f - s_f + 1.0).unwrap().inverse_cdf(0.025)
            };
            let want_hi = if s == t {
                1.0
            } else {
                Beta::new(s_f + 1.0, t_f - s_f).unwrap().inverse_cdf(0.975)
            };
            if !close(lo, want_lo, 1e-6) || !close(hi, want_hi, 1e-6) {
                return Err(format!("{s}/{t}: ({lo}, {hi}) vs ({want_lo}, {want_hi})"));
            }
        }
    }
    Ok(())
}

fn criterion_8() -> Result<(), String> {
    let taxonomy = Taxonomy::default();
    let excluded = BTreeSet::from([C::data_type(8)]);
    let corpus = uniform_corpus(&CORPUS_PERIOD_COUNTS, &taxonomy, &PeriodSpec::default(), &excluded, 8)
        .map_err(|e| e.to_string())?;
    if corpus.len() != 617 {
        return Err(format!("fixture has {} papers", corpus.len()));
    }
    let summary = run_null_analysis(
        &corpus,
        &NullConfig {
            targets: StatKind::COUNTS.to_vec(),
            min_samples: 1000,
            max_samples: 1000,
            seed: 80,
            ..NullConfig::default()
        },
    )
    .map_err(|e| e.to_string())?;
    let mean = |k| summary.global(k).and_then(|g| g.null_mean).unwrap_or(f64::NAN);
    let (node, pair, tri) = (mean(StatKind::NodeCount), mean(StatKind::PairCount), mean(StatKind::TriangleCount));
    if summary.n_samples != 1000 || !(node > pair && pair > tri) {
        return Err(format!("n={} <tau>: node {node}, pair {pair}, triangle {tri}", summary.n_samples));
    }
    Ok(())
}

fn tree_bytes(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn criterion_9() -> Result<(), String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let taxonomy = Taxonomy::default();
    let corpus = uniform_corpus(
        &[8, 10, 14, 20, 24, 28],
        &taxonomy,
        &PeriodSpec::default(),
        &BTreeSet::from([C::data_type(8)]),
        9,
    )
    .map_err(|e| e.to_string())?;
    let corpus_path = tmp.path().join("corpus.csv");
    write_corpus_csv(corpus.records(), std::fs::File::create(&corpus_path).unwrap()).map_err(|e| e.to_string())?;

    let run = |name: &str, threads: usize| -> Result<BTreeMap<String, Vec<u8>>, String> {
        let config = RunConfig {
            corpus_path: corpus_path.clone(),
            output_dir: tmp.path().join(name),
            seed: 99,
            bootstrap_n: 200,
            null_max_samples: 400,
            null_min_samples: 200,
            ..RunConfig::default()
        };
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| -> tkg_core::error::Result<()> {
            cmd_analyze(&config)?;
            cmd_null(&config)?;
            Ok(())
        })
        .map_err(|e| e.to_string())?;
        Ok(tree_bytes(&config.output_dir))
    };
    let a = run("a", 1)?;
    let b = run("b", 4)?;
    if a.len() < 10 {
        return Err(format!("only {} output files", a.len()));
    }
    if a != b {
        let differing: Vec<_> = a.keys().filter(|k| a.get(*k) != b.get(*k)).collect();
        return Err(format!("outputs differ: {differing:?}"));
    }
    Ok(())
}

fn criterion_10() -> Result<(), String> {
    let labels: Vec<C> = [1, 2, 3, 1, 2, 2, 4].iter().map(|&i| C::measure(i)).collect();
    let k = cohens_kappa(&labels, &labels).map_err(|e| e.to_string())?;
    if k != 1.0 {
        return Err(format!("identical: {k}"));
    }
    let a = [1, 1, 2, 2].map(C::rq_type);
    let b = [2, 2, 1, 1].map(C::rq_type);
    let k = cohens_kappa(&a, &b).map_err(|e| e.to_string())?;
    if k != -1.0 {
        return Err(format!("anti-aligned: {k}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let a: Vec<C> = (0..20_000).map(|_| C::data_type(rng.gen_range(1..=5))).collect();
    let b: Vec<C> = (0..20_000).map(|_| C::data_type(rng.gen_range(1..=5))).collect();
    let k = cohens_kappa(&a, &b).map_err(|e| e.to_string())?;
    if k.abs() > 0.05 {
        return Err(format!("independent: {k}"));
    }
    Ok(())
}

type Criterion = (&'static str, Duration, fn() -> Result<(), String>);

#[test]
fn acceptance() {
    let criteria: [Criterion; 10] = [
        ("1 edge construction worked example", Duration::from_secs(1), criterion_1),
        ("2 betweenness oracle equivalence", Duration::from_secs(60), criterion_2),
        ("3 star capacitance identity", Duration::from_secs(1), criterion_3),
        ("4 Kendall tau-b oracle", Duration::from_secs(5), criterion_4),
        ("5 decay half-life and closed form", Duration::from_secs(1), criterion_5),
        ("6 triangle dispersion", Duration::from_secs(5), criterion_6),
        ("7 null-model contract", Duration::from_secs(120), criterion_7),
        ("8 null size effect", Duration::from_secs(600), criterion_8),
        ("9 determinism of analyze + null", Duration::from_secs(600), criterion_9),
        ("10 Cohen's kappa", Duration::from_secs(5), criterion_10),
    ];
    let mut failed = Vec::new();
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(()) if elapsed > budget => Err(format!("took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match &outcome {
            Ok(()) => println!("PASS  criterion {name} ({elapsed:.2?})"),
            Err(why) => {
                println!("FAIL  criterion {name} ({elapsed:.2?}): {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
