//! Triangle dispersion and time-decayed appearance weights.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use crate::corpus::PaperRecord;
use crate::error::{Result, TkgError};
use crate::graph::{ComponentKey, ComponentKind, PeriodGraph, TriangleTable};
use crate::taxonomy::CategoryCode;

/// `k_x / (2 T_x)` with `T_x` the number of distinct triplets containing `x`.
///
/// Equals 1 exactly when no two of those triangles share an edge at `x`.
pub fn triangle_dispersion(graph: &PeriodGraph, table: &TriangleTable, x: CategoryCode) -> Result<f64> {
    let t = table.unique_triplets_at(x);
    if t == 0 {
        return Err(TkgError::InvalidArgument(format!(
            "{x} is in no triangle of period {}",
            table.period_label
        )));
    }
    let k = graph.neighbors(x).count();
    Ok(k as f64 / (2 * t) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub degree: usize,
    pub n_triplets: usize,
    pub eta: f64,
}

/// Dispersion of every node of a period graph.
pub fn dispersion_table(graph: &PeriodGraph, table: &TriangleTable) -> BTreeMap<CategoryCode, Dispersion> {
    let mut triplets: BTreeMap<CategoryCode, usize> = BTreeMap::new();
    for &(m, d, r) in table.triangles.keys() {
        for c in [m, d, r] {
            *triplets.entry(c).or_default() += 1;
        }
    }
    triplets
        .into_iter()
        .map(|(x, t)| {
            let k = graph.neighbors(x).count();
            (
                x,
                Dispersion {
                    degree: k,
                    n_triplets: t,
                    eta: k as f64 / (2 * t) as f64,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountMode {
    /// `c_t = 1` in every year the component appears.
    Binary,
    /// `c_t` = number of papers containing the component in year `t`.
    #[default]
    PaperCounts,
}

impl CountMode {
    pub fn name(self) -> &'static str {
        match self {
            CountMode::Binary => "binary",
            CountMode::PaperCounts => "counts",
        }
    }
}

impl fmt::Display for CountMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CountMode {
    type Err = TkgError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binary" => Ok(CountMode::Binary),
            "counts" => Ok(CountMode::PaperCounts),
            _ => Err(TkgError::InvalidArgument(format!(
                "decay mode must be `binary` or `counts`, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayConfig {
    /// Per-year decay rate.
    pub lambda: f64,
    pub year_min: i32,
    pub year_max: i32,
    pub count_mode: CountMode,
}

impl DecayConfig {
    /// Decay rate for a half-life in years.
    pub fn lambda_for_half_life(years: f64) -> f64 {
        std::f64::consts::LN_2 / years
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(TkgError::InvalidArgument(format!(
                "decay rate must be positive, got {}",
                self.lambda
            )));
        }
        if self.year_min > self.year_max {
            return Err(TkgError::InvalidArgument(format!(
                "year range {}-{} is empty",
                self.year_min, self.year_max
            )));
        }
        Ok(())
    }
}

impl Default for DecayConfig {
    /// Five-year half-life over 1976–2025, counting papers.
    fn default() -> Self {
        DecayConfig {
            lambda: DecayConfig::lambda_for_half_life(5.0),
            year_min: 1976,
            year_max: 2025,
            count_mode: CountMode::PaperCounts,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecaySeries {
    pub key: ComponentKey,
    /// One weight per year of the grid.
    pub values: BTreeMap<i32, f64>,
    /// Set when the component never appears; all weights are then zero.
    pub never_appears: bool,
}

impl DecaySeries {
    pub fn at(&self, year: i32) -> Option<f64> {
        self.values.get(&year).copied()
    }
}

fn yearly_counts(records: &[PaperRecord], key: &ComponentKey, config: &DecayConfig) -> Result<BTreeMap<i32, f64>> {
    let mut counts = BTreeMap::new();
    for r in records {
        if r.year < config.year_min || r.year > config.year_max {
            return Err(TkgError::YearOutOfRange {
                paper_id: r.paper_id.clone(),
                year: r.year,
                min: config.year_min,
                max: config.year_max,
            });
        }
        if key.appears_in(r) {
            *counts.entry(r.year).or_insert(0.0) += 1.0;
        }
    }
    if config.count_mode == CountMode::Binary {
        counts.values_mut().for_each(|c| *c = 1.0);
    }
    Ok(counts)
}

/// Runs the annual recursion `w <- w e^{-lambda} + c_t` over the year grid.
fn decay_from_counts(key: ComponentKey, counts: &BTreeMap<i32, f64>, config: &DecayConfig) -> DecaySeries {
    let factor = (-config.lambda).exp();
    let mut w = 0.0;
    let values = (config.year_min..=config.year_max)
        .map(|year| {
            w = w * factor + counts.get(&year).copied().unwrap_or(0.0);
            (year, w)
        })
        .collect();
    DecaySeries {
        key,
        values,
        never_appears: counts.is_empty(),
    }
}

/// Time-decayed appearance weight of one component over the configured years.
pub fn decay_series(records: &[PaperRecord], key: ComponentKey, config: &DecayConfig) -> Result<DecaySeries> {
    config.validate()?;
    let counts = yearly_counts(records, &key, config)?;
    Ok(decay_from_counts(key, &counts, config))
}

/// Series for every component of one kind that appears in the records.
pub fn decay_all(records: &[PaperRecord], kind: ComponentKind, config: &DecayConfig) -> Result<Vec<DecaySeries>> {
    config.validate()?;
    let mut per_key: BTreeMap<ComponentKey, BTreeMap<i32, f64>> = BTreeMap::new();
    for r in records {
        if r.year < config.year_min || r.year > config.year_max {
            return Err(TkgError::YearOutOfRange {
                paper_id: r.paper_id.clone(),
                year: r.year,
                min: config.year_min,
                max: config.year_max,
            });
        }
        for key in kind.keys_of(r) {
            *per_key.entry(key).or_default().entry(r.year).or_insert(0.0) += 1.0;
        }
    }
    Ok(per_key
        .into_iter()
        .map(|(key, mut counts)| {
            if config.count_mode == CountMode::Binary {
                counts.values_mut().for_each(|c| *c = 1.0);
            }
            decay_from_counts(key, &counts, config)
        })
        .collect())
}

/// Last year a component appears, if it is followed by at least `gap`
/// inactive years inside the grid.
pub fn inactive_after(records: &[PaperRecord], key: &ComponentKey, config: &DecayConfig, gap: i32) -> Option<i32> {
    let years: BTreeSet<i32> = records
        .iter()
        .filter(|r| key.appears_in(r))
        .map(|r| r.year)
        .collect();
    let last = *years.last()?;
    (last + gap <= config.year_max).then_some(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_period_graph;
    use crate::taxonomy::CategoryCode as C;

    fn rec(id: &str, year: i32, m: u16, d: u16, r: u16) -> PaperRecord {
        PaperRecord::new(id, year, C::measure(m), C::data_type(d), C::rq_type(r)).unwrap()
    }

    fn eta(records: &[PaperRecord], x: C) -> f64 {
        let (g, t) = build_period_graph("T", records).unwrap();
        triangle_dispersion(&g, &t, x).unwrap()
    }

    #[test]
    fn single_triangle() {
        assert_eq!(eta(&[rec("a", 2000, 1, 1, 1)], C::measure(1)), 1.0);
    }

    #[test]
    fn shared_edge_configuration() {
        // M1-D1-R1 and M1-D1-R2 share the M1-D1 edge: k = 3, T = 2.
        let recs = [rec("a", 2000, 1, 1, 1), rec("b", 2000, 1, 1, 2)];
        assert_eq!(eta(&recs, C::measure(1)), 0.75);
    }

    #[test]
    fn edge_disjoint_configuration() {
        let recs = [rec("a", 2000, 1, 1, 1), rec("b", 2000, 1, 2, 2)];
        assert_eq!(eta(&recs, C::measure(1)), 1.0);
    }

    #[test]
    fn repeated_triplet_counts_once() {
        let recs = [rec("a", 2000, 1, 1, 1), rec("b", 2000, 1, 1, 1)];
        assert_eq!(eta(&recs, C::measure(1)), 1.0);
    }

    #[test]
    fn absent_node_is_an_error() {
        let (g, t) = build_period_graph("T", &[rec("a", 2000, 1, 1, 1)]).unwrap();
        assert!(triangle_dispersion(&g, &t, C::measure(2)).is_err());
        let table = dispersion_table(&g, &t);
        assert_eq!(table.len(), 3);
        assert!(table.values().all(|d| d.eta == 1.0 && d.degree == 2 && d.n_triplets == 1));
    }

    #[test]
    fn half_life() {
        let config = DecayConfig::default();
        let key = ComponentKey::Node(C::measure(1));
        let s = decay_series(&[rec("a", 1990, 1, 1, 1)], key, &config).unwrap();
        assert_eq!(s.at(1989), Some(0.0));
        assert_eq!(s.at(1990), Some(1.0));
        assert!((s.at(1995).unwrap() - 0.5).abs() < 1e-12);
        assert!((s.at(2000).unwrap() - 0.25).abs() < 1e-12);
        assert_eq!(inactive_after(&[rec("a", 1990, 1, 1, 1)], &key, &config, 5), Some(1990));
        assert_eq!(inactive_after(&[rec("a", 2024, 1, 1, 1)], &key, &config, 5), None);
    }

    #[test]
    fn geometric_limit() {
        let config = DecayConfig {
            year_min: 1900,
            year_max: 1999,
            ..DecayConfig::default()
        };
        let recs: Vec<_> = (1900..2000).map(|y| rec(&y.to_string(), y, 1, 1, 1)).collect();
        let s = decay_series(&recs, ComponentKey::Node(C::measure(1)), &config).unwrap();
        let limit = 1.0 / (1.0 - (-config.lambda).exp());
        // After 100 years the remaining gap is limit * e^{-100 lambda}, below 1e-5.
        let got = s.at(1999).unwrap();
        let expected = (1.0 - (-100.0 * config.lambda).exp()) * limit;
        assert!((got - expected).abs() < 1e-9);
        assert!(got < limit);
    }

    #[test]
    fn first_year_counts_with_multiplicity() {
        let config = DecayConfig::default();
        let recs = [rec("a", 1976, 1, 1, 1), rec("b", 1976, 1, 2, 2), rec("c", 1976, 1, 3, 3)];
        let key = ComponentKey::Node(C::measure(1));
        assert_eq!(decay_series(&recs, key, &config).unwrap().at(1976), Some(3.0));
        let binary = DecayConfig {
            count_mode: CountMode::Binary,
            ..config
        };
        assert_eq!(decay_series(&recs, key, &binary).unwrap().at(1976), Some(1.0));
    }

    #[test]
    fn never_appearing_component() {
        let s = decay_series(
            &[rec("a", 1990, 1, 1, 1)],
            ComponentKey::Node(C::measure(5)),
            &DecayConfig::default(),
        )
        .unwrap();
        assert!(s.never_appears);
        assert!(s.values.values().all(|&v| v == 0.0));
        assert_eq!(s.values.len(), 50);
    }

    #[test]
    fn config_validation() {
        let bad = DecayConfig {
            lambda: 0.0,
            ..DecayConfig::default()
        };
        assert!(decay_series(&[], ComponentKey::Node(C::measure(1)), &bad).is_err());
        let out_of_range = [rec("a", 1970, 1, 1, 1)];
        assert!(decay_series(&out_of_range, ComponentKey::Node(C::measure(1)), &DecayConfig::default()).is_err());
    }

    #[test]
    fn decay_all_matches_single_series() {
        let recs = [
            rec("a", 1980, 1, 1, 1),
            rec("b", 1985, 1, 2, 1),
            rec("c", 1985, 2, 2, 1),
            rec("d", 2001, 1, 1, 3),
        ];
        let config = DecayConfig::default();
        for kind in [ComponentKind::Node, ComponentKind::Pair, ComponentKind::Triangle] {
            for s in decay_all(&recs, kind, &config).unwrap() {
                assert_eq!(s, decay_series(&recs, s.key, &config).unwrap());
            }
        }
    }
}
