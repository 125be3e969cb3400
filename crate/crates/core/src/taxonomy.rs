//! Category codes and the three disjoint category sets.
//!
//! A code such as `M1`, `D13` or `R4` names one category inside one of the
//! three partitions (measures, data types, research-question types). Codes
//! order by `(partition, index)`, which is the canonical order used for edge
//! keys and every exported table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TkgError};

const DEFAULT_TAXONOMY: &str = include_str!("../data/taxonomy.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Partition {
    Measure,
    DataType,
    RqType,
}

impl Partition {
    pub const ALL: [Partition; 3] = [Partition::Measure, Partition::DataType, Partition::RqType];

    pub fn prefix(self) -> char {
        match self {
            Partition::Measure => 'M',
            Partition::DataType => 'D',
            Partition::RqType => 'R',
        }
    }

    pub fn from_prefix(c: char) -> Option<Self> {
        match c {
            'M' => Some(Partition::Measure),
            'D' => Some(Partition::DataType),
            'R' => Some(Partition::RqType),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Partition::Measure => "measure",
            Partition::DataType => "data_type",
            Partition::RqType => "rq_type",
        }
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One category inside one partition, e.g. `D13`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CategoryCode {
    pub partition: Partition,
    pub index: u16,
}

impl CategoryCode {
    pub fn new(partition: Partition, index: u16) -> Result<Self> {
        if index == 0 {
            return Err(TkgError::UnknownCategory(format!(
                "{}{}",
                partition.prefix(),
                index
            )));
        }
        Ok(CategoryCode { partition, index })
    }

    pub fn measure(index: u16) -> Self {
        CategoryCode {
            partition: Partition::Measure,
            index,
        }
    }

    pub fn data_type(index: u16) -> Self {
        CategoryCode {
            partition: Partition::DataType,
            index,
        }
    }

    pub fn rq_type(index: u16) -> Self {
        CategoryCode {
            partition: Partition::RqType,
            index,
        }
    }
}

impl fmt::Display for CategoryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.partition.prefix(), self.index)
    }
}

impl FromStr for CategoryCode {
    type Err = TkgError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let partition = chars
            .next()
            .and_then(Partition::from_prefix)
            .ok_or_else(|| TkgError::UnknownCategory(s.to_string()))?;
        let index: u16 = chars
            .as_str()
            .parse()
            .map_err(|_| TkgError::UnknownCategory(s.to_string()))?;
        CategoryCode::new(partition, index).map_err(|_| TkgError::UnknownCategory(s.to_string()))
    }
}

impl Serialize for CategoryCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for CategoryCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TaxonomyEntry {
    code: String,
    label: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TaxonomyFile {
    measures: Vec<TaxonomyEntry>,
    data_types: Vec<TaxonomyEntry>,
    rq_types: Vec<TaxonomyEntry>,
}

/// The three category sets and their display labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Taxonomy {
    measures: Vec<CategoryCode>,
    data_types: Vec<CategoryCode>,
    rq_types: Vec<CategoryCode>,
    labels: BTreeMap<CategoryCode, String>,
}

impl Taxonomy {
    /// Builds a taxonomy from `(code, label)` lists, one per partition.
    pub fn new(
        measures: Vec<(CategoryCode, String)>,
        data_types: Vec<(CategoryCode, String)>,
        rq_types: Vec<(CategoryCode, String)>,
    ) -> Result<Self> {
        let mut labels = BTreeMap::new();
        let mut sets: [Vec<CategoryCode>; 3] = Default::default();
        for (slot, (partition, entries)) in sets.iter_mut().zip(
            Partition::ALL
                .into_iter()
                .zip([measures, data_types, rq_types]),
        ) {
            if entries.is_empty() {
                return Err(TkgError::InvalidTaxonomy(format!(
                    "partition {partition} has no codes"
                )));
            }
            for (code, label) in entries {
                if code.partition != partition {
                    return Err(TkgError::InvalidTaxonomy(format!(
                        "code {code} listed under {partition}"
                    )));
                }
                if labels.insert(code, label).is_some() {
                    return Err(TkgError::InvalidTaxonomy(format!("duplicate code {code}")));
                }
                slot.push(code);
            }
        }
        let [measures, data_types, rq_types] = sets;
        Ok(Taxonomy {
            measures,
            data_types,
            rq_types,
            labels,
        })
    }

    /// Synthetic taxonomy with `M1..Mm`, `D1..Dd`, `R1..Rr` and the codes as labels.
    pub fn with_sizes(m: u16, d: u16, r: u16) -> Result<Self> {
        let make = |partition: Partition, n: u16| -> Vec<(CategoryCode, String)> {
            (1..=n)
                .map(|i| {
                    let code = CategoryCode { partition, index: i };
                    (code, code.to_string())
                })
                .collect()
        };
        Taxonomy::new(
            make(Partition::Measure, m),
            make(Partition::DataType, d),
            make(Partition::RqType, r),
        )
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let file: TaxonomyFile =
            serde_json::from_str(s).map_err(|e| TkgError::InvalidTaxonomy(e.to_string()))?;
        let convert = |entries: Vec<TaxonomyEntry>| -> Result<Vec<(CategoryCode, String)>> {
            entries
                .into_iter()
                .map(|e| Ok((e.code.parse::<CategoryCode>()?, e.label)))
                .collect()
        };
        Taxonomy::new(
            convert(file.measures)?,
            convert(file.data_types)?,
            convert(file.rq_types)?,
        )
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TkgError::io(path, e))?;
        Taxonomy::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        let entries = |codes: &[CategoryCode]| {
            codes
                .iter()
                .map(|c| TaxonomyEntry {
                    code: c.to_string(),
                    label: self.labels[c].clone(),
                })
                .collect()
        };
        let file = TaxonomyFile {
            measures: entries(&self.measures),
            data_types: entries(&self.data_types),
            rq_types: entries(&self.rq_types),
        };
        serde_json::to_string_pretty(&file).expect("taxonomy serializes")
    }

    pub fn codes(&self, partition: Partition) -> &[CategoryCode] {
        match partition {
            Partition::Measure => &self.measures,
            Partition::DataType => &self.data_types,
            Partition::RqType => &self.rq_types,
        }
    }

    pub fn contains(&self, code: CategoryCode) -> bool {
        self.labels.contains_key(&code)
    }

    pub fn label(&self, code: CategoryCode) -> Option<&str> {
        self.labels.get(&code).map(String::as_str)
    }

    /// All codes in canonical order.
    pub fn all_codes(&self) -> impl Iterator<Item = CategoryCode> + '_ {
        self.labels.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Parses a code string and checks it belongs to this taxonomy.
    pub fn resolve(&self, s: &str) -> Result<CategoryCode> {
        let code: CategoryCode = s.parse()?;
        if self.contains(code) {
            Ok(code)
        } else {
            Err(TkgError::UnknownCategory(s.trim().to_string()))
        }
    }

    /// A copy of this taxonomy without the given codes.
    ///
    /// Fails if a partition would end up empty.
    pub fn without(&self, excluded: &BTreeSet<CategoryCode>) -> Result<Self> {
        let keep = |codes: &[CategoryCode]| -> Vec<(CategoryCode, String)> {
            codes
                .iter()
                .filter(|c| !excluded.contains(c))
                .map(|c| (*c, self.labels[c].clone()))
                .collect()
        };
        Taxonomy::new(
            keep(&self.measures),
            keep(&self.data_types),
            keep(&self.rq_types),
        )
    }
}

impl Default for Taxonomy {
    /// The 8 measures, 14 data types and 9 research-question types of the
    /// wealth-mobility case study.
    fn default() -> Self {
        Taxonomy::from_json_str(DEFAULT_TAXONOMY).expect("bundled taxonomy is valid")
    }
}
