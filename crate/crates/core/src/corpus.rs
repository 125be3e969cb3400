//! Paper records, the period partition, and corpus ingestion.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TkgError};
use crate::taxonomy::{CategoryCode, Partition, Taxonomy};

const DEFAULT_PERIODS: &str = include_str!("../data/periods.json");

/// One publication, reduced to its (measure, data type, research question) triplet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PaperRecord {
    pub paper_id: String,
    pub year: i32,
    pub measure: CategoryCode,
    pub data_type: CategoryCode,
    pub rq_type: CategoryCode,
}

impl PaperRecord {
    /// Builds a record, checking each code sits in its own partition.
    pub fn new(
        paper_id: impl Into<String>,
        year: i32,
        measure: CategoryCode,
        data_type: CategoryCode,
        rq_type: CategoryCode,
    ) -> Result<Self> {
        for (code, partition) in [
            (measure, Partition::Measure),
            (data_type, Partition::DataType),
            (rq_type, Partition::RqType),
        ] {
            if code.partition != partition {
                return Err(TkgError::InvalidArgument(format!(
                    "code {code} given as {partition}"
                )));
            }
        }
        Ok(PaperRecord {
            paper_id: paper_id.into(),
            year,
            measure,
            data_type,
            rq_type,
        })
    }

    pub fn triplet(&self) -> (CategoryCode, CategoryCode, CategoryCode) {
        (self.measure, self.data_type, self.rq_type)
    }

    pub fn codes(&self) -> [CategoryCode; 3] {
        [self.measure, self.data_type, self.rq_type]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub label: String,
    pub year_min: i32,
    pub year_max: i32,
}

impl Period {
    pub fn contains(&self, year: i32) -> bool {
        (self.year_min..=self.year_max).contains(&year)
    }
}

/// Ordered, contiguous, non-overlapping year intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodSpec {
    periods: Vec<Period>,
}

impl PeriodSpec {
    pub fn new(periods: Vec<Period>) -> Result<Self> {
        if periods.is_empty() {
            return Err(TkgError::InvalidPeriods("no periods".into()));
        }
        let mut labels = HashSet::new();
        for (i, p) in periods.iter().enumerate() {
            if p.year_min > p.year_max {
                return Err(TkgError::InvalidPeriods(format!(
                    "period {} has year_min > year_max",
                    p.label
                )));
            }
            if !labels.insert(p.label.as_str()) {
                return Err(TkgError::InvalidPeriods(format!(
                    "duplicate label {}",
                    p.label
                )));
            }
            if i > 0 {
                let prev = &periods[i - 1];
                if p.year_min != prev.year_max + 1 {
                    return Err(TkgError::InvalidPeriods(format!(
                        "period {} must start the year after {} ends",
                        p.label, prev.label
                    )));
                }
            }
        }
        Ok(PeriodSpec { periods })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let periods: Vec<Period> =
            serde_json::from_str(s).map_err(|e| TkgError::InvalidPeriods(e.to_string()))?;
        PeriodSpec::new(periods)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| TkgError::io(path, e))?;
        PeriodSpec::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.periods).expect("periods serialize")
    }

    pub fn periods(&self) -> &[Period] {
        &self.periods
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }

    pub fn year_min(&self) -> i32 {
        self.periods[0].year_min
    }

    pub fn year_max(&self) -> i32 {
        self.periods[self.periods.len() - 1].year_max
    }

    /// Index of the period containing `year`.
    pub fn period_of(&self, year: i32) -> Option<usize> {
        if year < self.year_min() || year > self.year_max() {
            return None;
        }
        self.periods.iter().position(|p| p.contains(year))
    }
}

impl Default for PeriodSpec {
    /// T1 1976–2000, then five-year periods up to T6 2021–2025.
    fn default() -> Self {
        PeriodSpec::from_json_str(DEFAULT_PERIODS).expect("bundled periods are valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Csv,
    Json,
}

impl InputFormat {
    /// Guesses the format from a file extension; anything but `.json` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => InputFormat::Json,
            _ => InputFormat::Csv,
        }
    }
}

/// A validated set of records together with the taxonomy and periods they refer to.
#[derive(Debug, Clone)]
pub struct Corpus {
    records: Vec<PaperRecord>,
    taxonomy: Taxonomy,
    period_spec: PeriodSpec,
}

/// The records of one period, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodBucket {
    pub label: String,
    pub records: Vec<PaperRecord>,
}

impl Corpus {
    pub fn new(records: Vec<PaperRecord>, taxonomy: Taxonomy, period_spec: PeriodSpec) -> Result<Self> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if !seen.insert(r.paper_id.as_str()) {
                return Err(TkgError::DuplicatePaperId(r.paper_id.clone()));
            }
            for code in r.codes() {
                if !taxonomy.contains(code) {
                    return Err(TkgError::UnknownCategory(code.to_string()));
                }
            }
            if period_spec.period_of(r.year).is_none() {
                return Err(TkgError::YearOutOfRange {
                    paper_id: r.paper_id.clone(),
                    year: r.year,
                    min: period_spec.year_min(),
                    max: period_spec.year_max(),
                });
            }
        }
        Ok(Corpus {
            records,
            taxonomy,
            period_spec,
        })
    }

    pub fn records(&self) -> &[PaperRecord] {
        &self.records
    }

    pub fn taxonomy(&self) -> &Taxonomy {
        &self.taxonomy
    }

    pub fn period_spec(&self) -> &PeriodSpec {
        &self.period_spec
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

/// Splits the corpus into one bucket per period, including empty ones.
pub fn partition_by_period(corpus: &Corpus) -> Vec<PeriodBucket> {
    let spec = corpus.period_spec();
    let mut buckets: Vec<PeriodBucket> = spec
        .periods()
        .iter()
        .map(|p| PeriodBucket {
            label: p.label.clone(),
            records: Vec::new(),
        })
        .collect();
    for r in corpus.records() {
        let idx = spec
            .period_of(r.year)
            .expect("corpus records are validated against the period spec");
        buckets[idx].records.push(r.clone());
    }
    buckets
}

#[derive(Debug, Deserialize)]
struct JsonRecord {
    paper_id: String,
    year: i32,
    measure: String,
    data_type: String,
    rq_type: String,
}

const CSV_FIELDS: [&str; 5] = ["paper_id", "year", "measure", "data_type", "rq_type"];

/// Parses and validates a corpus from a CSV or JSON byte stream.
pub fn load_corpus<R: Read>(
    source: R,
    format: InputFormat,
    taxonomy: Taxonomy,
    period_spec: PeriodSpec,
) -> Result<Corpus> {
    let records = match format {
        InputFormat::Csv => read_csv_records(source, &taxonomy)?,
        InputFormat::Json => read_json_records(source, &taxonomy)?,
    };
    Corpus::new(records, taxonomy, period_spec)
}

pub fn load_corpus_file(
    path: &Path,
    taxonomy: Taxonomy,
    period_spec: PeriodSpec,
) -> Result<Corpus> {
    let file = std::fs::File::open(path).map_err(|e| TkgError::io(path, e))?;
    load_corpus(
        std::io::BufReader::new(file),
        InputFormat::from_path(path),
        taxonomy,
        period_spec,
    )
}

fn resolve_in(
    taxonomy: &Taxonomy,
    raw: &str,
    partition: Partition,
    line: u64,
    field: &str,
) -> Result<CategoryCode> {
    let code = taxonomy.resolve(raw).map_err(|e| TkgError::MalformedRow {
        line,
        field: field.to_string(),
        message: e.to_string(),
    })?;
    if code.partition != partition {
        return Err(TkgError::MalformedRow {
            line,
            field: field.to_string(),
            message: format!("code {code} is not a {partition} code"),
        });
    }
    Ok(code)
}

fn read_csv_records<R: Read>(source: R, taxonomy: &Taxonomy) -> Result<Vec<PaperRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader
        .headers()
        .map_err(|e| TkgError::Malformed(format!("header: {e}")))?
        .clone();
    let mut columns = [0usize; 5];
    for (slot, name) in columns.iter_mut().zip(CSV_FIELDS) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TkgError::MalformedRow {
                line: 1,
                field: name.to_string(),
                message: "missing column in header".into(),
            })?;
    }

    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            TkgError::MalformedRow {
                line,
                field: "*".into(),
                message: e.to_string(),
            }
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| -> Result<&str> {
            row.get(columns[i]).ok_or_else(|| TkgError::MalformedRow {
                line,
                field: CSV_FIELDS[i].to_string(),
                message: "missing value".into(),
            })
        };
        let paper_id = field(0)?;
        if paper_id.is_empty() {
            return Err(TkgError::MalformedRow {
                line,
                field: "paper_id".into(),
                message: "empty paper_id".into(),
            });
        }
        let year_raw = field(1)?;
        let year: i32 = year_raw.parse().map_err(|_| TkgError::MalformedRow {
            line,
            field: "year".into(),
            message: format!("`{year_raw}` is not an integer year"),
        })?;
        let measure = resolve_in(taxonomy, field(2)?, Partition::Measure, line, "measure")?;
        let data_type = resolve_in(taxonomy, field(3)?, Partition::DataType, line, "data_type")?;
        let rq_type = resolve_in(taxonomy, field(4)?, Partition::RqType, line, "rq_type")?;
        out.push(PaperRecord {
            paper_id: paper_id.to_string(),
            year,
            measure,
            data_type,
            rq_type,
        });
    }
    Ok(out)
}

fn read_json_records<R: Read>(source: R, taxonomy: &Taxonomy) -> Result<Vec<PaperRecord>> {
    let raw: Vec<JsonRecord> = serde_json::from_reader(source).map_err(|e| TkgError::MalformedRow {
        line: e.line() as u64,
        field: "*".into(),
        message: e.to_string(),
    })?;
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| {
            // JSON rows are numbered by array position.
            let line = i as u64 + 1;
            Ok(PaperRecord {
                measure: resolve_in(taxonomy, &r.measure, Partition::Measure, line, "measure")?,
                data_type: resolve_in(taxonomy, &r.data_type, Partition::DataType, line, "data_type")?,
                rq_type: resolve_in(taxonomy, &r.rq_type, Partition::RqType, line, "rq_type")?,
                paper_id: r.paper_id,
                year: r.year,
            })
        })
        .collect()
}

/// Writes records in the corpus CSV schema.
pub fn write_corpus_csv<W: std::io::Write>(records: &[PaperRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| TkgError::Malformed(e.to_string());
    w.write_record(CSV_FIELDS).map_err(err)?;
    for r in records {
        w.write_record([
            r.paper_id.clone(),
            r.year.to_string(),
            r.measure.to_string(),
            r.data_type.to_string(),
            r.rq_type.to_string(),
        ])
        .map_err(err)?;
    }
    w.flush()
        .map_err(|e| TkgError::Malformed(e.to_string()))?;
    Ok(())
}
