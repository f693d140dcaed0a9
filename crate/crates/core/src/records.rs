//! Versioned CSV and JSON artifacts.
//!
//! Every CSV file starts with two comment lines
//!
//! ```text
//! # schema=samples/1.0
//! # config={"L":[20],"seed":1,...}
//! ```
//!
//! followed by a header row and comma-separated data rows with LF line
//! endings. JSON documents carry the same information as top-level
//! `schema` and `config` fields next to `data`. Readers accept any minor
//! version of a known major version and reject everything else.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::percolation::{CurvePoint, DeletionMode, ThresholdCurve};
use crate::sampler::ChainSample;
use crate::stats::{Estimate, SampleRecord};

pub const SCHEMA_MAJOR: u32 = 1;
pub const SCHEMA_MINOR: u32 = 0;

pub const THRESHOLDS_KIND: &str = "thresholds";
pub const EXTRAPOLATION_KIND: &str = "extrapolation";
pub const ORACLE_KIND: &str = "oracle_report";

/// Formats like C's `%.17g`, which round-trips every finite `f64`.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in {:e} output");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        trim_fraction(format!("{x:.*}", (16 - exp) as usize))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_fraction(mantissa.to_owned()), exp.abs())
    }
}

fn trim_fraction(mut s: String) -> String {
    if s.contains('.') {
        let keep = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(keep);
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemaVersion {
    pub major: u32,
    pub minor: u32,
}

impl SchemaVersion {
    pub const CURRENT: SchemaVersion = SchemaVersion {
        major: SCHEMA_MAJOR,
        minor: SCHEMA_MINOR,
    };
}

impl std::fmt::Display for SchemaVersion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.major, self.minor)
    }
}

/// Parses `kind/major.minor`.
fn parse_schema(tag: &str) -> Result<(String, SchemaVersion)> {
    let bad = || Error::Schema(format!("malformed schema tag {tag:?}"));
    let (kind, version) = tag.split_once('/').ok_or_else(bad)?;
    let (major, minor) = version.split_once('.').ok_or_else(bad)?;
    let version = SchemaVersion {
        major: major.parse().map_err(|_| bad())?,
        minor: minor.parse().map_err(|_| bad())?,
    };
    Ok((kind.to_owned(), version))
}

fn check_schema(tag: &str, expected_kind: &str) -> Result<SchemaVersion> {
    let (kind, version) = parse_schema(tag)?;
    if kind != expected_kind {
        return Err(Error::Schema(format!("expected a {expected_kind} file, found {kind}")));
    }
    if version.major != SCHEMA_MAJOR {
        return Err(Error::Schema(format!(
            "unsupported schema version {version} (this build reads {SCHEMA_MAJOR}.x)"
        )));
    }
    Ok(version)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preamble {
    pub kind: String,
    pub version: SchemaVersion,
    pub config: Value,
}

/// Named access to the fields of one CSV row.
pub struct Fields<'a> {
    columns: &'a HashMap<String, usize>,
    record: &'a csv::StringRecord,
    line: u64,
}

impl Fields<'_> {
    pub fn get<T: FromStr>(&self, name: &str) -> Result<T> {
        let raw = self
            .columns
            .get(name)
            .and_then(|&i| self.record.get(i))
            .ok_or_else(|| Error::Schema(format!("line {}: missing field {name}", self.line)))?;
        raw.parse()
            .map_err(|_| Error::Schema(format!("line {}: cannot parse {name}={raw:?}", self.line)))
    }
}

/// A row type with a fixed CSV layout.
pub trait CsvRecord: Sized {
    const KIND: &'static str;
    const COLUMNS: &'static [&'static str];

    fn fields(&self) -> Vec<String>;
    fn from_fields(f: &Fields<'_>) -> Result<Self>;
}

/// Per-sample row: chain position, reduced-graph measurements and chain
/// diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub seed: u64,
    pub sweep: usize,
    pub record: SampleRecord,
    pub log2_weight: i64,
    pub acceptance_rate: f64,
}

impl SampleRow {
    pub fn new(seed: u64, sample: &ChainSample, record: SampleRecord) -> Self {
        Self {
            seed,
            sweep: sample.metrics.sweep,
            record,
            log2_weight: sample.metrics.log2_weight,
            acceptance_rate: sample.metrics.acceptance_rate,
        }
    }
}

impl CsvRecord for SampleRow {
    const KIND: &'static str = "samples";
    const COLUMNS: &'static [&'static str] = &[
        "seed",
        "sweep",
        "L",
        "boundary",
        "n_sites",
        "n_domains",
        "n_edges_multi",
        "n_edges_simple",
        "n_components",
        "betti",
        "mean_degree",
        "mean_domain_size",
        "domain_size_width",
        "max_domain_size",
        "log2_weight",
        "acceptance_rate",
    ];

    fn fields(&self) -> Vec<String> {
        let r = &self.record;
        vec![
            self.seed.to_string(),
            self.sweep.to_string(),
            r.side.to_string(),
            r.boundary.to_string(),
            r.n_sites.to_string(),
            r.n_domains.to_string(),
            r.n_edges_multi.to_string(),
            r.n_edges_simple.to_string(),
            r.n_components.to_string(),
            r.betti.to_string(),
            format_float(r.mean_degree),
            format_float(r.mean_domain_size),
            format_float(r.domain_size_width),
            r.max_domain_size.to_string(),
            self.log2_weight.to_string(),
            format_float(self.acceptance_rate),
        ]
    }

    fn from_fields(f: &Fields<'_>) -> Result<Self> {
        Ok(Self {
            seed: f.get("seed")?,
            sweep: f.get("sweep")?,
            record: SampleRecord {
                side: f.get("L")?,
                boundary: f.get("boundary")?,
                n_sites: f.get("n_sites")?,
                n_domains: f.get("n_domains")?,
                n_edges_multi: f.get("n_edges_multi")?,
                n_edges_simple: f.get("n_edges_simple")?,
                n_components: f.get("n_components")?,
                betti: f.get("betti")?,
                mean_degree: f.get("mean_degree")?,
                mean_domain_size: f.get("mean_domain_size")?,
                domain_size_width: f.get("domain_size_width")?,
                max_domain_size: f.get("max_domain_size")?,
            },
            log2_weight: f.get("log2_weight")?,
            acceptance_rate: f.get("acceptance_rate")?,
        })
    }
}

impl CsvRecord for Estimate {
    const KIND: &'static str = "summary";
    const COLUMNS: &'static [&'static str] = &["L", "observable", "mean", "stderr", "n_samples"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.side.to_string(),
            self.observable.name().to_owned(),
            format_float(self.mean),
            format_float(self.stderr),
            self.n_samples.to_string(),
        ]
    }

    fn from_fields(f: &Fields<'_>) -> Result<Self> {
        Ok(Self {
            side: f.get("L")?,
            observable: f.get("observable")?,
            mean: f.get("mean")?,
            stderr: f.get("stderr")?,
            n_samples: f.get("n_samples")?,
        })
    }
}

/// One point of a threshold curve at a given side length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub mode: DeletionMode,
    #[serde(rename = "L")]
    pub side: usize,
    pub point: CurvePoint,
}

impl ThresholdRow {
    pub fn from_curve(side: usize, curve: &ThresholdCurve) -> Vec<Self> {
        curve
            .points
            .iter()
            .map(|&point| Self {
                mode: curve.mode,
                side,
                point,
            })
            .collect()
    }
}

impl CsvRecord for ThresholdRow {
    const KIND: &'static str = "threshold";
    const COLUMNS: &'static [&'static str] = &["mode", "L", "p_delete", "p_cluster", "stderr", "trials"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.mode.to_string(),
            self.side.to_string(),
            format_float(self.point.p_delete),
            format_float(self.point.p_cluster),
            format_float(self.point.stderr),
            self.point.trials.to_string(),
        ]
    }

    fn from_fields(f: &Fields<'_>) -> Result<Self> {
        Ok(Self {
            mode: f.get("mode")?,
            side: f.get("L")?,
            point: CurvePoint {
                p_delete: f.get("p_delete")?,
                p_cluster: f.get("p_cluster")?,
                stderr: f.get("stderr")?,
                trials: f.get("trials")?,
            },
        })
    }
}

/// Incremental CSV writer; the preamble and header are written on creation.
pub struct CsvSink<R: CsvRecord, W: Write> {
    inner: csv::Writer<W>,
    rows: usize,
    _row: std::marker::PhantomData<R>,
}

impl<R: CsvRecord, W: Write> CsvSink<R, W> {
    pub fn new(mut out: W, config: &Value) -> Result<Self> {
        writeln!(out, "# schema={}/{}", R::KIND, SchemaVersion::CURRENT)?;
        writeln!(out, "# config={}", serde_json::to_string(config)?)?;
        let mut inner = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        inner.write_record(R::COLUMNS)?;
        Ok(Self {
            inner,
            rows: 0,
            _row: std::marker::PhantomData,
        })
    }

    pub fn push(&mut self, row: &R) -> Result<()> {
        self.inner.write_record(row.fields())?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
    }
}

pub fn write_csv<R: CsvRecord, W: Write>(out: W, config: &Value, rows: &[R]) -> Result<W> {
    let mut sink = CsvSink::new(out, config)?;
    for r in rows {
        sink.push(r)?;
    }
    sink.finish()
}

pub fn to_csv_string<R: CsvRecord>(config: &Value, rows: &[R]) -> Result<String> {
    let bytes = write_csv(Vec::new(), config, rows)?;
    Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
}

/// Splits the comment preamble off `text` and validates it.
pub fn read_preamble<'a>(text: &'a str, expected_kind: &str) -> Result<(Preamble, &'a str)> {
    let mut rest = text;
    let mut schema = None;
    let mut config = None;
    while let Some(line) = rest.strip_prefix('#') {
        let (line, tail) = line.split_once('\n').unwrap_or((line, ""));
        rest = tail;
        let line = line.trim();
        if let Some(tag) = line.strip_prefix("schema=") {
            schema = Some(tag.to_owned());
        } else if let Some(json) = line.strip_prefix("config=") {
            config = Some(serde_json::from_str(json)?);
        }
    }
    let schema = schema.ok_or_else(|| Error::Schema("missing schema line".into()))?;
    let version = check_schema(&schema, expected_kind)?;
    let preamble = Preamble {
        kind: expected_kind.to_owned(),
        version,
        config: config.ok_or_else(|| Error::Schema("missing config line".into()))?,
    };
    Ok((preamble, rest))
}

pub fn read_csv<R: CsvRecord>(mut input: impl Read) -> Result<(Preamble, Vec<R>)> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let (preamble, body) = read_preamble(&text, R::KIND)?;
    let mut reader = csv::ReaderBuilder::new().from_reader(body.as_bytes());
    let columns: HashMap<String, usize> = reader
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_owned(), i))
        .collect();
    if let Some(missing) = R::COLUMNS.iter().find(|c| !columns.contains_key(**c)) {
        return Err(Error::Schema(format!("missing column {missing}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        rows.push(R::from_fields(&Fields {
            columns: &columns,
            record: &record,
            line,
        })?);
    }
    Ok((preamble, rows))
}

/// JSON artifact envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema: String,
    pub config: Value,
    pub data: T,
}

impl<T> Document<T> {
    pub fn new(kind: &str, config: Value, data: T) -> Self {
        Self {
            schema: format!("{kind}/{}", SchemaVersion::CURRENT),
            config,
            data,
        }
    }
}

pub fn write_json<T: Serialize>(out: impl Write, doc: &Document<T>) -> Result<()> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(input: impl Read, expected_kind: &str) -> Result<Document<T>> {
    let raw: Value = serde_json::from_reader(input)?;
    let tag = raw
        .get("schema")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Schema("missing schema field".into()))?;
    check_schema(tag, expected_kind)?;
    Ok(serde_json::from_value(raw)?)
}
