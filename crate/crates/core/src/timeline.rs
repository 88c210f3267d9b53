//! Per-client transaction event streams.
//!
//! A CSV of `(client_id, timestamp, label)` rows is ingested into one
//! [`EventTimeline`] per client. Times are stored as fractional days since
//! that client's first transaction, which keeps magnitudes near 1 for the
//! optimizer. Identical timestamps within a client are broken by input
//! order and the later event is pushed forward by `TIE_EPSILON_DAYS`, so
//! stored times are strictly increasing and waiting times never collapse
//! to zero.

use chrono::{DateTime, NaiveDate, NaiveDateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

/// Seconds per day; the conversion factor between timestamps and the
/// internal time unit.
pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// Nanoseconds per day. Timestamps are held as integer nanoseconds so
/// normalization does not lose sub-microsecond precision to f64 rounding
/// of large epoch values.
pub const NANOS_PER_DAY: f64 = 86_400.0 * 1e9;

/// Perturbation applied to the later of two identical timestamps.
pub const TIE_EPSILON_DAYS: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum TimelineError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("column {0:?} not found in CSV header")]
    MissingColumn(String),

    #[error("line {line}: unparseable timestamp {value:?}")]
    BadTimestamp { line: u64, value: String },

    #[error("line {line}: label {value:?} is not 0 or 1")]
    BadLabel { line: u64, value: String },

    #[error("line {line}: missing field {column:?}")]
    MissingField { line: u64, column: String },

    #[error("train fraction must be in (0, 1), got {0}")]
    BadFraction(f64),

    #[error("timeline for client {client_id:?} has {len} event(s); need at least 2 to split")]
    TooFewEvents { client_id: String, len: usize },

    #[error("invalid timeline for client {client_id:?}: {reason}")]
    Invalid { client_id: String, reason: String },
}

/// One parsed transaction row.
#[derive(Debug, Clone, PartialEq)]
pub struct TransactionRecord {
    pub client_id: String,
    /// Nanoseconds since the Unix epoch.
    pub timestamp: i64,
    /// 1 = fraud, 0 = genuine.
    pub label: u8,
}

/// Column-name mapping for CSV ingestion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvSchema {
    pub client_id: String,
    pub timestamp: String,
    pub label: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self {
            client_id: "client_id".into(),
            timestamp: "timestamp".into(),
            label: "label".into(),
        }
    }
}

/// Train/test split specification: the train segment takes the first
/// `⌈n · train_fraction⌉` transactions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SplitSpec {
    train_fraction: f64,
}

impl SplitSpec {
    pub fn new(train_fraction: f64) -> Result<Self, TimelineError> {
        if !(train_fraction > 0.0 && train_fraction < 1.0) {
            return Err(TimelineError::BadFraction(train_fraction));
        }
        Ok(Self { train_fraction })
    }

    pub fn train_fraction(&self) -> f64 {
        self.train_fraction
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
        }
    }
}

/// One client's ordered transaction history in normalized time units.
///
/// Invariants, enforced on construction:
/// - `times` strictly increasing and all ≥ 0,
/// - `labels` aligned with `times`, every label ∈ {0, 1},
/// - `horizon` ≥ last time (the observation end, the process horizon `T`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventTimeline {
    client_id: String,
    times: Vec<f64>,
    labels: Vec<u8>,
    horizon: f64,
}

impl EventTimeline {
    pub fn new(
        client_id: impl Into<String>,
        times: Vec<f64>,
        labels: Vec<u8>,
        horizon: f64,
    ) -> Result<Self, TimelineError> {
        let client_id = client_id.into();
        let invalid = |reason: String| TimelineError::Invalid {
            client_id: client_id.clone(),
            reason,
        };
        if times.len() != labels.len() {
            return Err(invalid(format!(
                "{} times vs {} labels",
                times.len(),
                labels.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l > 1) {
            return Err(invalid(format!("label {l} out of {{0, 1}}")));
        }
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() || t < 0.0 {
                return Err(invalid(format!("time[{i}] = {t}")));
            }
            if i > 0 && t <= times[i - 1] {
                return Err(invalid(format!(
                    "times not strictly increasing at index {i}: {} then {t}",
                    times[i - 1]
                )));
            }
        }
        if !horizon.is_finite() || horizon < 0.0 {
            return Err(invalid(format!("horizon {horizon}")));
        }
        if let Some(&last) = times.last() {
            if horizon < last {
                return Err(invalid(format!("horizon {horizon} before last time {last}")));
            }
        }
        Ok(Self {
            client_id,
            times,
            labels,
            horizon,
        })
    }

    /// Builds a timeline from per-event `(time, label)` pairs that may be
    /// unsorted or contain ties. Events are sorted by time (stable, so ties
    /// keep input order), tied times are perturbed forward by
    /// `TIE_EPSILON_DAYS`, and the horizon is the last resulting time.
    pub fn from_events(
        client_id: impl Into<String>,
        events: Vec<(f64, u8)>,
    ) -> Result<Self, TimelineError> {
        let mut events = events;
        events.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite times"));
        let mut times = Vec::with_capacity(events.len());
        let mut labels = Vec::with_capacity(events.len());
        for (t, label) in events {
            let mut t = t;
            if let Some(&prev) = times.last() {
                if t <= prev {
                    t = prev + TIE_EPSILON_DAYS;
                }
            }
            times.push(t);
            labels.push(label);
        }
        let horizon = times.last().copied().unwrap_or(0.0);
        Self::new(client_id, times, labels, horizon)
    }

    pub fn client_id(&self) -> &str {
        &self.client_id
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Times of fraud events (label = 1), order preserved.
    pub fn fraud_times(&self) -> Vec<f64> {
        self.times
            .iter()
            .zip(&self.labels)
            .filter(|(_, &l)| l == 1)
            .map(|(&t, _)| t)
            .collect()
    }

    pub fn fraud_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == 1).count()
    }

    /// Fraud proportion over the full timeline; 0 when empty.
    pub fn fraud_proportion(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.fraud_count() as f64 / self.len() as f64
        }
    }

    /// Index of the first test transaction under `spec`:
    /// `⌈n · train_fraction⌉`.
    pub fn split_index(&self, spec: &SplitSpec) -> usize {
        (self.len() as f64 * spec.train_fraction()).ceil() as usize
    }

    /// Splits by transaction count. The train segment's horizon is its last
    /// event time; the test segment keeps the original time coordinates so
    /// compensator differences across the boundary stay meaningful.
    pub fn split(&self, spec: &SplitSpec) -> Result<(EventTimeline, EventTimeline), TimelineError> {
        if self.len() < 2 {
            return Err(TimelineError::TooFewEvents {
                client_id: self.client_id.clone(),
                len: self.len(),
            });
        }
        let n_train = self.split_index(spec);
        let train_times = self.times[..n_train].to_vec();
        let train_horizon = train_times.last().copied().unwrap_or(0.0);
        let train = EventTimeline::new(
            self.client_id.clone(),
            train_times,
            self.labels[..n_train].to_vec(),
            train_horizon,
        )?;
        let test_times = self.times[n_train..].to_vec();
        let test_horizon = test_times.last().copied().unwrap_or(train_horizon);
        let test = EventTimeline::new(
            self.client_id.clone(),
            test_times,
            self.labels[n_train..].to_vec(),
            test_horizon,
        )?;
        Ok((train, test))
    }
}

/// Parses a timestamp field to epoch nanoseconds: RFC 3339 / ISO-8601
/// (with or without zone, `T` or space separator, plain date) or numeric
/// epoch seconds. Instants outside the nanosecond-representable range
/// (roughly years 1677–2262) are rejected.
pub fn parse_timestamp(value: &str) -> Option<i64> {
    let v = value.trim();
    if v.is_empty() {
        return None;
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(v) {
        return dt.with_timezone(&Utc).timestamp_nanos_opt();
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(naive) = NaiveDateTime::parse_from_str(v, fmt) {
            return Utc.from_utc_datetime(&naive).timestamp_nanos_opt();
        }
    }
    if let Ok(date) = NaiveDate::parse_from_str(v, "%Y-%m-%d") {
        let naive = date.and_hms_opt(0, 0, 0).expect("midnight");
        return Utc.from_utc_datetime(&naive).timestamp_nanos_opt();
    }
    let seconds: f64 = v.parse().ok().filter(|s: &f64| s.is_finite())?;
    let nanos = seconds * 1e9;
    (nanos.abs() < i64::MAX as f64).then(|| nanos.round() as i64)
}

fn parse_label(value: &str) -> Option<u8> {
    match value.trim() {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    }
}

/// Ingests a transaction CSV into one timeline per client.
///
/// Fail-fast: the first unparseable timestamp or label aborts the run with
/// the offending line number. An empty file yields an empty list. Clients
/// are returned in lexicographic id order; within a client, records are
/// sorted by timestamp (input order breaks ties) and times are normalized
/// to days since the client's first transaction.
pub fn ingest_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Vec<EventTimeline>, TimelineError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| TimelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    ingest_reader(file, schema)
}

/// As [`ingest_csv`], from any reader.
pub fn ingest_reader<R: Read>(
    reader: R,
    schema: &CsvSchema,
) -> Result<Vec<EventTimeline>, TimelineError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(Vec::new());
    }
    let col = |name: &str| -> Result<usize, TimelineError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| TimelineError::MissingColumn(name.to_string()))
    };
    let id_col = col(&schema.client_id)?;
    let ts_col = col(&schema.timestamp)?;
    let label_col = col(&schema.label)?;

    let mut by_client: BTreeMap<String, Vec<TransactionRecord>> = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i as u64 + 2; // header is line 1
        let record = record?;
        let field = |idx: usize, column: &str| -> Result<&str, TimelineError> {
            record.get(idx).ok_or_else(|| TimelineError::MissingField {
                line,
                column: column.to_string(),
            })
        };
        let client_id = field(id_col, &schema.client_id)?.trim().to_string();
        let ts_raw = field(ts_col, &schema.timestamp)?;
        let timestamp = parse_timestamp(ts_raw).ok_or_else(|| TimelineError::BadTimestamp {
            line,
            value: ts_raw.to_string(),
        })?;
        let label_raw = field(label_col, &schema.label)?;
        let label = parse_label(label_raw).ok_or_else(|| TimelineError::BadLabel {
            line,
            value: label_raw.to_string(),
        })?;
        by_client.entry(client_id.clone()).or_default().push(TransactionRecord {
            client_id,
            timestamp,
            label,
        });
    }

    let mut timelines = Vec::with_capacity(by_client.len());
    for (client_id, mut records) in by_client {
        // Stable sort: identical timestamps keep input order.
        records.sort_by_key(|r| r.timestamp);
        let first = records[0].timestamp;
        let events = records
            .iter()
            .map(|r| ((r.timestamp - first) as f64 / NANOS_PER_DAY, r.label))
            .collect();
        timelines.push(EventTimeline::from_events(client_id, events)?);
    }
    Ok(timelines)
}

/// Writes timelines in the ingestion schema (`client_id,timestamp,label`,
/// ISO-8601 timestamps at nanosecond precision). Day 0 of every client is
/// mapped to `base`, so a subsequent ingest reproduces the relative times.
pub fn write_csv<W: Write>(
    timelines: &[EventTimeline],
    base: DateTime<Utc>,
    mut w: W,
) -> Result<(), TimelineError> {
    let io_err = |source: std::io::Error| TimelineError::Io {
        path: "<writer>".into(),
        source,
    };
    writeln!(w, "client_id,timestamp,label").map_err(io_err)?;
    for tl in timelines {
        for (&t, &label) in tl.times().iter().zip(tl.labels()) {
            let nanos = (t * NANOS_PER_DAY).round() as i64;
            let ts = base + chrono::Duration::nanoseconds(nanos);
            writeln!(
                w,
                "{},{},{}",
                tl.client_id(),
                ts.to_rfc3339_opts(chrono::SecondsFormat::Nanos, true),
                label
            )
            .map_err(io_err)?;
        }
    }
    Ok(())
}
