//! Regularly sampled traces: CSV loading, slicing, gap filling and resampling.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDateTime};
use thiserror::Error;

use super::config::TIMESTAMP_FORMAT;

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("cannot read {path}: {message}")]
    FileUnreadable { path: PathBuf, message: String },
    #[error("unparsable row {0}")]
    UnparsableRow(usize),
    #[error("duplicate timestamp {0}")]
    DuplicateTimestamp(NaiveDateTime),
    #[error("need at least two samples to infer the sampling step")]
    TooFewRows,
    #[error("window [{start}, {stop}) does not overlap the data")]
    WindowOutsideData { start: NaiveDateTime, stop: NaiveDateTime },
    #[error("series has no values")]
    AllValuesMissing,
    #[error("invalid resampling step {0} s")]
    InvalidStep(i64),
}

/// How gaps are filled and how the series is resampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignalKind {
    /// Temperatures: linear interpolation.
    Continuous,
    /// Occupancy bits: hold previous, majority-vote downsampling.
    Binary,
}

/// Samples at `start + k·step`; `None` marks a missing value.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub start: NaiveDateTime,
    /// Seconds between samples.
    pub step: i64,
    pub values: Vec<Option<f64>>,
}

impl TimeSeries {
    pub fn new(start: NaiveDateTime, step: i64, values: Vec<f64>) -> Self {
        Self {
            start,
            step,
            values: values.into_iter().map(Some).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Exclusive end of the covered span.
    pub fn end(&self) -> NaiveDateTime {
        self.timestamp(self.values.len())
    }

    pub fn timestamp(&self, index: usize) -> NaiveDateTime {
        self.start + Duration::seconds(self.step * index as i64)
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// Values with missing samples as NaN.
    pub fn dense(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.unwrap_or(f64::NAN)).collect()
    }

    /// Occupancy view; anything at or above one half counts as occupied.
    pub fn bits(&self) -> Vec<bool> {
        self.values.iter().map(|v| v.is_some_and(|x| x >= 0.5)).collect()
    }
}

/// Which column of a CSV row carries the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnSelector {
    /// `timestamp, value, ...`: the value is in column `n` (0-based).
    Column(usize),
    /// `timestamp, zone, room, value` rows filtered to one room (1-based indices).
    Room { zone: u32, room: u32 },
}

pub fn parse_timestamp(raw: &str) -> Option<NaiveDateTime> {
    let raw = raw.trim();
    [
        TIMESTAMP_FORMAT,
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ]
    .iter()
    .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
}

fn parse_value(raw: &str) -> Option<Option<f64>> {
    let raw = raw.trim();
    match raw.to_lowercase().as_str() {
        "" | "na" | "nan" | "null" | "-" => Some(None),
        _ => raw.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some),
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn read_rows(path: &Path) -> Result<Vec<csv::StringRecord>, SeriesError> {
    let unreadable = |message: String| SeriesError::FileUnreadable {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| unreadable(e.to_string()))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|_| SeriesError::UnparsableRow(i + 1))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        rows.push(record);
    }
    Ok(rows)
}

/// Builds a regular series from unordered `(timestamp, value)` samples;
/// the step is the GCD of the gaps and absent grid points are missing.
fn regularize(samples: BTreeMap<NaiveDateTime, Option<f64>>) -> Result<TimeSeries, SeriesError> {
    if samples.len() < 2 {
        return Err(SeriesError::TooFewRows);
    }
    let times: Vec<_> = samples.keys().copied().collect();
    let step = times.windows(2).map(|w| (w[1] - w[0]).num_seconds()).fold(0, gcd);
    let start = times[0];
    let n = ((*times.last().unwrap() - start).num_seconds() / step) as usize + 1;
    let mut values = vec![None; n];
    for (t, v) in samples {
        values[((t - start).num_seconds() / step) as usize] = v;
    }
    Ok(TimeSeries { start, step, values })
}

/// Loads a `timestamp,value` style CSV. Rows may come in any order; a
/// leading header row is skipped.
pub fn load_csv_series(path: &Path, selector: ColumnSelector) -> Result<TimeSeries, SeriesError> {
    let rows = read_rows(path)?;
    if rows.is_empty() {
        return Err(SeriesError::UnparsableRow(0));
    }
    let mut samples = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        let row_number = i + 1;
        let Some(t) = row.get(0).and_then(parse_timestamp) else {
            if i == 0 {
                continue;
            }
            return Err(SeriesError::UnparsableRow(row_number));
        };
        let value = match selector {
            ColumnSelector::Column(c) => row.get(c).and_then(parse_value),
            ColumnSelector::Room { zone, room } => {
                let index = |c: usize| row.get(c).and_then(|s| s.parse::<u32>().ok());
                match (index(1), index(2)) {
                    (Some(z), Some(r)) if z == zone && r == room => row.get(3).and_then(parse_value),
                    (Some(_), Some(_)) => continue,
                    _ => None,
                }
            }
        };
        let Some(value) = value else {
            return Err(SeriesError::UnparsableRow(row_number));
        };
        if samples.insert(t, value).is_some() {
            return Err(SeriesError::DuplicateTimestamp(t));
        }
    }
    if samples.is_empty() {
        return Err(SeriesError::UnparsableRow(0));
    }
    regularize(samples)
}

/// Loads per-room occupancy. A two-column file (`timestamp,bit`) holds zone
/// level occupancy and is broadcast to every room; otherwise rows are
/// `timestamp,zone,room,bit`.
pub fn load_occupancy(path: &Path, rooms: usize) -> Result<Vec<TimeSeries>, SeriesError> {
    let rows = read_rows(path)?;
    let data_row = rows.iter().find(|r| r.get(0).and_then(parse_timestamp).is_some());
    match data_row {
        None => Err(SeriesError::UnparsableRow(0)),
        Some(r) if r.len() <= 2 => {
            let zone = load_csv_series(path, ColumnSelector::Column(1))?;
            Ok(vec![zone; rooms])
        }
        Some(_) => (1..=rooms as u32)
            .map(|room| load_csv_series(path, ColumnSelector::Room { zone: 1, room }))
            .collect(),
    }
}

/// Restricts a series to `[start, stop)` on the grid `start + k·step`.
/// Grid points without data are missing.
pub fn slice(series: &TimeSeries, start: NaiveDateTime, stop: NaiveDateTime) -> Result<TimeSeries, SeriesError> {
    if start >= stop || stop <= series.start || start >= series.end() {
        return Err(SeriesError::WindowOutsideData { start, stop });
    }
    let step = series.step;
    let span = (stop - start).num_seconds();
    let n = ((span + step - 1) / step) as usize;
    let values = (0..n)
        .map(|k| {
            let offset = (start - series.start).num_seconds() + k as i64 * step;
            if offset < 0 || offset % step != 0 {
                return None;
            }
            series.values.get((offset / step) as usize).copied().flatten()
        })
        .collect();
    Ok(TimeSeries { start, step, values })
}

fn fill(values: &[Option<f64>], kind: SignalKind) -> Result<Vec<f64>, SeriesError> {
    let known: Vec<(usize, f64)> = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|x| (i, x)))
        .collect();
    let Some(&(first_index, first)) = known.first() else {
        return Err(SeriesError::AllValuesMissing);
    };
    let mut out = Vec::with_capacity(values.len());
    let mut next_known = 0;
    let mut last = first;
    for (i, v) in values.iter().enumerate() {
        if let Some(x) = v {
            out.push(*x);
            last = *x;
            next_known += 1;
            continue;
        }
        let filled = match kind {
            _ if i < first_index => first,
            SignalKind::Binary => last,
            SignalKind::Continuous => match known.get(next_known) {
                None => last,
                Some(&(j, right)) => {
                    let (k, left) = known[next_known - 1];
                    left + (right - left) * (i - k) as f64 / (j - k) as f64
                }
            },
        };
        out.push(filled);
    }
    if kind == SignalKind::Binary {
        for v in &mut out {
            *v = if *v >= 0.5 { 1.0 } else { 0.0 };
        }
    }
    Ok(out)
}

/// Fills gaps and resamples to `target_step` seconds.
///
/// Continuous signals are linearly interpolated (held flat past the last
/// sample). Binary signals are repeated when upsampling and reduced by
/// per-bucket majority vote when downsampling, ties counting as occupied.
pub fn preprocess(series: &TimeSeries, target_step: i64, kind: SignalKind) -> Result<TimeSeries, SeriesError> {
    if target_step <= 0 {
        return Err(SeriesError::InvalidStep(target_step));
    }
    if series.is_empty() {
        return Err(SeriesError::AllValuesMissing);
    }
    let filled = fill(&series.values, kind)?;
    let step = series.step;
    let span = filled.len() as i64 * step;
    let n = ((span + target_step - 1) / target_step) as usize;
    let values = (0..n)
        .map(|k| {
            let t = k as i64 * target_step;
            match kind {
                SignalKind::Continuous => {
                    let i = (t / step) as usize;
                    let rem = t % step;
                    if i + 1 >= filled.len() || rem == 0 {
                        filled[i.min(filled.len() - 1)]
                    } else {
                        let w = rem as f64 / step as f64;
                        filled[i] + (filled[i + 1] - filled[i]) * w
                    }
                }
                SignalKind::Binary if target_step > step => {
                    let lo = (t / step) as usize;
                    let hi = (((t + target_step) / step) as usize).min(filled.len());
                    let bucket = &filled[lo..hi.max(lo + 1)];
                    let ones = bucket.iter().filter(|&&b| b == 1.0).count();
                    if 2 * ones >= bucket.len() {
                        1.0
                    } else {
                        0.0
                    }
                }
                SignalKind::Binary => filled[(t / step) as usize],
            }
        })
        .map(Some)
        .collect();
    Ok(TimeSeries {
        start: series.start,
        step: target_step,
        values,
    })
}
