//! Occupancy error injection.
//!
//! Occupancy is cut into day-long bit strings. The error between two days
//! is the share of positions where their strings disagree (Hamming distance
//! over string length, in percent). An erroneous forecast for a target
//! error level is a historical day drawn at random among those whose error
//! against the reference day is close to the target, so injected errors
//! always look like real occupancy.

use std::fmt;

use chrono::{NaiveDate, NaiveTime};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::master_io::series::TimeSeries;
use crate::rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ErrorLabError {
    #[error("occupancy does not cover whole days: {0}")]
    PartialDay(String),
    #[error("occupancy has missing samples; preprocess it first")]
    MissingValues,
    #[error("string lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("an error matrix needs at least two strings, got {0}")]
    TooFewStrings(usize),
    #[error("reference database is empty")]
    EmptyDatabase,
    #[error("reference day {0} is not a row of the error matrix")]
    ReferenceNotInMatrix(NaiveDate),
    #[error("no candidate string at any tolerance")]
    NoCandidateAtAnyTolerance,
    #[error("target error {0}% outside [0, 100]")]
    TargetOutOfRange(f64),
    #[error("matrix cache: {0}")]
    Cache(String),
}

/// One day of binary occupancy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct OccupancyString {
    pub day: NaiveDate,
    pub bits: Vec<bool>,
}

impl OccupancyString {
    pub fn new(day: NaiveDate, bits: Vec<bool>) -> Self {
        Self { day, bits }
    }

    /// Parses a `0`/`1` string; other characters are ignored.
    pub fn parse(day: NaiveDate, text: &str) -> Self {
        let bits = text
            .chars()
            .filter_map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect();
        Self { day, bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn occupied_fraction(&self) -> f64 {
        self.ones() as f64 / self.len() as f64
    }
}

impl fmt::Display for OccupancyString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Splits a preprocessed occupancy series into per-day strings.
pub fn to_day_strings(occupancy: &TimeSeries) -> Result<Vec<OccupancyString>, ErrorLabError> {
    let step = occupancy.step;
    if step <= 0 || 86_400 % step != 0 {
        return Err(ErrorLabError::PartialDay(format!(
            "step {step} s does not divide a day"
        )));
    }
    if occupancy.start.time() != NaiveTime::MIN {
        return Err(ErrorLabError::PartialDay(format!(
            "series starts at {}",
            occupancy.start
        )));
    }
    let per_day = (86_400 / step) as usize;
    if occupancy.is_empty() || !occupancy.len().is_multiple_of(per_day) {
        return Err(ErrorLabError::PartialDay(format!(
            "{} samples is not a multiple of {per_day}",
            occupancy.len()
        )));
    }
    if !occupancy.is_complete() {
        return Err(ErrorLabError::MissingValues);
    }
    let bits = occupancy.bits();
    Ok(bits
        .chunks(per_day)
        .enumerate()
        .map(|(d, chunk)| OccupancyString {
            day: occupancy.timestamp(d * per_day).date(),
            bits: chunk.to_vec(),
        })
        .collect())
}

/// Number of positions at which `a` and `b` differ.
pub fn hamming_distance(a: &OccupancyString, b: &OccupancyString) -> Result<usize, ErrorLabError> {
    if a.len() != b.len() {
        return Err(ErrorLabError::LengthMismatch(a.len(), b.len()));
    }
    Ok(a.bits.iter().zip(&b.bits).filter(|(x, y)| x != y).count())
}

fn percent(distance: usize, length: usize) -> f64 {
    100.0 * distance as f64 / length as f64
}

/// Hamming distance as a percentage of the string length.
pub fn hamming_error(a: &OccupancyString, b: &OccupancyString) -> Result<f64, ErrorLabError> {
    Ok(percent(hamming_distance(a, b)?, a.len()))
}

/// Pairwise percentage errors between day strings.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorMatrix {
    strings: Vec<OccupancyString>,
    length: usize,
    /// Raw Hamming distances, row-major `n × n`.
    distances: Vec<u32>,
}

impl ErrorMatrix {
    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn days(&self) -> Vec<NaiveDate> {
        self.strings.iter().map(|s| s.day).collect()
    }

    pub fn strings(&self) -> &[OccupancyString] {
        &self.strings
    }

    pub fn string_length(&self) -> usize {
        self.length
    }

    pub fn distance(&self, i: usize, j: usize) -> usize {
        self.distances[i * self.len() + j] as usize
    }

    /// Error percentage between rows `i` and `j`.
    pub fn cell(&self, i: usize, j: usize) -> f64 {
        percent(self.distance(i, j), self.length)
    }

    pub fn cells(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.cell(i, j)).collect()).collect()
    }

    /// Row index of `s` (matched by day and content).
    pub fn row_of(&self, s: &OccupancyString) -> Option<usize> {
        self.strings.iter().position(|r| r == s)
    }

    /// Cache format: a `day,<dates>` header row, then one row per day.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("day");
        for d in self.days() {
            out.push(',');
            out.push_str(&d.format("%Y%m%d").to_string());
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&self.strings[i].day.format("%Y%m%d").to_string());
            for j in 0..self.len() {
                out.push(',');
                out.push_str(&self.cell(i, j).to_string());
            }
            out.push('\n');
        }
        out
    }

    /// Loads a cached matrix, checking it against a recomputation from `strings`.
    pub fn from_csv(text: &str, strings: &[OccupancyString]) -> Result<Self, ErrorLabError> {
        let fresh = build_error_matrix(strings)?;
        if text == fresh.to_csv() {
            return Ok(fresh);
        }
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| ErrorLabError::Cache("empty file".into()))?;
        let dates: Vec<&str> = header.split(',').skip(1).collect();
        if dates.len() != fresh.len() {
            return Err(ErrorLabError::Cache(format!(
                "cache has {} days, data has {}",
                dates.len(),
                fresh.len()
            )));
        }
        for (i, line) in lines.enumerate() {
            let cells: Vec<f64> = line
                .split(',')
                .skip(1)
                .map(|c| {
                    c.trim()
                        .parse()
                        .map_err(|_| ErrorLabError::Cache(format!("bad cell in row {}", i + 1)))
                })
                .collect::<Result<_, _>>()?;
            if cells.len() != fresh.len() || cells.iter().enumerate().any(|(j, &c)| c != fresh.cell(i, j)) {
                return Err(ErrorLabError::Cache(format!("row {} disagrees with the data", i + 1)));
            }
        }
        Err(ErrorLabError::Cache("cache layout differs from the data".into()))
    }
}

/// Builds the symmetric error matrix; cell order follows input order.
pub fn build_error_matrix(strings: &[OccupancyString]) -> Result<ErrorMatrix, ErrorLabError> {
    let n = strings.len();
    if n < 2 {
        return Err(ErrorLabError::TooFewStrings(n));
    }
    let length = strings[0].len();
    if let Some(bad) = strings.iter().find(|s| s.len() != length) {
        return Err(ErrorLabError::LengthMismatch(length, bad.len()));
    }
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    strings[i]
                        .bits
                        .iter()
                        .zip(&strings[j].bits)
                        .filter(|(a, b)| a != b)
                        .count() as u32
                })
                .collect()
        })
        .collect();
    Ok(ErrorMatrix {
        strings: strings.to_vec(),
        length,
        distances: rows.concat(),
    })
}

/// The database string closest in Hamming distance to `day_string`;
/// ties go to the earliest date.
pub fn select_reference(
    day_string: &OccupancyString,
    database: &[OccupancyString],
) -> Result<OccupancyString, ErrorLabError> {
    let mut best: Option<(usize, &OccupancyString)> = None;
    for candidate in database {
        let d = hamming_distance(day_string, candidate)?;
        let better = match best {
            None => true,
            Some((bd, bs)) => d < bd || (d == bd && candidate.day < bs.day),
        };
        if better {
            best = Some((d, candidate));
        }
    }
    best.map(|(_, s)| s.clone()).ok_or(ErrorLabError::EmptyDatabase)
}

/// A reference day and the erroneous forecast drawn for it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorPair {
    pub reference: OccupancyString,
    pub erroneous: OccupancyString,
    /// Error of `erroneous` against `reference`, percent.
    pub achieved_error: f64,
    /// Tolerance at which a candidate was found, percentage points.
    pub final_tolerance: f64,
}

/// Draws an erroneous string whose error against `reference` lies within
/// `tolerance` of `target`, widening the band by one percentage point until
/// a candidate exists. For a zero target the reference itself is returned.
pub fn select_erroneous(
    reference: &OccupancyString,
    matrix: &ErrorMatrix,
    target: f64,
    tolerance: f64,
    seed: u64,
) -> Result<ErrorPair, ErrorLabError> {
    if !(0.0..=100.0).contains(&target) {
        return Err(ErrorLabError::TargetOutOfRange(target));
    }
    let row = matrix
        .row_of(reference)
        .ok_or(ErrorLabError::ReferenceNotInMatrix(reference.day))?;
    if target == 0.0 {
        return Ok(ErrorPair {
            reference: reference.clone(),
            erroneous: reference.clone(),
            achieved_error: 0.0,
            final_tolerance: tolerance,
        });
    }
    if matrix.len() < 2 {
        return Err(ErrorLabError::NoCandidateAtAnyTolerance);
    }
    let mut tol = tolerance.max(0.0);
    let candidates = loop {
        let found: Vec<usize> = (0..matrix.len())
            .filter(|&j| j != row && (matrix.cell(row, j) - target).abs() <= tol)
            .collect();
        if !found.is_empty() {
            break found;
        }
        tol += 1.0;
    };
    let pick = candidates[rng::rng(seed).gen_range(0..candidates.len())];
    Ok(ErrorPair {
        reference: reference.clone(),
        erroneous: matrix.strings[pick].clone(),
        achieved_error: matrix.cell(row, pick),
        final_tolerance: tol,
    })
}
