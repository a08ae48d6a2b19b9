//! Simulation output and the writers that put it on disk.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDateTime};
use serde::Serialize;
use thiserror::Error;

use super::config::TIMESTAMP_FORMAT;
use crate::analyser::AnalysisReport;
use crate::thermal::ControlInput;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("failed to write {path}: {message}")]
    WriteFailed { path: PathBuf, message: String },
}

/// Per-step record of one run. Every series has one entry per step;
/// per-room series are indexed `[step][room]`.
///
/// Temperatures are the room state at the end of the step, after the
/// step's control input was applied; PMV and discomfort refer to that
/// state. Power is drawn over the step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationResult {
    pub start: NaiveDateTime,
    /// Seconds per step.
    pub time_step: u32,
    pub outdoor: Vec<f64>,
    pub temperatures: Vec<Vec<f64>>,
    /// Realized occupancy.
    pub occupancy: Vec<Vec<bool>>,
    /// Occupancy the controller was told about.
    pub forecast_occupancy: Vec<Vec<bool>>,
    pub inputs: Vec<ControlInput>,
    pub power_kw: Vec<f64>,
    pub pmv: Vec<Vec<f64>>,
    /// Discomfort, zero whenever the room is unoccupied.
    pub discomfort: Vec<Vec<f64>>,
}

impl SimulationResult {
    pub fn steps(&self) -> usize {
        self.power_kw.len()
    }

    pub fn rooms(&self) -> usize {
        self.temperatures.first().map_or(0, Vec::len)
    }

    pub fn timestamp(&self, step: usize) -> NaiveDateTime {
        self.start + Duration::seconds(self.time_step as i64 * step as i64)
    }
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    start: String,
    time_step: u32,
    steps: usize,
    rooms: usize,
    energy_kwh: f64,
    daily_energy_kwh: Vec<f64>,
    discomfort_percent: &'a [Option<f64>],
    mean_discomfort_percent: f64,
    robust: Option<f64>,
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|e| ReportError::WriteFailed {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// `base` with `suffix` appended to its file name (`out` → `out.steps.csv`).
pub fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(suffix);
    base.with_file_name(name)
}

/// Per-step CSV body.
pub fn steps_csv(result: &SimulationResult) -> String {
    let rooms = result.rooms();
    let mut out = String::from("step,timestamp,outdoor,supply_air_temperature,power_kw");
    for prefix in ["temperature", "occupied", "forecast", "airflow", "pmv", "discomfort"] {
        for j in 1..=rooms {
            let _ = write!(out, ",{prefix}_{j}");
        }
    }
    out.push('\n');
    for t in 0..result.steps() {
        let input = &result.inputs[t];
        let _ = write!(
            out,
            "{},{},{},{},{}",
            t,
            result.timestamp(t).format(TIMESTAMP_FORMAT),
            result.outdoor[t],
            input.supply_air_temperature,
            result.power_kw[t]
        );
        for v in &result.temperatures[t] {
            let _ = write!(out, ",{v}");
        }
        for series in [&result.occupancy[t], &result.forecast_occupancy[t]] {
            for &o in series {
                let _ = write!(out, ",{}", u8::from(o));
            }
        }
        for v in input.airflow.iter().chain(&result.pmv[t]).chain(&result.discomfort[t]) {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Writes `<base>.steps.csv` and `<base>.summary.json`.
pub fn write_report(result: &SimulationResult, report: &AnalysisReport, base: &Path) -> Result<(), ReportError> {
    write_file(&with_suffix(base, ".steps.csv"), &steps_csv(result))?;

    let per_day = (86_400 / result.time_step.max(1)) as usize;
    let daily_energy_kwh = result
        .power_kw
        .chunks(per_day.max(1))
        .map(|c| crate::analyser::energy(c, result.time_step as f64))
        .collect();
    let summary = Summary {
        start: result.start.format(TIMESTAMP_FORMAT).to_string(),
        time_step: result.time_step,
        steps: result.steps(),
        rooms: result.rooms(),
        energy_kwh: report.energy_kwh,
        daily_energy_kwh,
        discomfort_percent: &report.discomfort_percent,
        mean_discomfort_percent: report.mean_discomfort_percent(),
        robust: report.robust,
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(&with_suffix(base, ".summary.json"), &(json + "\n"))
}
