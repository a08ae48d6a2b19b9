//! Error-level sweeps over replicate forecasts.
//!
//! For every whole day of the configured window the sweep picks, per room,
//! the historical day closest to it (the reference), simulates the
//! reference with a perfect forecast (the baseline), then simulates
//! `replicates` erroneous forecasts for each error level. A replicate is
//! robust when its energy and mean discomfort stay inside the acceptance
//! box around the baseline.
//!
//! Replicate `i` of error level `e` on day `d` uses the seed
//! `rng::replicate_seed(rng_seed, d, e, i)`; room `j` of that replicate
//! draws its erroneous string with `rng::mix(replicate_seed, [j])`. Any
//! replicate can therefore be re-run on its own.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analyser::{robust_from_points, AcceptanceBox, AnalysisReport};
use crate::engine::{simulate, SimulationError, SimulationRun};
use crate::error_lab::{
    build_error_matrix, select_erroneous, select_reference, to_day_strings, ErrorLabError, ErrorMatrix, OccupancyString,
};
use crate::master_io::config::SimulationConfig;
use crate::master_io::report::{write_file, ReportError, SimulationResult};
use crate::master_io::series::{
    load_csv_series, load_occupancy, preprocess, slice, ColumnSelector, SeriesError, SignalKind, TimeSeries,
};
use crate::rng;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    ErrorLab(#[from] ErrorLabError),
    #[error("simulation of {day} failed: {source}")]
    Simulation { day: NaiveDate, source: SimulationError },
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("no whole day of occupancy and weather inside the simulation window")]
    NoDays,
    #[error("error level {0}% outside [0, 100]")]
    InvalidLevel(f64),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// Preprocessed traces for a config.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub config: SimulationConfig,
    /// Outdoor temperature at the config's time step.
    pub weather: TimeSeries,
    /// Whole-day occupancy per room at the config's time step.
    pub occupancy: Vec<TimeSeries>,
}

fn midnight(day: NaiveDate) -> NaiveDateTime {
    day.and_time(NaiveTime::MIN)
}

/// First midnight at or after `t`.
fn ceil_day(t: NaiveDateTime) -> NaiveDate {
    if t.time() == NaiveTime::MIN {
        t.date()
    } else {
        t.date() + Duration::days(1)
    }
}

/// Trims a series to the whole days it covers.
fn whole_days(series: &TimeSeries) -> Result<TimeSeries, SeriesError> {
    let first = ceil_day(series.start);
    let last = series.end().date();
    if last <= first {
        return Err(SeriesError::WindowOutsideData {
            start: midnight(first),
            stop: midnight(last),
        });
    }
    slice(series, midnight(first), midnight(last))
}

impl Inputs {
    /// Reads the weather and occupancy files named in the config.
    pub fn load(config: &SimulationConfig) -> Result<Self, ExperimentError> {
        let step = config.time_step as i64;
        let weather = load_csv_series(&config.files.weather, ColumnSelector::Column(1))?;
        let weather = preprocess(&weather, step, SignalKind::Continuous)?;
        let occupancy = load_occupancy(&config.files.occupancy, config.rooms)?
            .iter()
            .map(|s| preprocess(s, step, SignalKind::Binary).and_then(|p| whole_days(&p)))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            config: config.clone(),
            weather,
            occupancy,
        })
    }

    /// Day strings per room.
    pub fn day_strings(&self) -> Result<Vec<Vec<OccupancyString>>, ErrorLabError> {
        self.occupancy.iter().map(to_day_strings).collect()
    }

    /// Weather from `start` for `steps` samples plus the planning horizon,
    /// cut short where the data ends.
    fn weather_window(&self, start: NaiveDateTime, steps: usize) -> Result<TimeSeries, SeriesError> {
        let step = self.config.time_step as i64;
        let wanted = start + Duration::seconds(step * (steps + self.config.horizon_steps()) as i64);
        let stop = wanted.min(self.weather.end());
        let w = slice(&self.weather, start, stop)?;
        if w.len() < steps || !w.is_complete() {
            return Err(SeriesError::WindowOutsideData { start, stop: wanted });
        }
        Ok(w)
    }

    /// Whole days of the config window that have occupancy and weather.
    pub fn sweep_days(&self) -> Vec<NaiveDate> {
        let Some(occ) = self.occupancy.first() else {
            return Vec::new();
        };
        let first = ceil_day(self.config.start.max(occ.start).max(self.weather.start));
        let end = self.config.stop.min(occ.end()).min(self.weather.end());
        let mut days = Vec::new();
        let mut d = first;
        while midnight(d + Duration::days(1)) <= end {
            days.push(d);
            d += Duration::days(1);
        }
        days
    }
}

fn day_series(day: NaiveDate, step: i64, bits: &[bool]) -> TimeSeries {
    TimeSeries::new(
        midnight(day),
        step,
        bits.iter().map(|&b| f64::from(u8::from(b))).collect(),
    )
}

/// One simulated forecast in the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub day: NaiveDate,
    pub error_level: f64,
    /// `None` for the perfect-forecast baseline.
    pub replicate: Option<u32>,
    pub seed: u64,
    pub energy_kwh: Option<f64>,
    pub discomfort_percent: Option<f64>,
    /// Mean over rooms of the per-room achieved error, percent.
    pub achieved_error: f64,
    pub room_errors: Vec<f64>,
    pub final_tolerances: Vec<f64>,
    pub in_box: bool,
    pub failure: Option<String>,
}

/// Robustness of one (day, error level) cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub day: NaiveDate,
    pub error_level: f64,
    pub robust: f64,
    /// Largest distance between two replicates in the (kWh, %) plane.
    pub spread: f64,
    pub acceptance: AcceptanceBox,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    /// Canonical order: by day, then baseline, then level, then replicate.
    pub records: Vec<ReplicateRecord>,
    pub cells: Vec<CellSummary>,
}

impl SweepReport {
    pub fn cell(&self, day: NaiveDate, level: f64) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.day == day && c.error_level == level)
    }

    /// Mean robustness over days for each level, in level order.
    pub fn robust_by_level(&self) -> Vec<(f64, f64)> {
        let mut levels: Vec<f64> = Vec::new();
        for c in &self.cells {
            if !levels.contains(&c.error_level) {
                levels.push(c.error_level);
            }
        }
        levels
            .into_iter()
            .map(|l| {
                let values: Vec<f64> = self
                    .cells
                    .iter()
                    .filter(|c| c.error_level == l)
                    .map(|c| c.robust)
                    .collect();
                (l, values.iter().sum::<f64>() / values.len() as f64)
            })
            .collect()
    }
}

struct DayPlan {
    day: NaiveDate,
    references: Vec<OccupancyString>,
    weather: TimeSeries,
}

struct Job<'a> {
    plan: &'a DayPlan,
    level: f64,
    replicate: Option<u32>,
}

struct Outcome {
    record: ReplicateRecord,
    result: Result<(f64, f64), SimulationError>,
}

fn max_pairwise_distance(points: &[(f64, f64)]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt());
        }
    }
    best
}

fn run_job(inputs: &Inputs, matrices: &[ErrorMatrix], job: &Job) -> Result<Outcome, ErrorLabError> {
    let config = &inputs.config;
    let step = config.time_step as i64;
    let day = job.plan.day;
    let seed = match job.replicate {
        None => rng::mix(config.rng_seed, &[day.num_days_from_ce() as u64]),
        Some(i) => rng::replicate_seed(config.rng_seed, day.num_days_from_ce() as i64, job.level, i),
    };
    let mut truth = Vec::new();
    let mut told = Vec::new();
    let mut room_errors = Vec::new();
    let mut final_tolerances = Vec::new();
    for (room, reference) in job.plan.references.iter().enumerate() {
        let level = if job.replicate.is_some() { job.level } else { 0.0 };
        let pair = select_erroneous(
            reference,
            &matrices[room],
            level,
            config.error.tolerance,
            rng::mix(seed, &[room as u64]),
        )?;
        truth.push(day_series(day, step, &pair.reference.bits));
        told.push(day_series(day, step, &pair.erroneous.bits));
        room_errors.push(pair.achieved_error);
        final_tolerances.push(pair.final_tolerance);
    }
    let mut run = SimulationRun::new(
        config.clone(),
        job.plan.weather.clone(),
        truth,
        told,
        config.steps_per_day(),
    );
    run.seed = seed;
    let result = simulate(&run).map(|r| {
        let report = AnalysisReport::from_result(&r, config.occupied_only);
        (report.energy_kwh, report.mean_discomfort_percent())
    });
    let achieved_error = room_errors.iter().sum::<f64>() / room_errors.len() as f64;
    Ok(Outcome {
        record: ReplicateRecord {
            day,
            error_level: if job.replicate.is_some() { job.level } else { 0.0 },
            replicate: job.replicate,
            seed,
            energy_kwh: result.as_ref().ok().map(|r| r.0),
            discomfort_percent: result.as_ref().ok().map(|r| r.1),
            achieved_error,
            room_errors,
            final_tolerances,
            in_box: false,
            failure: result.as_ref().err().map(ToString::to_string),
        },
        result,
    })
}

/// Runs the error sweep over every whole day in the config window.
pub fn run_error_sweep(inputs: &Inputs, error_levels: &[f64], replicates: u32) -> Result<SweepReport, ExperimentError> {
    if let Some(&bad) = error_levels.iter().find(|l| !(0.0..=100.0).contains(*l)) {
        return Err(ExperimentError::InvalidLevel(bad));
    }
    let config = &inputs.config;
    let strings = inputs.day_strings()?;
    let matrices = strings
        .iter()
        .map(|s| build_error_matrix(s))
        .collect::<Result<Vec<_>, _>>()?;
    let days = inputs.sweep_days();
    if days.is_empty() {
        return Err(ExperimentError::NoDays);
    }

    let mut plans = Vec::with_capacity(days.len());
    for &day in &days {
        let references = strings
            .iter()
            .map(|room| {
                let today = room.iter().find(|s| s.day == day).ok_or(ErrorLabError::EmptyDatabase)?;
                let database: Vec<OccupancyString> = room.iter().filter(|s| s.day != day).cloned().collect();
                select_reference(today, &database)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let weather = inputs.weather_window(midnight(day), config.steps_per_day())?;
        plans.push(DayPlan {
            day,
            references,
            weather,
        });
    }

    let mut jobs = Vec::new();
    for plan in &plans {
        jobs.push(Job {
            plan,
            level: 0.0,
            replicate: None,
        });
        for &level in error_levels {
            for i in 0..replicates {
                jobs.push(Job {
                    plan,
                    level,
                    replicate: Some(i),
                });
            }
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| ExperimentError::Pool(e.to_string()))?;
    let outcomes: Vec<Outcome> = pool.install(|| {
        jobs.par_iter()
            .map(|job| run_job(inputs, &matrices, job))
            .collect::<Result<Vec<_>, _>>()
    })?;

    let mut records = Vec::with_capacity(outcomes.len());
    let mut cells = Vec::new();
    let mut outcomes = outcomes.into_iter();
    for plan in &plans {
        let baseline = outcomes.next().expect("one baseline per day");
        let (e0, d0) = baseline
            .result
            .map_err(|source| ExperimentError::Simulation { day: plan.day, source })?;
        let acceptance = AcceptanceBox::around(e0, d0);
        let mut base_record = baseline.record;
        base_record.in_box = acceptance.contains(e0, d0);
        records.push(base_record);
        for &level in error_levels {
            let mut points = Vec::new();
            let mut inside = 0usize;
            for _ in 0..replicates {
                let mut outcome = outcomes.next().expect("one outcome per job");
                if let Ok((e, d)) = outcome.result {
                    points.push((e, d));
                    outcome.record.in_box = acceptance.contains(e, d);
                }
                inside += usize::from(outcome.record.in_box);
                records.push(outcome.record);
            }
            // Failed replicates count as outside the box.
            let robust = if replicates == 0 {
                0.0
            } else if points.len() == replicates as usize {
                robust_from_points(&points, &acceptance)
            } else {
                100.0 * inside as f64 / replicates as f64
            };
            cells.push(CellSummary {
                day: plan.day,
                error_level: level,
                robust,
                spread: max_pairwise_distance(&points),
                acceptance,
            });
        }
    }
    Ok(SweepReport { records, cells })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Plot-ready scatter CSV body.
pub fn scatter_csv(report: &SweepReport) -> String {
    let mut out = String::from("day,error_level,replicate,E_kwh,D_percent,achieved_error,in_box\n");
    for r in &report.records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.day.format("%Y%m%d"),
            r.error_level,
            r.replicate.map_or_else(|| "baseline".to_string(), |i| i.to_string()),
            opt(r.energy_kwh),
            opt(r.discomfort_percent),
            r.achieved_error,
            r.in_box
        );
    }
    out
}

/// Writes the scatter CSV.
pub fn emit_scatter(report: &SweepReport, path: &Path) -> Result<(), ReportError> {
    write_file(path, &scatter_csv(report))
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    replicates_per_cell: usize,
    robust_by_level: Vec<LevelSummary>,
    cells: &'a [CellSummary],
    failures: usize,
}

#[derive(Serialize)]
struct LevelSummary {
    error_level: f64,
    mean_robust: f64,
}

/// Writes the sweep summary as JSON.
pub fn write_sweep_summary(report: &SweepReport, path: &Path) -> Result<(), ReportError> {
    let levels = report.robust_by_level();
    let per_cell = report.records.iter().filter(|r| r.replicate.is_some()).count() / report.cells.len().max(1);
    let summary = SweepSummary {
        replicates_per_cell: per_cell,
        robust_by_level: levels
            .into_iter()
            .map(|(error_level, mean_robust)| LevelSummary {
                error_level,
                mean_robust,
            })
            .collect(),
        cells: &report.cells,
        failures: report.records.iter().filter(|r| r.failure.is_some()).count(),
    };
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    write_file(path, &(json + "\n"))
}

/// A single configured run with its forecast errors.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub result: SimulationResult,
    pub report: AnalysisReport,
    /// Achieved occupancy error per (day, room), percent.
    pub achieved_errors: Vec<(NaiveDate, Vec<f64>)>,
}

/// Simulates the whole config window with the configured occupancy error.
///
/// The realized occupancy is the measured data; each day's forecast is a
/// historical day at the configured error from it (the day itself when the
/// error is zero).
pub fn run_single(inputs: &Inputs) -> Result<SingleRun, ExperimentError> {
    let config = &inputs.config;
    let step = config.time_step as i64;
    let strings = inputs.day_strings()?;
    let first_day = config.start.date();
    let last_day = ceil_day(config.stop);
    let steps = ((config.stop - config.start).num_seconds() / step) as usize;

    let matrices = if config.error.occupancy == 0.0 {
        Vec::new()
    } else {
        strings
            .iter()
            .map(|s| build_error_matrix(s))
            .collect::<Result<Vec<_>, _>>()?
    };
    let mut achieved_errors = Vec::new();
    let mut forecasts: Vec<Vec<bool>> = vec![Vec::new(); config.rooms];
    let mut d = first_day;
    while d < last_day {
        let mut errors = Vec::new();
        for (room, room_strings) in strings.iter().enumerate() {
            let today = room_strings
                .iter()
                .find(|s| s.day == d)
                .ok_or(ExperimentError::NoDays)?;
            let pair = if config.error.occupancy == 0.0 {
                None
            } else {
                let seed = rng::replicate_seed(config.rng_seed, d.num_days_from_ce() as i64, config.error.occupancy, 0);
                Some(select_erroneous(
                    today,
                    &matrices[room],
                    config.error.occupancy,
                    config.error.tolerance,
                    rng::mix(seed, &[room as u64]),
                )?)
            };
            errors.push(pair.as_ref().map_or(0.0, |p| p.achieved_error));
            forecasts[room].extend(pair.map_or_else(|| today.bits.clone(), |p| p.erroneous.bits));
        }
        achieved_errors.push((d, errors));
        d += Duration::days(1);
    }

    let truth = inputs
        .occupancy
        .iter()
        .map(|s| slice(s, config.start, config.stop))
        .collect::<Result<Vec<_>, _>>()?;
    let told = forecasts
        .iter()
        .map(|bits| slice(&day_series(first_day, step, bits), config.start, config.stop))
        .collect::<Result<Vec<_>, _>>()?;
    if truth.iter().chain(&told).any(|s| !s.is_complete()) {
        return Err(ExperimentError::NoDays);
    }
    let weather = inputs.weather_window(config.start, steps)?;
    let run = SimulationRun::new(config.clone(), weather, truth, told, steps);
    let result = simulate(&run).map_err(|source| ExperimentError::Simulation { day: first_day, source })?;
    let report = AnalysisReport::from_result(&result, config.occupied_only);
    Ok(SingleRun {
        result,
        report,
        achieved_errors,
    })
}
