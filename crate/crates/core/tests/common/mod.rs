//! Synthetic office data shared by the integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::{Duration, NaiveDate, NaiveDateTime};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use roomsim::master_io::config::{parse_config, ControlMode, SimulationConfig};

pub const APPENDIX: &str = include_str!("../fixtures/appendix.cfg");

pub const STEP: i64 = 600;
pub const STEPS_PER_DAY: usize = 144;

/// Shape of a synthetic data set.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub rooms: usize,
    /// Days of history before the analysis window.
    pub history_days: usize,
    /// Days in the analysis window.
    pub analysis_days: usize,
    pub first_day: NaiveDate,
    pub control: ControlMode,
    pub seed: u64,
    /// Half-width of the arrival and departure jitter, hours.
    pub jitter: f64,
    /// Daily mean outdoor temperature is drawn from this range, °C.
    pub outdoor_mean: (f64, f64),
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            rooms: 5,
            history_days: 112,
            analysis_days: 7,
            first_day: NaiveDate::from_ymd_opt(2015, 5, 11).unwrap(),
            control: ControlMode::Mpc,
            seed: 7,
            jitter: 1.0,
            outdoor_mean: (23.0, 27.0),
        }
    }
}

impl Scenario {
    pub fn days(&self) -> usize {
        self.history_days + self.analysis_days
    }

    pub fn analysis_start(&self) -> NaiveDateTime {
        (self.first_day + Duration::days(self.history_days as i64))
            .and_hms_opt(0, 0, 0)
            .unwrap()
    }

    pub fn analysis_stop(&self) -> NaiveDateTime {
        self.analysis_start() + Duration::days(self.analysis_days as i64)
    }
}

fn slot(hours: f64) -> i64 {
    (hours * 6.0).round() as i64
}

/// One person's day in an office: arrival, lunch, meetings, departure.
fn office_day(rng: &mut ChaCha8Rng, arrive: f64, leave: f64, jitter: f64) -> Vec<bool> {
    let mut bits = vec![false; STEPS_PER_DAY];
    if rng.gen_bool(0.04) {
        return bits;
    }
    let a = slot(arrive + rng.gen_range(-jitter..jitter)).clamp(0, 143);
    let l = slot(leave + rng.gen_range(-1.3 * jitter..1.3 * jitter)).clamp(a + 1, 144);
    for b in &mut bits[a as usize..l as usize] {
        *b = true;
    }
    if rng.gen_bool(0.7) {
        let s = slot(12.0 + rng.gen_range(-0.5..0.75));
        let len = rng.gen_range(2..6);
        for i in s..(s + len).min(144) {
            bits[i as usize] = false;
        }
    }
    for _ in 0..rng.gen_range(0..3) {
        let s = slot(rng.gen_range(9.0..17.0));
        let len = rng.gen_range(3..9);
        for i in s..(s + len).min(144) {
            bits[i as usize] = false;
        }
    }
    bits
}

/// Occupancy bits per room, per day.
pub fn occupancy(s: &Scenario) -> Vec<Vec<Vec<bool>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    (0..s.rooms)
        .map(|room| {
            let arrive = 8.0 + 0.4 * room as f64;
            let leave = 17.0 + 0.3 * room as f64;
            (0..s.days())
                .map(|_| office_day(&mut rng, arrive, leave, s.jitter))
                .collect()
        })
        .collect()
}

/// Warm-season outdoor temperature, one value per step.
pub fn weather(s: &Scenario) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ 0x5eed);
    let mut out = Vec::with_capacity(s.days() * STEPS_PER_DAY);
    for _ in 0..=s.days() {
        let mean = rng.gen_range(s.outdoor_mean.0..s.outdoor_mean.1);
        let swing = rng.gen_range(4.0..7.0);
        for k in 0..STEPS_PER_DAY {
            let hour = k as f64 / 6.0;
            let phase = (hour - 15.0) / 24.0 * std::f64::consts::TAU;
            out.push(mean + swing * phase.cos());
        }
    }
    out
}

fn stamp(t: NaiveDateTime) -> String {
    t.format("%Y%m%dT%H%M").to_string()
}

/// Writes data files and a config into `dir`; returns the config path.
pub fn write_fixture(
    dir: &Path,
    s: &Scenario,
    tweak: impl FnOnce(&mut SimulationConfig),
) -> (PathBuf, SimulationConfig) {
    let origin = s.first_day.and_hms_opt(0, 0, 0).unwrap();

    let mut w = String::from("timestamp,temperature\n");
    for (k, v) in weather(s).iter().enumerate() {
        let _ = writeln!(w, "{},{v:.3}", stamp(origin + Duration::seconds(STEP * k as i64)));
    }
    std::fs::write(dir.join("weather.csv"), w).unwrap();

    let occ = occupancy(s);
    let mut o = String::from("timestamp,zone,room,occupied\n");
    for day in 0..s.days() {
        for k in 0..STEPS_PER_DAY {
            let t = stamp(origin + Duration::seconds(STEP * (day * STEPS_PER_DAY + k) as i64));
            for (room, days) in occ.iter().enumerate() {
                let _ = writeln!(o, "{t},1,{},{}", room + 1, u8::from(days[day][k]));
            }
        }
    }
    std::fs::write(dir.join("occupancy.csv"), o).unwrap();

    let mut config = appendix_config();
    config.rooms = s.rooms;
    config.start = s.analysis_start();
    config.stop = s.analysis_stop();
    config.control = s.control;
    config.files.weather = "weather.csv".into();
    config.files.occupancy = "occupancy.csv".into();
    config.files.output = "out/run".into();
    tweak(&mut config);
    let path = dir.join("building.cfg");
    std::fs::write(&path, config.to_config_text()).unwrap();
    let mut resolved = config.clone();
    resolved.resolve_paths(dir);
    (path, resolved)
}

/// The appendix example config with its file placeholders kept.
pub fn appendix_config() -> SimulationConfig {
    parse_config(APPENDIX).expect("appendix config parses")
}
