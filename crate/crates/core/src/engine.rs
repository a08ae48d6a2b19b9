//! The simulation loop.
//!
//! Each step the planner sees the forecast occupancy (and, optionally, a
//! noisy weather forecast) over its horizon; the reactive controller only
//! sees the current measured occupancy and weather. The room model and the
//! comfort accounting always use the realized occupancy and weather.

use rand::Rng;
use thiserror::Error;

use crate::analyser::{discomfort, pmv};
use crate::control::{decide, ControlContext, ControlError, ControlStrategy, ControllerMemory, Forecast};
use crate::master_io::config::SimulationConfig;
use crate::master_io::report::SimulationResult;
use crate::master_io::series::TimeSeries;
use crate::rng;
use crate::thermal::{self, stability_bound, RoomState, ThermalError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error(transparent)]
    Thermal(#[from] ThermalError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("invalid run: {0}")]
    InvalidRun(String),
}

/// Everything needed for one simulation.
///
/// `weather` and the occupancy series start at the same instant and share
/// the config's time step. The run covers `steps` samples; weather and
/// occupancy may extend beyond that to feed the planner's lookahead, and
/// are held at their last value where they run out.
#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub config: SimulationConfig,
    pub weather: TimeSeries,
    /// Realized occupancy, one series per room.
    pub true_occupancy: Vec<TimeSeries>,
    /// Occupancy shown to the controller, one series per room.
    pub forecast_occupancy: Vec<TimeSeries>,
    pub initial_state: RoomState,
    pub steps: usize,
    /// Seed for the weather forecast noise.
    pub seed: u64,
}

impl SimulationRun {
    /// Run over `steps` samples starting at the room temperature given in
    /// the config, or the first weather sample when none is configured.
    pub fn new(
        config: SimulationConfig,
        weather: TimeSeries,
        true_occupancy: Vec<TimeSeries>,
        forecast_occupancy: Vec<TimeSeries>,
        steps: usize,
    ) -> Self {
        let t0 = config
            .initial_temperature
            .or_else(|| weather.values.first().copied().flatten())
            .unwrap_or(20.0);
        let initial_state = RoomState::uniform(config.rooms, t0);
        let seed = config.rng_seed;
        Self {
            config,
            weather,
            true_occupancy,
            forecast_occupancy,
            initial_state,
            steps,
            seed,
        }
    }

    fn check(&self) -> Result<(), SimulationError> {
        let step = self.config.time_step as i64;
        let rooms = self.config.rooms;
        let invalid = |m: String| Err(SimulationError::InvalidRun(m));
        if self.initial_state.rooms() != rooms {
            return invalid(format!(
                "initial state has {} rooms, config {}",
                self.initial_state.rooms(),
                rooms
            ));
        }
        if self.true_occupancy.len() != rooms || self.forecast_occupancy.len() != rooms {
            return invalid(format!("expected occupancy for {rooms} rooms"));
        }
        for s in std::iter::once(&self.weather)
            .chain(&self.true_occupancy)
            .chain(&self.forecast_occupancy)
        {
            if s.step != step {
                return invalid(format!("series step {} s differs from time_step {step} s", s.step));
            }
            if s.start != self.weather.start {
                return invalid("series are not aligned to the same start".into());
            }
            if s.is_empty() || !s.is_complete() {
                return invalid("series must be nonempty and preprocessed".into());
            }
        }
        if self.steps == 0 {
            return invalid("nothing to simulate".into());
        }
        Ok(())
    }
}

/// Multiplies each sample by `1 + u`, `u ~ U[-percent/100, percent/100]`.
pub fn perturb_weather(weather: &TimeSeries, percent: f64, seed: u64) -> TimeSeries {
    if percent == 0.0 {
        return weather.clone();
    }
    let spread = percent / 100.0;
    let mut rng = rng::rng(seed);
    let values = weather
        .values
        .iter()
        .map(|v| {
            let u: f64 = rng.gen_range(-spread..=spread);
            v.map(|x| x * (1.0 + u))
        })
        .collect();
    TimeSeries {
        values,
        ..weather.clone()
    }
}

fn sample(series: &[f64], k: usize) -> f64 {
    series[k.min(series.len() - 1)]
}

fn bits_at(series: &[Vec<bool>], k: usize) -> Vec<bool> {
    series.iter().map(|s| s[k.min(s.len() - 1)]).collect()
}

/// Runs the simulation loop.
pub fn simulate(run: &SimulationRun) -> Result<SimulationResult, SimulationError> {
    run.check()?;
    let config = &run.config;
    let physics = config.physics();
    physics.validate().map_err(SimulationError::InvalidRun)?;
    let strategy = ControlStrategy::from_config(config);
    strategy.validate()?;
    let tau = config.time_step as f64;
    let bound = stability_bound(&physics, config.rooms, physics.max_airflow);
    if tau >= bound {
        return Err(ThermalError::IntegrationUnstable(format!(
            "time step {tau} s is not below the stability bound {bound:.1} s"
        ))
        .into());
    }
    let ctx = ControlContext {
        physics: &physics,
        pmv: config.pmv,
        comfort: config.comfort,
        time_step: tau,
    };

    let outdoor = run.weather.dense();
    let predicted_outdoor = perturb_weather(&run.weather, config.error.external_temperature, run.seed).dense();
    let truth: Vec<Vec<bool>> = run.true_occupancy.iter().map(TimeSeries::bits).collect();
    let told: Vec<Vec<bool>> = run.forecast_occupancy.iter().map(TimeSeries::bits).collect();
    let horizon = strategy.horizon_steps;

    let n = run.steps;
    let mut result = SimulationResult {
        start: run.weather.start,
        time_step: config.time_step,
        outdoor: Vec::with_capacity(n),
        temperatures: Vec::with_capacity(n),
        occupancy: Vec::with_capacity(n),
        forecast_occupancy: Vec::with_capacity(n),
        inputs: Vec::with_capacity(n),
        power_kw: Vec::with_capacity(n),
        pmv: Vec::with_capacity(n),
        discomfort: Vec::with_capacity(n),
    };
    let mut memory = ControllerMemory::default();
    let mut state = run.initial_state.clone();
    for t in 0..n {
        let t_out = sample(&outdoor, t);
        let occupied = bits_at(&truth, t);
        let forecast = Forecast {
            outdoor: (t..t + horizon).map(|k| sample(&predicted_outdoor, k)).collect(),
            occupancy: (t..t + horizon).map(|k| bits_at(&told, k)).collect(),
        };
        let input = decide(&strategy, &state, &occupied, t_out, &forecast, &ctx, t, &mut memory)?;
        let power = thermal::power(&input, &state, &physics);
        let next = thermal::step(&state, &input, t_out, &occupied, &physics, tau)?;
        let room_pmv: Vec<f64> = next
            .temperatures
            .iter()
            .zip(&input.fan_speed)
            .map(|(&temp, &v)| pmv(temp, v, &config.pmv))
            .collect();
        let room_discomfort = room_pmv
            .iter()
            .zip(&occupied)
            .map(|(&p, &o)| if o { discomfort(p, &config.comfort) } else { 0.0 })
            .collect();

        result.outdoor.push(t_out);
        result.temperatures.push(next.temperatures.clone());
        result.forecast_occupancy.push(forecast.occupancy[0].clone());
        result.occupancy.push(occupied);
        result.inputs.push(input);
        result.power_kw.push(power);
        result.pmv.push(room_pmv);
        result.discomfort.push(room_discomfort);
        state = next;
    }
    Ok(result)
}
