//! HVAC control strategies.
//!
//! Three strategies are available, matching the configuration codes:
//! no control (HVAC always off), a reactive occupancy-gated bang-bang
//! controller on the PMV band, and a two-timescale receding-horizon planner.
//!
//! The planner holds the supply air temperature for a slow period (one hour
//! by default) and re-plans per-room airflow every step. At a slow decision
//! instant it evaluates every supply temperature on its grid; in between it
//! re-optimises airflow only. The objective over the horizon is
//!
//! ```text
//! J = Σ_k [ P_k·τ/3600 + λ·Σ_j O_kj·D_kj ]
//! ```
//!
//! with `P_k` the HVAC power of step `k`, `D_kj` the discomfort of room `j`
//! at the end of step `k`, and `O_kj` the forecast occupancy. Airflow is a
//! grid search: exhaustive when the number of airflow schedules is small,
//! otherwise coordinate descent over (step, room) pairs until a sweep makes
//! no change. Ties prefer lower energy, then lower supply temperature, then
//! lower airflow.

use serde::Serialize;
use thiserror::Error;

use crate::analyser::{discomfort, pmv, ComfortBand, PmvCoefficients};
use crate::master_io::config::{ControlMode, SimulationConfig};
use crate::thermal::{advance_into, power_raw, BuildingPhysics, ControlInput, RoomState};

/// Largest number of airflow schedules searched exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 4096;
/// Cap on coordinate-descent sweeps.
pub const MAX_SWEEPS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("forecast covers {got} steps but the horizon needs {needed}")]
    InfeasibleForecast { needed: usize, got: usize },
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
}

/// Plant knowledge shared by all strategies.
#[derive(Debug, Clone, Copy)]
pub struct ControlContext<'a> {
    pub physics: &'a BuildingPhysics,
    pub pmv: PmvCoefficients,
    pub comfort: ComfortBand,
    /// Seconds per step.
    pub time_step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ControlStrategy {
    pub mode: ControlMode,
    /// Planning horizon in steps.
    pub horizon_steps: usize,
    /// Steps a chosen supply temperature is held.
    pub hold_steps: usize,
    /// Candidate supply temperatures, ascending, °C.
    pub tsa_grid: Vec<f64>,
    /// Candidate per-room airflows, ascending, m³/s.
    pub airflow_grid: Vec<f64>,
    /// kWh charged per unit of discomfort per room-step.
    pub lambda: f64,
    /// PMV hysteresis of the reactive controller.
    pub deadband: f64,
}

impl ControlStrategy {
    pub fn from_config(config: &SimulationConfig) -> Self {
        Self {
            mode: config.control,
            horizon_steps: config.horizon_steps(),
            hold_steps: (config.mpc.tsa_hold / config.time_step) as usize,
            tsa_grid: config.mpc.tsa_grid.clone(),
            airflow_grid: config.mpc.airflow_grid.clone(),
            lambda: config.mpc.lambda,
            deadband: config.reactive.deadband,
        }
    }

    pub fn validate(&self) -> Result<(), ControlError> {
        let sorted = |g: &[f64]| g.windows(2).all(|w| w[0] < w[1]);
        if self.tsa_grid.is_empty() || self.airflow_grid.is_empty() {
            return Err(ControlError::InvalidStrategy("grids must be nonempty".into()));
        }
        if !sorted(&self.tsa_grid) || !sorted(&self.airflow_grid) {
            return Err(ControlError::InvalidStrategy("grids must be strictly ascending".into()));
        }
        if self.airflow_grid[0] < 0.0 {
            return Err(ControlError::InvalidStrategy(
                "airflow grid must be non-negative".into(),
            ));
        }
        if self.horizon_steps == 0 || self.hold_steps == 0 {
            return Err(ControlError::InvalidStrategy(
                "horizon and hold must be >= 1 step".into(),
            ));
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return Err(ControlError::InvalidStrategy("lambda must be >= 0".into()));
        }
        Ok(())
    }

    /// Actuator band for the supply air temperature.
    pub fn supply_band(&self) -> (f64, f64) {
        (self.tsa_grid[0], *self.tsa_grid.last().unwrap())
    }
}

/// What the planner is told about the coming steps.
#[derive(Debug, Clone, PartialEq)]
pub struct Forecast {
    /// Outdoor temperature per future step, °C.
    pub outdoor: Vec<f64>,
    /// Occupancy per future step, one bit per room.
    pub occupancy: Vec<Vec<bool>>,
}

impl Forecast {
    pub fn steps(&self) -> usize {
        self.outdoor.len().min(self.occupancy.len())
    }
}

/// State a controller carries from one step to the next.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ControllerMemory {
    pub previous: Option<ControlInput>,
    pub held_supply: Option<f64>,
    /// Last airflow plan, `[step][room]`.
    pub plan: Option<Vec<Vec<f64>>>,
}

/// HVAC off.
pub fn no_control(state: &RoomState) -> ControlInput {
    ControlInput::off(state)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Demand {
    Cool,
    Heat,
}

/// Occupancy-gated bang-bang control on the PMV band.
///
/// An occupied room whose still-air PMV is above the band asks for cooling
/// (coldest supply temperature), below the band for heating (warmest). It
/// gets the smallest airflow on the grid predicted to bring PMV back inside
/// the band after one step, or the largest if none does. A room that was
/// being served keeps its airflow until its PMV is `deadband` inside the
/// band. The supply temperature is shared, so the zone follows the majority
/// demand (cooling on ties) and rooms asking for the other mode get nothing.
pub fn reactive(
    state: &RoomState,
    occupancy_now: &[bool],
    outdoor: f64,
    previous: Option<&ControlInput>,
    ctx: &ControlContext,
    strategy: &ControlStrategy,
) -> ControlInput {
    let n = state.rooms();
    let band = ctx.comfort;
    let previous_mode = previous.filter(|p| !p.is_off()).map(|p| {
        if p.supply_air_temperature < state.mean() {
            Demand::Cool
        } else {
            Demand::Heat
        }
    });

    let mut demands = vec![None; n];
    let mut holds = vec![false; n];
    for j in 0..n {
        if !occupancy_now[j] {
            continue;
        }
        let still = pmv(state.temperatures[j], 0.0, &ctx.pmv);
        if still > band.upper {
            demands[j] = Some(Demand::Cool);
        } else if still < band.lower {
            demands[j] = Some(Demand::Heat);
        } else if let (Some(mode), Some(p)) = (previous_mode, previous) {
            let served = p.airflow.get(j).is_some_and(|&a| a > 0.0);
            let holding = match mode {
                Demand::Cool => still > band.upper - strategy.deadband,
                Demand::Heat => still < band.lower + strategy.deadband,
            };
            if served && holding {
                demands[j] = Some(mode);
                holds[j] = true;
            }
        }
    }

    let cool = demands.iter().filter(|d| **d == Some(Demand::Cool)).count();
    let heat = demands.iter().filter(|d| **d == Some(Demand::Heat)).count();
    let mode = match (cool, heat) {
        (0, 0) => return ControlInput::off(state),
        (c, h) if c >= h => Demand::Cool,
        _ => Demand::Heat,
    };
    let (lo, hi) = strategy.supply_band();
    let supply = if mode == Demand::Cool { lo } else { hi };
    let options: Vec<f64> = strategy
        .airflow_grid
        .iter()
        .copied()
        .filter(|&a| a > 0.0 && a <= ctx.physics.max_airflow)
        .collect();
    let Some(&largest) = options.last() else {
        return ControlInput::off(state);
    };

    let mut airflow = vec![0.0; n];
    let mut probe = vec![0.0; n];
    let mut next = vec![0.0; n];
    for j in 0..n {
        if demands[j] != Some(mode) {
            continue;
        }
        if holds[j] {
            airflow[j] = previous.map_or(0.0, |p| p.airflow[j]);
            continue;
        }
        airflow[j] = options
            .iter()
            .copied()
            .find(|&a| {
                probe.fill(0.0);
                probe[j] = a;
                advance_into(
                    &state.temperatures,
                    &probe,
                    supply,
                    outdoor,
                    occupancy_now,
                    ctx.physics,
                    ctx.time_step,
                    &mut next,
                );
                let predicted = pmv(next[j], ctx.physics.fan_speed(a), &ctx.pmv);
                match mode {
                    Demand::Cool => predicted <= band.upper,
                    Demand::Heat => predicted >= band.lower,
                }
            })
            .unwrap_or(largest);
    }
    ControlInput::new(supply, airflow, ctx.physics)
}

/// Outcome of one planning call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpcPlan {
    /// Input to apply now (first step of the plan).
    pub input: ControlInput,
    pub supply_air_temperature: f64,
    /// Planned airflow, `[step][room]`.
    pub airflow: Vec<Vec<f64>>,
    /// Objective value J.
    pub objective: f64,
    /// Energy part of J, kWh.
    pub energy_kwh: f64,
    /// Σ over steps and rooms of occupancy-weighted discomfort.
    pub discomfort: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Score {
    objective: f64,
    energy: f64,
    discomfort: f64,
}

impl Score {
    fn better_than(&self, other: &Score) -> bool {
        self.objective < other.objective || (self.objective == other.objective && self.energy < other.energy)
    }

    fn ties(&self, other: &Score) -> bool {
        self.objective == other.objective && self.energy == other.energy
    }
}

/// Rolls the plant forward over the horizon under a fixed supply temperature.
struct Evaluator<'a> {
    ctx: &'a ControlContext<'a>,
    forecast: &'a Forecast,
    lambda: f64,
    supply: f64,
    steps: usize,
    rooms: usize,
    /// `states[k]` is the room state at the start of step `k`.
    states: Vec<Vec<f64>>,
    energy: Vec<f64>,
    discomfort: Vec<f64>,
}

impl<'a> Evaluator<'a> {
    fn new(ctx: &'a ControlContext<'a>, forecast: &'a Forecast, lambda: f64, steps: usize, initial: &[f64]) -> Self {
        let rooms = initial.len();
        let mut states = vec![vec![0.0; rooms]; steps + 1];
        states[0].copy_from_slice(initial);
        Self {
            ctx,
            forecast,
            lambda,
            supply: 0.0,
            steps,
            rooms,
            states,
            energy: vec![0.0; steps],
            discomfort: vec![0.0; steps],
        }
    }

    /// Recomputes the trajectory from step `from` onward.
    fn rollout(&mut self, plan: &[Vec<f64>], from: usize) {
        let physics = self.ctx.physics;
        let tau = self.ctx.time_step;
        for k in from..self.steps {
            let (head, tail) = self.states.split_at_mut(k + 1);
            let current = &head[k];
            let next = &mut tail[0];
            let return_air = current.iter().sum::<f64>() / self.rooms as f64;
            let p = power_raw(&plan[k], self.supply, return_air, physics);
            self.energy[k] = p * tau / 3600.0;
            let occupancy = &self.forecast.occupancy[k];
            advance_into(
                current,
                &plan[k],
                self.supply,
                self.forecast.outdoor[k],
                occupancy,
                physics,
                tau,
                next,
            );
            let mut d = 0.0;
            for j in 0..self.rooms {
                if occupancy[j] {
                    let v = physics.fan_speed(plan[k][j]);
                    d += discomfort(pmv(next[j], v, &self.ctx.pmv), &self.ctx.comfort);
                }
            }
            self.discomfort[k] = d;
        }
    }

    fn score(&self) -> Score {
        let mut objective = 0.0;
        let mut energy = 0.0;
        let mut discomfort = 0.0;
        for k in 0..self.steps {
            objective += self.energy[k] + self.lambda * self.discomfort[k];
            energy += self.energy[k];
            discomfort += self.discomfort[k];
        }
        Score {
            objective,
            energy,
            discomfort,
        }
    }

    fn evaluate(&mut self, plan: &[Vec<f64>], from: usize) -> Score {
        self.rollout(plan, from);
        self.score()
    }
}

/// Best airflow schedule for a fixed supply temperature.
fn optimise_airflow(eval: &mut Evaluator, grid: &[f64], start: Vec<Vec<f64>>) -> (Vec<Vec<f64>>, Score) {
    let steps = eval.steps;
    let rooms = eval.rooms;
    let vars = steps * rooms;
    let exhaustive = (0..vars)
        .try_fold(1usize, |acc, _| {
            acc.checked_mul(grid.len()).filter(|&c| c <= EXHAUSTIVE_LIMIT)
        })
        .is_some();

    if exhaustive {
        // Odometer over (step, room) in row-major order; the first schedule
        // reaching the best score is the lexicographically smallest.
        let mut digits = vec![0usize; vars];
        let mut plan = vec![vec![grid[0]; rooms]; steps];
        let mut best_plan = plan.clone();
        let mut best = eval.evaluate(&plan, 0);
        loop {
            let mut pos = vars;
            loop {
                if pos == 0 {
                    return (best_plan, best);
                }
                pos -= 1;
                digits[pos] += 1;
                if digits[pos] < grid.len() {
                    break;
                }
                digits[pos] = 0;
                plan[pos / rooms][pos % rooms] = grid[0];
            }
            plan[pos / rooms][pos % rooms] = grid[digits[pos]];
            let score = eval.evaluate(&plan, pos / rooms);
            if score.better_than(&best) {
                best = score;
                best_plan.clone_from(&plan);
            }
        }
    }

    let zero = vec![vec![grid[0]; rooms]; steps];
    let zero_score = eval.evaluate(&zero, 0);
    let mut plan = start;
    let mut current = eval.evaluate(&plan, 0);
    for _ in 0..MAX_SWEEPS {
        let mut changed = false;
        for k in 0..steps {
            for j in 0..rooms {
                let original = plan[k][j];
                let mut choice = (original, current);
                for &a in grid {
                    if a == original {
                        continue;
                    }
                    plan[k][j] = a;
                    let score = eval.evaluate(&plan, k);
                    if score.better_than(&choice.1) || (score.ties(&choice.1) && a < choice.0) {
                        choice = (a, score);
                    }
                }
                plan[k][j] = choice.0;
                if choice.0 != original {
                    changed = true;
                    current = choice.1;
                }
                eval.rollout(&plan, k);
            }
        }
        if !changed {
            break;
        }
    }
    if zero_score.better_than(&current) {
        (zero, zero_score)
    } else {
        (plan, current)
    }
}

/// Receding-horizon plan for the current step.
///
/// `step_index` counts steps since the start of the run; a new supply
/// temperature is chosen whenever it is a multiple of the hold period or
/// nothing is held yet. `memory.plan`, when present, warm-starts the
/// airflow search after being shifted by one step.
pub fn mpc_plan(
    state: &RoomState,
    forecast: &Forecast,
    ctx: &ControlContext,
    strategy: &ControlStrategy,
    step_index: usize,
    memory: &ControllerMemory,
) -> Result<MpcPlan, ControlError> {
    strategy.validate()?;
    let steps = strategy.horizon_steps;
    if forecast.steps() < steps {
        return Err(ControlError::InfeasibleForecast {
            needed: steps,
            got: forecast.steps(),
        });
    }
    let rooms = state.rooms();
    let grid: Vec<f64> = strategy
        .airflow_grid
        .iter()
        .copied()
        .filter(|&a| a <= ctx.physics.max_airflow)
        .collect();
    if grid.is_empty() {
        return Err(ControlError::InvalidStrategy(
            "no airflow candidate within the actuator limit".into(),
        ));
    }
    let choose_supply = memory.held_supply.is_none() || step_index.is_multiple_of(strategy.hold_steps);
    let supplies: Vec<f64> = match (choose_supply, memory.held_supply) {
        (false, Some(held)) => vec![held],
        _ => strategy.tsa_grid.clone(),
    };

    let zero = vec![vec![grid[0]; rooms]; steps];
    let warm = memory
        .plan
        .as_ref()
        .filter(|p| p.len() == steps && p.iter().all(|r| r.len() == rooms))
        .map(|p| {
            let mut shifted: Vec<Vec<f64>> = p[1..].to_vec();
            shifted.push(p[steps - 1].clone());
            shifted
        })
        .unwrap_or_else(|| zero.clone());

    let unoccupied = forecast.occupancy[..steps].iter().all(|r| r.iter().all(|&o| !o));
    let mut eval = Evaluator::new(ctx, forecast, strategy.lambda, steps, &state.temperatures);
    let mut best: Option<(f64, Vec<Vec<f64>>, Score)> = None;
    for &supply in &supplies {
        eval.supply = supply;
        let (plan, score) = if unoccupied {
            let s = eval.evaluate(&zero, 0);
            (zero.clone(), s)
        } else {
            optimise_airflow(&mut eval, &grid, warm.clone())
        };
        if best.as_ref().is_none_or(|(_, _, b)| score.better_than(b)) {
            best = Some((supply, plan, score));
        }
    }
    let (supply, airflow, score) = best.expect("supply grid is nonempty");
    Ok(MpcPlan {
        input: ControlInput::new(supply, airflow[0].clone(), ctx.physics),
        supply_air_temperature: supply,
        airflow,
        objective: score.objective,
        energy_kwh: score.energy,
        discomfort: score.discomfort,
    })
}

/// Produces the input for the current step under `strategy` and updates
/// the controller memory. No-control and reactive ignore the forecast.
#[allow(clippy::too_many_arguments)]
pub fn decide(
    strategy: &ControlStrategy,
    state: &RoomState,
    occupancy_now: &[bool],
    outdoor_now: f64,
    forecast: &Forecast,
    ctx: &ControlContext,
    step_index: usize,
    memory: &mut ControllerMemory,
) -> Result<ControlInput, ControlError> {
    let input = match strategy.mode {
        ControlMode::NoControl => no_control(state),
        ControlMode::Reactive => reactive(
            state,
            occupancy_now,
            outdoor_now,
            memory.previous.as_ref(),
            ctx,
            strategy,
        ),
        ControlMode::Mpc => {
            let plan = mpc_plan(state, forecast, ctx, strategy, step_index, memory)?;
            memory.held_supply = Some(plan.supply_air_temperature);
            memory.plan = Some(plan.airflow);
            plan.input
        }
    };
    memory.previous = Some(input.clone());
    Ok(input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal;

    fn strategy(mode: ControlMode, horizon_steps: usize) -> ControlStrategy {
        ControlStrategy {
            mode,
            horizon_steps,
            hold_steps: 6,
            tsa_grid: vec![12.0, 14.0, 16.0, 30.0, 35.0, 40.0],
            airflow_grid: vec![0.0, 0.1, 0.25, 0.5, 1.0],
            lambda: 1.0,
            deadband: 0.1,
        }
    }

    fn ctx(physics: &BuildingPhysics) -> ControlContext<'_> {
        ControlContext {
            physics,
            pmv: PmvCoefficients::default(),
            comfort: ComfortBand::default(),
            time_step: 600.0,
        }
    }

    fn forecast(steps: usize, rooms: usize, occupied: bool, outdoor: f64) -> Forecast {
        Forecast {
            outdoor: vec![outdoor; steps],
            occupancy: vec![vec![occupied; rooms]; steps],
        }
    }

    #[test]
    fn no_control_is_off() {
        let p = BuildingPhysics::default();
        let s = RoomState {
            temperatures: vec![18.0, 25.0, 30.0],
        };
        let u = no_control(&s);
        assert!(u.airflow.iter().all(|&a| a == 0.0));
        assert_eq!(thermal::power(&u, &s, &p), 0.0);
    }

    #[test]
    fn no_control_relaxes_toward_outdoor() {
        let p = BuildingPhysics::default();
        let mut s = RoomState::uniform(3, 20.0);
        let mut gap = 10.0;
        for _ in 0..50 {
            s = thermal::step(&s, &no_control(&s), 30.0, &[false; 3], &p, 600.0).unwrap();
            let now = 30.0 - s.temperatures[1];
            assert!(now < gap);
            gap = now;
        }
    }

    #[test]
    fn reactive_gates_on_occupancy_and_band() {
        let p = BuildingPhysics::default();
        let c = ctx(&p);
        let st = strategy(ControlMode::Reactive, 1);
        let hot = RoomState::uniform(3, 30.0);
        let u = reactive(&hot, &[false; 3], 30.0, None, &c, &st);
        assert!(u.is_off());

        let comfy = RoomState::uniform(2, 22.0);
        let u = reactive(&comfy, &[true; 2], 22.0, None, &c, &st);
        assert!(u.is_off());
    }

    #[test]
    fn reactive_cools_a_hot_occupied_room() {
        let p = BuildingPhysics::default();
        let c = ctx(&p);
        let st = strategy(ControlMode::Reactive, 1);
        assert!((pmv(30.0, 0.0, &c.pmv) - 1.9512).abs() < 1e-4);
        let s = RoomState::uniform(2, 30.0);
        let u = reactive(&s, &[true, false], 30.0, None, &c, &st);
        assert_eq!(u.supply_air_temperature, 12.0);
        assert!(u.airflow[0] > 0.0);
        assert_eq!(u.airflow[1], 0.0);
        u.validate(&p, st.supply_band()).unwrap();
    }

    #[test]
    fn reactive_heats_a_cold_room_and_holds_in_deadband() {
        let p = BuildingPhysics::default();
        let c = ctx(&p);
        let st = strategy(ControlMode::Reactive, 1);
        let cold = RoomState::uniform(1, 15.0);
        let u = reactive(&cold, &[true], 15.0, None, &c, &st);
        assert_eq!(u.supply_air_temperature, 40.0);
        assert!(u.airflow[0] > 0.0);

        // PMV just inside the band: keep heating until it is deadband inside.
        let t = (c.pmv.p4 - 0.45) / c.pmv.p1;
        let near = RoomState::uniform(1, t);
        let held = reactive(&near, &[true], 15.0, Some(&u), &c, &st);
        assert_eq!(held.airflow, u.airflow);
        let fresh = reactive(&near, &[true], 15.0, None, &c, &st);
        assert!(fresh.is_off());
    }

    #[test]
    fn mpc_idle_when_nobody_expected() {
        let p = BuildingPhysics::default();
        let c = ctx(&p);
        for lambda in [0.0, 1.0, 50.0] {
            let st = ControlStrategy {
                lambda,
                ..strategy(ControlMode::Mpc, 6)
            };
            let s = RoomState::uniform(3, 31.0);
            let plan = mpc_plan(
                &s,
                &forecast(6, 3, false, 33.0),
                &c,
                &st,
                0,
                &ControllerMemory::default(),
            )
            .unwrap();
            assert!(plan.airflow.iter().flatten().all(|&a| a == 0.0));
            assert_eq!(plan.objective, 0.0);
        }
    }

    #[test]
    fn mpc_with_zero_weight_never_runs_fans() {
        let p = BuildingPhysics::default();
        let c = ctx(&p);
        let st = ControlStrategy {
            lambda: 0.0,
            ..strategy(ControlMode::Mpc, 6)
        };
        let s = RoomState::uniform(2, 32.0);
        let plan = mpc_plan(
            &s,
            &forecast(6, 2, true, 35.0),
            &c,
            &st,
            0,
            &ControllerMemory::default(),
        )
        .unwrap();
        assert!(plan.airflow.iter().flatten().all(|&a| a == 0.0));
    }

    #[test]
    fn mpc_cools_when_comfort_matters() {
        let p = BuildingPhysics::default();
        let c = ctx(&p);
        let st = ControlStrategy {
            lambda: 5.0,
            ..strategy(ControlMode::Mpc, 6)
        };
        let s = RoomState::uniform(2, 28.0);
        let plan = mpc_plan(
            &s,
            &forecast(6, 2, true, 32.0),
            &c,
            &st,
            0,
            &ControllerMemory::default(),
        )
        .unwrap();
        assert!(plan.supply_air_temperature < 20.0);
        assert!(plan.airflow.iter().flatten().any(|&a| a > 0.0));
        plan.input.validate(&p, st.supply_band()).unwrap();
    }

    #[test]
    fn mpc_holds_supply_between_slow_decisions() {
        let p = BuildingPhysics::default();
        let c = ctx(&p);
        let st = strategy(ControlMode::Mpc, 3);
        let memory = ControllerMemory {
            held_supply: Some(35.0),
            ..Default::default()
        };
        let s = RoomState::uniform(2, 28.0);
        let plan = mpc_plan(&s, &forecast(3, 2, true, 32.0), &c, &st, 3, &memory).unwrap();
        assert_eq!(plan.supply_air_temperature, 35.0);
        let plan = mpc_plan(&s, &forecast(3, 2, true, 32.0), &c, &st, 6, &memory).unwrap();
        assert!(plan.supply_air_temperature < 20.0);
    }

    #[test]
    fn decide_dispatches() {
        let p = BuildingPhysics::default();
        let c = ctx(&p);
        let s = RoomState::uniform(2, 30.0);
        let f = forecast(4, 2, true, 30.0);
        let mut memory = ControllerMemory::default();
        let u = decide(
            &strategy(ControlMode::NoControl, 4),
            &s,
            &[true; 2],
            30.0,
            &f,
            &c,
            0,
            &mut memory,
        )
        .unwrap();
        assert!(u.is_off());

        let mpc = strategy(ControlMode::Mpc, 4);
        let u = decide(&mpc, &s, &[true; 2], 30.0, &f, &c, 0, &mut memory).unwrap();
        let direct = mpc_plan(&s, &f, &c, &mpc, 0, &ControllerMemory::default()).unwrap();
        assert_eq!(u, direct.input);
        assert!(memory.held_supply.is_some());

        let short = forecast(2, 2, true, 30.0);
        assert_eq!(
            decide(
                &mpc,
                &s,
                &[true; 2],
                30.0,
                &short,
                &c,
                0,
                &mut ControllerMemory::default()
            ),
            Err(ControlError::InfeasibleForecast { needed: 4, got: 2 })
        );
    }

    #[test]
    fn invalid_strategies_are_rejected() {
        let mut st = strategy(ControlMode::Mpc, 4);
        st.tsa_grid = vec![16.0, 12.0];
        assert!(st.validate().is_err());
        st.tsa_grid = vec![];
        assert!(st.validate().is_err());
        let mut st = strategy(ControlMode::Mpc, 0);
        assert!(st.validate().is_err());
        st.horizon_steps = 1;
        assert!(st.validate().is_ok());
    }
}
