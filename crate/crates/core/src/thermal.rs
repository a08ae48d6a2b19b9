//! Lumped RC room model.
//!
//! Each room is a single thermal capacitance exchanging heat with outdoors,
//! with its neighbours through shared walls (rooms sit in a row, room `j`
//! touching `j-1` and `j+1`), with occupants and equipment, and with the
//! supply air delivered by the AHU. Integration is explicit Euler at the
//! sampling step.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Room air temperatures outside this range mean the integration blew up.
pub const SANITY_ENVELOPE: (f64, f64) = (-40.0, 60.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ThermalError {
    #[error("integration unstable: {0}")]
    IntegrationUnstable(String),
    #[error("invalid control input: {0}")]
    InvalidControl(String),
    #[error("dimension mismatch: expected {expected} rooms, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingPhysics {
    /// Thermal capacity per room, kJ/K.
    pub thermal_capacity: f64,
    /// Conductance to outdoors, kJ/(K·s).
    pub outside_coeff: f64,
    /// Conductance between adjacent rooms, kJ/(K·s).
    pub wall_coeff: f64,
    /// Equipment heat gain while the room is served, kW.
    pub equipment_load: f64,
    /// Heat gain of an occupied room, kW.
    pub occupant_load: f64,
    pub fan_coefficient: f64,
    /// kg/m³
    pub air_density: f64,
    /// kJ/(kg·K)
    pub specific_heat: f64,
    pub heating_efficiency: f64,
    pub cooling_efficiency: f64,
    /// Supply duct cross-section, m². Converts airflow to air speed.
    pub duct_area: f64,
    /// Upper actuator limit on per-room airflow, m³/s.
    pub max_airflow: f64,
}

impl Default for BuildingPhysics {
    fn default() -> Self {
        Self {
            thermal_capacity: 2000.0,
            outside_coeff: 0.048,
            wall_coeff: 0.024,
            equipment_load: 0.1,
            occupant_load: 0.1,
            fan_coefficient: 0.094,
            air_density: 1.225,
            specific_heat: 1.003,
            heating_efficiency: 0.9,
            cooling_efficiency: 0.9,
            duct_area: 1.0,
            max_airflow: 1.0,
        }
    }
}

impl BuildingPhysics {
    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("thermal_capacity", self.thermal_capacity),
            ("outside_coeff", self.outside_coeff),
            ("fan_coefficient", self.fan_coefficient),
            ("air_density", self.air_density),
            ("specific_heat", self.specific_heat),
            ("heating_efficiency", self.heating_efficiency),
            ("cooling_efficiency", self.cooling_efficiency),
            ("duct_area", self.duct_area),
            ("max_airflow", self.max_airflow),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("{name} must be > 0, got {v}"));
            }
        }
        let non_negative = [
            ("wall_coeff", self.wall_coeff),
            ("equipment_load", self.equipment_load),
            ("occupant_load", self.occupant_load),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(format!("{name} must be >= 0, got {v}"));
            }
        }
        Ok(())
    }

    /// Air speed (m/s) produced by an airflow (m³/s).
    pub fn fan_speed(&self, airflow: f64) -> f64 {
        airflow / self.duct_area
    }
}

/// Room air temperatures, one per room, °C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoomState {
    pub temperatures: Vec<f64>,
}

impl RoomState {
    pub fn uniform(rooms: usize, temperature: f64) -> Self {
        Self {
            temperatures: vec![temperature; rooms],
        }
    }

    pub fn rooms(&self) -> usize {
        self.temperatures.len()
    }

    /// Return-air temperature seen by the AHU.
    pub fn mean(&self) -> f64 {
        mean(&self.temperatures)
    }
}

/// HVAC actuation for one step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlInput {
    /// Shared by every room of the zone, °C.
    pub supply_air_temperature: f64,
    /// Per-room supply air volume flow, m³/s.
    pub airflow: Vec<f64>,
    /// Per-room air speed derived from the airflow, m/s.
    pub fan_speed: Vec<f64>,
}

impl ControlInput {
    pub fn new(supply_air_temperature: f64, airflow: Vec<f64>, physics: &BuildingPhysics) -> Self {
        let fan_speed = airflow.iter().map(|&a| physics.fan_speed(a)).collect();
        Self {
            supply_air_temperature,
            airflow,
            fan_speed,
        }
    }

    /// HVAC off: no airflow, supply air at return-air temperature.
    pub fn off(state: &RoomState) -> Self {
        Self {
            supply_air_temperature: state.mean(),
            airflow: vec![0.0; state.rooms()],
            fan_speed: vec![0.0; state.rooms()],
        }
    }

    pub fn is_off(&self) -> bool {
        self.airflow.iter().all(|&a| a == 0.0)
    }

    /// Checks airflow limits and, when any room is served, the supply
    /// temperature band.
    pub fn validate(&self, physics: &BuildingPhysics, supply_band: (f64, f64)) -> Result<(), ThermalError> {
        for (j, &a) in self.airflow.iter().enumerate() {
            if !(0.0..=physics.max_airflow).contains(&a) {
                return Err(ThermalError::InvalidControl(format!(
                    "airflow[{j}] = {a} outside [0, {}]",
                    physics.max_airflow
                )));
            }
        }
        if !self.is_off() && !(supply_band.0..=supply_band.1).contains(&self.supply_air_temperature) {
            return Err(ThermalError::InvalidControl(format!(
                "supply air temperature {} outside [{}, {}]",
                self.supply_air_temperature, supply_band.0, supply_band.1
            )));
        }
        Ok(())
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Number of neighbours of the most connected room.
fn max_degree(rooms: usize) -> usize {
    rooms.saturating_sub(1).min(2)
}

/// Largest explicit-Euler step (seconds) that keeps the update a contraction.
pub fn stability_bound(physics: &BuildingPhysics, rooms: usize, max_airflow: f64) -> f64 {
    physics.thermal_capacity
        / (physics.outside_coeff
            + max_degree(rooms) as f64 * physics.wall_coeff
            + physics.air_density * max_airflow * physics.specific_heat)
}

/// Net heat flow into each room, kW.
pub fn heat_flows(
    temperatures: &[f64],
    input: &ControlInput,
    outdoor: f64,
    occupancy: &[bool],
    physics: &BuildingPhysics,
) -> Vec<f64> {
    let mut out = vec![0.0; temperatures.len()];
    heat_flows_into(
        temperatures,
        &input.airflow,
        input.supply_air_temperature,
        outdoor,
        occupancy,
        physics,
        &mut out,
    );
    out
}

fn heat_flows_into(
    temperatures: &[f64],
    airflow: &[f64],
    supply: f64,
    outdoor: f64,
    occupancy: &[bool],
    physics: &BuildingPhysics,
    out: &mut [f64],
) {
    let n = temperatures.len();
    for j in 0..n {
        let t = temperatures[j];
        let mut walls = 0.0;
        if j > 0 {
            walls += temperatures[j - 1] - t;
        }
        if j + 1 < n {
            walls += temperatures[j + 1] - t;
        }
        let occupants = if occupancy[j] { physics.occupant_load } else { 0.0 };
        let equipment = if airflow[j] > 0.0 { physics.equipment_load } else { 0.0 };
        out[j] = physics.outside_coeff * (outdoor - t)
            + physics.wall_coeff * walls
            + occupants
            + equipment
            + physics.air_density * airflow[j] * physics.specific_heat * (supply - t);
    }
}

/// Unchecked Euler update used by the planners' inner loops; `step` is the
/// checked entry point and produces bit-identical results.
#[allow(clippy::too_many_arguments)]
pub(crate) fn advance_into(
    temperatures: &[f64],
    airflow: &[f64],
    supply: f64,
    outdoor: f64,
    occupancy: &[bool],
    physics: &BuildingPhysics,
    time_step: f64,
    out: &mut [f64],
) {
    heat_flows_into(temperatures, airflow, supply, outdoor, occupancy, physics, out);
    let gain = time_step / physics.thermal_capacity;
    for (o, t) in out.iter_mut().zip(temperatures) {
        *o = t + gain * *o;
    }
}

/// Advances room temperatures by one step of `time_step` seconds.
pub fn step(
    state: &RoomState,
    input: &ControlInput,
    outdoor: f64,
    occupancy: &[bool],
    physics: &BuildingPhysics,
    time_step: f64,
) -> Result<RoomState, ThermalError> {
    let n = state.rooms();
    for len in [input.airflow.len(), occupancy.len()] {
        if len != n {
            return Err(ThermalError::DimensionMismatch {
                expected: n,
                actual: len,
            });
        }
    }
    if input.airflow.iter().any(|&a| !(a >= 0.0 && a <= physics.max_airflow)) {
        return Err(ThermalError::InvalidControl(format!(
            "airflow {:?} outside [0, {}]",
            input.airflow, physics.max_airflow
        )));
    }
    let bound = stability_bound(physics, n, physics.max_airflow);
    if time_step >= bound {
        return Err(ThermalError::IntegrationUnstable(format!(
            "time step {time_step} s is not below the stability bound {bound:.1} s"
        )));
    }
    let mut next = vec![0.0; n];
    advance_into(
        &state.temperatures,
        &input.airflow,
        input.supply_air_temperature,
        outdoor,
        occupancy,
        physics,
        time_step,
        &mut next,
    );
    if let Some(t) = next
        .iter()
        .find(|t| !(t.is_finite() && (SANITY_ENVELOPE.0..=SANITY_ENVELOPE.1).contains(*t)))
    {
        return Err(ThermalError::IntegrationUnstable(format!(
            "room temperature {t} left the sanity envelope"
        )));
    }
    Ok(RoomState { temperatures: next })
}

/// HVAC electrical power, kW: cube-law fan power plus conditioning power.
pub fn power(input: &ControlInput, state: &RoomState, physics: &BuildingPhysics) -> f64 {
    power_raw(&input.airflow, input.supply_air_temperature, state.mean(), physics)
}

pub(crate) fn power_raw(airflow: &[f64], supply: f64, return_air: f64, physics: &BuildingPhysics) -> f64 {
    let efficiency = if supply > return_air {
        physics.heating_efficiency
    } else {
        physics.cooling_efficiency
    };
    let delta = (supply - return_air).abs();
    let mut fan = 0.0;
    let mut conditioning = 0.0;
    for &a in airflow {
        let v = physics.fan_speed(a);
        fan += physics.fan_coefficient * v * v * v;
        conditioning += physics.air_density * a * physics.specific_heat * delta / efficiency;
    }
    fan + conditioning
}
