//! Room-level HVAC simulator for studying how occupancy-forecast errors
//! degrade predictive control.
//!
//! The pipeline is split the same way a run flows:
//!
//! - [`master_io`] reads the key-value configuration and CSV traces, slices
//!   and resamples them, and writes results to disk.
//! - [`error_lab`] turns occupancy into day-wise bit strings, builds the
//!   pairwise Hamming error matrix and draws erroneous forecasts from it.
//! - [`thermal`] advances the lumped RC room model and reports HVAC power.
//! - [`control`] chooses HVAC actuation (no control, reactive, or a
//!   two-timescale receding-horizon planner).
//! - [`engine`] runs the simulation loop.
//! - [`analyser`] computes energy, PMV, discomfort and robustness metrics.
//! - [`experiment`] sweeps error levels over replicate forecasts.
//! - [`cli`] is the command-line front end.

pub mod analyser;
pub mod cli;
pub mod control;
pub mod engine;
pub mod error_lab;
pub mod experiment;
pub mod master_io;
pub mod rng;
pub mod thermal;

pub use analyser::{AcceptanceBox, AnalysisReport, ComfortBand, PmvCoefficients};
pub use control::{ControlContext, ControlStrategy, Forecast, MpcPlan};
pub use engine::{simulate, SimulationRun};
pub use error_lab::{ErrorMatrix, ErrorPair, OccupancyString};
pub use master_io::config::{parse_config, ControlMode, SimulationConfig};
pub use master_io::report::SimulationResult;
pub use master_io::series::{SignalKind, TimeSeries};
pub use thermal::{BuildingPhysics, ControlInput, RoomState};
