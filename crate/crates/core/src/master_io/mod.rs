//! Configuration, trace loading and preprocessing, and output writers.

pub mod config;
pub mod report;
pub mod series;

pub use config::{parse_config, ConfigError, SimulationConfig};
pub use report::{write_report, ReportError, SimulationResult};
pub use series::{
    load_csv_series, load_occupancy, preprocess, slice, ColumnSelector, SeriesError, SignalKind, TimeSeries,
};
