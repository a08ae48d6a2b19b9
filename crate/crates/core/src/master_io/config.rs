//! Key-value building description.
//!
//! The grammar is a brace-nested list of `key: value` pairs separated by
//! commas or newlines, with `//` comments:
//!
//! ```text
//! building: {
//!     rooms: 5,
//!     start: 20150101T0000,
//!     control: 3, // 1 - No Control, 2 - Reactive, 3 - MPC
//!     room: { thermal capacity of room: 2000 kJ/K },
//!     mpc: { tsa_grid: [12, 14, 16] },
//! }
//! ```
//!
//! Keys are case-insensitive and whitespace/underscore-insensitive, so
//! `heating efficiency` and `heating_efficiency` are the same key. Numeric
//! values may carry a trailing unit (`0.048 kJ/Ks`, `5%`); the unit text is
//! ignored and values are read in the documented units. Unknown keys are
//! ignored.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::Serialize;
use thiserror::Error;

use crate::analyser::{ComfortBand, PmvCoefficients};
use crate::thermal::BuildingPhysics;

pub const TIMESTAMP_FORMAT: &str = "%Y%m%dT%H%M";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Unreadable { path: PathBuf, source: std::io::Error },
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing required key `{0}`")]
    MissingRequiredKey(String),
    #[error("malformed timestamp `{value}` for `{key}` (expected yyyymmddThhmm)")]
    MalformedTimestamp { key: String, value: String },
    #[error("`{key}` = {value} is out of range: must be {bound}")]
    OutOfRangeValue { key: String, value: String, bound: String },
    #[error("`{key}` has unparsable value `{value}`")]
    InvalidValue { key: String, value: String },
}

fn out_of_range(key: &str, value: impl ToString, bound: &str) -> ConfigError {
    ConfigError::OutOfRangeValue {
        key: key.to_string(),
        value: value.to_string(),
        bound: bound.to_string(),
    }
}

/// Control strategy code: 1 - No Control, 2 - Reactive, 3 - MPC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ControlMode {
    NoControl = 1,
    Reactive = 2,
    Mpc = 3,
}

impl ControlMode {
    pub fn from_code(code: i64) -> Option<Self> {
        match code {
            1 => Some(Self::NoControl),
            2 => Some(Self::Reactive),
            3 => Some(Self::Mpc),
            _ => None,
        }
    }

    pub fn code(self) -> i64 {
        self as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AhuConfig {
    pub heating_efficiency: f64,
    pub cooling_efficiency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoomConfig {
    /// kJ/K
    pub thermal_capacity: f64,
    /// kJ/(K·s)
    pub heat_transfer_coeff_outside: f64,
    /// kJ/(K·s) between adjacent rooms
    pub wall_coefficient: f64,
    /// kW
    pub equipment_load: f64,
    /// kW
    pub occupant_load: f64,
    pub fan_coefficient: f64,
    /// m³/s
    pub max_airflow: f64,
    /// m²
    pub duct_area: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AirConfig {
    /// kg/m³
    pub density: f64,
    /// kJ/(kg·K)
    pub specific_heat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorConfig {
    /// Target occupancy forecast error, percent.
    pub occupancy: f64,
    /// Multiplicative weather forecast noise, percent.
    pub external_temperature: f64,
    /// Initial half-width of the error band used when drawing erroneous
    /// strings, percentage points.
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MpcConfig {
    /// Weight of one unit of discomfort for one step, in kWh.
    pub lambda: f64,
    pub tsa_grid: Vec<f64>,
    pub airflow_grid: Vec<f64>,
    /// How long a chosen supply temperature is held, seconds.
    pub tsa_hold: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReactiveConfig {
    pub deadband: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FilesConfig {
    pub weather: PathBuf,
    pub occupancy: PathBuf,
    pub output: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationConfig {
    pub zones: usize,
    pub rooms: usize,
    pub start: NaiveDateTime,
    pub stop: NaiveDateTime,
    /// Planning horizon in hours.
    pub horizon: u32,
    /// Sampling step τ, seconds.
    pub time_step: u32,
    pub control: ControlMode,
    pub ahu: AhuConfig,
    pub room: RoomConfig,
    pub air: AirConfig,
    pub pmv: PmvCoefficients,
    pub comfort: ComfortBand,
    /// Count only occupied steps in the discomfort numerator.
    pub occupied_only: bool,
    pub error: ErrorConfig,
    pub mpc: MpcConfig,
    pub reactive: ReactiveConfig,
    pub files: FilesConfig,
    /// Initial room temperature; the first weather sample when absent.
    pub initial_temperature: Option<f64>,
    pub replicates: u32,
    pub rng_seed: u64,
    pub workers: usize,
}

impl SimulationConfig {
    pub fn physics(&self) -> BuildingPhysics {
        BuildingPhysics {
            thermal_capacity: self.room.thermal_capacity,
            outside_coeff: self.room.heat_transfer_coeff_outside,
            wall_coeff: self.room.wall_coefficient,
            equipment_load: self.room.equipment_load,
            occupant_load: self.room.occupant_load,
            fan_coefficient: self.room.fan_coefficient,
            air_density: self.air.density,
            specific_heat: self.air.specific_heat,
            heating_efficiency: self.ahu.heating_efficiency,
            cooling_efficiency: self.ahu.cooling_efficiency,
            duct_area: self.room.duct_area,
            max_airflow: self.room.max_airflow,
        }
    }

    /// Samples per day.
    pub fn steps_per_day(&self) -> usize {
        (86_400 / self.time_step) as usize
    }

    /// Planning horizon in sampling steps.
    pub fn horizon_steps(&self) -> usize {
        (self.horizon as usize * 3600) / self.time_step as usize
    }

    /// Makes relative file paths relative to `base` (usually the config's directory).
    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [
            &mut self.files.weather,
            &mut self.files.occupancy,
            &mut self.files.output,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    /// Reads and parses a config file.
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        parse_config(&text)
    }

    /// Renders the config in the same grammar `parse_config` reads.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(s, "building: {{");
        let _ = writeln!(s, "    zones: {},", self.zones);
        let _ = writeln!(s, "    rooms: {},", self.rooms);
        let _ = writeln!(s, "    start: {},", self.start.format(TIMESTAMP_FORMAT));
        let _ = writeln!(s, "    stop: {},", self.stop.format(TIMESTAMP_FORMAT));
        let _ = writeln!(s, "    horizon: {},", self.horizon);
        let _ = writeln!(s, "    time_step: {},", self.time_step);
        let _ = writeln!(
            s,
            "    control: {}, // 1 - No Control, 2 - Reactive, 3 - MPC",
            self.control.code()
        );
        if let Some(t) = self.initial_temperature {
            let _ = writeln!(s, "    initial temperature: {t},");
        }
        let _ = writeln!(s, "    replicates: {},", self.replicates);
        let _ = writeln!(s, "    rng_seed: {},", self.rng_seed);
        let _ = writeln!(s, "    workers: {},", self.workers);
        let _ = writeln!(s, "    ahu: {{");
        let _ = writeln!(s, "        heating efficiency: {},", self.ahu.heating_efficiency);
        let _ = writeln!(s, "        cooling efficiency: {}", self.ahu.cooling_efficiency);
        let _ = writeln!(s, "    }},");
        let _ = writeln!(s, "    room: {{");
        let r = &self.room;
        let _ = writeln!(s, "        thermal capacity of room: {} kJ/K,", r.thermal_capacity);
        let _ = writeln!(
            s,
            "        heat transfer coefficient for outside: {} kJ/Ks,",
            r.heat_transfer_coeff_outside
        );
        let _ = writeln!(s, "        wall coefficient: {} kJ/Ks,", r.wall_coefficient);
        let _ = writeln!(s, "        heat load due to equipments: {} kW,", r.equipment_load);
        let _ = writeln!(s, "        heat load due to occupants: {} kW,", r.occupant_load);
        let _ = writeln!(s, "        coefficient of fan: {},", r.fan_coefficient);
        let _ = writeln!(s, "        max airflow: {} m^3/s,", r.max_airflow);
        let _ = writeln!(s, "        duct area: {} m^2", r.duct_area);
        let _ = writeln!(s, "    }},");
        let _ = writeln!(s, "    air: {{");
        let _ = writeln!(s, "        density: {} kg/m^3,", self.air.density);
        let _ = writeln!(s, "        specific heat: {} kJ/kg.K", self.air.specific_heat);
        let _ = writeln!(s, "    }},");
        let _ = writeln!(s, "    pmv: {{");
        let _ = writeln!(s, "        p1: {},", self.pmv.p1);
        let _ = writeln!(s, "        p2: {},", self.pmv.p2);
        let _ = writeln!(s, "        p3: {},", self.pmv.p3);
        let _ = writeln!(s, "        p4: {}", self.pmv.p4);
        let _ = writeln!(s, "    }},");
        let _ = writeln!(s, "    comfort: {{");
        let _ = writeln!(s, "        pmv lower: {},", self.comfort.lower);
        let _ = writeln!(s, "        pmv upper: {},", self.comfort.upper);
        let _ = writeln!(s, "        occupied only: {}", self.occupied_only);
        let _ = writeln!(s, "    }},");
        let _ = writeln!(s, "    error: {{");
        let _ = writeln!(s, "        occupancy: {}%,", self.error.occupancy);
        let _ = writeln!(s, "        external temperature: {}%,", self.error.external_temperature);
        let _ = writeln!(s, "        tolerance: {}%", self.error.tolerance);
        let _ = writeln!(s, "    }},");
        let _ = writeln!(s, "    mpc: {{");
        let _ = writeln!(s, "        lambda: {},", self.mpc.lambda);
        let _ = writeln!(s, "        tsa_grid: [{}],", list(&self.mpc.tsa_grid));
        let _ = writeln!(s, "        airflow_grid: [{}],", list(&self.mpc.airflow_grid));
        let _ = writeln!(s, "        tsa_hold: {}", self.mpc.tsa_hold);
        let _ = writeln!(s, "    }},");
        let _ = writeln!(s, "    reactive: {{");
        let _ = writeln!(s, "        deadband: {}", self.reactive.deadband);
        let _ = writeln!(s, "    }},");
        let _ = writeln!(s, "    files: {{");
        let _ = writeln!(s, "        weather: {},", self.files.weather.display());
        let _ = writeln!(s, "        occupancy: {},", self.files.occupancy.display());
        let _ = writeln!(s, "        output: {}", self.files.output.display());
        let _ = writeln!(s, "    }}");
        let _ = writeln!(s, "}}");
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Scalar(String),
    List(Vec<String>),
    Map(Vec<(String, Node)>),
}

fn normalize_key(key: &str) -> String {
    key.trim()
        .to_lowercase()
        .split(|c: char| c.is_whitespace() || c == '_' || c == '-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            line: 1,
        }
    }

    fn error(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::Syntax {
            line: self.line,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next();
        if c == Some('\n') {
            self.line += 1;
        }
        c
    }

    /// Skips whitespace, separators and `//` comments.
    fn skip_filler(&mut self, skip_commas: bool) {
        loop {
            match self.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some(',') if skip_commas => {
                    self.bump();
                }
                Some('/') => {
                    let mut ahead = self.chars.clone();
                    ahead.next();
                    if ahead.peek() == Some(&'/') {
                        while let Some(c) = self.chars.peek() {
                            if *c == '\n' {
                                break;
                            }
                            self.bump();
                        }
                    } else {
                        return;
                    }
                }
                _ => return,
            }
        }
    }

    fn at_comment(&self) -> bool {
        let mut ahead = self.chars.clone();
        ahead.next() == Some('/') && ahead.next() == Some('/')
    }

    fn parse_map(&mut self, nested: bool) -> Result<Vec<(String, Node)>, ConfigError> {
        let mut entries = Vec::new();
        loop {
            self.skip_filler(true);
            match self.chars.peek() {
                None if nested => return Err(self.error("unclosed `{`")),
                None => return Ok(entries),
                Some('}') if nested => {
                    self.bump();
                    return Ok(entries);
                }
                Some('}') => return Err(self.error("unexpected `}`")),
                _ => {}
            }
            let mut key = String::new();
            loop {
                match self.chars.peek() {
                    Some(':') => {
                        self.bump();
                        break;
                    }
                    Some('\n') | None | Some('{') | Some('}') | Some(',') => {
                        return Err(self.error(format!("expected `:` after key `{}`", key.trim())));
                    }
                    Some(_) => key.push(self.bump().unwrap()),
                }
            }
            let key = normalize_key(&key);
            if key.is_empty() {
                return Err(self.error("empty key"));
            }
            while matches!(self.chars.peek(), Some(c) if *c == ' ' || *c == '\t') {
                self.bump();
            }
            let value = match self.chars.peek() {
                Some('{') => {
                    self.bump();
                    Node::Map(self.parse_map(true)?)
                }
                Some('[') => {
                    self.bump();
                    Node::List(self.parse_list()?)
                }
                _ => Node::Scalar(self.parse_scalar()),
            };
            entries.push((key, value));
        }
    }

    fn parse_list(&mut self) -> Result<Vec<String>, ConfigError> {
        let mut items = Vec::new();
        let mut current = String::new();
        loop {
            match self.bump() {
                None => return Err(self.error("unclosed `[`")),
                Some(']') => {
                    if !current.trim().is_empty() {
                        items.push(current.trim().to_string());
                    }
                    return Ok(items);
                }
                Some(',') => {
                    items.push(current.trim().to_string());
                    current.clear();
                }
                Some(c) => current.push(c),
            }
        }
    }

    fn parse_scalar(&mut self) -> String {
        let mut value = String::new();
        while let Some(&c) = self.chars.peek() {
            if c == ',' || c == '}' || c == '\n' || (c == '/' && self.at_comment()) {
                break;
            }
            value.push(c);
            self.bump();
        }
        value.trim().to_string()
    }
}

struct Section<'a> {
    path: String,
    entries: &'a [(String, Node)],
}

static EMPTY: [(String, Node); 0] = [];

impl<'a> Section<'a> {
    fn qualified(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{}", self.path, key)
        }
    }

    /// Last entry matching any alias wins.
    fn find(&self, aliases: &[&str]) -> Option<&'a Node> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| aliases.contains(&k.as_str()))
            .map(|(_, v)| v)
    }

    fn section(&self, aliases: &[&str]) -> Section<'a> {
        let entries = match self.find(aliases) {
            Some(Node::Map(m)) => m.as_slice(),
            _ => &EMPTY,
        };
        Section {
            path: self.qualified(aliases[0]),
            entries,
        }
    }

    fn scalar(&self, aliases: &[&str]) -> Result<Option<&'a str>, ConfigError> {
        match self.find(aliases) {
            None => Ok(None),
            Some(Node::Scalar(s)) => Ok(Some(s.as_str())),
            Some(_) => Err(ConfigError::InvalidValue {
                key: self.qualified(aliases[0]),
                value: "<nested value>".into(),
            }),
        }
    }

    fn required(&self, aliases: &[&str]) -> Result<&'a str, ConfigError> {
        self.scalar(aliases)?
            .filter(|s| !s.is_empty())
            .ok_or_else(|| ConfigError::MissingRequiredKey(self.qualified(aliases[0])))
    }

    fn number(&self, aliases: &[&str], default: f64) -> Result<f64, ConfigError> {
        match self.scalar(aliases)? {
            None => Ok(default),
            Some(raw) => parse_number(raw).ok_or_else(|| ConfigError::InvalidValue {
                key: self.qualified(aliases[0]),
                value: raw.to_string(),
            }),
        }
    }

    fn integer(&self, aliases: &[&str], default: u64) -> Result<u64, ConfigError> {
        let key = self.qualified(aliases[0]);
        let v = self.number(aliases, default as f64)?;
        if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
            return Err(out_of_range(&key, v, "a non-negative integer"));
        }
        Ok(v as u64)
    }

    fn boolean(&self, aliases: &[&str], default: bool) -> Result<bool, ConfigError> {
        match self.scalar(aliases)? {
            None => Ok(default),
            Some(raw) => match raw.to_lowercase().as_str() {
                "true" | "yes" | "1" => Ok(true),
                "false" | "no" | "0" => Ok(false),
                _ => Err(ConfigError::InvalidValue {
                    key: self.qualified(aliases[0]),
                    value: raw.to_string(),
                }),
            },
        }
    }

    fn grid(&self, aliases: &[&str], default: &[f64]) -> Result<Vec<f64>, ConfigError> {
        let key = self.qualified(aliases[0]);
        let mut values = match self.find(aliases) {
            None => return Ok(default.to_vec()),
            Some(Node::List(items)) => items
                .iter()
                .map(|s| {
                    parse_number(s).ok_or_else(|| ConfigError::InvalidValue {
                        key: key.clone(),
                        value: s.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
            Some(Node::Scalar(s)) => vec![parse_number(s).ok_or_else(|| ConfigError::InvalidValue {
                key: key.clone(),
                value: s.clone(),
            })?],
            Some(Node::Map(_)) => {
                return Err(ConfigError::InvalidValue {
                    key,
                    value: "<nested value>".into(),
                })
            }
        };
        if values.is_empty() {
            return Err(out_of_range(&key, "[]", "a nonempty list"));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(values)
    }

    fn timestamp(&self, aliases: &[&str]) -> Result<NaiveDateTime, ConfigError> {
        let raw = self.required(aliases)?;
        NaiveDateTime::parse_from_str(raw, TIMESTAMP_FORMAT).map_err(|_| ConfigError::MalformedTimestamp {
            key: self.qualified(aliases[0]),
            value: raw.to_string(),
        })
    }
}

/// Leading number of a value, ignoring any unit suffix (`2000 kJ/K`, `5%`).
fn parse_number(raw: &str) -> Option<f64> {
    let token = raw.split_whitespace().next()?;
    let token = token.strip_suffix('%').unwrap_or(token);
    let v: f64 = token.parse().ok()?;
    v.is_finite().then_some(v)
}

pub const DEFAULT_TSA_GRID: [f64; 6] = [12.0, 14.0, 16.0, 30.0, 35.0, 40.0];
pub const DEFAULT_AIRFLOW_GRID: [f64; 5] = [0.0, 0.1, 0.25, 0.5, 1.0];

/// Parses a building description. Absent optional keys take their defaults.
pub fn parse_config(text: &str) -> Result<SimulationConfig, ConfigError> {
    let root = Parser::new(text).parse_map(false)?;
    let root_section = Section {
        path: String::new(),
        entries: &root,
    };
    let top = match root_section.find(&["building"]) {
        Some(Node::Map(m)) => Section {
            path: String::new(),
            entries: m.as_slice(),
        },
        _ => root_section,
    };

    let ahu = top.section(&["ahu"]);
    let room = top.section(&["room"]);
    let air = top.section(&["air"]);
    let pmv = top.section(&["pmv"]);
    let comfort = top.section(&["comfort", "comfort_band"]);
    let error = top.section(&["error"]);
    let mpc = top.section(&["mpc"]);
    let reactive = top.section(&["reactive"]);
    let files = top.section(&["files"]);

    let control_code = match top.scalar(&["control"])? {
        None => 2,
        Some(raw) => match raw.to_lowercase().as_str() {
            "no control" | "none" => 1,
            "reactive" => 2,
            "mpc" => 3,
            _ => parse_number(raw)
                .filter(|v| v.fract() == 0.0)
                .map(|v| v as i64)
                .ok_or_else(|| ConfigError::InvalidValue {
                    key: "control".into(),
                    value: raw.to_string(),
                })?,
        },
    };
    let control =
        ControlMode::from_code(control_code).ok_or_else(|| out_of_range("control", control_code, "1, 2 or 3"))?;

    let defaults = BuildingPhysics::default();
    let pmv_defaults = PmvCoefficients::default();
    let band = ComfortBand::default();

    let config = SimulationConfig {
        zones: top.integer(&["zones"], 1)? as usize,
        rooms: top.integer(&["rooms"], 5)? as usize,
        start: top.timestamp(&["start"])?,
        stop: top.timestamp(&["stop"])?,
        horizon: top.integer(&["horizon"], 4)? as u32,
        time_step: top.integer(&["time_step", "timestep"], 600)? as u32,
        control,
        ahu: AhuConfig {
            heating_efficiency: ahu.number(&["heating_efficiency"], defaults.heating_efficiency)?,
            cooling_efficiency: ahu.number(&["cooling_efficiency"], defaults.cooling_efficiency)?,
        },
        room: RoomConfig {
            thermal_capacity: room.number(
                &["thermal_capacity_of_room", "thermal_capacity"],
                defaults.thermal_capacity,
            )?,
            heat_transfer_coeff_outside: room.number(
                &["heat_transfer_coefficient_for_outside", "heat_transfer_coeff_outside"],
                defaults.outside_coeff,
            )?,
            wall_coefficient: room.number(
                &["wall_coefficient", "heat_transfer_coefficient_between_rooms"],
                defaults.wall_coeff,
            )?,
            equipment_load: room.number(
                &["heat_load_due_to_equipments", "equipment_load"],
                defaults.equipment_load,
            )?,
            occupant_load: room.number(&["heat_load_due_to_occupants", "occupant_load"], defaults.occupant_load)?,
            fan_coefficient: room.number(&["coefficient_of_fan", "fan_coefficient"], defaults.fan_coefficient)?,
            max_airflow: room.number(&["max_airflow"], defaults.max_airflow)?,
            duct_area: room.number(&["duct_area"], defaults.duct_area)?,
        },
        air: AirConfig {
            density: air.number(&["density"], defaults.air_density)?,
            specific_heat: air.number(&["specific_heat"], defaults.specific_heat)?,
        },
        pmv: PmvCoefficients {
            p1: pmv.number(&["p1"], pmv_defaults.p1)?,
            p2: pmv.number(&["p2"], pmv_defaults.p2)?,
            p3: pmv.number(&["p3"], pmv_defaults.p3)?,
            p4: pmv.number(&["p4"], pmv_defaults.p4)?,
        },
        comfort: ComfortBand {
            lower: comfort.number(&["pmv_lower", "lower"], band.lower)?,
            upper: comfort.number(&["pmv_upper", "upper"], band.upper)?,
        },
        occupied_only: comfort.boolean(&["occupied_only"], false)?,
        error: ErrorConfig {
            occupancy: error.number(&["occupancy"], 0.0)?,
            external_temperature: error.number(&["external_temperature"], 0.0)?,
            tolerance: error.number(&["tolerance"], 1.0)?,
        },
        mpc: MpcConfig {
            lambda: mpc.number(&["lambda"], 1.0)?,
            tsa_grid: mpc.grid(&["tsa_grid", "supply_temperature_grid"], &DEFAULT_TSA_GRID)?,
            airflow_grid: mpc.grid(&["airflow_grid"], &DEFAULT_AIRFLOW_GRID)?,
            tsa_hold: mpc.integer(&["tsa_hold"], 3600)? as u32,
        },
        reactive: ReactiveConfig {
            deadband: reactive.number(&["deadband"], 0.1)?,
        },
        files: FilesConfig {
            weather: PathBuf::from(files.required(&["weather"])?),
            occupancy: PathBuf::from(files.required(&["occupancy"])?),
            output: PathBuf::from(files.required(&["output"])?),
        },
        initial_temperature: match top.scalar(&["initial_temperature"])? {
            None => None,
            Some(_) => Some(top.number(&["initial_temperature"], 0.0)?),
        },
        replicates: top.integer(&["replicates"], 15)? as u32,
        rng_seed: top.integer(&["rng_seed", "seed"], 0)?,
        workers: top.integer(&["workers"], 1)? as usize,
    };
    validate(&config)?;
    Ok(config)
}

/// Checks every range constraint on a config.
pub fn validate(c: &SimulationConfig) -> Result<(), ConfigError> {
    if c.zones != 1 {
        return Err(out_of_range("zones", c.zones, "1 (single-zone engine)"));
    }
    if c.rooms == 0 {
        return Err(out_of_range("rooms", c.rooms, ">= 1"));
    }
    if c.start >= c.stop {
        return Err(out_of_range(
            "stop",
            c.stop.format(TIMESTAMP_FORMAT),
            "later than start",
        ));
    }
    if c.time_step == 0 || 86_400 % c.time_step != 0 {
        return Err(out_of_range("time_step", c.time_step, "a positive divisor of 86400"));
    }
    if c.horizon == 0 {
        return Err(out_of_range("horizon", c.horizon, ">= 1"));
    }
    if !(c.horizon as u64 * 3600).is_multiple_of(c.time_step as u64) {
        return Err(out_of_range("horizon", c.horizon, "a whole number of time steps"));
    }
    for (key, v) in [
        ("ahu.heating_efficiency", c.ahu.heating_efficiency),
        ("ahu.cooling_efficiency", c.ahu.cooling_efficiency),
    ] {
        if !(v > 0.0 && v <= 1.0) {
            return Err(out_of_range(key, v, "in (0, 1]"));
        }
    }
    for (key, v) in [
        ("room.thermal_capacity", c.room.thermal_capacity),
        ("room.heat_transfer_coeff_outside", c.room.heat_transfer_coeff_outside),
        ("room.fan_coefficient", c.room.fan_coefficient),
        ("room.max_airflow", c.room.max_airflow),
        ("room.duct_area", c.room.duct_area),
        ("air.density", c.air.density),
        ("air.specific_heat", c.air.specific_heat),
    ] {
        if v <= 0.0 {
            return Err(out_of_range(key, v, "> 0"));
        }
    }
    for (key, v) in [
        ("room.wall_coefficient", c.room.wall_coefficient),
        ("room.equipment_load", c.room.equipment_load),
        ("room.occupant_load", c.room.occupant_load),
    ] {
        if v < 0.0 {
            return Err(out_of_range(key, v, ">= 0"));
        }
    }
    if c.comfort.lower >= c.comfort.upper {
        return Err(out_of_range(
            "comfort.pmv_lower",
            c.comfort.lower,
            "below comfort.pmv_upper",
        ));
    }
    for (key, v) in [
        ("error.occupancy", c.error.occupancy),
        ("error.external_temperature", c.error.external_temperature),
    ] {
        if !(0.0..=100.0).contains(&v) {
            return Err(out_of_range(key, v, "in [0, 100]"));
        }
    }
    if c.error.tolerance < 0.0 {
        return Err(out_of_range("error.tolerance", c.error.tolerance, ">= 0"));
    }
    if c.mpc.lambda < 0.0 {
        return Err(out_of_range("mpc.lambda", c.mpc.lambda, ">= 0"));
    }
    if let Some(a) = c
        .mpc
        .airflow_grid
        .iter()
        .find(|&&a| !(0.0..=c.room.max_airflow).contains(&a))
    {
        return Err(out_of_range("mpc.airflow_grid", a, "within [0, room.max_airflow]"));
    }
    if c.mpc.tsa_hold == 0 || !c.mpc.tsa_hold.is_multiple_of(c.time_step) {
        return Err(out_of_range(
            "mpc.tsa_hold",
            c.mpc.tsa_hold,
            "a positive multiple of time_step",
        ));
    }
    if c.reactive.deadband < 0.0 {
        return Err(out_of_range("reactive.deadband", c.reactive.deadband, ">= 0"));
    }
    if c.replicates == 0 {
        return Err(out_of_range("replicates", c.replicates, ">= 1"));
    }
    if c.workers == 0 {
        return Err(out_of_range("workers", c.workers, ">= 1"));
    }
    Ok(())
}
