//! Energy, comfort and robustness metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::master_io::report::SimulationResult;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("room was never occupied; discomfort percentage is undefined")]
    NeverOccupied,
    #[error("length mismatch: {discomfort} discomfort samples vs {occupancy} occupancy samples")]
    LengthMismatch { discomfort: usize, occupancy: usize },
}

/// Coefficients of the linearised PMV regression
/// `P1·T − P2·v + P3·v² − P4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmvCoefficients {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
}

impl Default for PmvCoefficients {
    fn default() -> Self {
        Self {
            p1: 0.2466,
            p2: 1.4075,
            p3: 0.581,
            p4: 5.4468,
        }
    }
}

/// Acceptable PMV band `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortBand {
    pub lower: f64,
    pub upper: f64,
}

impl Default for ComfortBand {
    fn default() -> Self {
        Self {
            lower: -0.5,
            upper: 0.5,
        }
    }
}

/// Energy in kWh of a power trace (kW per sample) sampled every `time_step` seconds.
pub fn energy(power_kw: &[f64], time_step: f64) -> f64 {
    power_kw.iter().sum::<f64>() * time_step / 3600.0
}

/// Predicted mean vote for air temperature `t_oc` (°C) and air speed `v_a` (m/s).
pub fn pmv(t_oc: f64, v_a: f64, coeffs: &PmvCoefficients) -> f64 {
    coeffs.p1 * t_oc - coeffs.p2 * v_a + coeffs.p3 * v_a * v_a - coeffs.p4
}

/// Hinge distance of `pmv` outside the comfort band.
pub fn discomfort(pmv: f64, band: &ComfortBand) -> f64 {
    0f64.max(band.lower - pmv).max(pmv - band.upper)
}

/// Percentage of discomfort instants relative to occupied instants.
///
/// The numerator counts every step with nonzero discomfort unless
/// `occupied_only` is set, in which case only occupied steps count. The
/// denominator is always the number of occupied steps, so the unrestricted
/// form can exceed 100 when fed discomfort that is not gated by occupancy.
pub fn discomfort_percent(discomfort: &[f64], occupancy: &[bool], occupied_only: bool) -> Result<f64, AnalysisError> {
    if discomfort.len() != occupancy.len() {
        return Err(AnalysisError::LengthMismatch {
            discomfort: discomfort.len(),
            occupancy: occupancy.len(),
        });
    }
    let occupied = occupancy.iter().filter(|&&o| o).count();
    if occupied == 0 {
        return Err(AnalysisError::NeverOccupied);
    }
    let uncomfortable = discomfort
        .iter()
        .zip(occupancy)
        .filter(|(d, o)| **d != 0.0 && (!occupied_only || **o))
        .count();
    Ok(100.0 * uncomfortable as f64 / occupied as f64)
}

/// Acceptance box around a perfect-prediction baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceBox {
    pub baseline_energy_kwh: f64,
    pub baseline_discomfort_percent: f64,
    pub energy_halfwidth_kwh: f64,
    pub discomfort_halfwidth: f64,
}

impl AcceptanceBox {
    pub const DEFAULT_ENERGY_HALFWIDTH_KWH: f64 = 20.0;
    pub const DEFAULT_DISCOMFORT_HALFWIDTH: f64 = 5.0;

    /// Box with the default ±20 kWh / ±5 percentage-point limits.
    pub fn around(baseline_energy_kwh: f64, baseline_discomfort_percent: f64) -> Self {
        Self {
            baseline_energy_kwh,
            baseline_discomfort_percent,
            energy_halfwidth_kwh: Self::DEFAULT_ENERGY_HALFWIDTH_KWH,
            discomfort_halfwidth: Self::DEFAULT_DISCOMFORT_HALFWIDTH,
        }
    }

    pub fn contains(&self, energy_kwh: f64, discomfort_percent: f64) -> bool {
        (energy_kwh - self.baseline_energy_kwh).abs() <= self.energy_halfwidth_kwh
            && (discomfort_percent - self.baseline_discomfort_percent).abs() <= self.discomfort_halfwidth
    }
}

/// Aggregated metrics for one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub energy_kwh: f64,
    /// PMV per step, one value per room.
    pub pmv: Vec<Vec<f64>>,
    /// Discomfort per step, one value per room.
    pub discomfort: Vec<Vec<f64>>,
    /// Discomfort percentage per room; `None` when the room was never occupied.
    pub discomfort_percent: Vec<Option<f64>>,
    /// Experiment-level robustness, filled in by the sweep.
    pub robust: Option<f64>,
}

impl AnalysisReport {
    pub fn from_result(result: &SimulationResult, occupied_only: bool) -> Self {
        let rooms = result.rooms();
        let discomfort_percent = (0..rooms)
            .map(|j| {
                let d: Vec<f64> = result.discomfort.iter().map(|row| row[j]).collect();
                let o: Vec<bool> = result.occupancy.iter().map(|row| row[j]).collect();
                discomfort_percent(&d, &o, occupied_only).ok()
            })
            .collect();
        Self {
            energy_kwh: energy(&result.power_kw, result.time_step as f64),
            pmv: result.pmv.clone(),
            discomfort: result.discomfort.clone(),
            discomfort_percent,
            robust: None,
        }
    }

    /// Unweighted mean of the per-room discomfort percentages over rooms
    /// that were occupied at least once; 0 when none were.
    pub fn mean_discomfort_percent(&self) -> f64 {
        let defined: Vec<f64> = self.discomfort_percent.iter().flatten().copied().collect();
        if defined.is_empty() {
            0.0
        } else {
            defined.iter().sum::<f64>() / defined.len() as f64
        }
    }
}

/// Share (in %) of replicates whose energy and mean discomfort fall inside the box.
pub fn robust(replicates: &[AnalysisReport], acceptance: &AcceptanceBox) -> f64 {
    let points: Vec<(f64, f64)> = replicates
        .iter()
        .map(|r| (r.energy_kwh, r.mean_discomfort_percent()))
        .collect();
    robust_from_points(&points, acceptance)
}

/// Same as [`robust`] on bare `(energy_kwh, discomfort_percent)` pairs.
pub fn robust_from_points(points: &[(f64, f64)], acceptance: &AcceptanceBox) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let inside = points.iter().filter(|(e, d)| acceptance.contains(*e, *d)).count();
    100.0 * inside as f64 / points.len() as f64
}
