//! Quantum sensor physics: phase encoding, projection noise, decoherence,
//! Byzantine corruption and confidence intervals.
//!
//! Projection noise is modeled as Gaussian with the phase variance
//! `1 / (4 N V²)`; parameter-space quantities go through the sensitivity
//! `η` (rad per parameter unit) and nothing else.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};
use crate::fusion::Interval;
use crate::stats::two_sided_z;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SensorMode {
    Coherent,
    Decohered,
    Byzantine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorParams {
    pub atoms: u32,
    /// rad per parameter unit
    pub sensitivity: f64,
    pub visibility0: f64,
    /// seconds
    pub t2: f64,
    pub mode: SensorMode,
}

impl SensorParams {
    pub fn coherent(atoms: u32, sensitivity: f64, t2: f64) -> Self {
        Self {
            atoms,
            sensitivity,
            visibility0: 1.0,
            t2,
            mode: SensorMode::Coherent,
        }
    }

    pub fn decohered(atoms: u32, sensitivity: f64, visibility0: f64, t2: f64) -> Self {
        Self {
            atoms,
            sensitivity,
            visibility0,
            t2,
            mode: SensorMode::Decohered,
        }
    }

    pub fn byzantine(atoms: u32, sensitivity: f64, t2: f64) -> Self {
        Self {
            atoms,
            sensitivity,
            visibility0: 0.0,
            t2,
            mode: SensorMode::Byzantine,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms == 0 {
            return Err(invalid("atom count must be at least 1"));
        }
        if !(self.sensitivity > 0.0) || !self.sensitivity.is_finite() {
            return Err(invalid("sensitivity must be positive"));
        }
        if !(0.0..=1.0).contains(&self.visibility0) {
            return Err(invalid("visibility must lie in [0, 1]"));
        }
        if !(self.t2 > 0.0) {
            return Err(invalid("T2 must be positive"));
        }
        if self.mode == SensorMode::Coherent && self.visibility0 != 1.0 {
            return Err(invalid("a coherent sensor has unit initial visibility"));
        }
        Ok(())
    }

    /// Visibility after `t` seconds; Byzantine sensors are treated as fully decohered.
    pub fn visibility_at(&self, t: f64) -> Result<f64> {
        match self.mode {
            SensorMode::Byzantine => Ok(0.0),
            _ => effective_visibility(self.visibility0, t, self.t2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ByzantineKind {
    /// Reports `t_true + offset`, interval widened by `spread`.
    ConstantOffset,
    /// Reports `t_true + offset + U(-spread, spread)` with a nominal-width interval.
    UniformArbitrary,
    /// Reports `t_true + offset` with half-width `max(spread, nominal)`.
    WideInterval,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ByzantineModel {
    pub kind: ByzantineKind,
    pub offset: f64,
    pub spread: f64,
}

impl Default for ByzantineModel {
    fn default() -> Self {
        Self {
            kind: ByzantineKind::ConstantOffset,
            offset: 5.0,
            spread: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensorReading {
    pub sensor_id: usize,
    pub estimate: f64,
    pub interval: Interval,
    pub visibility: f64,
    pub timestamp: f64,
}

/// Conditions under which a reading is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub t_true: f64,
    /// Seconds since state preparation; also stamped on the reading.
    pub time: f64,
    /// Confidence-interval miscoverage level.
    pub alpha: f64,
}

impl Measurement {
    pub fn at(t_true: f64) -> Self {
        Self {
            t_true,
            time: 0.0,
            alpha: 0.05,
        }
    }
}

pub fn phase_from_parameter(t: f64, eta: f64) -> Result<f64> {
    ensure_finite("parameter", t)?;
    ensure_finite("sensitivity", eta)?;
    if !(eta > 0.0) {
        return Err(invalid("sensitivity must be positive"));
    }
    Ok(eta * t)
}

pub fn effective_visibility(v0: f64, t: f64, t2: f64) -> Result<f64> {
    if !(t2 > 0.0) {
        return Err(invalid(format!("T2 must be positive, got {t2}")));
    }
    if !(0.0..=1.0).contains(&v0) {
        return Err(invalid(format!("visibility must lie in [0, 1], got {v0}")));
    }
    if !(t >= 0.0) {
        return Err(invalid(format!("time must be non-negative, got {t}")));
    }
    Ok(v0 * (-t / t2).exp())
}

/// Phase variance `1 / (4 N V²)` in rad².
pub fn phase_variance(atoms: u32, visibility: f64) -> Result<f64> {
    if atoms == 0 {
        return Err(invalid("atom count must be at least 1"));
    }
    if visibility == 0.0 {
        return Err(Error::DivergentVariance);
    }
    if !(visibility > 0.0 && visibility <= 1.0) {
        return Err(invalid(format!("visibility must lie in (0, 1], got {visibility}")));
    }
    Ok(1.0 / (4.0 * atoms as f64 * visibility * visibility))
}

/// Standard deviation of a parameter estimate, `1 / (2 √N η V)`.
pub fn parameter_std(atoms: u32, eta: f64, visibility: f64) -> Result<f64> {
    Ok(phase_variance(atoms, visibility)?.sqrt() / eta)
}

pub fn confidence_interval(
    estimate: f64,
    atoms: u32,
    eta: f64,
    visibility: f64,
    alpha: f64,
) -> Result<Interval> {
    ensure_finite("estimate", estimate)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(eta > 0.0) {
        return Err(invalid("sensitivity must be positive"));
    }
    let half = two_sided_z(alpha) * parameter_std(atoms, eta, visibility)?;
    Interval::new(estimate - half, estimate + half)
}

/// Draws one reading from sensor `params`.
///
/// Honest sensors report a Gaussian estimate with the decohered variance and
/// the matching confidence interval. Byzantine sensors follow `byz`, claim a
/// coherent-width interval and report visibility 0.
pub fn sample_measurement<R: Rng + ?Sized>(
    sensor_id: usize,
    params: &SensorParams,
    meas: &Measurement,
    byz: &ByzantineModel,
    rng: &mut R,
) -> Result<SensorReading> {
    params.validate()?;
    ensure_finite("true parameter", meas.t_true)?;
    let visibility = params.visibility_at(meas.time)?;

    let (estimate, interval) = if params.mode == SensorMode::Byzantine {
        if byz.spread < 0.0 {
            return Err(invalid("Byzantine spread must be non-negative"));
        }
        let nominal = two_sided_z(meas.alpha) * parameter_std(params.atoms, params.sensitivity, 1.0)?;
        let center = meas.t_true + byz.offset;
        let (estimate, half) = match byz.kind {
            ByzantineKind::ConstantOffset => (center, nominal + byz.spread),
            ByzantineKind::UniformArbitrary => {
                let jitter = if byz.spread > 0.0 {
                    rng.random_range(-byz.spread..=byz.spread)
                } else {
                    0.0
                };
                (center + jitter, nominal)
            }
            ByzantineKind::WideInterval => (center, byz.spread.max(nominal)),
        };
        (estimate, Interval::new(estimate - half, estimate + half)?)
    } else {
        let sigma = parameter_std(params.atoms, params.sensitivity, visibility)?;
        let z: f64 = StandardNormal.sample(rng);
        let estimate = meas.t_true + sigma * z;
        let interval = confidence_interval(
            estimate,
            params.atoms,
            params.sensitivity,
            visibility,
            meas.alpha,
        )?;
        (estimate, interval)
    };

    Ok(SensorReading {
        sensor_id,
        estimate,
        interval,
        visibility,
        timestamp: meas.time,
    })
}
