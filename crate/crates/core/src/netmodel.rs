//! Network-layer formulas: transmit energy, power-law scale invariance,
//! the P_MAX local/global rule, source entropy and the Hoeffding radius.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyParams {
    pub e_amp: f64,
    /// meters
    pub distance: f64,
}

impl EnergyParams {
    pub fn transmit_energy(&self) -> Result<f64> {
        transmit_energy(self.e_amp, self.distance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FusionScope {
    LocalFusion,
    GlobalFusion,
}

pub fn transmit_energy(e_amp: f64, distance: f64) -> Result<f64> {
    if !(e_amp >= 0.0) || !(distance >= 0.0) {
        return Err(invalid("energy and distance must be non-negative"));
    }
    Ok(e_amp + distance * distance)
}

fn quadratic_energy(d: f64) -> f64 {
    d * d
}

/// `f(c·d) / f(d)` for the quadratic energy law; equals `c²` for every `d`.
pub fn power_law_scale_ratio(c: f64, d: f64) -> Result<f64> {
    if !(c > 0.0) || !(d > 0.0) {
        return Err(invalid("scale factor and distance must be positive"));
    }
    Ok(quadratic_energy(c * d) / quadratic_energy(d))
}

pub fn pmax_classify(p_max: usize, n: usize) -> Result<FusionScope> {
    if n == 0 {
        return Err(invalid("cluster size must be at least 1"));
    }
    if p_max > n {
        return Err(invalid(format!("P_MAX = {p_max} exceeds cluster size {n}")));
    }
    // p_max >= n/2 without going through floating point
    Ok(if 2 * p_max >= n {
        FusionScope::LocalFusion
    } else {
        FusionScope::GlobalFusion
    })
}

/// Corrected maximum `P(M|C)·P(C)`.
pub fn pmax_corrected(p_m_given_c: f64, p_c: f64) -> Result<f64> {
    for p in [p_m_given_c, p_c] {
        if !(0.0..=1.0).contains(&p) {
            return Err(invalid(format!("probability {p} outside [0, 1]")));
        }
    }
    Ok(p_m_given_c * p_c)
}

/// Shannon entropy in bits.
pub fn source_entropy(probs: &[f64]) -> Result<f64> {
    if probs.iter().any(|p| !(*p >= 0.0)) {
        return Err(invalid("probabilities must be non-negative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("probabilities sum to {total}, not 1")));
    }
    Ok(-probs
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|p| p * p.log2())
        .sum::<f64>())
}

/// `√(R² · log₂(1/δ) / (2n))`.
pub fn hoeffding_epsilon(range: f64, delta: f64, n: usize) -> Result<f64> {
    if !(range > 0.0) {
        return Err(invalid("range must be positive"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta must lie in (0, 1)"));
    }
    if n == 0 {
        return Err(invalid("sample count must be at least 1"));
    }
    Ok((range * range * (1.0 / delta).log2() / (2.0 * n as f64)).sqrt())
}
