use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Scalar random-walk Kalman filter state.
///
/// `r` is the per-sensor projection-noise variance `1 / (4 N η²)`; a fused
/// measurement over `M` sensors is observed with variance `r / M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KalmanState {
    pub mean: f64,
    pub variance: f64,
    pub q: f64,
    pub r: f64,
}

impl KalmanState {
    pub fn new(mean: f64, variance: f64, q: f64, atoms: u32, eta: f64) -> Result<Self> {
        if atoms == 0 || !(eta > 0.0) {
            return Err(invalid("atoms and sensitivity must be positive"));
        }
        Self::with_noise(mean, variance, q, 1.0 / (4.0 * atoms as f64 * eta * eta))
    }

    pub fn with_noise(mean: f64, variance: f64, q: f64, r: f64) -> Result<Self> {
        if !(variance > 0.0) || !(q >= 0.0) || !(r >= 0.0) {
            return Err(invalid("Kalman variances must be positive"));
        }
        Ok(Self { mean, variance, q, r })
    }

    pub fn gain(&self, sensors: usize) -> f64 {
        let prior = self.variance + self.q;
        prior / (prior + self.r / sensors as f64)
    }
}

/// One predict/update cycle with a fused measurement from `sensors` sensors.
pub fn kalman_step(state: &KalmanState, measurement: f64, sensors: usize) -> Result<KalmanState> {
    if sensors == 0 {
        return Err(invalid("Kalman update needs at least one sensor"));
    }
    let prior = state.variance + state.q;
    let noise = state.r / sensors as f64;
    let gain = prior / (prior + noise);
    Ok(KalmanState {
        mean: state.mean + gain * (measurement - state.mean),
        variance: if noise.is_infinite() { prior } else { prior * noise / (prior + noise) },
        ..*state
    })
}

/// Fixed point of the posterior-variance Riccati recursion for constant
/// `q` and measurement variance `r / sensors`.
pub fn steady_state_variance(q: f64, r: f64, sensors: usize) -> f64 {
    let s = r / sensors as f64;
    0.5 * (-q + (q * q + 4.0 * q * s).sqrt())
}
