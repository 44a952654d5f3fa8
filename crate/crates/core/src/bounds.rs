//! Closed-form aggregation bounds.
//!
//! All variances are in parameter units² for `M` sensors of `N` atoms with
//! sensitivity `η`. The unified bound interpolates between the standard
//! quantum limit (V = 0) and the Heisenberg limit (V = 1) over the
//! effective sensor count left after fault handling.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Brooks-Iyengar Byzantine tolerance, M_eff = M − 2f.
    Bft,
    /// Predictive outlier exclusion, M_eff = M − f.
    Outlier,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::Bft => "bft",
            Strategy::Outlier => "outlier",
        }
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bft" => Ok(Strategy::Bft),
            "outlier" => Ok(Strategy::Outlier),
            other => Err(invalid(format!("unknown strategy '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub atoms: u32,
    pub sensitivity: f64,
    pub sensors: usize,
    pub faults: usize,
    pub visibility: f64,
    pub strategy: Strategy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundValue {
    pub mse_lower: f64,
    pub rmse_lower: f64,
    pub m_eff: usize,
    pub qfi: f64,
}

pub fn m_eff(sensors: usize, faults: usize, strategy: Strategy) -> Result<usize> {
    let ok = match strategy {
        Strategy::Bft => sensors >= 1 && faults <= (sensors - 1) / 3,
        Strategy::Outlier => faults < sensors,
    };
    if !ok {
        return Err(Error::FaultBudgetExceeded {
            sensors,
            faults,
            strategy,
        });
    }
    Ok(match strategy {
        Strategy::Bft => sensors - 2 * faults,
        Strategy::Outlier => sensors - faults,
    })
}

/// Single-sensor projection-noise variance in parameter units, `1 / (4 N η²)`.
pub fn qpn_variance(atoms: u32, eta: f64) -> f64 {
    1.0 / (4.0 * atoms as f64 * eta * eta)
}

pub fn sql_variance(atoms: u32, eta: f64, sensors: usize) -> f64 {
    qpn_variance(atoms, eta) / sensors as f64
}

pub fn hl_variance(atoms: u32, eta: f64, sensors: usize) -> f64 {
    let m = sensors as f64;
    qpn_variance(atoms, eta) / (m * m)
}

/// Quantum Fisher information split into its decohered (SQL) and entangled (HL) parts.
pub fn qfi(atoms: u32, eta: f64, m_eff: usize, visibility: f64) -> f64 {
    let base = 4.0 * atoms as f64 * eta * eta;
    let m = m_eff as f64;
    let v2 = visibility * visibility;
    (1.0 - v2) * base * m + v2 * base * m * m
}

/// Convex-combination MSE bound `(1 − V²)/(4Nη² M_eff) + V²/(4Nη² M_eff²)`.
pub fn mse_bound(atoms: u32, eta: f64, m_eff: usize, visibility: f64) -> f64 {
    let v2 = visibility * visibility;
    (1.0 - v2) * sql_variance(atoms, eta, m_eff) + v2 * hl_variance(atoms, eta, m_eff)
}

pub fn unified_bound(query: &BoundQuery) -> Result<BoundValue> {
    if query.atoms == 0 || !(query.sensitivity > 0.0) {
        return Err(invalid("atoms and sensitivity must be positive"));
    }
    if !(0.0..=1.0).contains(&query.visibility) {
        return Err(invalid(format!("visibility must lie in [0, 1], got {}", query.visibility)));
    }
    let m = m_eff(query.sensors, query.faults, query.strategy)?;
    let mse = mse_bound(query.atoms, query.sensitivity, m, query.visibility);
    Ok(BoundValue {
        mse_lower: mse,
        rmse_lower: mse.sqrt(),
        m_eff: m,
        qfi: qfi(query.atoms, query.sensitivity, m, query.visibility),
    })
}

/// Heisenberg-limit RMSE ratio of outlier exclusion over BFT, in dB
/// (`20·log₁₀((M − 2f)/(M − f))`, negative when f > 0).
pub fn outlier_advantage_db(sensors: usize, faults: usize) -> Result<f64> {
    if sensors <= 2 * faults {
        return Err(invalid(format!(
            "advantage undefined for M = {sensors}, f = {faults} (needs M > 2f)"
        )));
    }
    let bft = (sensors - 2 * faults) as f64;
    let outlier = (sensors - faults) as f64;
    Ok(20.0 * (bft / outlier).log10())
}

/// Variance gain of the Heisenberg limit over the SQL, `10·log₁₀(M)`.
pub fn metrological_gain_db(sensors: usize) -> f64 {
    10.0 * (sensors as f64).log10()
}

/// Critical visibility obtained by solving `V_eff²/M_eff > 1 − V_eff²` as
/// written, with `V_eff = V·e^{−τ}`; clamped to 1.
pub fn critical_visibility_literal(m_eff: usize, tau_prep: f64) -> f64 {
    let m = m_eff as f64;
    let v_eff = (m / (m + 1.0)).sqrt();
    (v_eff * tau_prep.exp()).min(1.0)
}

/// Fault count for a fractional fault level, rounding half up.
pub fn faults_from_fraction(fraction: f64, sensors: usize) -> usize {
    (fraction * sensors as f64 + 0.5).floor() as usize
}
