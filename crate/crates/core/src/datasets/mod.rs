//! Embedded crisp 8-sensor dataset and the Intel Berkeley Lab mote pipeline.

mod fetch;
mod intel;

pub use fetch::*;
pub use intel::*;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fusion::Interval;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrispSensor {
    pub id: String,
    pub center: f64,
    pub half_width: f64,
}

impl CrispSensor {
    pub fn interval(&self) -> Interval {
        Interval {
            lower: self.center - self.half_width,
            upper: self.center + self.half_width,
        }
    }
}

/// S1–S4 are the classical sensors; S5–S8 repeat their centers with half the range.
pub fn eight_sensor_dataset() -> Vec<CrispSensor> {
    const CENTERS: [f64; 4] = [4.7, 1.6, 3.0, 1.8];
    const HALF_WIDTHS: [f64; 8] = [2.0, 1.6, 1.5, 1.0, 1.0, 0.8, 0.75, 0.5];
    HALF_WIDTHS
        .iter()
        .enumerate()
        .map(|(i, &hw)| CrispSensor {
            id: format!("S{}", i + 1),
            center: CENTERS[i % 4],
            half_width: hw,
        })
        .collect()
}

/// Atom-count multiplier needed to narrow an interval by `ratio`, since the
/// half-width scales as `1/√N`.
pub fn range_to_atom_factor(ratio: f64) -> Result<f64> {
    if !(ratio > 0.0) || !ratio.is_finite() {
        return Err(invalid("range reduction ratio must be positive"));
    }
    Ok(ratio * ratio)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_intervals() {
        let d = eight_sensor_dataset();
        assert_eq!(d.len(), 8);
        let s1 = d[0].interval();
        assert!((s1.lower - 2.7).abs() < 1e-12 && (s1.upper - 6.7).abs() < 1e-12);
        let s8 = d[7].interval();
        assert!((s8.lower - 1.3).abs() < 1e-12 && (s8.upper - 2.3).abs() < 1e-12);
        assert_eq!(d[4].half_width / d[0].half_width, 0.5);
        assert_eq!(d[4].center, d[0].center);
        assert_eq!(d[7].id, "S8");
    }

    #[test]
    fn atom_factor() {
        assert_eq!(range_to_atom_factor(2.0).unwrap(), 4.0);
        assert_eq!(range_to_atom_factor(1.0).unwrap(), 1.0);
        assert_eq!(range_to_atom_factor(4.0).unwrap(), 16.0);
        assert!(range_to_atom_factor(0.0).is_err());
    }
}
