//! Interval fusion: the overlap function, Brooks-Iyengar, similarity
//! scoring, predictive outlier exclusion, reliability-weighted averaging and
//! a scalar Kalman filter.

mod kalman;
mod overlap;

pub use kalman::{kalman_step, steady_state_variance, KalmanState};
pub use overlap::{max_overlap_regions, overlap_at, Interval, OverlapProfile, OverlapRegion};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::sensor::SensorReading;

/// Score at or above which a sensor is treated as agreeing with the fused region.
pub const AGREEMENT_THRESHOLD: f64 = 0.5;
/// Score at or above which a sensor is classified non-faulty.
pub const NON_FAULTY_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionResult {
    pub estimate: f64,
    /// One similarity score per input, in input order.
    pub scores: Vec<f64>,
    /// Ids of excluded sensors, ascending.
    pub excluded: Vec<usize>,
    pub effective_count: usize,
    /// Peak of the overlap function.
    pub max_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaultClass {
    NonFaulty,
    TamelyFaulty,
    WidelyFaulty,
}

impl FaultClass {
    pub fn from_score(score: f64) -> Self {
        if score >= NON_FAULTY_THRESHOLD {
            FaultClass::NonFaulty
        } else if score >= AGREEMENT_THRESHOLD {
            FaultClass::TamelyFaulty
        } else {
            FaultClass::WidelyFaulty
        }
    }
}

/// Byzantine tolerance of an `m`-sensor Brooks-Iyengar round, ⌊(m − 1)/3⌋.
pub fn bft_tolerance(m: usize) -> usize {
    m.saturating_sub(1) / 3
}

/// Point estimate from an overlap profile.
///
/// Follows the original Brooks-Iyengar output rule: the count-weighted mean
/// of the midpoints of all elementary segments covered by at least
/// `M − ⌊(M − 1)/3⌋` intervals. When no segment of positive length reaches
/// that count, the estimate falls back to the length-weighted midpoint of
/// the max-overlap regions (a plain mean if those are all single points).
fn profile_estimate(profile: &OverlapProfile, m: usize) -> f64 {
    let threshold = m - bft_tolerance(m);
    let segments = profile.segments_at_least(threshold);
    let weight: f64 = segments.iter().map(|s| s.count as f64).sum();
    if weight > 0.0 {
        return segments.iter().map(|s| s.count as f64 * s.interval.midpoint()).sum::<f64>() / weight;
    }
    let regions = profile.max_regions();
    let length: f64 = regions.iter().map(|r| r.interval.length()).sum();
    if length > 0.0 {
        regions.iter().map(|r| r.interval.length() * r.interval.midpoint()).sum::<f64>() / length
    } else {
        regions.iter().map(|r| r.interval.midpoint()).sum::<f64>() / regions.len() as f64
    }
}

fn scores_from_regions(intervals: &[Interval], regions: &[OverlapRegion]) -> Vec<f64> {
    let m = intervals.len() as f64;
    let agree = regions.first().map_or(0, |r| r.count) as f64;
    intervals
        .iter()
        .map(|iv| {
            let gap = regions
                .iter()
                .map(|r| iv.gap(&r.interval))
                .fold(f64::INFINITY, f64::min);
            if gap == 0.0 {
                0.5 + 0.5 * agree / m
            } else {
                let half = iv.half_width();
                if half > 0.0 {
                    0.5 * (1.0 - gap / half).max(0.0)
                } else {
                    0.0
                }
            }
        })
        .collect()
}

/// Per-sensor similarity to the max-overlap region.
///
/// Sensors meeting the region score `0.5 + 0.5·(max count)/M`; the others
/// score `0.5·max(0, 1 − gap/half_width)`, which is below 0.5.
pub fn similarity_scores(intervals: &[Interval]) -> Result<Vec<f64>> {
    let regions = max_overlap_regions(intervals)?;
    Ok(scores_from_regions(intervals, &regions))
}

pub fn brooks_iyengar_fuse(intervals: &[Interval]) -> Result<FusionResult> {
    if intervals.is_empty() {
        return Err(Error::Empty("Brooks-Iyengar needs at least one interval"));
    }
    let profile = OverlapProfile::build(intervals);
    let regions = profile.max_regions();
    let scores = scores_from_regions(intervals, &regions);
    let excluded: Vec<usize> = scores
        .iter()
        .enumerate()
        .filter(|(_, &s)| s < AGREEMENT_THRESHOLD)
        .map(|(i, _)| i)
        .collect();
    Ok(FusionResult {
        estimate: profile_estimate(&profile, intervals.len()),
        effective_count: intervals.len() - excluded.len(),
        max_count: profile.max_count(),
        scores,
        excluded,
    })
}

/// Brooks-Iyengar applied independently along each coordinate of `d`-dimensional boxes.
pub fn vector_brooks_iyengar(boxes: &[Vec<Interval>]) -> Result<Vec<f64>> {
    let first = boxes.first().ok_or(Error::Empty("vector fusion needs at least one box"))?;
    let dim = first.len();
    if dim == 0 {
        return Err(invalid("boxes must have at least one dimension"));
    }
    if let Some(b) = boxes.iter().find(|b| b.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: b.len(),
        });
    }
    let mut column = Vec::with_capacity(boxes.len());
    (0..dim)
        .map(|j| {
            column.clear();
            column.extend(boxes.iter().map(|b| b[j]));
            Ok(brooks_iyengar_fuse(&column)?.estimate)
        })
        .collect()
}

/// Excludes readings scoring below 0.5, then fuses the survivors with
/// inverse-variance weights (∝ V²).
pub fn predictive_outlier_fuse(readings: &[SensorReading]) -> Result<FusionResult> {
    if readings.is_empty() {
        return Err(Error::Empty("outlier fusion needs at least one reading"));
    }
    let intervals: Vec<Interval> = readings.iter().map(|r| r.interval).collect();
    let profile = OverlapProfile::build(&intervals);
    let scores = scores_from_regions(&intervals, &profile.max_regions());

    let mut excluded = Vec::new();
    let (mut num, mut den, mut survivors) = (0.0, 0.0, 0usize);
    for (r, &s) in readings.iter().zip(&scores) {
        if s < AGREEMENT_THRESHOLD {
            excluded.push(r.sensor_id);
        } else {
            let w = r.visibility * r.visibility;
            num += w * r.estimate;
            den += w;
            survivors += 1;
        }
    }
    if survivors == 0 {
        return Err(Error::NoSurvivors);
    }
    if den == 0.0 {
        return Err(Error::NoInformation);
    }
    excluded.sort_unstable();
    Ok(FusionResult {
        estimate: num / den,
        effective_count: survivors,
        max_count: profile.max_count(),
        scores,
        excluded,
    })
}

pub fn simple_average(estimates: &[f64]) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Empty("average of no estimates"));
    }
    Ok(estimates.iter().sum::<f64>() / estimates.len() as f64)
}

/// `Σ V̂ᵢ² T̂ᵢ / Σ V̂ᵢ²`.
pub fn bayesian_weighted_fuse(estimates: &[f64], visibilities: &[f64]) -> Result<f64> {
    if estimates.len() != visibilities.len() {
        return Err(Error::DimensionMismatch {
            expected: estimates.len(),
            found: visibilities.len(),
        });
    }
    if estimates.is_empty() {
        return Err(Error::Empty("weighted fusion of no estimates"));
    }
    if visibilities.iter().any(|v| !(*v >= 0.0)) {
        return Err(invalid("visibilities must be non-negative"));
    }
    let (num, den) = estimates
        .iter()
        .zip(visibilities)
        .fold((0.0, 0.0), |(n, d), (t, v)| (n + v * v * t, d + v * v));
    if den == 0.0 {
        return Err(Error::NoInformation);
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv(l: f64, u: f64) -> Interval {
        Interval::new(l, u).unwrap()
    }

    fn reading(id: usize, estimate: f64, half: f64, visibility: f64) -> SensorReading {
        SensorReading {
            sensor_id: id,
            estimate,
            interval: Interval::centered(estimate, half).unwrap(),
            visibility,
            timestamp: 0.0,
        }
    }

    #[test]
    fn single_interval_gives_midpoint() {
        let r = brooks_iyengar_fuse(&[iv(1.0, 4.0)]).unwrap();
        assert_eq!(r.estimate, 2.5);
        assert!(r.excluded.is_empty());
        assert_eq!(r.effective_count, 1);
    }

    #[test]
    fn identical_intervals() {
        let ivs = vec![iv(-1.0, 3.0); 6];
        let r = brooks_iyengar_fuse(&ivs).unwrap();
        assert_eq!(r.estimate, 1.0);
        assert!(r.excluded.is_empty());
        assert_eq!(similarity_scores(&ivs).unwrap(), vec![1.0; 6]);
    }

    #[test]
    fn far_interval_score_vanishes() {
        let mut prev = 0.5;
        for far in [1.1, 1.5, 1.8, 3.0] {
            let ivs = [iv(0.0, 1.0), iv(0.2, 0.9), iv(far, far + 2.0)];
            let s = similarity_scores(&ivs).unwrap()[2];
            assert!(s < prev);
            prev = s;
        }
        assert_eq!(prev, 0.0);
    }

    #[test]
    fn fault_classes() {
        assert_eq!(FaultClass::from_score(1.0), FaultClass::NonFaulty);
        assert_eq!(FaultClass::from_score(0.95), FaultClass::NonFaulty);
        assert_eq!(FaultClass::from_score(0.7), FaultClass::TamelyFaulty);
        assert_eq!(FaultClass::from_score(0.5), FaultClass::TamelyFaulty);
        assert_eq!(FaultClass::from_score(0.14), FaultClass::WidelyFaulty);
    }

    #[test]
    fn vector_rejects_mixed_dimensions() {
        let boxes = vec![vec![iv(0.0, 1.0)], vec![iv(0.0, 1.0), iv(0.0, 1.0)]];
        assert!(matches!(
            vector_brooks_iyengar(&boxes),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
        assert!(vector_brooks_iyengar(&[]).is_err());
    }

    #[test]
    fn vector_identical_boxes() {
        let b = vec![iv(0.0, 2.0), iv(10.0, 14.0), iv(-3.0, -1.0)];
        assert_eq!(vector_brooks_iyengar(&vec![b; 4]).unwrap(), vec![1.0, 12.0, -2.0]);
    }

    #[test]
    fn outlier_single_sensor() {
        let r = predictive_outlier_fuse(&[reading(7, 3.5, 0.3, 1.0)]).unwrap();
        assert_eq!(r.estimate, 3.5);
        assert!(r.excluded.is_empty());
    }

    #[test]
    fn outlier_equal_visibility_is_average() {
        let rs: Vec<_> = [1.0, 1.2, 0.9, 1.1]
            .iter()
            .enumerate()
            .map(|(i, &x)| reading(i, x, 0.5, 1.0))
            .collect();
        let r = predictive_outlier_fuse(&rs).unwrap();
        assert!((r.estimate - 1.05).abs() < 1e-12);
    }

    #[test]
    fn outlier_excludes_far_sensor_by_id() {
        let rs = vec![
            reading(10, 1.0, 0.5, 1.0),
            reading(11, 1.1, 0.5, 1.0),
            reading(12, 9.0, 0.5, 0.0),
            reading(13, 0.9, 0.5, 1.0),
        ];
        let r = predictive_outlier_fuse(&rs).unwrap();
        assert_eq!(r.excluded, vec![12]);
        assert_eq!(r.effective_count, 3);
        assert!((r.estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outlier_all_zero_weight_survivors() {
        let rs = vec![reading(0, 1.0, 0.5, 0.0), reading(1, 1.1, 0.5, 0.0)];
        assert!(matches!(predictive_outlier_fuse(&rs), Err(Error::NoInformation)));
    }

    #[test]
    fn averages() {
        assert_eq!(simple_average(&[3.25]).unwrap(), 3.25);
        assert_eq!(simple_average(&[-2.5, 2.5]).unwrap(), 0.0);
        assert!(simple_average(&[]).is_err());
    }

    #[test]
    fn bayesian_weights() {
        assert!((bayesian_weighted_fuse(&[1.0, 2.0], &[1.0, 0.5]).unwrap() - 1.2).abs() < 1e-15);
        assert_eq!(bayesian_weighted_fuse(&[1.0, 3.0], &[0.7, 0.7]).unwrap(), 2.0);
        assert_eq!(bayesian_weighted_fuse(&[1.0, 50.0], &[0.3, 0.0]).unwrap(), 1.0);
        assert!(matches!(
            bayesian_weighted_fuse(&[1.0, 2.0], &[0.0, 0.0]),
            Err(Error::NoInformation)
        ));
        assert!(bayesian_weighted_fuse(&[1.0], &[1.0, 1.0]).is_err());
    }
}
