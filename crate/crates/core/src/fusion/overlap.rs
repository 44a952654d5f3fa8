use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Closed interval `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(invalid(format!("interval bounds out of order: [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn centered(center: f64, half_width: f64) -> Result<Self> {
        Self::new(center - half_width, center + half_width)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn length(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.length()
    }

    pub fn intersects(&self, other: &Interval) -> bool {
        self.lower <= other.upper && other.lower <= self.upper
    }

    /// Distance between the closest points of the two intervals (0 if they meet).
    pub fn gap(&self, other: &Interval) -> f64 {
        (other.lower - self.upper).max(self.lower - other.upper).max(0.0)
    }

    pub fn shift(&self, by: f64) -> Self {
        Self {
            lower: self.lower + by,
            upper: self.upper + by,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapRegion {
    pub interval: Interval,
    pub count: usize,
}

/// Number of intervals containing `x`.
pub fn overlap_at(intervals: &[Interval], x: f64) -> usize {
    intervals.iter().filter(|iv| iv.contains(x)).count()
}

/// The piecewise-constant overlap function of a set of closed intervals,
/// built by a single sweep over the sorted endpoints.
///
/// `points` holds the distinct endpoint coordinates in increasing order.
/// `point_counts[k]` is O(points[k]); `segment_counts[k]` is O on the open
/// segment between `points[k]` and `points[k + 1]`.
#[derive(Debug, Clone)]
pub struct OverlapProfile {
    pub points: Vec<f64>,
    pub point_counts: Vec<usize>,
    pub segment_counts: Vec<usize>,
}

impl OverlapProfile {
    pub fn build(intervals: &[Interval]) -> Self {
        // (coordinate, is_end): starts sort before ends at equal coordinates
        let mut events: Vec<(f64, bool)> = Vec::with_capacity(2 * intervals.len());
        for iv in intervals {
            events.push((iv.lower, false));
            events.push((iv.upper, true));
        }
        events.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

        let mut points = Vec::new();
        let mut point_counts = Vec::new();
        let mut segment_counts = Vec::new();
        let mut active = 0usize;
        let mut i = 0;
        while i < events.len() {
            let x = events[i].0;
            let mut ends = 0;
            while i < events.len() && events[i].0 == x {
                if events[i].1 {
                    ends += 1;
                } else {
                    active += 1;
                }
                i += 1;
            }
            points.push(x);
            point_counts.push(active);
            active -= ends;
            if i < events.len() {
                segment_counts.push(active);
            }
        }
        Self {
            points,
            point_counts,
            segment_counts,
        }
    }

    pub fn max_count(&self) -> usize {
        self.point_counts.iter().copied().max().unwrap_or(0)
    }

    /// O(x) by binary search over the sweep structure.
    pub fn count_at(&self, x: f64) -> usize {
        match self.points.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(k) => self.point_counts[k],
            Err(0) => 0,
            Err(k) if k == self.points.len() => 0,
            Err(k) => self.segment_counts[k - 1],
        }
    }

    /// Maximal closed regions where O attains its global maximum.
    pub fn max_regions(&self) -> Vec<OverlapRegion> {
        let max = self.max_count();
        let mut regions = Vec::new();
        let mut start: Option<usize> = None;
        for k in 0..self.points.len() {
            if self.point_counts[k] == max && start.is_none() {
                start = Some(k);
            }
            let continues = k < self.segment_counts.len() && self.segment_counts[k] == max;
            if let (Some(s), false) = (start, continues) {
                if self.point_counts[k] == max {
                    regions.push(OverlapRegion {
                        interval: Interval {
                            lower: self.points[s],
                            upper: self.points[k],
                        },
                        count: max,
                    });
                    start = None;
                }
            }
        }
        regions
    }

    /// Elementary open segments whose overlap count is at least `k`.
    pub fn segments_at_least(&self, k: usize) -> Vec<OverlapRegion> {
        self.segment_counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c >= k)
            .map(|(j, &c)| OverlapRegion {
                interval: Interval {
                    lower: self.points[j],
                    upper: self.points[j + 1],
                },
                count: c,
            })
            .collect()
    }
}

/// Every maximal region where the overlap function attains its maximum.
pub fn max_overlap_regions(intervals: &[Interval]) -> Result<Vec<OverlapRegion>> {
    if intervals.is_empty() {
        return Err(Error::Empty("max_overlap_regions needs at least one interval"));
    }
    Ok(OverlapProfile::build(intervals).max_regions())
}
