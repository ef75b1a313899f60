//! Summary statistics for point clouds.

use serde::Serialize;

use crate::cloud::PointCloud;

/// Radius of the near-sensor region where snow clutter concentrates, m.
pub const NEAR_FIELD_RANGE: f64 = 10.0;
/// Raw intensity below which near-field returns count as clutter-like.
pub const LOW_INTENSITY: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RangePercentiles {
    pub min: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// `counts[k]` covers intensities in `[k·w, (k+1)·w)`.
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CloudStats {
    pub n_points: usize,
    pub ranges: Option<RangePercentiles>,
    pub intensity_mean: Option<f64>,
    pub histogram: Histogram,
    /// Returns within [`NEAR_FIELD_RANGE`] with intensity below [`LOW_INTENSITY`].
    pub near_field_low_intensity: usize,
    /// `near_field_low_intensity / n_points`, zero for an empty cloud.
    pub near_field_low_intensity_fraction: f64,
}

fn percentile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Computes [`CloudStats`] with intensity bins of `bin_width`.
pub fn cloud_stats(cloud: &PointCloud, bin_width: f64) -> Result<CloudStats, String> {
    if !(bin_width.is_finite() && bin_width > 0.0) {
        return Err(format!("bin width must be finite and > 0, got {bin_width}"));
    }
    let n = cloud.len();
    let mut ranges: Vec<f64> = cloud.points().iter().map(|p| p.range()).collect();
    ranges.sort_by(f64::total_cmp);

    let mut counts: Vec<u64> = Vec::new();
    let mut near = 0;
    let mut sum = 0.0;
    for p in cloud.points() {
        let i = p.intensity as f64;
        sum += i;
        let bin = (i / bin_width).floor() as usize;
        if bin >= counts.len() {
            counts.resize(bin + 1, 0);
        }
        counts[bin] += 1;
        if p.range() <= NEAR_FIELD_RANGE && i < LOW_INTENSITY {
            near += 1;
        }
    }

    Ok(CloudStats {
        n_points: n,
        ranges: (n > 0).then(|| RangePercentiles {
            min: ranges[0],
            p25: percentile(&ranges, 0.25),
            median: percentile(&ranges, 0.5),
            p75: percentile(&ranges, 0.75),
            max: ranges[n - 1],
        }),
        intensity_mean: (n > 0).then(|| sum / n as f64),
        histogram: Histogram { bin_width, counts },
        near_field_low_intensity: near,
        near_field_low_intensity_fraction: if n == 0 { 0.0 } else { near as f64 / n as f64 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::{CloudMeta, Point};

    #[test]
    fn empty_cloud() {
        let s = cloud_stats(&PointCloud::default(), 1.0).unwrap();
        assert_eq!(s.n_points, 0);
        assert_eq!(s.ranges, None);
        assert!(s.histogram.counts.is_empty());
        assert_eq!(s.near_field_low_intensity_fraction, 0.0);
    }

    #[test]
    fn uniform_intensities_fill_bins_evenly() {
        // intensities 0.0, 0.1, ..., 9.9 → ten points per unit bin
        let pts = (0..100).map(|k| Point::new(1.0 + k as f32, 0.0, 0.0, k as f32 / 10.0)).collect();
        let s = cloud_stats(&PointCloud::new(pts, CloudMeta::default()).unwrap(), 1.0).unwrap();
        assert_eq!(s.histogram.counts, vec![10; 10]);
        let r = s.ranges.unwrap();
        assert_eq!((r.min, r.max), (1.0, 100.0));
        assert_eq!(r.median, 50.5);
        // ranges 1..=10 carry intensities 0.0..=0.9
        assert_eq!(s.near_field_low_intensity, 10);
        assert!((s.near_field_low_intensity_fraction - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_bin_width() {
        assert!(cloud_stats(&PointCloud::default(), 0.0).is_err());
    }
}
