//! Point clouds in the sensor frame.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CloudError {
    #[error("point {index} is invalid: {reason}")]
    InvalidPoint { index: usize, reason: String },
}

/// A single return. Coordinates are metres with the sensor at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub intensity: f32,
}

impl Point {
    pub fn new(x: f32, y: f32, z: f32, intensity: f32) -> Self {
        Self { x, y, z, intensity }
    }

    /// Euclidean distance from the sensor, evaluated in f64.
    pub fn range(&self) -> f64 {
        let (x, y, z) = (self.x as f64, self.y as f64, self.z as f64);
        (x * x + y * y + z * z).sqrt()
    }

    fn check(&self) -> Result<(), String> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err(format!("non-finite coordinate ({}, {}, {})", self.x, self.y, self.z));
        }
        if !(self.intensity.is_finite() && self.intensity >= 0.0) {
            return Err(format!("intensity must be finite and >= 0, got {}", self.intensity));
        }
        Ok(())
    }
}

/// Where a cloud came from.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CloudMeta {
    pub source: Option<String>,
    pub sensor_id: Option<String>,
    pub capture_label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    points: Vec<Point>,
    meta: CloudMeta,
}

impl PointCloud {
    /// Validates every point: finite coordinates, finite non-negative intensity.
    pub fn new(points: Vec<Point>, meta: CloudMeta) -> Result<Self, CloudError> {
        for (index, p) in points.iter().enumerate() {
            p.check().map_err(|reason| CloudError::InvalidPoint { index, reason })?;
        }
        Ok(Self { points, meta })
    }

    /// Callers guarantee the point invariants.
    pub(crate) fn from_valid(points: Vec<Point>, meta: CloudMeta) -> Self {
        debug_assert!(points.iter().all(|p| p.check().is_ok()));
        Self { points, meta }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn meta(&self) -> &CloudMeta {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn into_parts(self) -> (Vec<Point>, CloudMeta) {
        (self.points, self.meta)
    }

    pub fn with_meta(self, meta: CloudMeta) -> Self {
        Self { meta, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_is_euclidean() {
        assert_eq!(Point::new(3.0, 4.0, 12.0, 1.0).range(), 13.0);
    }

    #[test]
    fn rejects_invalid_points() {
        let ok = Point::new(1.0, 2.0, 3.0, 0.0);
        let err = PointCloud::new(vec![ok, Point::new(f32::NAN, 0.0, 0.0, 1.0)], CloudMeta::default()).unwrap_err();
        assert!(matches!(err, CloudError::InvalidPoint { index: 1, .. }));
        assert!(PointCloud::new(vec![Point::new(0.0, 0.0, 1.0, -1.0)], CloudMeta::default()).is_err());
        assert!(PointCloud::new(vec![Point::new(0.0, f32::INFINITY, 1.0, 1.0)], CloudMeta::default()).is_err());
        assert!(PointCloud::new(vec![ok, Point::new(-0.0, 0.0, 0.0, -0.0)], CloudMeta::default()).is_ok());
    }
}
