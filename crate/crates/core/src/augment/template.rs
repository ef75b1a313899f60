//! Empirical near-sensor clutter templates.
//!
//! A template is the set of snow returns observed in a shell around the
//! sensor during a real (or fixture) snowfall, together with their intensity
//! statistics and the snowfall rate at capture time.
//!
//! On disk a template is a JSON document:
//!
//! ```text
//! {
//!   "format": "snowlidar-clutter-template",
//!   "version": 1,
//!   "snowfall_rate_mm_h": 35,
//!   "shell": { "inner_m": 0.5, "outer_m": 10 },
//!   "intensity": { "mean": 1.52, "upper_bound": 5 },
//!   "points": [
//!     [x, y, z, intensity],
//!     ...
//!   ]
//! }
//! ```

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::cloud::{Point, PointCloud};

pub const TEMPLATE_FORMAT: &str = "snowlidar-clutter-template";
pub const TEMPLATE_VERSION: u32 = 1;

/// Spherical shell around the sensor, radii in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shell {
    pub inner_m: f64,
    pub outer_m: f64,
}

impl Shell {
    /// Allows `inner == outer` (an empty shell).
    pub fn new(inner: f64, outer: f64) -> Result<Self, AugmentError> {
        let shell = Self {
            inner_m: inner,
            outer_m: outer,
        };
        shell.validate()?;
        Ok(shell)
    }

    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(self.inner_m.is_finite() && self.outer_m.is_finite() && 0.0 <= self.inner_m && self.inner_m <= self.outer_m) {
            return Err(AugmentError::InvalidConfig(format!(
                "shell must satisfy 0 <= inner <= outer, got [{}, {}]",
                self.inner_m, self.outer_m
            )));
        }
        Ok(())
    }

    /// Volume of the hemispherical shell above the sensor plane, m³.
    pub fn hemisphere_volume(&self) -> f64 {
        2.0 * PI / 3.0 * (self.outer_m.powi(3) - self.inner_m.powi(3))
    }

    pub fn contains(&self, range: f64) -> bool {
        self.inner_m <= range && range <= self.outer_m
    }
}

impl Default for Shell {
    fn default() -> Self {
        Self {
            inner_m: 0.5,
            outer_m: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntensityStats {
    pub mean: f64,
    pub upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClutterTemplate {
    shell: Shell,
    intensity: IntensityStats,
    snowfall_rate: f64,
    points: Vec<Point>,
}

impl ClutterTemplate {
    pub fn new(shell: Shell, intensity: IntensityStats, snowfall_rate: f64, points: Vec<Point>) -> Result<Self, AugmentError> {
        let bad = |m: String| Err(AugmentError::InvalidTemplate(m));
        shell.validate()?;
        if shell.inner_m >= shell.outer_m {
            return bad(format!("shell inner radius {} must be below outer radius {}", shell.inner_m, shell.outer_m));
        }
        if !(snowfall_rate.is_finite() && snowfall_rate > 0.0) {
            return bad(format!("snowfall rate must be > 0, got {snowfall_rate}"));
        }
        if !(intensity.mean > 0.0 && intensity.mean < intensity.upper_bound) {
            return bad(format!(
                "intensity mean {} must lie in (0, {})",
                intensity.mean, intensity.upper_bound
            ));
        }
        if points.is_empty() {
            return bad("template has no points".into());
        }
        PointCloud::new(points.clone(), Default::default()).map_err(|e| AugmentError::InvalidTemplate(e.to_string()))?;
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| !shell.contains(p.range())) {
            return bad(format!(
                "point {i} at range {} m lies outside the shell [{}, {}]",
                p.range(),
                shell.inner_m,
                shell.outer_m
            ));
        }
        Ok(Self {
            shell,
            intensity,
            snowfall_rate,
            points,
        })
    }

    pub fn shell(&self) -> Shell {
        self.shell
    }

    pub fn intensity_stats(&self) -> IntensityStats {
        self.intensity
    }

    /// Snowfall rate at capture, mm/h.
    pub fn snowfall_rate(&self) -> f64 {
        self.snowfall_rate
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Renders the versioned JSON document, one point per line.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(out, "  \"format\": \"{TEMPLATE_FORMAT}\",");
        let _ = writeln!(out, "  \"version\": {TEMPLATE_VERSION},");
        let _ = writeln!(out, "  \"snowfall_rate_mm_h\": {},", json_f64(self.snowfall_rate));
        let _ = writeln!(
            out,
            "  \"shell\": {{ \"inner_m\": {}, \"outer_m\": {} }},",
            json_f64(self.shell.inner_m),
            json_f64(self.shell.outer_m)
        );
        let _ = writeln!(
            out,
            "  \"intensity\": {{ \"mean\": {}, \"upper_bound\": {} }},",
            json_f64(self.intensity.mean),
            json_f64(self.intensity.upper_bound)
        );
        out.push_str("  \"points\": [\n");
        for (i, p) in self.points.iter().enumerate() {
            let sep = if i + 1 == self.points.len() { "" } else { "," };
            let _ = writeln!(out, "    [{}, {}, {}, {}]{sep}", p.x, p.y, p.z, p.intensity);
        }
        out.push_str("  ]\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self, AugmentError> {
        let doc: TemplateDocument = serde_json::from_str(text).map_err(|e| AugmentError::InvalidTemplate(e.to_string()))?;
        if doc.format != TEMPLATE_FORMAT {
            return Err(AugmentError::InvalidTemplate(format!("unexpected format tag {:?}", doc.format)));
        }
        if doc.version != TEMPLATE_VERSION {
            return Err(AugmentError::InvalidTemplate(format!(
                "unsupported template version {} (expected {TEMPLATE_VERSION})",
                doc.version
            )));
        }
        let points = doc.points.into_iter().map(|[x, y, z, i]| Point::new(x, y, z, i)).collect();
        Self::new(doc.shell, doc.intensity, doc.snowfall_rate_mm_h, points)
    }
}

#[derive(Deserialize)]
struct TemplateDocument {
    format: String,
    version: u32,
    snowfall_rate_mm_h: f64,
    shell: Shell,
    intensity: IntensityStats,
    points: Vec<[f32; 4]>,
}

fn json_f64(v: f64) -> String {
    serde_json::to_string(&v).expect("finite float")
}

/// Selects the low-intensity returns inside `shell` (range in shell,
/// intensity strictly below `intensity_cutoff`).
pub fn extract_template(
    snowy: &PointCloud,
    shell: Shell,
    intensity_cutoff: f64,
    snowfall_rate: f64,
) -> Result<ClutterTemplate, AugmentError> {
    shell.validate()?;
    if snowy.is_empty() {
        return Err(AugmentError::EmptyCloud);
    }
    if !(intensity_cutoff.is_finite() && intensity_cutoff > 0.0) {
        return Err(AugmentError::InvalidConfig(format!(
            "intensity cutoff must be finite and > 0, got {intensity_cutoff}"
        )));
    }
    let selected: Vec<Point> = snowy
        .points()
        .iter()
        .filter(|p| shell.contains(p.range()) && (p.intensity as f64) < intensity_cutoff)
        .copied()
        .collect();
    if selected.is_empty() {
        return Err(AugmentError::EmptySelection {
            inner: shell.inner_m,
            outer: shell.outer_m,
            cutoff: intensity_cutoff,
        });
    }
    let mean = selected.iter().map(|p| p.intensity as f64).sum::<f64>() / selected.len() as f64;
    ClutterTemplate::new(
        shell,
        IntensityStats {
            mean,
            upper_bound: intensity_cutoff,
        },
        snowfall_rate,
        selected,
    )
}
