//! LiDAR range equation for a homogeneous medium.
//!
//! P(R) = C·β0·O(R)·exp(-2αR)/R², with a linear overlap ramp between the
//! blind range R1 and the full-overlap range R2.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Rayleigh extinction of clear air at 900 nm, m^-1.
pub const CLEAR_AIR_EXTINCTION: f64 = 1.52e-6;
/// Average reflectivity of snow grains.
pub const SNOW_REFLECTIVITY: f64 = 0.4;

pub const DEFAULT_R1: f64 = 0.5;
pub const DEFAULT_R2: f64 = 4.0;
pub const DEFAULT_R_MAX: f64 = 200.0;
pub const DEFAULT_WAVELENGTH: f64 = 905e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LidarError {
    #[error("invalid sensor configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("calibration sample is empty")]
    EmptySample,
    #[error("calibration sample {index} at range {range} m has zero overlap (R1 = {r1} m)")]
    BlindZoneSample { index: usize, range: f64, r1: f64 },
    #[error("calibration sample {index} is invalid: {reason}")]
    InvalidSample { index: usize, reason: String },
}

/// Radiometric and geometric parameters of the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SensorConfigRepr")]
pub struct SensorConfig {
    /// System constant, raw intensity · m².
    c: f64,
    wavelength: f64,
    detector_radius: f64,
    r1: f64,
    r2: f64,
    r_max: f64,
    alpha_clear: f64,
}

#[derive(Deserialize)]
struct SensorConfigRepr {
    c: f64,
    wavelength: f64,
    detector_radius: f64,
    r1: f64,
    r2: f64,
    r_max: f64,
    alpha_clear: f64,
}

impl TryFrom<SensorConfigRepr> for SensorConfig {
    type Error = LidarError;

    fn try_from(r: SensorConfigRepr) -> Result<Self, LidarError> {
        SensorConfig::builder()
            .c(r.c)
            .wavelength(r.wavelength)
            .detector_radius(r.detector_radius)
            .ranges(r.r1, r.r2, r.r_max)
            .alpha_clear(r.alpha_clear)
            .build()
    }
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            wavelength: DEFAULT_WAVELENGTH,
            detector_radius: crate::scattering::DEFAULT_DETECTOR_RADIUS,
            r1: DEFAULT_R1,
            r2: DEFAULT_R2,
            r_max: DEFAULT_R_MAX,
            alpha_clear: CLEAR_AIR_EXTINCTION,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SensorConfigBuilder(SensorConfig);

impl SensorConfigBuilder {
    pub fn c(mut self, c: f64) -> Self {
        self.0.c = c;
        self
    }

    pub fn wavelength(mut self, wavelength: f64) -> Self {
        self.0.wavelength = wavelength;
        self
    }

    pub fn detector_radius(mut self, r_d: f64) -> Self {
        self.0.detector_radius = r_d;
        self
    }

    pub fn ranges(mut self, r1: f64, r2: f64, r_max: f64) -> Self {
        self.0.r1 = r1;
        self.0.r2 = r2;
        self.0.r_max = r_max;
        self
    }

    pub fn alpha_clear(mut self, alpha: f64) -> Self {
        self.0.alpha_clear = alpha;
        self
    }

    pub fn build(self) -> Result<SensorConfig, LidarError> {
        self.0.validate()?;
        Ok(self.0)
    }
}

impl SensorConfig {
    pub fn builder() -> SensorConfigBuilder {
        SensorConfigBuilder(SensorConfig::default())
    }

    /// Starts a builder from this configuration.
    pub fn to_builder(self) -> SensorConfigBuilder {
        SensorConfigBuilder(self)
    }

    fn validate(&self) -> Result<(), LidarError> {
        let bad = |m: String| Err(LidarError::InvalidConfig(m));
        for (name, v) in [
            ("c", self.c),
            ("wavelength", self.wavelength),
            ("detector_radius", self.detector_radius),
            ("r1", self.r1),
            ("r2", self.r2),
            ("r_max", self.r_max),
            ("alpha_clear", self.alpha_clear),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if self.c <= 0.0 {
            return bad(format!("c must be > 0, got {}", self.c));
        }
        if self.wavelength <= 0.0 || self.detector_radius <= 0.0 {
            return bad("wavelength and detector radius must be > 0".into());
        }
        if !(0.0 < self.r1 && self.r1 < self.r2 && self.r2 < self.r_max) {
            return bad(format!(
                "ranges must satisfy 0 < r1 < r2 < r_max, got r1 = {}, r2 = {}, r_max = {}",
                self.r1, self.r2, self.r_max
            ));
        }
        if self.alpha_clear < 0.0 {
            return bad(format!("alpha_clear must be >= 0, got {}", self.alpha_clear));
        }
        Ok(())
    }

    /// Same configuration with a different system constant.
    pub fn with_c(self, c: f64) -> Result<Self, LidarError> {
        self.to_builder().c(c).build()
    }

    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn detector_radius(&self) -> f64 {
        self.detector_radius
    }
    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn r2(&self) -> f64 {
        self.r2
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn alpha_clear(&self) -> f64 {
        self.alpha_clear
    }
}

/// A return surface at `range` with reflectivity β0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    range: f64,
    reflectivity: f64,
}

impl Target {
    pub fn new(range: f64, reflectivity: f64) -> Result<Self, LidarError> {
        if !(range.is_finite() && range > 0.0) {
            return Err(LidarError::InvalidTarget(format!("range must be finite and > 0, got {range}")));
        }
        if !(0.0..=1.0).contains(&reflectivity) {
            return Err(LidarError::InvalidTarget(format!("reflectivity must lie in [0, 1], got {reflectivity}")));
        }
        Ok(Self { range, reflectivity })
    }

    pub fn range(&self) -> f64 {
        self.range
    }

    pub fn reflectivity(&self) -> f64 {
        self.reflectivity
    }
}

/// Fraction of the transmitted footprint seen by the receiver.
pub fn overlap(r: f64, config: &SensorConfig) -> f64 {
    if r <= config.r1 {
        0.0
    } else if r >= config.r2 {
        1.0
    } else {
        (r - config.r1) / (config.r2 - config.r1)
    }
}

/// One-way transmission exp(-α·r) through a homogeneous medium.
pub fn transmission(r: f64, alpha: f64) -> f64 {
    (-alpha * r).exp()
}

pub fn received_power(target: &Target, alpha: f64, config: &SensorConfig) -> f64 {
    let r = target.range;
    config.c * target.reflectivity * overlap(r, config) * (-2.0 * alpha * r).exp() / (r * r)
}

/// Snowy-to-clear received power ratio at range `r`.
///
/// Every factor of the range equation except the two-way transmission
/// cancels, leaving exp(-2(α_snow - α_clear)r).
pub fn power_ratio(r: f64, alpha_snow: f64, alpha_clear: f64) -> f64 {
    (-2.0 * (alpha_snow - alpha_clear) * r).exp()
}

/// Estimates the system constant from `(range, intensity)` returns of targets
/// with a common reflectivity. Each return is inverted through the range
/// equation and the per-return constants are averaged. The `c` stored in
/// `config` is ignored.
pub fn calibrate_c(sample: &[(f64, f64)], reflectivity: f64, alpha: f64, config: &SensorConfig) -> Result<f64, LidarError> {
    if sample.is_empty() {
        return Err(LidarError::EmptySample);
    }
    if !(reflectivity > 0.0 && reflectivity <= 1.0) {
        return Err(LidarError::InvalidTarget(format!(
            "calibration reflectivity must lie in (0, 1], got {reflectivity}"
        )));
    }
    let mut sum = 0.0;
    for (index, &(range, intensity)) in sample.iter().enumerate() {
        if !(range.is_finite() && range > 0.0) {
            return Err(LidarError::InvalidSample {
                index,
                reason: format!("range must be finite and > 0, got {range}"),
            });
        }
        if !(intensity.is_finite() && intensity > 0.0) {
            return Err(LidarError::InvalidSample {
                index,
                reason: format!("intensity must be finite and > 0, got {intensity}"),
            });
        }
        let o = overlap(range, config);
        if o == 0.0 {
            return Err(LidarError::BlindZoneSample {
                index,
                range,
                r1: config.r1,
            });
        }
        sum += intensity * range * range / (reflectivity * o * (-2.0 * alpha * range).exp());
    }
    Ok(sum / sample.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn ramp(r1: f64, r2: f64) -> SensorConfig {
        SensorConfig::builder().ranges(r1, r2, 200.0).build().unwrap()
    }

    #[test]
    fn overlap_examples() {
        let cfg = ramp(1.0, 4.0);
        assert_eq!(overlap(1.0, &cfg), 0.0);
        assert_eq!(overlap(0.2, &cfg), 0.0);
        assert_eq!(overlap(2.5, &cfg), 0.5);
        assert_eq!(overlap(8.0, &cfg), 1.0);
        assert_eq!(overlap(4.0, &cfg), 1.0);
    }

    #[test]
    fn transmission_examples() {
        assert_eq!(transmission(123.0, 0.0), 1.0);
        let t = transmission(100.0, CLEAR_AIR_EXTINCTION);
        assert!((t - 0.999848).abs() < 1e-6);
        assert_eq!(transmission(0.0, 0.3), 1.0);
    }

    #[test]
    fn received_power_examples() {
        let cfg = SensorConfig::default().with_c(100.0).unwrap();
        assert_eq!(received_power(&Target::new(0.4, 0.4).unwrap(), 0.0, &cfg), 0.0);
        assert_eq!(received_power(&Target::new(0.5, 0.4).unwrap(), 0.0, &cfg), 0.0);
        assert_eq!(received_power(&Target::new(10.0, 0.0).unwrap(), 0.0, &cfg), 0.0);
        let p = received_power(&Target::new(10.0, 0.4).unwrap(), 0.0, &cfg);
        assert!(rel(p, 0.4) < 1e-15);
    }

    #[test]
    fn received_power_decreasing_in_alpha_and_far_range() {
        let cfg = SensorConfig::default().with_c(100.0).unwrap();
        let t = Target::new(20.0, 0.5).unwrap();
        assert!(received_power(&t, 0.01, &cfg) < received_power(&t, 0.001, &cfg));
        let far = Target::new(40.0, 0.5).unwrap();
        assert!(received_power(&far, 0.001, &cfg) < received_power(&t, 0.001, &cfg));
    }

    #[test]
    fn power_ratio_examples() {
        assert_eq!(power_ratio(37.0, 0.02, 0.02), 1.0);
        assert_eq!(power_ratio(0.0, 0.02, 0.0), 1.0);
        let r = power_ratio(50.0, 0.01, CLEAR_AIR_EXTINCTION);
        let expected = (-2.0f64 * (0.01 - 1.52e-6) * 50.0).exp();
        assert!(rel(r, expected) < 1e-15);
        assert!((r - 0.3679).abs() < 1e-3);
    }

    #[test]
    fn target_invariants() {
        assert!(Target::new(0.0, 0.4).is_err());
        assert!(Target::new(-1.0, 0.4).is_err());
        assert!(Target::new(1.0, 1.2).is_err());
        assert!(Target::new(1.0, -0.1).is_err());
        assert!(Target::new(f64::NAN, 0.4).is_err());
    }

    #[test]
    fn sensor_invariants() {
        assert!(SensorConfig::builder().ranges(4.0, 1.0, 200.0).build().is_err());
        assert!(SensorConfig::builder().ranges(0.0, 1.0, 200.0).build().is_err());
        assert!(SensorConfig::builder().ranges(0.5, 4.0, 3.0).build().is_err());
        assert!(SensorConfig::builder().c(0.0).build().is_err());
        assert!(SensorConfig::builder().alpha_clear(-1e-3).build().is_err());
        let json = serde_json::to_string(&SensorConfig::default()).unwrap();
        let back: SensorConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, SensorConfig::default());
        let bad = json.replace("\"r1\":0.5", "\"r1\":9.0");
        assert!(serde_json::from_str::<SensorConfig>(&bad).is_err());
    }

    #[test]
    fn calibration_single_point() {
        let cfg = SensorConfig::default();
        let c = calibrate_c(&[(10.0, 1.5)], SNOW_REFLECTIVITY, 0.0, &cfg).unwrap();
        assert!(rel(c, 375.0) < 1e-14);
        let many = calibrate_c(&[(10.0, 1.5); 17], SNOW_REFLECTIVITY, 0.0, &cfg).unwrap();
        assert!(rel(many, 375.0) < 1e-14);
    }

    #[test]
    fn calibration_errors() {
        let cfg = SensorConfig::default();
        assert_eq!(calibrate_c(&[], 0.4, 0.0, &cfg), Err(LidarError::EmptySample));
        assert!(matches!(
            calibrate_c(&[(3.0, 1.0), (0.5, 1.0)], 0.4, 0.0, &cfg),
            Err(LidarError::BlindZoneSample { index: 1, .. })
        ));
        assert!(calibrate_c(&[(3.0, 0.0)], 0.4, 0.0, &cfg).is_err());
        assert!(calibrate_c(&[(3.0, 1.0)], 0.0, 0.0, &cfg).is_err());
    }

    proptest! {
        #[test]
        fn overlap_is_clamped_monotone_continuous(a in 0.0f64..20.0, b in 0.0f64..20.0) {
            let cfg = ramp(0.5, 4.0);
            let (oa, ob) = (overlap(a, &cfg), overlap(b, &cfg));
            prop_assert!((0.0..=1.0).contains(&oa));
            if a <= b { prop_assert!(oa <= ob); }
            // Lipschitz with constant 1/(R2 - R1)
            prop_assert!((oa - ob).abs() <= (a - b).abs() / 3.5 + 1e-15);
        }

        #[test]
        fn transmission_is_multiplicative(r1 in 0.0f64..300.0, r2 in 0.0f64..300.0, alpha in 0.0f64..0.05) {
            let whole = transmission(r1 + r2, alpha);
            prop_assert!(rel(transmission(r1, alpha) * transmission(r2, alpha), whole) < 1e-12);
        }

        #[test]
        fn calibration_round_trips(
            c in 1.0f64..1e4,
            alpha in 0.0f64..0.05,
            ranges in proptest::collection::vec(0.6f64..10.0, 1..40),
        ) {
            let cfg = SensorConfig::default().with_c(c).unwrap();
            let sample: Vec<(f64, f64)> = ranges
                .iter()
                .map(|&r| (r, received_power(&Target::new(r, SNOW_REFLECTIVITY).unwrap(), alpha, &cfg)))
                .collect();
            let estimate = calibrate_c(&sample, SNOW_REFLECTIVITY, alpha, &SensorConfig::default()).unwrap();
            prop_assert!(rel(estimate, c) < 1e-9);
            let calibrated = cfg.with_c(estimate).unwrap();
            for &(r, i) in &sample {
                let p = received_power(&Target::new(r, SNOW_REFLECTIVITY).unwrap(), alpha, &calibrated);
                prop_assert!(rel(p, i) < 1e-9);
            }
        }
    }
}
