//! Clear-to-snow point cloud transformation.
//!
//! [`augment`] runs the whole pipeline: snow extinction from the size law,
//! per-point attenuation with drop-out, and injection of near-sensor clutter
//! resampled from a [`ClutterTemplate`].

mod clutter;
mod template;

pub use clutter::{calibrate_detection_fraction, expected_clutter_count, inject_clutter, InjectionParams};
pub use template::{extract_template, ClutterTemplate, IntensityStats, Shell, TEMPLATE_FORMAT, TEMPLATE_VERSION};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cloud::{CloudError, Point, PointCloud};
use crate::lidar::{self, LidarError, SensorConfig, SNOW_REFLECTIVITY};
use crate::quadrature::QuadratureConfig;
use crate::scattering::{self, CrossSection, QeffModel, ScatteringError, SnowfallParams, PARTICLE_COUNT_DIAMETER_RANGE};

/// Density scale applied to the fitted size law for augmentation. At unit
/// scale the fitted law gives α of a few m^-1, which would extinguish every
/// return beyond a metre; 1e-3 brings α(5 mm/h) to ~4e-3 m^-1.
pub const DEFAULT_UNIT_SCALE: f64 = 1e-3;
pub const DEFAULT_DROP_THRESHOLD: f64 = 1.0;
pub const DEFAULT_JITTER_SIGMA: f64 = 0.15;
pub const DEFAULT_RETRY_BUDGET: u32 = 64;
pub const DEFAULT_MAX_INJECTED: u64 = 10_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AugmentError {
    #[error("invalid augmentation configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid clutter template: {0}")]
    InvalidTemplate(String),
    #[error("input cloud is empty")]
    EmptyCloud,
    #[error("no points with range in [{inner}, {outer}] m and intensity below {cutoff}")]
    EmptySelection { inner: f64, outer: f64, cutoff: f64 },
    #[error("point {index} lies at the sensor origin; its range is undefined")]
    PointAtOrigin { index: usize },
    #[error("clutter point {index}: no jittered position inside the shell after {attempts} attempts")]
    RejectionBudgetExceeded { index: u64, attempts: u32 },
    #[error("expected clutter count {count} exceeds the configured maximum {max}")]
    TooManyClutterPoints { count: u64, max: u64 },
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Lidar(#[from] LidarError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

impl AugmentError {
    /// True for failures of a numerical procedure rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            AugmentError::RejectionBudgetExceeded { .. } | AugmentError::Scattering(ScatteringError::Quadrature(_))
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentationConfig {
    pub snowfall: SnowfallParams,
    pub sensor: SensorConfig,
    pub qeff: QeffModel,
    pub quadrature: QuadratureConfig,
    pub cross_section: CrossSection,
    /// Diameter bounds for counting particles in the clutter shell, m.
    pub count_bounds: (f64, f64),
    /// Attenuated returns below this raw intensity are removed.
    pub drop_threshold: f64,
    /// Per-axis standard deviation of the clutter position jitter, m.
    pub jitter_sigma: f64,
    /// Fraction of physically present particles that register a return.
    /// `None` calibrates it against the template.
    pub detection_fraction: Option<f64>,
    /// Reflectivity assigned to injected snow returns.
    pub clutter_reflectivity: f64,
    pub retry_budget: u32,
    pub max_injected: u64,
    pub seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self {
            snowfall: SnowfallParams::adjusted(5.0)
                .and_then(|p| p.with_unit_scale(DEFAULT_UNIT_SCALE))
                .expect("default snowfall parameters are valid"),
            sensor: SensorConfig::default(),
            qeff: QeffModel::default(),
            quadrature: QuadratureConfig::default(),
            cross_section: CrossSection::default(),
            count_bounds: PARTICLE_COUNT_DIAMETER_RANGE,
            drop_threshold: DEFAULT_DROP_THRESHOLD,
            jitter_sigma: DEFAULT_JITTER_SIGMA,
            detection_fraction: None,
            clutter_reflectivity: SNOW_REFLECTIVITY,
            retry_budget: DEFAULT_RETRY_BUDGET,
            max_injected: DEFAULT_MAX_INJECTED,
            seed: 0,
        }
    }
}

impl AugmentationConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        let bad = |m: String| Err(AugmentError::InvalidConfig(m));
        if !(self.drop_threshold.is_finite() && self.drop_threshold >= 0.0) {
            return bad(format!("drop threshold must be finite and >= 0, got {}", self.drop_threshold));
        }
        if !(self.jitter_sigma.is_finite() && self.jitter_sigma >= 0.0) {
            return bad(format!("jitter sigma must be finite and >= 0, got {}", self.jitter_sigma));
        }
        if let Some(f) = self.detection_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("detection fraction must lie in (0, 1], got {f}"));
            }
        }
        if !(self.clutter_reflectivity > 0.0 && self.clutter_reflectivity <= 1.0) {
            return bad(format!("clutter reflectivity must lie in (0, 1], got {}", self.clutter_reflectivity));
        }
        if self.retry_budget == 0 {
            return bad("retry budget must be >= 1".into());
        }
        self.snowfall.with_bounds(self.count_bounds)?;
        self.qeff.validate()?;
        self.quadrature.validate().map_err(ScatteringError::from)?;
        Ok(())
    }

    /// Snowfall parameters used for particle counting.
    fn counting_params(&self, snowfall: SnowfallParams) -> Result<SnowfallParams, AugmentError> {
        Ok(snowfall.with_bounds(self.count_bounds)?)
    }

    /// Particle extinction (excluding clear air) under `snowfall`.
    fn particle_extinction(&self, snowfall: &SnowfallParams) -> Result<f64, AugmentError> {
        Ok(scattering::extinction_coefficient_with(
            snowfall,
            &self.qeff,
            &self.quadrature,
            self.cross_section,
        )?)
    }
}

/// Accounting for one [`augment`] run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentationReport {
    /// Total extinction in snow (clear air plus particles), m^-1.
    pub alpha_snow: f64,
    pub alpha_particles: f64,
    pub alpha_clear: f64,
    /// Scalar Q_eff applied, absent for diameter-resolved models.
    pub qeff: Option<f64>,
    pub n_input: usize,
    pub n_kept: usize,
    pub n_dropped: usize,
    pub n_injected: usize,
    pub c_used: f64,
    pub detection_fraction: f64,
    pub seed: u64,
    pub config: AugmentationConfig,
}

/// Scales every intensity by the snow/clear power ratio at its range and
/// drops returns that fall below `drop_threshold`. Returns the surviving
/// cloud (order preserved) and the number dropped.
pub fn attenuate(
    cloud: &PointCloud,
    alpha_snow: f64,
    alpha_clear: f64,
    drop_threshold: f64,
) -> Result<(PointCloud, usize), AugmentError> {
    if !(alpha_clear >= 0.0 && alpha_snow >= alpha_clear && alpha_snow.is_finite()) {
        return Err(AugmentError::InvalidConfig(format!(
            "attenuation requires alpha_snow >= alpha_clear >= 0, got {alpha_snow} and {alpha_clear}"
        )));
    }
    if drop_threshold.is_nan() || drop_threshold < 0.0 {
        return Err(AugmentError::InvalidConfig(format!("drop threshold must be >= 0, got {drop_threshold}")));
    }
    let scaled: Vec<Option<Point>> = cloud
        .points()
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            let r = p.range();
            if r == 0.0 {
                return Err(AugmentError::PointAtOrigin { index });
            }
            let intensity = (p.intensity as f64 * lidar::power_ratio(r, alpha_snow, alpha_clear)) as f32;
            Ok(((intensity as f64) >= drop_threshold).then_some(Point { intensity, ..*p }))
        })
        .collect::<Result<_, _>>()?;
    let kept: Vec<Point> = scaled.into_iter().flatten().collect();
    let dropped = cloud.len() - kept.len();
    Ok((PointCloud::from_valid(kept, cloud.meta().clone()), dropped))
}

/// Full clear-to-snow transformation. A pure function of its inputs: the
/// same cloud, configuration, template and seed always give the same output.
pub fn augment(
    cloud: &PointCloud,
    config: &AugmentationConfig,
    template: &ClutterTemplate,
) -> Result<(PointCloud, AugmentationReport), AugmentError> {
    config.validate()?;
    if cloud.is_empty() {
        return Err(AugmentError::EmptyCloud);
    }
    let alpha_clear = config.sensor.alpha_clear();

    // Resolve a Monte-Carlo Q_eff once so the extinction integral and the
    // report agree on the value used.
    let qeff_scalar = config.qeff.scalar(&config.snowfall)?;
    let resolved = AugmentationConfig {
        qeff: qeff_scalar.map_or(config.qeff, |value| QeffModel::Constant { value }),
        ..*config
    };
    let alpha_particles = resolved.particle_extinction(&config.snowfall)?;
    let alpha_snow = alpha_clear + alpha_particles;

    let (attenuated, n_dropped) = attenuate(cloud, alpha_snow, alpha_clear, config.drop_threshold)?;

    let template_snow = config.snowfall.with_sr(template.snowfall_rate())?;
    let detection_fraction = match config.detection_fraction {
        Some(f) => f,
        None => calibrate_detection_fraction(template, &config.counting_params(template_snow)?)?,
    };
    let count = expected_clutter_count(&config.counting_params(config.snowfall)?, template.shell(), detection_fraction)?;
    if count > config.max_injected {
        return Err(AugmentError::TooManyClutterPoints {
            count,
            max: config.max_injected,
        });
    }

    // Sensor constant from the template returns, inverted at the capture
    // snowfall rate.
    let alpha_template = alpha_clear + config.particle_extinction(&template_snow)?;
    let sample: Vec<(f64, f64)> = template
        .points()
        .iter()
        .map(|p| (p.range(), p.intensity as f64))
        .filter(|&(r, i)| lidar::overlap(r, &config.sensor) > 0.0 && i > 0.0)
        .collect();
    let c_used = lidar::calibrate_c(&sample, config.clutter_reflectivity, alpha_template, &config.sensor)?;

    let injection = InjectionParams {
        sensor: config.sensor.with_c(c_used)?,
        alpha_snow,
        reflectivity: config.clutter_reflectivity,
        jitter_sigma: config.jitter_sigma,
        retry_budget: config.retry_budget,
        seed: config.seed,
    };
    let n_kept = attenuated.len();
    let (out, n_injected) = inject_clutter(attenuated, template, count as usize, &injection)?;

    let report = AugmentationReport {
        alpha_snow,
        alpha_particles,
        alpha_clear,
        qeff: qeff_scalar,
        n_input: cloud.len(),
        n_kept,
        n_dropped,
        n_injected,
        c_used,
        detection_fraction,
        seed: config.seed,
        config: *config,
    };
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::CloudMeta;
    use proptest::prelude::*;

    fn cloud(points: Vec<Point>) -> PointCloud {
        PointCloud::new(points, CloudMeta::default()).unwrap()
    }

    fn small_template() -> ClutterTemplate {
        let pts: Vec<Point> = (0..200)
            .map(|i| {
                let r = 1.0 + 8.5 * (i as f32 / 199.0);
                let a = i as f32 * 0.37;
                Point::new(r * a.cos(), r * a.sin(), 0.1, 0.8 + (i % 7) as f32 * 0.3)
            })
            .collect();
        let mean = pts.iter().map(|p| p.intensity as f64).sum::<f64>() / pts.len() as f64;
        ClutterTemplate::new(Shell::default(), IntensityStats { mean, upper_bound: 5.0 }, 35.0, pts).unwrap()
    }

    #[test]
    fn attenuate_identity_when_media_match() {
        let c = cloud(vec![Point::new(10.0, 0.0, 0.0, 3.0), Point::new(0.0, 80.0, 1.0, 0.2)]);
        let (out, dropped) = attenuate(&c, 0.01, 0.01, 0.0).unwrap();
        assert_eq!(dropped, 0);
        assert_eq!(out, c);
    }

    #[test]
    fn attenuate_single_point_value() {
        let c = cloud(vec![Point::new(0.0, 30.0, 40.0, 10.0)]);
        let (out, dropped) = attenuate(&c, 0.01, 0.0, 0.0).unwrap();
        assert_eq!(dropped, 0);
        let expected = (10.0 * (-1.0f64).exp()) as f32;
        assert_eq!(out.points()[0].intensity, expected);
        assert!((out.points()[0].intensity - 3.679).abs() < 1e-3);
    }

    #[test]
    fn attenuate_sentinel_threshold_drops_everything() {
        let c = cloud(vec![Point::new(1.0, 0.0, 0.0, f32::MAX), Point::new(5.0, 0.0, 0.0, 1.0)]);
        let (out, dropped) = attenuate(&c, 0.02, 0.0, f64::MAX).unwrap();
        assert!(out.is_empty());
        assert_eq!(dropped, 2);
    }

    #[test]
    fn attenuate_rejects_origin_and_bad_alphas() {
        let c = cloud(vec![Point::new(1.0, 0.0, 0.0, 1.0), Point::new(0.0, 0.0, 0.0, 1.0)]);
        assert_eq!(attenuate(&c, 0.01, 0.0, 0.0).unwrap_err(), AugmentError::PointAtOrigin { index: 1 });
        let ok = cloud(vec![Point::new(1.0, 0.0, 0.0, 1.0)]);
        assert!(attenuate(&ok, 0.0, 0.01, 0.0).is_err());
        assert!(attenuate(&ok, 0.01, -0.01, 0.0).is_err());
    }

    #[test]
    fn augment_fixed_point_without_snow() {
        let c = cloud(vec![Point::new(10.0, 0.0, 0.0, 3.0), Point::new(0.0, 120.0, 1.0, 1.5)]);
        let config = AugmentationConfig {
            snowfall: AugmentationConfig::default().snowfall.with_sr(1e-30).unwrap(),
            ..Default::default()
        };
        let (out, report) = augment(&c, &config, &small_template()).unwrap();
        assert_eq!(out, c);
        assert_eq!(report.n_injected, 0);
        assert_eq!(report.n_dropped, 0);
        assert_eq!(report.alpha_snow, report.alpha_clear);
    }

    #[test]
    fn augment_counts_are_consistent() {
        let c = cloud((1..400).map(|i| Point::new(i as f32 * 0.5, 1.0, 0.0, 1.0 + (i % 5) as f32)).collect());
        let (out, report) = augment(&c, &AugmentationConfig::default(), &small_template()).unwrap();
        assert_eq!(report.n_kept + report.n_dropped, c.len());
        assert_eq!(out.len(), report.n_kept + report.n_injected);
        assert!(report.n_injected > 0);
        assert!(report.n_dropped > 0);
        assert!(report.alpha_snow > report.alpha_clear);
    }

    #[test]
    fn augment_rejects_empty_cloud() {
        assert_eq!(
            augment(&PointCloud::default(), &AugmentationConfig::default(), &small_template()).unwrap_err(),
            AugmentError::EmptyCloud
        );
    }

    #[test]
    fn config_validation() {
        let base = AugmentationConfig::default();
        for cfg in [
            AugmentationConfig { drop_threshold: -1.0, ..base },
            AugmentationConfig { jitter_sigma: f64::NAN, ..base },
            AugmentationConfig { detection_fraction: Some(0.0), ..base },
            AugmentationConfig { detection_fraction: Some(1.5), ..base },
            AugmentationConfig { retry_budget: 0, ..base },
            AugmentationConfig { count_bounds: (1.0, 0.5), ..base },
        ] {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
        assert!(base.validate().is_ok());
    }

    proptest! {
        #[test]
        fn attenuate_matches_scalar_reference(
            pts in proptest::collection::vec((-150.0f32..150.0, -150.0f32..150.0, -3.0f32..10.0, 0.0f32..100.0), 1..200),
            extra in 0.0f64..0.05,
            threshold in 0.0f64..5.0,
        ) {
            let c = cloud(pts.iter().map(|&(x, y, z, i)| Point::new(x, y, z + 0.01, i)).collect());
            let alpha_clear = lidar::CLEAR_AIR_EXTINCTION;
            let (out, dropped) = attenuate(&c, alpha_clear + extra, alpha_clear, threshold).unwrap();
            let mut reference = Vec::new();
            for p in c.points() {
                let r = p.range();
                let i = (p.intensity as f64 * (-2.0 * ((alpha_clear + extra) - alpha_clear) * r).exp()) as f32;
                if i as f64 >= threshold {
                    reference.push(Point { intensity: i, ..*p });
                }
            }
            prop_assert_eq!(out.points(), &reference[..]);
            prop_assert_eq!(dropped, c.len() - reference.len());
            for p in out.points() {
                let original = c.points().iter().find(|q| q.x == p.x && q.y == p.y && q.z == p.z).unwrap();
                prop_assert!(p.intensity <= original.intensity);
            }
        }
    }
}
