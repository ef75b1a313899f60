use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::{AugmentError, ClutterTemplate, Shell};
use crate::cloud::{Point, PointCloud};
use crate::lidar::{self, SensorConfig, Target};
use crate::rng::{self, Domain};
use crate::scattering::{self, SnowfallParams};

/// Number of clutter returns expected in the hemispherical `shell`:
/// round(f_det · N_total · V_shell).
pub fn expected_clutter_count(snowfall: &SnowfallParams, shell: Shell, detection_fraction: f64) -> Result<u64, AugmentError> {
    shell.validate()?;
    if !(0.0..=1.0).contains(&detection_fraction) {
        return Err(AugmentError::InvalidConfig(format!(
            "detection fraction must lie in [0, 1], got {detection_fraction}"
        )));
    }
    let expected = detection_fraction * scattering::n_total(snowfall) * shell.hemisphere_volume();
    if !expected.is_finite() || expected >= u64::MAX as f64 {
        return Err(AugmentError::InvalidConfig(format!("expected clutter count {expected} is not representable")));
    }
    Ok(expected.round() as u64)
}

/// Fraction of the particles predicted in the template's shell that the
/// template actually recorded, clamped to (0, 1]. `snowfall` must describe
/// the conditions at capture time.
pub fn calibrate_detection_fraction(template: &ClutterTemplate, snowfall: &SnowfallParams) -> Result<f64, AugmentError> {
    let shell = template.shell();
    let predicted = scattering::n_total(snowfall) * shell.hemisphere_volume();
    if !(predicted > 0.0 && predicted.is_finite()) {
        return Err(AugmentError::InvalidTemplate(format!(
            "shell [{}, {}] at {} mm/h predicts {predicted} particles",
            shell.inner_m,
            shell.outer_m,
            snowfall.sr()
        )));
    }
    let f = template.len() as f64 / predicted;
    Ok(f.clamp(f64::MIN_POSITIVE, 1.0))
}

/// Everything [`inject_clutter`] needs besides the template.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionParams {
    /// Sensor with a calibrated system constant.
    pub sensor: SensorConfig,
    pub alpha_snow: f64,
    pub reflectivity: f64,
    pub jitter_sigma: f64,
    pub retry_budget: u32,
    pub seed: u64,
}

/// Appends `count` clutter returns resampled (with replacement) from the
/// template, jittered and kept inside the template shell, with intensities
/// from the range equation. Injected return `k` depends only on the seed
/// and `k`.
pub fn inject_clutter(
    cloud: PointCloud,
    template: &ClutterTemplate,
    count: usize,
    params: &InjectionParams,
) -> Result<(PointCloud, usize), AugmentError> {
    if count == 0 {
        return Ok((cloud, 0));
    }
    if !(params.jitter_sigma.is_finite() && params.jitter_sigma >= 0.0) {
        return Err(AugmentError::InvalidConfig(format!("jitter sigma must be finite and >= 0, got {}", params.jitter_sigma)));
    }
    if params.retry_budget == 0 {
        return Err(AugmentError::InvalidConfig("retry budget must be >= 1".into()));
    }
    let shell = template.shell();
    let sources = template.points();
    let injected: Vec<Point> = (0..count as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng::stream(params.seed, Domain::ClutterInjection, k);
            let base = sources[rng.random_range(0..sources.len())];
            let position = if params.jitter_sigma == 0.0 {
                base
            } else {
                jittered(&base, shell, params, &mut rng).ok_or(AugmentError::RejectionBudgetExceeded {
                    index: k,
                    attempts: params.retry_budget,
                })?
            };
            let target = Target::new(position.range(), params.reflectivity)?;
            let intensity = lidar::received_power(&target, params.alpha_snow, &params.sensor) as f32;
            Ok(Point { intensity, ..position })
        })
        .collect::<Result<_, AugmentError>>()?;

    let n = injected.len();
    let (mut points, meta) = cloud.into_parts();
    points.extend(injected);
    Ok((PointCloud::from_valid(points, meta), n))
}

fn jittered(base: &Point, shell: Shell, params: &InjectionParams, rng: &mut impl Rng) -> Option<Point> {
    let sigma = params.jitter_sigma;
    for _ in 0..params.retry_budget {
        let mut offset = || sigma * rng.sample::<f64, _>(StandardNormal);
        let p = Point {
            x: (base.x as f64 + offset()) as f32,
            y: (base.y as f64 + offset()) as f32,
            z: (base.z as f64 + offset()) as f32,
            intensity: 0.0,
        };
        let r = p.range();
        if r > 0.0 && shell.contains(r) {
            return Some(p);
        }
    }
    None
}
