//! Procedurally generated scans used as test and demo fixtures.
//!
//! These are synthetic stand-ins for recorded captures: a 32-beam spinning
//! sensor 1.8 m above a flat road with parked cars and buildings, and the
//! same street during heavy snowfall with near-sensor snow returns. Nothing
//! here is measured data.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::augment::{self, AugmentationConfig, ClutterTemplate, Shell};
use crate::cloud::{CloudMeta, Point, PointCloud};
use crate::lidar::{self, Target, SNOW_REFLECTIVITY};
use crate::rng::{self, Domain};

pub const CLEAR_SCAN_POINTS: usize = 100_000;
/// Snowfall rate of the snowy fixture, mm/h.
pub const SNOWY_SCAN_SR: f64 = 35.0;
pub const SNOWY_SCAN_CLUTTER: usize = 2_500;
pub const SENSOR_HEIGHT: f64 = 1.8;
/// Seeds of the shipped fixture files.
pub const CLEAR_SCAN_SEED: u64 = 1;
pub const SNOWY_SCAN_SEED: u64 = 2;
/// Intensity cutoff used when extracting the shipped template.
pub const TEMPLATE_CUTOFF: f64 = 5.0;
pub const SENSOR_ID: &str = "synthetic-32-beam";

/// System constant of the synthetic sensor for snow returns.
const SNOW_SYSTEM_CONSTANT: f64 = 180.0;
const BEAMS: usize = 32;
const MIN_ELEVATION_DEG: f64 = -25.0;
const MAX_ELEVATION_DEG: f64 = 15.0;
const MAX_RANGE: f64 = 200.0;
/// Beyond this range returns weaken with the inverse square of range.
const FALLOFF_RANGE: f64 = 40.0;

#[derive(Debug, Clone, Copy)]
struct Block {
    min: [f64; 3],
    max: [f64; 3],
    reflectivity: f64,
}

const fn block(x: (f64, f64), y: (f64, f64), z: (f64, f64), reflectivity: f64) -> Block {
    Block {
        min: [x.0, y.0, z.0],
        max: [x.1, y.1, z.1],
        reflectivity,
    }
}

const GROUND: f64 = -SENSOR_HEIGHT;
const GROUND_REFLECTIVITY: f64 = 0.3;

/// Cars at roughly 10 m, 22 m and 35 m, poles, and street-side buildings.
const SCENE: [Block; 9] = [
    block((7.8, 12.2), (2.1, 3.9), (GROUND, GROUND + 1.5), 0.6),
    block((19.8, 24.2), (-4.9, -3.1), (GROUND, GROUND + 1.5), 0.5),
    block((32.8, 37.2), (3.6, 5.4), (GROUND, GROUND + 1.6), 0.45),
    block((15.0, 15.3), (7.0, 7.3), (GROUND, GROUND + 6.0), 0.3),
    block((-12.3, -12.0), (-7.3, -7.0), (GROUND, GROUND + 6.0), 0.3),
    block((-100.0, 100.0), (18.0, 30.0), (GROUND, GROUND + 12.0), 0.35),
    block((-100.0, 100.0), (-32.0, -20.0), (GROUND, GROUND + 15.0), 0.4),
    block((150.0, 170.0), (-20.0, 18.0), (GROUND, GROUND + 25.0), 0.3),
    block((-160.0, -140.0), (-20.0, 18.0), (GROUND, GROUND + 20.0), 0.25),
];

/// Distance along a unit ray to the first surface, with that surface's
/// reflectivity and the cosine of the incidence angle.
fn cast(dir: [f64; 3]) -> Option<(f64, f64, f64)> {
    let mut best: Option<(f64, f64, f64)> = None;
    let mut consider = |t: f64, refl: f64, cos: f64| {
        if t > lidar::DEFAULT_R1 && t <= MAX_RANGE && best.is_none_or(|(bt, _, _)| t < bt) {
            best = Some((t, refl, cos));
        }
    };
    if dir[2] < 0.0 {
        consider(GROUND / dir[2], GROUND_REFLECTIVITY, -dir[2]);
    }
    for b in &SCENE {
        let mut t_near = f64::NEG_INFINITY;
        let mut t_far = f64::INFINITY;
        let mut axis = 0;
        for (k, &d) in dir.iter().enumerate() {
            if d == 0.0 {
                if 0.0 < b.min[k] || 0.0 > b.max[k] {
                    t_near = f64::INFINITY;
                }
                continue;
            }
            let (t0, t1) = {
                let a = b.min[k] / d;
                let c = b.max[k] / d;
                if a < c { (a, c) } else { (c, a) }
            };
            if t0 > t_near {
                t_near = t0;
                axis = k;
            }
            t_far = t_far.min(t1);
        }
        if t_near <= t_far && t_near > 0.0 {
            consider(t_near, b.reflectivity, dir[axis].abs());
        }
    }
    best
}

fn scan(azimuth_steps: usize, seed: u64) -> Vec<Point> {
    let mut points = Vec::new();
    for beam in 0..BEAMS {
        let elevation = (MIN_ELEVATION_DEG + (MAX_ELEVATION_DEG - MIN_ELEVATION_DEG) * beam as f64 / (BEAMS - 1) as f64).to_radians();
        for step in 0..azimuth_steps {
            let azimuth = 2.0 * PI * step as f64 / azimuth_steps as f64;
            let dir = [elevation.cos() * azimuth.cos(), elevation.cos() * azimuth.sin(), elevation.sin()];
            let Some((t, reflectivity, cos)) = cast(dir) else {
                continue;
            };
            let mut rng = rng::stream(seed, Domain::Fixture, (beam * azimuth_steps + step) as u64);
            let t = t + 0.02 * rng.sample::<f64, _>(StandardNormal);
            let gain = (0.2 * rng.sample::<f64, _>(StandardNormal)).exp();
            let falloff = (FALLOFF_RANGE / t.max(FALLOFF_RANGE)).powi(2);
            let intensity = (100.0 * reflectivity * (0.3 + 0.7 * cos) * falloff * gain).max(1.0);
            points.push(Point::new(
                (dir[0] * t) as f32,
                (dir[1] * t) as f32,
                (dir[2] * t) as f32,
                intensity as f32,
            ));
        }
    }
    points
}

/// A clear-weather street scan of exactly [`CLEAR_SCAN_POINTS`] returns with
/// intensities on a 1–100 raw scale, fading with range beyond 40 m.
pub fn clear_scan(seed: u64) -> PointCloud {
    let hits = scan(5_000, seed);
    assert!(hits.len() >= CLEAR_SCAN_POINTS, "scene yields only {} returns", hits.len());
    let points = (0..CLEAR_SCAN_POINTS)
        .map(|i| hits[i * hits.len() / CLEAR_SCAN_POINTS])
        .collect();
    PointCloud::new(
        points,
        CloudMeta {
            source: Some("fixture:clear_scan".into()),
            sensor_id: Some(SENSOR_ID.into()),
            capture_label: Some("synthetic clear street".into()),
        },
    )
    .expect("fixture points are valid")
}

/// The same street at [`SNOWY_SCAN_SR`] mm/h: a sparser attenuated scene plus
/// [`SNOWY_SCAN_CLUTTER`] snow returns between 0.5 m and 10 m whose
/// intensities follow the range equation with multiplicative noise.
pub fn snowy_scan(seed: u64) -> PointCloud {
    let config = AugmentationConfig::default();
    let snow = config.snowfall.with_sr(SNOWY_SCAN_SR).expect("valid rate");
    let alpha_clear = config.sensor.alpha_clear();
    let alpha = alpha_clear
        + crate::scattering::extinction_coefficient(&snow, &config.qeff, &config.quadrature).expect("extinction converges");

    let scene = PointCloud::new(scan(1_000, seed), CloudMeta::default()).expect("valid scene");
    let (scene, _) = augment::attenuate(&scene, alpha, alpha_clear, config.drop_threshold).expect("valid attenuation");
    let (mut points, _) = scene.into_parts();

    let sensor = config.sensor.with_c(SNOW_SYSTEM_CONSTANT).expect("valid constant");
    let (inner, outer) = (lidar::DEFAULT_R1, 10.0f64);
    let (sin_lo, sin_hi) = (MIN_ELEVATION_DEG.to_radians().sin(), MAX_ELEVATION_DEG.to_radians().sin());
    let base = 1u64 << 40;
    let mut k = 0u64;
    let mut added = 0;
    while added < SNOWY_SCAN_CLUTTER {
        let mut rng = rng::stream(seed, Domain::Fixture, base + k);
        k += 1;
        let u: f64 = rng.random();
        let r = (inner.powi(3) + u * (outer.powi(3) - inner.powi(3))).cbrt();
        let azimuth = 2.0 * PI * rng.random::<f64>();
        let sin_e = sin_lo + (sin_hi - sin_lo) * rng.random::<f64>();
        let cos_e = (1.0 - sin_e * sin_e).sqrt();
        let p = Point::new(
            (r * cos_e * azimuth.cos()) as f32,
            (r * cos_e * azimuth.sin()) as f32,
            (r * sin_e) as f32,
            0.0,
        );
        let r = p.range();
        if !(r > inner && r <= outer) {
            continue;
        }
        let noise = (0.35 * rng.sample::<f64, _>(StandardNormal)).exp();
        let target = Target::new(r, SNOW_REFLECTIVITY).expect("positive range");
        let intensity = lidar::received_power(&target, alpha, &sensor) * noise;
        points.push(Point { intensity: intensity as f32, ..p });
        added += 1;
    }

    PointCloud::new(
        points,
        CloudMeta {
            source: Some("fixture:snowy_scan".into()),
            sensor_id: Some(SENSOR_ID.into()),
            capture_label: Some(format!("synthetic street, {SNOWY_SCAN_SR} mm/h snowfall")),
        },
    )
    .expect("fixture points are valid")
}

/// Template extracted from [`snowy_scan`] with the default shell and
/// [`TEMPLATE_CUTOFF`].
pub fn clutter_template(seed: u64) -> ClutterTemplate {
    augment::extract_template(&snowy_scan(seed), Shell::default(), TEMPLATE_CUTOFF, SNOWY_SCAN_SR)
        .expect("snowy fixture has near-field clutter")
}
