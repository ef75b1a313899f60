//! Snow particle-size distributions, diffraction efficiency and extinction.
//!
//! All quantities are SI: diameters and distances in metres, number densities
//! in m^-3 per metre of diameter (m^-4), extinction in m^-1. The exponential
//! size law is usually published in CGS units, so [`SnowfallParams::from_cgs`]
//! converts on the way in.

use std::f64::consts::PI;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{self, QuadratureConfig, QuadratureError};
use crate::rng::{self, Domain};

/// Size-law intercept N0 fitted to the recorded snowfall, cm^-4.
pub const ADJUSTED_N0_PER_CM4: f64 = 0.5;
/// Coefficient of the slope law Λ = a·Sr^-b, cm^-1.
pub const ADJUSTED_LAMBDA_COEFF_PER_CM: f64 = 0.41;
/// Exponent b of the slope law Λ = a·Sr^-b.
pub const ADJUSTED_LAMBDA_EXPONENT: f64 = 0.31;

/// Diameter bounds used for the extinction integral, m.
pub const EXTINCTION_DIAMETER_RANGE: (f64, f64) = (0.05e-3, 5e-3);
/// Diameter bounds used when counting particles in a volume, m.
pub const PARTICLE_COUNT_DIAMETER_RANGE: (f64, f64) = (0.001e-3, 15e-3);

/// Detector radius that reproduces a median Q_eff of 1.97 for 2000 particles
/// of 0.05–5 mm spread over 0.5–50 m at 900 nm.
pub const DEFAULT_DETECTOR_RADIUS: f64 = 0.1e-3;
/// Wavelength of the reference Monte-Carlo configuration, m.
pub const REFERENCE_WAVELENGTH: f64 = 900e-9;

const PER_CM4_TO_PER_M4: f64 = 1e8;
const PER_CM_TO_PER_M: f64 = 1e2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScatteringError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

fn invalid(msg: impl Into<String>) -> ScatteringError {
    ScatteringError::InvalidParameter(msg.into())
}

/// Exponential particle-size distribution N(D) = N0·exp(-Λ(Sr)·D) with the
/// slope law Λ(Sr) = a·Sr^-b.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SnowfallParamsRepr")]
pub struct SnowfallParams {
    n0_per_m4: f64,
    lambda_coeff_per_m: f64,
    lambda_exponent: f64,
    sr_mm_per_h: f64,
    d_min_m: f64,
    d_max_m: f64,
    unit_scale: f64,
}

#[derive(Deserialize)]
struct SnowfallParamsRepr {
    n0_per_m4: f64,
    lambda_coeff_per_m: f64,
    lambda_exponent: f64,
    sr_mm_per_h: f64,
    d_min_m: f64,
    d_max_m: f64,
    unit_scale: f64,
}

impl TryFrom<SnowfallParamsRepr> for SnowfallParams {
    type Error = ScatteringError;

    fn try_from(r: SnowfallParamsRepr) -> Result<Self, Self::Error> {
        SnowfallParams::new(
            r.n0_per_m4,
            r.lambda_coeff_per_m,
            r.lambda_exponent,
            r.sr_mm_per_h,
            (r.d_min_m, r.d_max_m),
            r.unit_scale,
        )
    }
}

impl SnowfallParams {
    /// Builds a validated parameter set from SI inputs.
    ///
    /// `n0` is in m^-4, `lambda_coeff` in m^-1 (the slope at Sr = 1 mm/h),
    /// `sr` in mm/h and the diameter bounds in metres.
    pub fn new(
        n0: f64,
        lambda_coeff: f64,
        lambda_exponent: f64,
        sr: f64,
        (d_min, d_max): (f64, f64),
        unit_scale: f64,
    ) -> Result<Self, ScatteringError> {
        let params = Self {
            n0_per_m4: n0,
            lambda_coeff_per_m: lambda_coeff,
            lambda_exponent,
            sr_mm_per_h: sr,
            d_min_m: d_min,
            d_max_m: d_max,
            unit_scale,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds a parameter set from the CGS form of the size law: `n0` in
    /// cm^-4 and `lambda_coeff` in cm^-1. Bounds default to
    /// [`EXTINCTION_DIAMETER_RANGE`].
    pub fn from_cgs(n0_per_cm4: f64, lambda_coeff_per_cm: f64, lambda_exponent: f64, sr: f64) -> Result<Self, ScatteringError> {
        Self::new(
            n0_per_cm4 * PER_CM4_TO_PER_M4,
            lambda_coeff_per_cm * PER_CM_TO_PER_M,
            lambda_exponent,
            sr,
            EXTINCTION_DIAMETER_RANGE,
            1.0,
        )
    }

    /// N0 = 0.5 cm^-4, Λ = 0.41·Sr^-0.31 cm^-1, bounds 0.05–5 mm.
    pub fn adjusted(sr: f64) -> Result<Self, ScatteringError> {
        Self::from_cgs(ADJUSTED_N0_PER_CM4, ADJUSTED_LAMBDA_COEFF_PER_CM, ADJUSTED_LAMBDA_EXPONENT, sr)
    }

    fn validate(&self) -> Result<(), ScatteringError> {
        let finite = [
            ("n0", self.n0_per_m4),
            ("lambda_coeff", self.lambda_coeff_per_m),
            ("lambda_exponent", self.lambda_exponent),
            ("sr", self.sr_mm_per_h),
            ("d_min", self.d_min_m),
            ("d_max", self.d_max_m),
            ("unit_scale", self.unit_scale),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite, got {v}")));
            }
        }
        if self.sr_mm_per_h <= 0.0 {
            return Err(invalid(format!("snowfall rate must be > 0 mm/h, got {}", self.sr_mm_per_h)));
        }
        if self.n0_per_m4 <= 0.0 {
            return Err(invalid(format!("n0 must be > 0, got {}", self.n0_per_m4)));
        }
        if self.d_min_m < 0.0 {
            return Err(invalid(format!("d_min must be >= 0, got {}", self.d_min_m)));
        }
        if self.d_max_m <= self.d_min_m {
            return Err(invalid(format!(
                "d_max ({}) must exceed d_min ({})",
                self.d_max_m, self.d_min_m
            )));
        }
        if self.unit_scale <= 0.0 {
            return Err(invalid(format!("unit_scale must be > 0, got {}", self.unit_scale)));
        }
        let slope = self.lambda();
        if !(slope.is_finite() && slope > 0.0) {
            return Err(invalid(format!("slope Λ(Sr) must be finite and > 0, got {slope}")));
        }
        Ok(())
    }

    pub fn with_sr(self, sr: f64) -> Result<Self, ScatteringError> {
        let p = Self { sr_mm_per_h: sr, ..self };
        p.validate()?;
        Ok(p)
    }

    pub fn with_bounds(self, (d_min, d_max): (f64, f64)) -> Result<Self, ScatteringError> {
        let p = Self {
            d_min_m: d_min,
            d_max_m: d_max,
            ..self
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_unit_scale(self, unit_scale: f64) -> Result<Self, ScatteringError> {
        let p = Self { unit_scale, ..self };
        p.validate()?;
        Ok(p)
    }

    /// Slope Λ(Sr), m^-1.
    pub fn lambda(&self) -> f64 {
        self.lambda_coeff_per_m * self.sr_mm_per_h.powf(-self.lambda_exponent)
    }

    pub fn n0(&self) -> f64 {
        self.n0_per_m4
    }

    pub fn lambda_coeff(&self) -> f64 {
        self.lambda_coeff_per_m
    }

    pub fn lambda_exponent(&self) -> f64 {
        self.lambda_exponent
    }

    pub fn sr(&self) -> f64 {
        self.sr_mm_per_h
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.d_min_m, self.d_max_m)
    }

    pub fn unit_scale(&self) -> f64 {
        self.unit_scale
    }

    /// Unscaled density N0·exp(-ΛD), no input checks.
    fn raw_density(&self, d: f64) -> f64 {
        self.n0_per_m4 * (-self.lambda() * d).exp()
    }
}

/// Number density of particles of diameter `d` (m), in m^-4.
pub fn snow_psd(d: f64, params: &SnowfallParams) -> Result<f64, ScatteringError> {
    if !d.is_finite() || d < 0.0 {
        return Err(invalid(format!("diameter must be finite and >= 0, got {d}")));
    }
    Ok(params.unit_scale * params.raw_density(d))
}

/// Particle, detector and range geometry for the diffraction parameter κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffractionGeometry {
    particle_radius: f64,
    detector_radius: f64,
    wavelength: f64,
    distance: f64,
}

impl DiffractionGeometry {
    pub fn new(particle_radius: f64, detector_radius: f64, wavelength: f64, distance: f64) -> Result<Self, ScatteringError> {
        if !(particle_radius.is_finite() && particle_radius >= 0.0) {
            return Err(invalid(format!("particle radius must be finite and >= 0, got {particle_radius}")));
        }
        for (name, v) in [("detector radius", detector_radius), ("wavelength", wavelength), ("distance", distance)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self {
            particle_radius,
            detector_radius,
            wavelength,
            distance,
        })
    }

    pub fn particle_radius(&self) -> f64 {
        self.particle_radius
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }
}

/// κ = 2π·r·r_d / (λ·L).
pub fn kappa(geom: &DiffractionGeometry) -> f64 {
    2.0 * PI * geom.particle_radius * geom.detector_radius / (geom.wavelength * geom.distance)
}

/// Diffraction-regime efficiency Q_eff = exp(-0.88κ) + 1, in (1, 2].
pub fn q_eff(kappa: f64) -> Result<f64, ScatteringError> {
    if kappa.is_nan() || kappa < 0.0 {
        return Err(invalid(format!("κ must be >= 0, got {kappa}")));
    }
    Ok((-0.88 * kappa).exp() + 1.0)
}

/// Sampling setup for the Monte-Carlo Q_eff estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub n_particles: usize,
    /// Particle diameter range, m.
    pub size_range: (f64, f64),
    /// Particle-to-detector distance range, m. Must exclude zero.
    pub distance_range: (f64, f64),
    pub detector_radius: f64,
    pub wavelength: f64,
    pub seed: u64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            n_particles: 2000,
            size_range: EXTINCTION_DIAMETER_RANGE,
            distance_range: (crate::lidar::DEFAULT_R1, 50.0),
            detector_radius: DEFAULT_DETECTOR_RADIUS,
            wavelength: REFERENCE_WAVELENGTH,
            seed: 0,
        }
    }
}

impl MonteCarloConfig {
    pub fn validate(&self) -> Result<(), ScatteringError> {
        if self.n_particles == 0 {
            return Err(invalid("n_particles must be >= 1"));
        }
        let (s0, s1) = self.size_range;
        if !(s0.is_finite() && s1.is_finite() && s0 > 0.0 && s0 <= s1) {
            return Err(invalid(format!("size range must satisfy 0 < min <= max, got [{s0}, {s1}]")));
        }
        let (l0, l1) = self.distance_range;
        if !(l0.is_finite() && l1.is_finite() && l0 <= l1) {
            return Err(invalid(format!("distance range must satisfy min <= max, got [{l0}, {l1}]")));
        }
        if l0 <= 0.0 {
            return Err(invalid(format!(
                "distance range must exclude 0 (κ is singular at L = 0), got [{l0}, {l1}]"
            )));
        }
        for (name, v) in [("detector radius", self.detector_radius), ("wavelength", self.wavelength)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Order statistics of a Monte-Carlo Q_eff sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QeffSummary {
    pub n: usize,
    pub median: f64,
    pub lower_quartile: f64,
    pub upper_quartile: f64,
}

/// Inverse CDF of the exponential law truncated to `[lo, hi]`.
fn truncated_exponential(u: f64, slope: f64, lo: f64, hi: f64) -> f64 {
    let width = hi - lo;
    if width == 0.0 {
        return lo;
    }
    let d = lo - (u * (-slope * width).exp_m1()).ln_1p() / slope;
    d.clamp(lo, hi)
}

/// Draws one Q_eff value per particle. Particle `i` always sees the same
/// random numbers for a given seed.
pub fn sample_qeff(config: &MonteCarloConfig, params: &SnowfallParams) -> Result<Vec<f64>, ScatteringError> {
    config.validate()?;
    let slope = params.lambda();
    let (s0, s1) = config.size_range;
    let (l0, l1) = config.distance_range;
    (0..config.n_particles)
        .map(|i| {
            let mut rng = rng::stream(config.seed, Domain::ParticleSampling, i as u64);
            let diameter = truncated_exponential(rng.random::<f64>(), slope, s0, s1);
            let distance = l0 + rng.random::<f64>() * (l1 - l0);
            let geom = DiffractionGeometry::new(0.5 * diameter, config.detector_radius, config.wavelength, distance)?;
            q_eff(kappa(&geom))
        })
        .collect()
}

/// Linear-interpolation quantile of sorted data; even-length medians are the
/// mean of the two central values.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn qeff_monte_carlo(config: &MonteCarloConfig, params: &SnowfallParams) -> Result<QeffSummary, ScatteringError> {
    let mut sample = sample_qeff(config, params)?;
    sample.sort_by(f64::total_cmp);
    Ok(QeffSummary {
        n: sample.len(),
        median: quantile(&sample, 0.5),
        lower_quartile: quantile(&sample, 0.25),
        upper_quartile: quantile(&sample, 0.75),
    })
}

pub fn median_qeff_monte_carlo(config: &MonteCarloConfig, params: &SnowfallParams) -> Result<f64, ScatteringError> {
    qeff_monte_carlo(config, params).map(|s| s.median)
}

/// How the extinction efficiency enters the extinction integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QeffModel {
    /// A fixed efficiency in (1, 2].
    Constant { value: f64 },
    /// The median of a Monte-Carlo sample drawn from the same size law.
    MedianMonteCarlo(MonteCarloConfig),
    /// Q_eff evaluated per diameter at a fixed particle distance.
    DistanceDependent {
        detector_radius: f64,
        wavelength: f64,
        distance: f64,
    },
}

impl Default for QeffModel {
    fn default() -> Self {
        QeffModel::MedianMonteCarlo(MonteCarloConfig::default())
    }
}

impl QeffModel {
    pub fn validate(&self) -> Result<(), ScatteringError> {
        match *self {
            QeffModel::Constant { value } => {
                if !(value > 1.0 && value <= 2.0) {
                    return Err(invalid(format!("constant Q_eff must lie in (1, 2], got {value}")));
                }
                Ok(())
            }
            QeffModel::MedianMonteCarlo(cfg) => cfg.validate(),
            QeffModel::DistanceDependent {
                detector_radius,
                wavelength,
                distance,
            } => DiffractionGeometry::new(0.0, detector_radius, wavelength, distance).map(|_| ()),
        }
    }

    /// The scalar efficiency this model applies under `params`, or `None`
    /// when it varies with diameter.
    pub fn scalar(&self, params: &SnowfallParams) -> Result<Option<f64>, ScatteringError> {
        self.validate()?;
        match self {
            QeffModel::Constant { value } => Ok(Some(*value)),
            QeffModel::MedianMonteCarlo(cfg) => median_qeff_monte_carlo(cfg, params).map(Some),
            QeffModel::DistanceDependent { .. } => Ok(None),
        }
    }
}

/// Whether the D² kernel carries the geometric π/4 cross-section factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossSection {
    /// ∫ D²·N(D)·Q_eff dD as written.
    #[default]
    Verbatim,
    /// ∫ (π/4)·D²·N(D)·Q_eff dD.
    Geometric,
}

impl CrossSection {
    fn factor(self) -> f64 {
        match self {
            CrossSection::Verbatim => 1.0,
            CrossSection::Geometric => PI / 4.0,
        }
    }
}

/// Snow extinction coefficient α (m^-1) integrated over the bounds of `params`.
pub fn extinction_coefficient(
    params: &SnowfallParams,
    qeff: &QeffModel,
    quad: &QuadratureConfig,
) -> Result<f64, ScatteringError> {
    extinction_coefficient_with(params, qeff, quad, CrossSection::Verbatim)
}

pub fn extinction_coefficient_with(
    params: &SnowfallParams,
    qeff: &QeffModel,
    quad: &QuadratureConfig,
    cross_section: CrossSection,
) -> Result<f64, ScatteringError> {
    let (d_min, d_max) = params.bounds();
    let integral = match (qeff.scalar(params)?, qeff) {
        (Some(q), _) => q * quadrature::simpson(|d| d * d * params.raw_density(d), d_min, d_max, quad)?,
        (
            None,
            QeffModel::DistanceDependent {
                detector_radius,
                wavelength,
                distance,
            },
        ) => {
            let r_d = *detector_radius;
            let lambda = *wavelength;
            let l = *distance;
            quadrature::simpson(
                |d| {
                    let k = 2.0 * PI * (0.5 * d) * r_d / (lambda * l);
                    d * d * params.raw_density(d) * ((-0.88 * k).exp() + 1.0)
                },
                d_min,
                d_max,
                quad,
            )?
        }
        (None, _) => unreachable!("only the distance-dependent model is diameter-resolved"),
    };
    Ok(params.unit_scale * cross_section.factor() * integral)
}

/// Total particle concentration over the bounds of `params`, m^-3.
pub fn n_total(params: &SnowfallParams) -> f64 {
    let (d_min, d_max) = params.bounds();
    concentration_between(params, d_min, d_max)
}

/// (N0/Λ)·(e^{-Λa} - e^{-Λb}), scaled.
fn concentration_between(params: &SnowfallParams, a: f64, b: f64) -> f64 {
    let slope = params.lambda();
    params.unit_scale * params.n0_per_m4 / slope * (-slope * a).exp() * -(-slope * (b - a)).exp_m1()
}
