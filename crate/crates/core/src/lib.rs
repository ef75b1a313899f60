//! Physics-based snowfall augmentation for LiDAR point clouds.
//!
//! A clear-weather scan is attenuated by the extinction of a snowfall
//! characterised by its rate, weak returns are dropped, and near-sensor snow
//! clutter resampled from a template of a real snowy capture is injected.
//!
//! * [`scattering`]: particle size distribution, extinction efficiency and
//!   the extinction coefficient.
//! * [`lidar`]: range equation, overlap ramp, transmission and calibration.
//! * [`augment`]: the augmentation pipeline and clutter templates.
//! * [`io`]: cloud files and run metadata.
//! * [`cli`]: the `snowlidar` command.

pub mod analysis;
pub mod augment;
pub mod cli;
pub mod cloud;
pub mod fixtures;
pub mod io;
pub mod lidar;
pub mod quadrature;
pub mod rng;
pub mod scattering;

pub use augment::{augment, AugmentError, AugmentationConfig, AugmentationReport, ClutterTemplate, Shell};
pub use cloud::{CloudMeta, Point, PointCloud};
pub use lidar::SensorConfig;
pub use scattering::{QeffModel, SnowfallParams};
