//! Command-line front end.
//!
//! Every subcommand resolves its parameters (flags, then an optional TOML
//! config file, then built-in defaults), validates them through the library
//! constructors and delegates to library calls. Exit codes: 0 success,
//! 2 usage or parameter error, 3 input-data error, 4 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use thiserror::Error;

use crate::analysis;
use crate::augment::{self, AugmentError, AugmentationConfig, ClutterTemplate, Shell};
use crate::io::{self, CloudFormat, IoError, RunMetadata};
use crate::lidar::{self, LidarError, SensorConfig};
use crate::quadrature::QuadratureConfig;
use crate::scattering::{self, MonteCarloConfig, QeffModel, ScatteringError, SnowfallParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// Snowfall rates tabulated by `alpha` when none are given, mm/h.
pub const DEFAULT_SR_GRID: [f64; 6] = [1.0, 2.0, 5.0, 10.0, 20.0, 35.0];
pub const DEFAULT_SR: f64 = 5.0;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<ScatteringError> for CliError {
    fn from(e: ScatteringError) -> Self {
        match e {
            ScatteringError::Quadrature(_) => CliError::Numerical(e.to_string()),
            ScatteringError::InvalidParameter(_) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<LidarError> for CliError {
    fn from(e: LidarError) -> Self {
        match e {
            LidarError::InvalidConfig(_) | LidarError::InvalidTarget(_) => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> Self {
        if e.is_numerical() {
            return CliError::Numerical(e.to_string());
        }
        match e {
            AugmentError::InvalidConfig(_) | AugmentError::TooManyClutterPoints { .. } => CliError::Usage(e.to_string()),
            AugmentError::Scattering(inner) => inner.into(),
            AugmentError::Lidar(inner) => inner.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "snowlidar", version, about = "Simulate snowfall in clear-weather LiDAR scans")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate snow extinction and power ratio against snowfall rate.
    Alpha(AlphaArgs),
    /// Monte-Carlo estimate of the median extinction efficiency.
    Qeff(QeffArgs),
    /// Transform a clear-weather cloud into a snowy one.
    Augment(AugmentArgs),
    /// Build a clutter template from a snowy capture.
    ExtractTemplate(ExtractArgs),
    /// Summarise a cloud: ranges, intensity histogram, near-field clutter.
    Stats(StatsArgs),
}

/// Flags shared by all subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// TOML file of `key = value` pairs using the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Snowfall rate, mm/h. `alpha` accepts a comma-separated list.
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    pub sr: Vec<f64>,
    /// Laser wavelength, m.
    #[arg(long, allow_negative_numbers = true)]
    pub wavelength: Option<f64>,
    /// Minimum effective range, m.
    #[arg(long, allow_negative_numbers = true)]
    pub r1: Option<f64>,
    /// Full-overlap range, m.
    #[arg(long, allow_negative_numbers = true)]
    pub r2: Option<f64>,
    /// Size-law intercept N0, cm^-4.
    #[arg(long, allow_negative_numbers = true)]
    pub n0: Option<f64>,
    /// Slope-law coefficient a in Λ = a·Sr^-b, cm^-1.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_coeff: Option<f64>,
    /// Slope-law exponent b in Λ = a·Sr^-b.
    #[arg(long, allow_negative_numbers = true)]
    pub lambda_exp: Option<f64>,
    /// Multiplier on particle number densities.
    #[arg(long, allow_negative_numbers = true)]
    pub unit_scale: Option<f64>,
    /// Attenuated returns below this raw intensity are removed.
    #[arg(long, allow_negative_numbers = true)]
    pub drop_threshold: Option<f64>,
    /// Per-axis clutter jitter standard deviation, m.
    #[arg(long, allow_negative_numbers = true)]
    pub jitter_sigma: Option<f64>,
    /// Detection fraction in (0, 1]; calibrated against the template when absent.
    #[arg(long, allow_negative_numbers = true)]
    pub f_det: Option<f64>,
    /// Use a fixed extinction efficiency instead of the Monte-Carlo median.
    #[arg(long, allow_negative_numbers = true)]
    pub qeff_constant: Option<f64>,
    /// Worker threads for point transforms (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct AlphaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Range at which the power ratio is reported, m.
    #[arg(long, default_value_t = 50.0)]
    pub reference_range: f64,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QeffArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, default_value_t = 2000)]
    pub n_particles: usize,
    /// Smallest particle diameter, m.
    #[arg(long, default_value_t = scattering::EXTINCTION_DIAMETER_RANGE.0)]
    pub size_min: f64,
    /// Largest particle diameter, m.
    #[arg(long, default_value_t = scattering::EXTINCTION_DIAMETER_RANGE.1)]
    pub size_max: f64,
    /// Nearest particle distance, m (defaults to R1).
    #[arg(long)]
    pub distance_min: Option<f64>,
    #[arg(long, default_value_t = 50.0)]
    pub distance_max: f64,
    /// Detector radius, m.
    #[arg(long, default_value_t = scattering::DEFAULT_DETECTOR_RADIUS)]
    pub detector_radius: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FormatArg {
    Binary,
    Csv,
}

impl From<FormatArg> for CloudFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Binary => CloudFormat::PackedBinary,
            FormatArg::Csv => CloudFormat::Csv,
        }
    }
}

fn format_for(path: &Path, forced: Option<FormatArg>) -> CloudFormat {
    forced.map_or_else(|| CloudFormat::from_path(path), Into::into)
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub template: PathBuf,
    /// Metadata sidecar path (default: `<output>.meta.json`).
    #[arg(long)]
    pub metadata: Option<PathBuf>,
    /// Cloud encoding; inferred from the file extension when absent.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub capture_label: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Inner shell radius, m.
    #[arg(long, default_value_t = 0.5)]
    pub inner: f64,
    /// Outer shell radius, m.
    #[arg(long, default_value_t = 10.0)]
    pub outer: f64,
    /// Keep returns with intensity strictly below this value.
    #[arg(long, default_value_t = 5.0)]
    pub cutoff: f64,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub bin_width: f64,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    sr: Option<OneOrMany>,
    wavelength: Option<f64>,
    r1: Option<f64>,
    r2: Option<f64>,
    n0: Option<f64>,
    lambda_coeff: Option<f64>,
    lambda_exp: Option<f64>,
    unit_scale: Option<f64>,
    drop_threshold: Option<f64>,
    jitter_sigma: Option<f64>,
    f_det: Option<f64>,
    qeff_constant: Option<f64>,
    threads: Option<usize>,
}

/// Effective parameters after applying flags over the config file over defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub srs: Option<Vec<f64>>,
    pub seed: u64,
    pub sensor: SensorConfig,
    pub n0_per_cm4: f64,
    pub lambda_coeff_per_cm: f64,
    pub lambda_exp: f64,
    pub unit_scale: f64,
    pub wavelength: Option<f64>,
    pub drop_threshold: f64,
    pub jitter_sigma: f64,
    pub f_det: Option<f64>,
    pub qeff_constant: Option<f64>,
    pub threads: Option<usize>,
}

impl Settings {
    pub fn resolve(args: &CommonArgs) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
                toml::from_str::<FileConfig>(&text)
                    .map_err(|e| CliError::Usage(format!("invalid config file {}: {e}", path.display())))?
            }
            None => FileConfig::default(),
        };
        let srs = if !args.sr.is_empty() {
            Some(args.sr.clone())
        } else {
            file.sr.map(|s| match s {
                OneOrMany::One(v) => vec![v],
                OneOrMany::Many(v) => v,
            })
        };
        if let Some(list) = &srs {
            let bad: Vec<String> = list.iter().filter(|v| !(v.is_finite() && **v > 0.0)).map(|v| v.to_string()).collect();
            if !bad.is_empty() || list.is_empty() {
                return Err(CliError::Usage(format!(
                    "snowfall rates must be finite and > 0 mm/h; invalid: {}",
                    if bad.is_empty() { "(empty list)".to_string() } else { bad.join(", ") }
                )));
            }
        }
        let defaults = SensorConfig::default();
        let wavelength = args.wavelength.or(file.wavelength);
        let sensor = SensorConfig::builder()
            .wavelength(wavelength.unwrap_or(defaults.wavelength()))
            .ranges(
                args.r1.or(file.r1).unwrap_or(defaults.r1()),
                args.r2.or(file.r2).unwrap_or(defaults.r2()),
                defaults.r_max(),
            )
            .build()?;
        let settings = Self {
            srs,
            seed: args.seed.or(file.seed).unwrap_or(0),
            sensor,
            n0_per_cm4: args.n0.or(file.n0).unwrap_or(scattering::ADJUSTED_N0_PER_CM4),
            lambda_coeff_per_cm: args.lambda_coeff.or(file.lambda_coeff).unwrap_or(scattering::ADJUSTED_LAMBDA_COEFF_PER_CM),
            lambda_exp: args.lambda_exp.or(file.lambda_exp).unwrap_or(scattering::ADJUSTED_LAMBDA_EXPONENT),
            unit_scale: args.unit_scale.or(file.unit_scale).unwrap_or(augment::DEFAULT_UNIT_SCALE),
            wavelength,
            drop_threshold: args.drop_threshold.or(file.drop_threshold).unwrap_or(augment::DEFAULT_DROP_THRESHOLD),
            jitter_sigma: args.jitter_sigma.or(file.jitter_sigma).unwrap_or(augment::DEFAULT_JITTER_SIGMA),
            f_det: args.f_det.or(file.f_det),
            qeff_constant: args.qeff_constant.or(file.qeff_constant),
            threads: args.threads.or(file.threads),
        };
        // Surface parameter errors before any work starts.
        settings.augmentation(settings.srs.as_ref().map_or(DEFAULT_SR, |v| v[0]))?;
        if settings.threads == Some(0) {
            return Err(CliError::Usage("--threads must be >= 1".into()));
        }
        Ok(settings)
    }

    /// The one snowfall rate a single-rate command runs at.
    pub fn single_sr(&self, default: f64) -> Result<f64, CliError> {
        match self.srs.as_deref() {
            None => Ok(default),
            Some([sr]) => Ok(*sr),
            Some(list) => Err(CliError::Usage(format!("expected a single --sr value, got {}", list.len()))),
        }
    }

    pub fn snowfall(&self, sr: f64) -> Result<SnowfallParams, CliError> {
        Ok(SnowfallParams::from_cgs(self.n0_per_cm4, self.lambda_coeff_per_cm, self.lambda_exp, sr)?.with_unit_scale(self.unit_scale)?)
    }

    pub fn monte_carlo(&self) -> MonteCarloConfig {
        MonteCarloConfig {
            distance_range: (self.sensor.r1(), 50.0),
            wavelength: self.wavelength.unwrap_or(scattering::REFERENCE_WAVELENGTH),
            seed: self.seed,
            ..MonteCarloConfig::default()
        }
    }

    pub fn qeff(&self) -> QeffModel {
        match self.qeff_constant {
            Some(value) => QeffModel::Constant { value },
            None => QeffModel::MedianMonteCarlo(self.monte_carlo()),
        }
    }

    pub fn augmentation(&self, sr: f64) -> Result<AugmentationConfig, CliError> {
        let config = AugmentationConfig {
            snowfall: self.snowfall(sr)?,
            sensor: self.sensor,
            qeff: self.qeff(),
            drop_threshold: self.drop_threshold,
            jitter_sigma: self.jitter_sigma,
            detection_fraction: self.f_det,
            seed: self.seed,
            ..AugmentationConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn common(cmd: &Command) -> &CommonArgs {
    match cmd {
        Command::Alpha(a) => &a.common,
        Command::Qeff(a) => &a.common,
        Command::Augment(a) => &a.common,
        Command::ExtractTemplate(a) => &a.common,
        Command::Stats(a) => &a.common,
    }
}

pub fn execute(cmd: &Command, out: &mut dyn Write) -> Result<(), CliError> {
    let settings = Settings::resolve(common(cmd))?;
    let work = |out: &mut dyn Write| match cmd {
        Command::Alpha(a) => cmd_alpha(a, &settings, out),
        Command::Qeff(a) => cmd_qeff(a, &settings, out),
        Command::Augment(a) => cmd_augment(a, &settings, out),
        Command::ExtractTemplate(a) => cmd_extract_template(a, &settings, out),
        Command::Stats(a) => cmd_stats(a, out),
    };
    match settings.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?;
            let mut buffer = Vec::new();
            pool.install(|| work(&mut buffer))?;
            out.write_all(&buffer).map_err(output_error)
        }
        None => work(out),
    }
}

fn output_error(e: std::io::Error) -> CliError {
    CliError::Input(format!("cannot write output: {e}"))
}

fn cmd_alpha(args: &AlphaArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    if !(args.reference_range.is_finite() && args.reference_range >= 0.0) {
        return Err(CliError::Usage(format!("reference range must be >= 0, got {}", args.reference_range)));
    }
    let srs = settings.srs.clone().unwrap_or_else(|| DEFAULT_SR_GRID.to_vec());
    let qeff = settings.qeff();
    let quad = QuadratureConfig::default();
    let alpha_clear = settings.sensor.alpha_clear();
    let mut table = String::from("sr,alpha_per_m,power_ratio\n");
    for sr in srs {
        let alpha = scattering::extinction_coefficient(&settings.snowfall(sr)?, &qeff, &quad)?;
        let ratio = lidar::power_ratio(args.reference_range, alpha_clear + alpha, alpha_clear);
        table.push_str(&format!("{sr},{alpha},{ratio}\n"));
    }
    match &args.output {
        Some(path) => fs::write(path, table).map_err(|e| CliError::Input(format!("{}: {e}", path.display()))),
        None => out.write_all(table.as_bytes()).map_err(output_error),
    }
}

fn cmd_qeff(args: &QeffArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let config = MonteCarloConfig {
        n_particles: args.n_particles,
        size_range: (args.size_min, args.size_max),
        distance_range: (args.distance_min.unwrap_or(settings.sensor.r1()), args.distance_max),
        detector_radius: args.detector_radius,
        ..settings.monte_carlo()
    };
    let params = settings.snowfall(settings.single_sr(DEFAULT_SR)?)?;
    let summary = scattering::qeff_monte_carlo(&config, &params)?;
    writeln!(
        out,
        "samples: {}\nmedian: {}\nlower_quartile: {}\nupper_quartile: {}",
        summary.n, summary.median, summary.lower_quartile, summary.upper_quartile
    )
    .map_err(output_error)
}

fn read_template(path: &Path) -> Result<ClutterTemplate, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    ClutterTemplate::from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cmd_augment(args: &AugmentArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let config = settings.augmentation(settings.srs.as_ref().map_or(DEFAULT_SR, |v| v[0]))?;
    let cloud = io::read_cloud(&args.input, format_for(&args.input, args.format))?;
    let template = read_template(&args.template)?;

    let (augmented, report) = augment::augment(&cloud, &config, &template)?;

    io::write_cloud(&augmented, &args.output, format_for(&args.output, args.format))?;
    let mut meta = RunMetadata::new(report);
    meta.capture_label = args.capture_label.clone().or_else(|| cloud.meta().capture_label.clone());
    meta.input = Some(args.input.display().to_string());
    meta.template = Some(args.template.display().to_string());
    let meta_path = args.metadata.clone().unwrap_or_else(|| sidecar_path(&args.output));
    io::write_metadata(&meta, &meta_path)?;

    let r = &meta.report;
    writeln!(
        out,
        "sr={} alpha_snow={:e} kept={} dropped={} injected={} c={} f_det={:e} seed={}",
        config.snowfall.sr(),
        r.alpha_snow,
        r.n_kept,
        r.n_dropped,
        r.n_injected,
        r.c_used,
        r.detection_fraction,
        r.seed
    )
    .map_err(output_error)
}

/// `<output>.meta.json` next to the output cloud.
pub fn sidecar_path(output: &Path) -> PathBuf {
    let mut name = output.file_name().map(OsString::from).unwrap_or_default();
    name.push(".meta.json");
    output.with_file_name(name)
}

fn cmd_extract_template(args: &ExtractArgs, settings: &Settings, out: &mut dyn Write) -> Result<(), CliError> {
    let shell = Shell::new(args.inner, args.outer)?;
    let sr = settings.single_sr(crate::fixtures::SNOWY_SCAN_SR)?;
    let cloud = io::read_cloud(&args.input, format_for(&args.input, args.format))?;
    let template = augment::extract_template(&cloud, shell, args.cutoff, sr)?;
    fs::write(&args.output, template.to_json()).map_err(|e| CliError::Input(format!("{}: {e}", args.output.display())))?;
    writeln!(
        out,
        "points: {}\nintensity_mean: {}",
        template.len(),
        template.intensity_stats().mean
    )
    .map_err(output_error)
}

fn cmd_stats(args: &StatsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cloud = io::read_cloud(&args.input, format_for(&args.input, args.format))?;
    let stats = analysis::cloud_stats(&cloud, args.bin_width).map_err(CliError::Usage)?;
    let mut text = format!("points: {}\n", stats.n_points);
    match stats.ranges {
        Some(r) => text.push_str(&format!(
            "range_m: min={} p25={} median={} p75={} max={}\n",
            r.min, r.p25, r.median, r.p75, r.max
        )),
        None => text.push_str("range_m: n/a\n"),
    }
    match stats.intensity_mean {
        Some(m) => text.push_str(&format!("intensity_mean: {m}\n")),
        None => text.push_str("intensity_mean: n/a\n"),
    }
    text.push_str(&format!(
        "near_field_low_intensity: {} ({})\n",
        stats.near_field_low_intensity, stats.near_field_low_intensity_fraction
    ));
    text.push_str(&format!("histogram (bin_width={}):\nbin_start,count\n", stats.histogram.bin_width));
    for (k, count) in stats.histogram.counts.iter().enumerate() {
        text.push_str(&format!("{},{count}\n", k as f64 * stats.histogram.bin_width));
    }
    out.write_all(text.as_bytes()).map_err(output_error)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> CommonArgs {
        let cli = Cli::try_parse_from(std::iter::once("snowlidar").chain(args.iter().copied())).unwrap();
        common(&cli.command).clone()
    }

    #[test]
    fn flags_override_file_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        fs::write(&cfg, "sr = 12.5\nseed = 7\nunit-scale = 0.5\ndrop-threshold = 2.0\n").unwrap();
        let path = cfg.to_str().unwrap();
        let s = Settings::resolve(&parse(&["qeff", "--config", path, "--seed", "9"])).unwrap();
        assert_eq!(s.seed, 9);
        assert_eq!(s.srs, Some(vec![12.5]));
        assert_eq!(s.unit_scale, 0.5);
        assert_eq!(s.drop_threshold, 2.0);
        assert_eq!(s.jitter_sigma, augment::DEFAULT_JITTER_SIGMA);
        let defaults = Settings::resolve(&parse(&["qeff"])).unwrap();
        assert_eq!(defaults.seed, 0);
        assert_eq!(defaults.srs, None);
        assert_eq!(defaults.unit_scale, augment::DEFAULT_UNIT_SCALE);
    }

    #[test]
    fn config_file_lists_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("c.toml");
        fs::write(&cfg, "sr = [1.0, 2.0]\n").unwrap();
        let s = Settings::resolve(&parse(&["alpha", "--config", cfg.to_str().unwrap()])).unwrap();
        assert_eq!(s.srs, Some(vec![1.0, 2.0]));
        assert!(s.single_sr(5.0).is_err());
        fs::write(&cfg, "colour = 3\n").unwrap();
        assert!(matches!(
            Settings::resolve(&parse(&["alpha", "--config", cfg.to_str().unwrap()])),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        for args in [
            &["alpha", "--sr", "5,-1"][..],
            &["alpha", "--r1", "5", "--r2", "4"],
            &["alpha", "--unit-scale", "0"],
            &["alpha", "--f-det", "2"],
            &["alpha", "--jitter-sigma", "-1"],
            &["alpha", "--qeff-constant", "2.5"],
            &["alpha", "--threads", "0"],
        ] {
            let e = Settings::resolve(&parse(args)).unwrap_err();
            assert_eq!(e.exit_code(), EXIT_USAGE, "{args:?}");
        }
        let e = Settings::resolve(&parse(&["alpha", "--sr", "5,-1,0"])).unwrap_err();
        assert!(e.to_string().contains("-1, 0"), "{e}");
    }

    #[test]
    fn sidecar_naming() {
        assert_eq!(sidecar_path(Path::new("out/snow.bin")), PathBuf::from("out/snow.bin.meta.json"));
    }

    #[test]
    fn error_classification() {
        assert_eq!(CliError::from(AugmentError::EmptyCloud).exit_code(), EXIT_INPUT);
        assert_eq!(
            CliError::from(AugmentError::RejectionBudgetExceeded { index: 0, attempts: 1 }).exit_code(),
            EXIT_NUMERICAL
        );
        assert_eq!(CliError::from(AugmentError::InvalidConfig(String::new())).exit_code(), EXIT_USAGE);
        assert_eq!(CliError::from(AugmentError::Lidar(LidarError::EmptySample)).exit_code(), EXIT_INPUT);
    }
}
