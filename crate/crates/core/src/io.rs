//! Point cloud files and run metadata.
//!
//! Two cloud encodings are supported:
//!
//! * packed binary: consecutive 16-byte records of four little-endian IEEE-754
//!   `f32` values `x, y, z, intensity`, no header;
//! * CSV: header line `x,y,z,intensity`, then one record per line with each
//!   value in shortest round-trip decimal form.
//!
//! Run metadata is a pretty-printed JSON document carrying a
//! `schema_version` string whose major component must be `1`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::AugmentationReport;
use crate::cloud::{CloudMeta, Point, PointCloud};
use crate::lidar::SensorConfig;
use crate::scattering::SnowfallParams;

pub const RECORD_SIZE: usize = 16;
pub const CSV_HEADER: [&str; 4] = ["x", "y", "z", "intensity"];
pub const METADATA_SCHEMA_VERSION: &str = "1";
const METADATA_SCHEMA_MAJOR: &str = "1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: length {len} is not a multiple of the {RECORD_SIZE}-byte record size ({trailing} trailing bytes)", path.display())]
    Truncated { path: PathBuf, len: usize, trailing: usize },
    #[error("{}: line {line}: {reason}", path.display())]
    MalformedCsv { path: PathBuf, line: u64, reason: String },
    #[error("{}: point {index}: {reason}", path.display())]
    InvalidPoint { path: PathBuf, index: usize, reason: String },
    #[error("{}: metadata schema error: {reason}", path.display())]
    Schema { path: PathBuf, reason: String },
    #[error("{}: unsupported metadata schema version {version:?}", path.display())]
    UnsupportedSchema { path: PathBuf, version: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CloudFormat {
    PackedBinary,
    Csv,
}

impl CloudFormat {
    /// `.csv` is CSV; anything else is packed binary.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CloudFormat::Csv,
            _ => CloudFormat::PackedBinary,
        }
    }
}

pub fn encode_binary(points: &[Point]) -> Vec<u8> {
    let mut out = Vec::with_capacity(points.len() * RECORD_SIZE);
    for p in points {
        for v in [p.x, p.y, p.z, p.intensity] {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Decodes packed records. Fails with the number of trailing bytes when the
/// input is not a whole number of records.
pub fn decode_binary(bytes: &[u8]) -> Result<Vec<Point>, usize> {
    let trailing = bytes.len() % RECORD_SIZE;
    if trailing != 0 {
        return Err(trailing);
    }
    let f = |b: &[u8]| f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
    Ok(bytes
        .chunks_exact(RECORD_SIZE)
        .map(|r| Point::new(f(&r[0..4]), f(&r[4..8]), f(&r[8..12]), f(&r[12..16])))
        .collect())
}

pub fn read_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud, IoError> {
    let io = |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    };
    let points = match format {
        CloudFormat::PackedBinary => {
            let bytes = fs::read(path).map_err(io)?;
            decode_binary(&bytes).map_err(|trailing| IoError::Truncated {
                path: path.to_path_buf(),
                len: bytes.len(),
                trailing,
            })?
        }
        CloudFormat::Csv => read_csv(path)?,
    };
    let meta = CloudMeta {
        source: Some(path.display().to_string()),
        ..CloudMeta::default()
    };
    PointCloud::new(points, meta).map_err(|e| match e {
        crate::cloud::CloudError::InvalidPoint { index, reason } => IoError::InvalidPoint {
            path: path.to_path_buf(),
            index,
            reason,
        },
    })
}

fn read_csv(path: &Path) -> Result<Vec<Point>, IoError> {
    let malformed = |line: u64, reason: String| IoError::MalformedCsv {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(malformed(1, format!("expected header `x,y,z,intensity`, got `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 4 {
            return Err(malformed(line, format!("expected 4 fields, got {}", record.len())));
        }
        let mut v = [0f32; 4];
        for (slot, (field, name)) in v.iter_mut().zip(record.iter().zip(CSV_HEADER)) {
            *slot = field.parse().map_err(|_| malformed(line, format!("cannot parse {name} value `{field}`")))?;
        }
        points.push(Point::new(v[0], v[1], v[2], v[3]));
    }
    Ok(points)
}

fn csv_error(path: &Path, e: csv::Error) -> IoError {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => IoError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => IoError::MalformedCsv {
            path: path.to_path_buf(),
            line,
            reason: format!("{other:?}"),
        },
    }
}

/// Writes `cloud` and returns the number of records written.
pub fn write_cloud(cloud: &PointCloud, path: &Path, format: CloudFormat) -> Result<usize, IoError> {
    let io = |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    };
    match format {
        CloudFormat::PackedBinary => fs::write(path, encode_binary(cloud.points())).map_err(io)?,
        CloudFormat::Csv => fs::write(path, encode_csv(cloud.points())).map_err(io)?,
    }
    Ok(cloud.len())
}

pub fn encode_csv(points: &[Point]) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::with_capacity(points.len() * 32 + 16));
    writer.write_record(CSV_HEADER).expect("in-memory write");
    for p in points {
        // `Display` for f32 is the shortest string that parses back to the same value.
        writer
            .write_record([p.x.to_string(), p.y.to_string(), p.z.to_string(), p.intensity.to_string()])
            .expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

/// Sidecar document describing how an output cloud was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub schema_version: String,
    #[serde(default)]
    pub capture_label: Option<String>,
    #[serde(default)]
    pub capture_date: Option<String>,
    #[serde(default)]
    pub input: Option<String>,
    #[serde(default)]
    pub template: Option<String>,
    pub sensor: SensorConfig,
    pub snowfall: SnowfallParams,
    pub seed: u64,
    pub report: AugmentationReport,
    /// Fields written by newer schema revisions, kept verbatim.
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl RunMetadata {
    pub fn new(report: AugmentationReport) -> Self {
        Self {
            schema_version: METADATA_SCHEMA_VERSION.to_string(),
            capture_label: None,
            capture_date: None,
            input: None,
            template: None,
            sensor: report.config.sensor,
            snowfall: report.config.snowfall,
            seed: report.seed,
            report,
            extra: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("metadata serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self, IoError> {
        let schema = |reason: String| IoError::Schema {
            path: path.to_path_buf(),
            reason,
        };
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
        let version = match value.get("schema_version") {
            Some(serde_json::Value::String(v)) => v.clone(),
            Some(other) => return Err(schema(format!("schema_version must be a string, got {other}"))),
            None => return Err(schema("missing field `schema_version`".into())),
        };
        if version.split('.').next() != Some(METADATA_SCHEMA_MAJOR) {
            return Err(IoError::UnsupportedSchema {
                path: path.to_path_buf(),
                version,
            });
        }
        serde_json::from_value(value).map_err(|e| schema(e.to_string()))
    }
}

pub fn write_metadata(meta: &RunMetadata, path: &Path) -> Result<(), IoError> {
    fs::write(path, meta.to_json()).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_metadata(path: &Path) -> Result<RunMetadata, IoError> {
    let text = fs::read_to_string(path).map_err(|source| IoError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RunMetadata::from_json(&text, path)
}
