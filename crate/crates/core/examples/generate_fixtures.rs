//! Writes the shipped fixture files.
//!
//! Usage: `cargo run --release --example generate_fixtures [DIR]`
//! (default: the crate's `fixtures/` directory).

use std::path::PathBuf;

use snowlidar::fixtures;
use snowlidar::io::{self, CloudFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    std::fs::create_dir_all(&dir)?;

    let clear = fixtures::clear_scan(fixtures::CLEAR_SCAN_SEED);
    io::write_cloud(&clear, &dir.join("clear_scan.bin"), CloudFormat::PackedBinary)?;
    let snowy = fixtures::snowy_scan(fixtures::SNOWY_SCAN_SEED);
    io::write_cloud(&snowy, &dir.join("snowy_scan.bin"), CloudFormat::PackedBinary)?;
    let template = fixtures::clutter_template(fixtures::SNOWY_SCAN_SEED);
    std::fs::write(dir.join("clutter_template.json"), template.to_json())?;

    println!(
        "clear: {} points, snowy: {} points, template: {} points (mean intensity {:.3})",
        clear.len(),
        snowy.len(),
        template.len(),
        template.intensity_stats().mean
    );
    Ok(())
}
