use std::path::PathBuf;

use snowlidar::augment::ClutterTemplate;
use snowlidar::fixtures;
use snowlidar::io::{self, CloudFormat};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

#[test]
fn shipped_files_match_generator() {
    let clear = io::read_cloud(&fixture("clear_scan.bin"), CloudFormat::PackedBinary).unwrap();
    assert_eq!(clear.points(), fixtures::clear_scan(fixtures::CLEAR_SCAN_SEED).points());
    let snowy = io::read_cloud(&fixture("snowy_scan.bin"), CloudFormat::PackedBinary).unwrap();
    assert_eq!(snowy.points(), fixtures::snowy_scan(fixtures::SNOWY_SCAN_SEED).points());
    let text = std::fs::read_to_string(fixture("clutter_template.json")).unwrap();
    assert_eq!(text, fixtures::clutter_template(fixtures::SNOWY_SCAN_SEED).to_json());
}

#[test]
fn shipped_template_statistics() {
    let text = std::fs::read_to_string(fixture("clutter_template.json")).unwrap();
    let template = ClutterTemplate::from_json(&text).unwrap();
    let stats = template.intensity_stats();
    assert!((1.0..=2.0).contains(&stats.mean), "{}", stats.mean);
    assert_eq!(stats.upper_bound, fixtures::TEMPLATE_CUTOFF);
    assert_eq!(template.snowfall_rate(), fixtures::SNOWY_SCAN_SR);
    assert!(template.len() > 1000);
    for p in template.points() {
        assert!((0.5..=10.0).contains(&p.range()));
        assert!((p.intensity as f64) < fixtures::TEMPLATE_CUTOFF);
    }
}

#[test]
fn clear_fixture_shape() {
    let clear = fixtures::clear_scan(fixtures::CLEAR_SCAN_SEED);
    assert_eq!(clear.len(), fixtures::CLEAR_SCAN_POINTS);
    assert!(clear.points().iter().all(|p| p.intensity >= 1.0 && p.intensity <= 200.0));
    assert!(clear.points().iter().any(|p| p.range() > 100.0));
    assert_ne!(clear.points(), fixtures::clear_scan(fixtures::CLEAR_SCAN_SEED + 1).points());
}
