use std::fs;
use std::path::Path;

use vecc_core::harness::{write_campaign, write_compare, write_run, CampaignSummary, CompareSummary, RunSummary};
use vecc_core::{default_table1_config, run_campaign, run_oracle_compare, run_single, ScenarioConfig};

fn small_config() -> ScenarioConfig {
    let mut config = default_table1_config(10).unwrap();
    config.user_count = 10;
    config
}

/// Parse every record and write it back with the same writer settings.
fn csv_roundtrip(path: &Path) {
    let original = fs::read_to_string(path).unwrap();
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(original.as_bytes());
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    for rec in reader.records() {
        writer.write_record(&rec.unwrap()).unwrap();
    }
    let rewritten = String::from_utf8(writer.into_inner().unwrap()).unwrap();
    assert_eq!(rewritten, original, "{}", path.display());
}

fn json_roundtrip<T: serde::Serialize + serde::de::DeserializeOwned>(path: &Path) -> T {
    let original = fs::read_to_string(path).unwrap();
    let value: T = serde_json::from_str(&original).unwrap();
    assert_eq!(serde_json::to_string_pretty(&value).unwrap() + "\n", original, "{}", path.display());
    value
}

fn roundtrip_all(dir: &Path) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "csv") {
            csv_roundtrip(&path);
        }
    }
}

fn assert_close(a: f64, b: f64) {
    assert!((a - b).abs() <= 1e-5 * b.abs().max(1e-9), "{a} vs {b}");
}

#[test]
fn run_outputs_roundtrip_and_recompute() {
    let dir = tempfile::tempdir().unwrap();
    let run = run_single(&small_config(), 11).unwrap();
    let m = &run.metrics;
    let pct = |b: f64, f: f64| 100.0 * (b - f) / b;
    assert!((m.reduction_total_pct - pct(m.total_overhead_baseline, m.total_overhead_final)).abs() <= 1e-9);
    assert!((m.reduction_time_pct - pct(m.time_sum_baseline, m.time_sum_final)).abs() <= 1e-9);
    assert!((m.reduction_energy_pct - pct(m.energy_sum_baseline, m.energy_sum_final)).abs() <= 1e-9);

    let files = write_run(dir.path(), &run).unwrap();
    assert!(files.len() >= 5);
    roundtrip_all(dir.path());
    let summary: RunSummary = json_roundtrip(&dir.path().join("run_summary.json"));
    assert_eq!(summary.schema_version, 1);
    let e = &summary.metrics;
    assert_close(e.reduction_total_pct, pct(e.total_overhead_baseline, e.total_overhead_final));
    assert_close(e.reduction_energy_pct, pct(e.energy_sum_baseline, e.energy_sum_final));
    assert_eq!(e.offloader_count, e.per_type_offloader_counts.iter().sum::<usize>());
    assert_eq!(e.slots_used, e.offloader_count);
}

#[test]
fn campaign_is_deterministic_and_roundtrips() {
    let config = small_config();
    let a = run_campaign(&config, 12, 5).unwrap();
    let b = run_campaign(&config, 12, 5).unwrap();
    assert_eq!(a, b);
    assert!(a.trials.iter().enumerate().all(|(i, t)| t.trial == i));

    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    write_campaign(da.path(), std::slice::from_ref(&a)).unwrap();
    write_campaign(db.path(), std::slice::from_ref(&b)).unwrap();
    for name in ["campaign_trials.csv", "fig6_summary.csv", "campaign_summary.json"] {
        assert_eq!(fs::read(da.path().join(name)).unwrap(), fs::read(db.path().join(name)).unwrap(), "{name}");
    }
    roundtrip_all(da.path());
    let summary: CampaignSummary = json_roundtrip(&da.path().join("campaign_summary.json"));
    assert_eq!(summary.settings[0].trials, 12);
}

#[test]
fn compare_outputs_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_oracle_compare(&small_config(), 5, 3, 24).unwrap();
    write_compare(dir.path(), &report).unwrap();
    roundtrip_all(dir.path());
    let summary: CompareSummary = json_roundtrip(&dir.path().join("compare_summary.json"));
    assert_eq!(summary.schema_version, 1);
}

#[test]
fn compare_rejects_oversized_or_empty_campaigns() {
    let mut config = small_config();
    assert!(run_oracle_compare(&config, 0, 1, 24).is_err());
    config.user_count = 30;
    assert!(run_oracle_compare(&config, 1, 1, 24).is_err());
}
