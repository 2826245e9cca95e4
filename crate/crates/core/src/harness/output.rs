//! CSV and JSON emission. Real numbers are written with six significant
//! digits so that every emitted byte is a function of the inputs and seed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::format::{fmt_sig6, round_sig6};
use super::{CampaignReport, CompareReport, RunMetrics, SingleRun};
use crate::allocation::MinDemand;
use crate::error::Result;
use crate::units;

pub const SCHEMA_VERSION: u32 = 1;

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f(v: Option<f64>) -> String {
    v.map(fmt_sig6).unwrap_or_default()
}

fn metric_cell(name: &str, value: f64) -> String {
    // Counts stay integral.
    if name.contains("count") || name.starts_with("offloaders_") || matches!(name, "slots_used" | "rb_used" | "deadline_violations") {
        format!("{}", value as u64)
    } else {
        fmt_sig6(value)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub kind: String,
    pub seed: u64,
    pub bandwidth_mhz: Option<u32>,
    pub rb_capacity: u32,
    pub user_count: usize,
    pub metrics: RunMetrics,
}

/// Write the traced run into `dir`. Returns the files written.
pub fn write_run(dir: &Path, run: &SingleRun) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("trace.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["slot", "remaining_rb_before", "requesters", "granted_user", "granted_rb", "remaining_rb_after"])?;
    for rec in &run.outcome.trace {
        let requesters: Vec<String> = rec.requesters.iter().map(|u| u.to_string()).collect();
        w.write_record([
            rec.slot.to_string(),
            rec.remaining_rb_before.to_string(),
            requesters.join(";"),
            opt(rec.granted_user),
            opt(rec.granted_user.map(|u| run.outcome.assignment[u.0])),
            rec.remaining_rb_after.to_string(),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("users.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "user_id", "x_m", "y_m", "distance_m", "task_type", "local_speed_ghz", "time_weight", "energy_weight",
        "raw_equilibrium_rb", "raw_deadline_rb", "min_rb", "local_reason", "assigned_rb", "local_overhead",
        "final_overhead", "final_time_s", "final_energy_j",
    ])?;
    for (u, user) in run.users.iter().enumerate() {
        let d = &run.outcome.demands[u];
        let (min_rb, reason) = match d.min_rb {
            MinDemand::Offload(rb) => (rb.to_string(), String::new()),
            MinDemand::LocalOnly(r) => (String::new(), r.as_str().to_string()),
        };
        let v = &user.vehicle;
        let fin = &run.final_overheads[u];
        w.write_record([
            user.id.to_string(),
            fmt_sig6(user.position[0]),
            fmt_sig6(user.position[1]),
            fmt_sig6(user.distance_m),
            user.task_type.to_string(),
            fmt_sig6(units::hz_to_ghz(v.profile.local_speed())),
            fmt_sig6(v.weights.time()),
            fmt_sig6(v.weights.energy()),
            opt_f(d.raw_equilibrium),
            opt_f(d.raw_deadline),
            min_rb,
            reason,
            run.outcome.assignment[u].to_string(),
            fmt_sig6(run.local[u].weighted),
            fmt_sig6(fin.weighted),
            fmt_sig6(fin.time_s),
            fmt_sig6(fin.energy_j),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let series = run.slot_series();
    let path = dir.join("fig2_offloaders.csv");
    let mut w = csv_writer(&path)?;
    let mut header = vec!["slot".to_string(), "offloaders".to_string(), "remaining_rb".to_string()];
    header.extend((0..run.config.task_catalog.len()).map(|t| format!("type_{t}")));
    w.write_record(&header)?;
    for p in &series {
        let mut row = vec![p.slot.to_string(), p.offloaders.to_string(), p.remaining_rb.to_string()];
        row.extend(p.per_type_offloaders.iter().map(|c| c.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("fig4_per_user_overhead.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["slot", "user_id", "task_type", "overhead"])?;
    for (slot, row) in run.per_user_overhead_series().iter().enumerate() {
        for (u, o) in row.iter().enumerate() {
            w.write_record([slot.to_string(), u.to_string(), run.users[u].task_type.to_string(), fmt_sig6(*o)])?;
        }
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("fig5_system_overhead.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["slot", "total_overhead", "time_sum", "energy_sum"])?;
    for p in &series {
        w.write_record([
            p.slot.to_string(),
            fmt_sig6(p.total_overhead),
            fmt_sig6(p.time_sum),
            fmt_sig6(p.energy_sum),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("run_summary.json");
    write_json(
        &path,
        &RunSummary {
            schema_version: SCHEMA_VERSION,
            kind: "run".into(),
            seed: run.seed,
            bandwidth_mhz: run.config.bandwidth_mhz,
            rb_capacity: run.config.rb_capacity,
            user_count: run.users.len(),
            metrics: run.metrics.rounded(),
        },
    )?;
    written.push(path);
    Ok(written)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldStat {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PooledReductions {
    pub total_pct: f64,
    pub time_pct: f64,
    pub energy_pct: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SettingSummary {
    pub bandwidth_mhz: Option<u32>,
    pub rb_capacity: u32,
    pub trials: usize,
    /// Mean and population standard deviation of each per-trial field.
    pub fields: Vec<FieldStat>,
    /// Reductions of the mean baseline versus the mean final sums.
    pub pooled: PooledReductions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub schema_version: u32,
    pub kind: String,
    pub base_seed: u64,
    pub seed_derivation: String,
    pub settings: Vec<SettingSummary>,
}

impl CampaignSummary {
    pub fn from_reports(reports: &[CampaignReport]) -> Self {
        CampaignSummary {
            schema_version: SCHEMA_VERSION,
            kind: "campaign".into(),
            base_seed: reports.first().map_or(0, |r| r.base_seed),
            seed_derivation: "splitmix64(base_seed, trial)".into(),
            settings: reports
                .iter()
                .map(|r| {
                    let pooled = r.pooled_reductions();
                    SettingSummary {
                        bandwidth_mhz: r.bandwidth_mhz,
                        rb_capacity: r.rb_capacity,
                        trials: r.trials.len(),
                        fields: r
                            .field_stats()
                            .into_iter()
                            .map(|s| FieldStat {
                                name: s.name,
                                mean: round_sig6(s.mean),
                                std: round_sig6(s.std),
                            })
                            .collect(),
                        pooled: PooledReductions {
                            total_pct: round_sig6(pooled.total_pct),
                            time_pct: round_sig6(pooled.time_pct),
                            energy_pct: round_sig6(pooled.energy_pct),
                        },
                    }
                })
                .collect(),
        }
    }
}

/// Write one or more campaign settings (e.g. 10/15/20 MHz) into `dir`.
pub fn write_campaign(dir: &Path, reports: &[CampaignReport]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();

    let path = dir.join("campaign_trials.csv");
    let mut w = csv_writer(&path)?;
    let mut header_done = false;
    for r in reports {
        for t in &r.trials {
            let m = t.metrics.rounded();
            let fields = m.fields();
            if !header_done {
                let mut header = vec!["bandwidth_mhz".to_string(), "rb_capacity".into(), "trial".into(), "seed".into()];
                header.extend(fields.iter().map(|(k, _)| k.clone()));
                w.write_record(&header)?;
                header_done = true;
            }
            let mut row = vec![opt(r.bandwidth_mhz), r.rb_capacity.to_string(), t.trial.to_string(), t.seed.to_string()];
            row.extend(fields.iter().map(|(k, v)| metric_cell(k, *v)));
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    written.push(path);

    let summary = CampaignSummary::from_reports(reports);
    let path = dir.join("fig6_summary.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "bandwidth_mhz", "rb_capacity", "trials", "mean_offloaders", "std_offloaders", "mean_reduction_total_pct",
        "mean_reduction_time_pct", "mean_reduction_energy_pct", "pooled_reduction_total_pct",
        "pooled_reduction_time_pct", "pooled_reduction_energy_pct",
    ])?;
    for s in &summary.settings {
        let stat = |name: &str| s.fields.iter().find(|f| f.name == name).expect("known field");
        w.write_record([
            opt(s.bandwidth_mhz),
            s.rb_capacity.to_string(),
            s.trials.to_string(),
            fmt_sig6(stat("offloader_count").mean),
            fmt_sig6(stat("offloader_count").std),
            fmt_sig6(stat("reduction_total_pct").mean),
            fmt_sig6(stat("reduction_time_pct").mean),
            fmt_sig6(stat("reduction_energy_pct").mean),
            fmt_sig6(s.pooled.total_pct),
            fmt_sig6(s.pooled.time_pct),
            fmt_sig6(s.pooled.energy_pct),
        ])?;
    }
    w.flush()?;
    written.push(path);

    let path = dir.join("campaign_summary.json");
    write_json(&path, &summary)?;
    written.push(path);
    Ok(written)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountGapBucket {
    pub count_gap: i64,
    pub trials: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareSummary {
    pub schema_version: u32,
    pub kind: String,
    pub base_seed: u64,
    pub bandwidth_mhz: Option<u32>,
    pub rb_capacity: u32,
    pub oracle_bound: usize,
    pub trials: usize,
    pub count_gap_histogram: Vec<CountGapBucket>,
    pub mean_count_gap: f64,
    pub mean_overhead_gap: f64,
    pub min_overhead_gap: f64,
    pub max_overhead_gap: f64,
    /// Trials where the protocol beat the optimum in the lexicographic order
    /// (must be zero).
    pub lexicographic_violations: usize,
    /// Trials where the protocol had fewer users but a lower total overhead
    /// than the count-maximal optimum.
    pub fewer_users_lower_overhead: usize,
}

impl CompareSummary {
    pub fn from_report(r: &CompareReport) -> Self {
        let n = r.trials.len() as f64;
        let mut histogram: Vec<CountGapBucket> = Vec::new();
        let mut gaps: Vec<i64> = r.trials.iter().map(|t| t.gap.count_gap).collect();
        gaps.sort_unstable();
        for g in gaps {
            match histogram.last_mut() {
                Some(b) if b.count_gap == g => b.trials += 1,
                _ => histogram.push(CountGapBucket { count_gap: g, trials: 1 }),
            }
        }
        let og: Vec<f64> = r.trials.iter().map(|t| t.gap.overhead_gap).collect();
        CompareSummary {
            schema_version: SCHEMA_VERSION,
            kind: "compare".into(),
            base_seed: r.base_seed,
            bandwidth_mhz: r.bandwidth_mhz,
            rb_capacity: r.rb_capacity,
            oracle_bound: r.oracle_bound,
            trials: r.trials.len(),
            count_gap_histogram: histogram,
            mean_count_gap: round_sig6(r.trials.iter().map(|t| t.gap.count_gap as f64).sum::<f64>() / n),
            mean_overhead_gap: round_sig6(og.iter().sum::<f64>() / n),
            min_overhead_gap: round_sig6(og.iter().copied().fold(f64::INFINITY, f64::min)),
            max_overhead_gap: round_sig6(og.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
            lexicographic_violations: r.trials.iter().filter(|t| !t.lexicographically_dominated()).count(),
            fewer_users_lower_overhead: r
                .trials
                .iter()
                .filter(|t| t.gap.count_gap > 0 && t.gap.overhead_gap < -1e-9)
                .count(),
        }
    }
}

pub fn write_compare(dir: &Path, report: &CompareReport) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let path = dir.join("compare_trials.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "trial", "seed", "eligible_users", "sfa_count", "oracle_count", "count_gap", "sfa_overhead",
        "oracle_overhead", "overhead_gap",
    ])?;
    for t in &report.trials {
        w.write_record([
            t.trial.to_string(),
            t.seed.to_string(),
            t.eligible_users.to_string(),
            t.sfa_count.to_string(),
            t.oracle_count.to_string(),
            t.gap.count_gap.to_string(),
            fmt_sig6(t.sfa_overhead),
            fmt_sig6(t.oracle_overhead),
            fmt_sig6(t.gap.overhead_gap),
        ])?;
    }
    w.flush()?;
    let summary_path = dir.join("compare_summary.json");
    write_json(&summary_path, &CompareSummary::from_report(report))?;
    Ok(vec![path, summary_path])
}
