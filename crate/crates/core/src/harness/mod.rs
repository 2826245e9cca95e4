//! Experiment drivers: single traced runs, multi-trial campaigns and
//! protocol-versus-optimum comparisons.

mod format;
mod output;

pub use format::{fmt_sig6, round_sig6};
pub use output::{
    write_campaign, write_compare, write_run, CampaignSummary, CompareSummary, FieldStat, PooledReductions,
    RunSummary, SettingSummary, SCHEMA_VERSION,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::allocation::DemandResult;
use crate::error::{Error, Result};
use crate::model::OverheadBreakdown;
use crate::oracle::{self, AllocationProblem};
use crate::scenario::{generate_users, GeneratedUser, ScenarioConfig};
use crate::sfa::{run_sfa_with_demands, SfaOutcome};

/// Seed of trial `index` in a campaign: the `index`-th SplitMix64 output
/// starting from state `base_seed`.
pub fn trial_seed(base_seed: u64, index: u64) -> u64 {
    let mut z = base_seed.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn reduction_pct(baseline: f64, final_: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        100.0 * (baseline - final_) / baseline
    }
}

/// Outcome summary of one simulated run. Baselines are the all-local
/// assignment; time and energy sums are unweighted.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub offloader_count: usize,
    pub per_type_offloader_counts: Vec<usize>,
    pub total_overhead_baseline: f64,
    pub total_overhead_final: f64,
    pub time_sum_baseline: f64,
    pub time_sum_final: f64,
    pub energy_sum_baseline: f64,
    pub energy_sum_final: f64,
    pub reduction_total_pct: f64,
    pub reduction_time_pct: f64,
    pub reduction_energy_pct: f64,
    pub deadline_violations: usize,
    pub slots_used: usize,
    pub rb_used: u32,
}

impl RunMetrics {
    /// Every field as `(name, value)` in canonical column order.
    pub fn fields(&self) -> Vec<(String, f64)> {
        let mut out = vec![("offloader_count".to_string(), self.offloader_count as f64)];
        for (t, &c) in self.per_type_offloader_counts.iter().enumerate() {
            out.push((format!("offloaders_type_{t}"), c as f64));
        }
        out.extend(
            [
                ("total_overhead_baseline", self.total_overhead_baseline),
                ("total_overhead_final", self.total_overhead_final),
                ("time_sum_baseline", self.time_sum_baseline),
                ("time_sum_final", self.time_sum_final),
                ("energy_sum_baseline", self.energy_sum_baseline),
                ("energy_sum_final", self.energy_sum_final),
                ("reduction_total_pct", self.reduction_total_pct),
                ("reduction_time_pct", self.reduction_time_pct),
                ("reduction_energy_pct", self.reduction_energy_pct),
                ("deadline_violations", self.deadline_violations as f64),
                ("slots_used", self.slots_used as f64),
                ("rb_used", f64::from(self.rb_used)),
            ]
            .map(|(k, v)| (k.to_string(), v)),
        );
        out
    }

    /// Copy with every real field rounded to six significant digits and the
    /// percentages recomputed from the rounded raw sums.
    pub fn rounded(&self) -> RunMetrics {
        let r = round_sig6;
        let (tb, tf) = (r(self.total_overhead_baseline), r(self.total_overhead_final));
        let (sb, sf) = (r(self.time_sum_baseline), r(self.time_sum_final));
        let (eb, ef) = (r(self.energy_sum_baseline), r(self.energy_sum_final));
        RunMetrics {
            total_overhead_baseline: tb,
            total_overhead_final: tf,
            time_sum_baseline: sb,
            time_sum_final: sf,
            energy_sum_baseline: eb,
            energy_sum_final: ef,
            reduction_total_pct: r(reduction_pct(tb, tf)),
            reduction_time_pct: r(reduction_pct(sb, sf)),
            reduction_energy_pct: r(reduction_pct(eb, ef)),
            ..self.clone()
        }
    }
}

/// System-wide state after a decision slot. Slot 0 is the all-local start.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlotPoint {
    pub slot: usize,
    pub offloaders: usize,
    pub per_type_offloaders: Vec<usize>,
    pub remaining_rb: u32,
    pub total_overhead: f64,
    pub time_sum: f64,
    pub energy_sum: f64,
}

#[derive(Clone, Debug)]
pub struct SingleRun {
    pub seed: u64,
    pub config: ScenarioConfig,
    pub users: Vec<GeneratedUser>,
    pub outcome: SfaOutcome,
    pub local: Vec<OverheadBreakdown>,
    /// Overhead of each user under the final assignment.
    pub final_overheads: Vec<OverheadBreakdown>,
    pub metrics: RunMetrics,
}

impl SingleRun {
    pub fn demands(&self) -> &[DemandResult] {
        &self.outcome.demands
    }

    /// Slot after which each user started offloading, if ever (1-based).
    pub fn grant_slots(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.users.len()];
        for (k, rec) in self.outcome.trace.iter().enumerate() {
            if let Some(u) = rec.granted_user {
                out[u.0] = Some(k + 1);
            }
        }
        out
    }

    /// Per-user weighted overhead after each slot (`[slot][user]`).
    pub fn per_user_overhead_series(&self) -> Vec<Vec<f64>> {
        let granted = self.grant_slots();
        (0..=self.outcome.trace.len())
            .map(|slot| {
                (0..self.users.len())
                    .map(|u| match granted[u] {
                        Some(g) if g <= slot => self.final_overheads[u].weighted,
                        _ => self.local[u].weighted,
                    })
                    .collect()
            })
            .collect()
    }

    pub fn slot_series(&self) -> Vec<SlotPoint> {
        let types = self.config.task_catalog.len();
        let granted = self.grant_slots();
        (0..=self.outcome.trace.len())
            .map(|slot| {
                let mut point = SlotPoint {
                    slot,
                    offloaders: 0,
                    per_type_offloaders: vec![0; types],
                    remaining_rb: if slot == 0 {
                        self.outcome.capacity
                    } else {
                        self.outcome.trace[slot - 1].remaining_rb_after
                    },
                    total_overhead: 0.0,
                    time_sum: 0.0,
                    energy_sum: 0.0,
                };
                for (u, user) in self.users.iter().enumerate() {
                    let o = match granted[u] {
                        Some(g) if g <= slot => {
                            point.offloaders += 1;
                            point.per_type_offloaders[user.task_type] += 1;
                            &self.final_overheads[u]
                        }
                        _ => &self.local[u],
                    };
                    point.total_overhead += o.weighted;
                    point.time_sum += o.time_s;
                    point.energy_sum += o.energy_j;
                }
                point
            })
            .collect()
    }
}

/// Generate a scenario, run the protocol on it and score the result.
pub fn run_single(config: &ScenarioConfig, seed: u64) -> Result<SingleRun> {
    config.validate()?;
    let users = generate_users(config, seed)?;
    let demands: Vec<DemandResult> = users.iter().map(|u| u.vehicle.demand(config.rb_capacity)).collect();
    let outcome = run_sfa_with_demands(&demands, config.rb_capacity, seed)?;

    let local: Vec<OverheadBreakdown> = users.iter().map(|u| u.vehicle.local()).collect();
    let final_overheads = users
        .iter()
        .zip(&outcome.assignment)
        .zip(&local)
        .map(|((u, &a), l)| if a == 0 { Ok(*l) } else { u.vehicle.offload(a) })
        .collect::<Result<Vec<_>>>()?;

    let mut per_type = vec![0; config.task_catalog.len()];
    let mut deadline_violations = 0;
    for ((u, &a), o) in users.iter().zip(&outcome.assignment).zip(&final_overheads) {
        if a > 0 {
            per_type[u.task_type] += 1;
        }
        if o.time_s > u.vehicle.task.deadline() {
            deadline_violations += 1;
        }
    }
    let sum = |v: &[OverheadBreakdown], f: fn(&OverheadBreakdown) -> f64| v.iter().map(f).sum::<f64>();
    let (tb, tf) = (sum(&local, |o| o.weighted), sum(&final_overheads, |o| o.weighted));
    let (sb, sf) = (sum(&local, |o| o.time_s), sum(&final_overheads, |o| o.time_s));
    let (eb, ef) = (sum(&local, |o| o.energy_j), sum(&final_overheads, |o| o.energy_j));

    let metrics = RunMetrics {
        offloader_count: outcome.offloader_count(),
        per_type_offloader_counts: per_type,
        total_overhead_baseline: tb,
        total_overhead_final: tf,
        time_sum_baseline: sb,
        time_sum_final: sf,
        energy_sum_baseline: eb,
        energy_sum_final: ef,
        reduction_total_pct: reduction_pct(tb, tf),
        reduction_time_pct: reduction_pct(sb, sf),
        reduction_energy_pct: reduction_pct(eb, ef),
        deadline_violations,
        slots_used: outcome.trace.len(),
        rb_used: outcome.capacity - outcome.remaining_rb,
    };
    Ok(SingleRun {
        seed,
        config: config.clone(),
        users,
        outcome,
        local,
        final_overheads,
        metrics,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub metrics: RunMetrics,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CampaignReport {
    pub bandwidth_mhz: Option<u32>,
    pub rb_capacity: u32,
    pub base_seed: u64,
    pub trials: Vec<TrialResult>,
}

impl CampaignReport {
    /// Mean and population standard deviation of every metric field.
    pub fn field_stats(&self) -> Vec<FieldStat> {
        let rows: Vec<Vec<(String, f64)>> = self.trials.iter().map(|t| t.metrics.fields()).collect();
        let n = rows.len() as f64;
        rows[0]
            .iter()
            .enumerate()
            .map(|(k, (name, _))| {
                let mean = rows.iter().map(|r| r[k].1).sum::<f64>() / n;
                let var = rows.iter().map(|r| (r[k].1 - mean).powi(2)).sum::<f64>() / n;
                FieldStat {
                    name: name.clone(),
                    mean,
                    std: var.sqrt(),
                }
            })
            .collect()
    }

    pub fn mean(&self, field: &str) -> Option<f64> {
        self.field_stats().into_iter().find(|s| s.name == field).map(|s| s.mean)
    }

    /// Reductions computed from the mean baseline and final sums.
    pub fn pooled_reductions(&self) -> PooledReductions {
        let n = self.trials.len() as f64;
        let avg = |f: fn(&RunMetrics) -> f64| self.trials.iter().map(|t| f(&t.metrics)).sum::<f64>() / n;
        PooledReductions {
            total_pct: reduction_pct(avg(|m| m.total_overhead_baseline), avg(|m| m.total_overhead_final)),
            time_pct: reduction_pct(avg(|m| m.time_sum_baseline), avg(|m| m.time_sum_final)),
            energy_pct: reduction_pct(avg(|m| m.energy_sum_baseline), avg(|m| m.energy_sum_final)),
        }
    }
}

/// Run `trials` independent seeded runs of one scenario.
pub fn run_campaign(config: &ScenarioConfig, trials: usize, base_seed: u64) -> Result<CampaignReport> {
    if trials == 0 {
        return Err(Error::Precondition("a campaign needs at least one trial".into()));
    }
    config.validate()?;
    let results = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(base_seed, trial as u64);
            run_single(config, seed).map(|run| TrialResult {
                trial,
                seed,
                metrics: run.metrics,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CampaignReport {
        bandwidth_mhz: config.bandwidth_mhz,
        rb_capacity: config.rb_capacity,
        base_seed,
        trials: results,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareTrial {
    pub trial: usize,
    pub seed: u64,
    pub eligible_users: usize,
    pub sfa_count: usize,
    pub oracle_count: usize,
    pub sfa_overhead: f64,
    pub oracle_overhead: f64,
    pub gap: oracle::Gap,
}

impl CompareTrial {
    /// SFA never admits more users than the optimum, nor reaches a lower
    /// overhead with the same number of users.
    pub fn lexicographically_dominated(&self) -> bool {
        self.gap.count_gap > 0 || (self.gap.count_gap == 0 && self.gap.overhead_gap >= -1e-9)
    }

    /// Componentwise: fewer-or-equal users and higher-or-equal overhead.
    pub fn componentwise_dominated(&self) -> bool {
        self.gap.count_gap >= 0 && self.gap.overhead_gap >= -1e-9
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub bandwidth_mhz: Option<u32>,
    pub rb_capacity: u32,
    pub base_seed: u64,
    pub oracle_bound: usize,
    pub trials: Vec<CompareTrial>,
}

/// Solve each trial's instance exactly and compare with the protocol.
pub fn run_oracle_compare(
    config: &ScenarioConfig,
    trials: usize,
    base_seed: u64,
    oracle_bound: usize,
) -> Result<CompareReport> {
    if trials == 0 {
        return Err(Error::Precondition("a comparison needs at least one trial".into()));
    }
    if config.user_count > oracle_bound {
        return Err(Error::Precondition(format!(
            "user_count {} exceeds the exact-solver bound {oracle_bound}; lower user_count or raise --oracle-bound",
            config.user_count
        )));
    }
    config.validate()?;
    let results = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(base_seed, trial as u64);
            let run = run_single(config, seed)?;
            let vehicles: Vec<_> = run.users.iter().map(|u| u.vehicle).collect();
            let problem = AllocationProblem::from_vehicles(&vehicles, run.demands(), config.rb_capacity)?;
            let best = oracle::solve_dp(&problem, oracle_bound)?;
            let sfa = oracle::evaluate_sfa(&problem, &run.outcome);
            Ok(CompareTrial {
                trial,
                seed,
                eligible_users: run.demands().iter().filter(|d| d.rb().is_some()).count(),
                sfa_count: sfa.offloader_count,
                oracle_count: best.offloader_count,
                sfa_overhead: sfa.total_overhead,
                oracle_overhead: best.total_overhead,
                gap: oracle::gap(&sfa, &best),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareReport {
        bandwidth_mhz: config.bandwidth_mhz,
        rb_capacity: config.rb_capacity,
        base_seed,
        oracle_bound,
        trials: results,
    })
}
