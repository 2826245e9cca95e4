//! Vehicular edge cloud offloading simulator.
//!
//! A single base station with an edge server serves vehicles that can either
//! run a task onboard or upload it over LTE resource blocks. The crate
//! provides:
//!
//! - [`model`]: local and offload overheads (time, energy, weighted cost).
//! - [`allocation`]: break-even and deadline resource-block thresholds and
//!   the resulting minimum demand per user.
//! - [`sfa`]: the stochastic fair allocation protocol, with controller and
//!   vehicle agents exchanging buffer state reports and uplink grants one
//!   slot at a time.
//! - [`oracle`]: an exact solver (most offloaders first, then least overhead)
//!   used to measure how far the protocol is from optimal.
//! - [`scenario`]: seeded generation of experiment populations.
//! - [`harness`]: single runs, campaigns, comparisons and CSV/JSON output.

pub mod allocation;
pub mod error;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod scenario;
pub mod sfa;
pub mod units;

pub use allocation::{
    deadline_rb, equilibrium_rb, min_required_rb, DeadlinePoint, DemandResult, EquilibriumPoint, LocalReason,
    MinDemand,
};
pub use error::{Error, Result};
pub use harness::{
    run_campaign, run_oracle_compare, run_single, trial_seed, CampaignReport, CompareReport, RunMetrics, SingleRun,
};
pub use model::{
    local_overhead, offload_overhead, uplink_rate, ComputeProfile, ComputeTask, OverheadBreakdown, RadioLink,
    Vehicle, Weights,
};
pub use oracle::{solve_exact, AllocationProblem, OracleSolution};
pub use scenario::{default_table1_config, generate_users, GeneratedUser, ScenarioConfig};
pub use sfa::{run_sfa, run_sfa_with_demands, SfaOutcome, TraceRecord, UserId};
