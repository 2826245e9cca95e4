//! Minimum resource-block demand of a user.
//!
//! Two thresholds bound the demand from below: the break-even count at which
//! offloading stops being more expensive than local execution, and the count
//! at which the offloaded task just meets its deadline. The demand is the
//! larger of their ceilings, never less than one block.

use serde::Serialize;

use crate::model::{ComputeProfile, ComputeTask, RadioLink, Vehicle, Weights};

/// Unrounded break-even resource-block count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum EquilibriumPoint {
    Finite(f64),
    /// Offloading never beats local execution, whatever the bandwidth.
    NoFiniteEquilibrium,
}

/// Unrounded resource-block count at which the deadline is met exactly.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DeadlinePoint {
    Finite(f64),
    /// Edge execution alone already uses up the deadline.
    RemoteInfeasible,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum LocalReason {
    NoFiniteEquilibrium,
    RemoteInfeasible,
    ExceedsSystemCapacity,
}

impl LocalReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            LocalReason::NoFiniteEquilibrium => "no_finite_equilibrium",
            LocalReason::RemoteInfeasible => "remote_infeasible",
            LocalReason::ExceedsSystemCapacity => "exceeds_system_capacity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MinDemand {
    Offload(u32),
    LocalOnly(LocalReason),
}

impl MinDemand {
    pub fn rb(&self) -> Option<u32> {
        match *self {
            MinDemand::Offload(rb) => Some(rb),
            MinDemand::LocalOnly(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DemandResult {
    pub raw_equilibrium: Option<f64>,
    pub raw_deadline: Option<f64>,
    /// Ceiling of the break-even count (saturating).
    pub equilibrium_rb: Option<u64>,
    /// Ceiling of the deadline count (saturating).
    pub deadline_rb: Option<u64>,
    pub min_rb: MinDemand,
}

impl DemandResult {
    pub fn rb(&self) -> Option<u32> {
        self.min_rb.rb()
    }

    /// A demand for `rb` blocks with no threshold information attached.
    /// Used to build synthetic allocation instances.
    pub fn fixed(rb: u32) -> Self {
        assert!(rb >= 1, "a fixed demand needs at least one block");
        DemandResult {
            raw_equilibrium: None,
            raw_deadline: None,
            equilibrium_rb: None,
            deadline_rb: None,
            min_rb: MinDemand::Offload(rb),
        }
    }

    pub fn local_only(reason: LocalReason) -> Self {
        DemandResult {
            raw_equilibrium: None,
            raw_deadline: None,
            equilibrium_rb: None,
            deadline_rb: None,
            min_rb: MinDemand::LocalOnly(reason),
        }
    }
}

/// Break-even resource-block count.
///
/// With `D = λt·(β/f_l − β/f_o) − λe·τ + λe·φ·β`, the count is
/// `(λe·δ·P + λt·δ) / (D · per-RB rate)`. `D <= 0` means offloading costs at
/// least as much as local execution at any bandwidth.
pub fn equilibrium_rb(
    task: &ComputeTask,
    profile: &ComputeProfile,
    link: &RadioLink,
    w: Weights,
) -> EquilibriumPoint {
    let beta = task.compute_units();
    let delta = task.input_bits();
    let saving = w.time() * (beta / profile.local_speed() - beta / profile.edge_speed())
        - w.energy() * link.tail_energy()
        + w.energy() * profile.energy_per_unit() * beta;
    if saving <= 0.0 {
        return EquilibriumPoint::NoFiniteEquilibrium;
    }
    let numerator = w.energy() * delta * link.tx_power() + w.time() * delta;
    if numerator == 0.0 {
        return EquilibriumPoint::Finite(0.0);
    }
    EquilibriumPoint::Finite(numerator / (saving * link.per_rb_rate()))
}

/// Resource-block count at which upload plus edge execution equals the
/// deadline: `δ·f_o / ((Υ·f_o − β) · per-RB rate)`.
pub fn deadline_rb(task: &ComputeTask, profile: &ComputeProfile, link: &RadioLink) -> DeadlinePoint {
    let budget = task.deadline() * profile.edge_speed() - task.compute_units();
    if budget <= 0.0 {
        return DeadlinePoint::RemoteInfeasible;
    }
    let delta = task.input_bits();
    if delta == 0.0 {
        return DeadlinePoint::Finite(0.0);
    }
    DeadlinePoint::Finite(delta * profile.edge_speed() / (budget * link.per_rb_rate()))
}

fn ceil_rb(raw: f64) -> u64 {
    // `as` saturates for values beyond u64::MAX.
    raw.ceil() as u64
}

/// Minimum demand: the larger ceiling of the two thresholds, at least one
/// block, and no more than `system_capacity`.
pub fn min_required_rb(
    task: &ComputeTask,
    profile: &ComputeProfile,
    link: &RadioLink,
    w: Weights,
    system_capacity: u32,
) -> DemandResult {
    let eq = equilibrium_rb(task, profile, link, w);
    let dl = deadline_rb(task, profile, link);
    let raw_equilibrium = match eq {
        EquilibriumPoint::Finite(a) => Some(a),
        EquilibriumPoint::NoFiniteEquilibrium => None,
    };
    let raw_deadline = match dl {
        DeadlinePoint::Finite(a) => Some(a),
        DeadlinePoint::RemoteInfeasible => None,
    };
    let equilibrium_rb = raw_equilibrium.map(ceil_rb);
    let deadline_rb = raw_deadline.map(ceil_rb);

    let min_rb = match (equilibrium_rb, deadline_rb) {
        (_, None) => MinDemand::LocalOnly(LocalReason::RemoteInfeasible),
        (None, _) => MinDemand::LocalOnly(LocalReason::NoFiniteEquilibrium),
        (Some(e), Some(d)) => {
            let need = e.max(d).max(1);
            if need > u64::from(system_capacity) {
                MinDemand::LocalOnly(LocalReason::ExceedsSystemCapacity)
            } else {
                MinDemand::Offload(need as u32)
            }
        }
    };

    DemandResult {
        raw_equilibrium,
        raw_deadline,
        equilibrium_rb,
        deadline_rb,
        min_rb,
    }
}

impl Vehicle {
    pub fn demand(&self, system_capacity: u32) -> DemandResult {
        min_required_rb(&self.task, &self.profile, &self.link, self.weights, system_capacity)
    }
}
