//! Stochastic fair allocation between the base-station controller and the
//! vehicle agents.
//!
//! The engine runs synchronous decision slots. In each slot the controller
//! publishes its remaining resource blocks, every agent that is still
//! requesting re-evaluates its buffer state report, and the controller picks
//! one report uniformly at random and grants exactly the requested demand.
//! The run ends when no agent can be served by the remaining blocks.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::allocation::{DemandResult, MinDemand};
use crate::error::{Error, Result};
use crate::model::Vehicle;

/// PRNG stream reserved for the controller's random choice. Scenario
/// generation uses stream 0 of the same seed.
pub const CONTROLLER_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct UserId(pub usize);

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BufferStateReport {
    pub user: UserId,
    pub demand_rb: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct UplinkGrant {
    pub user: UserId,
    pub granted_rb: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Message {
    AvailabilityQuery(UserId),
    AvailabilityResponse { remaining_rb: u32 },
    BufferStateReport(BufferStateReport),
    UplinkGrant(UplinkGrant),
}

/// What an agent does after hearing the remaining capacity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AgentAction {
    SendBsr(u32),
    StayLocal,
    Withdraw,
}

pub fn agent_decide(demand: &DemandResult, remaining_rb: u32) -> AgentAction {
    match demand.min_rb {
        MinDemand::LocalOnly(_) => AgentAction::StayLocal,
        MinDemand::Offload(rb) if remaining_rb >= rb => AgentAction::SendBsr(rb),
        MinDemand::Offload(_) => AgentAction::Withdraw,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AgentPhase {
    LocalOnly,
    Requesting,
    Granted(u32),
    /// Remaining capacity fell below the demand. Capacity never grows, so
    /// this is terminal.
    WithdrawnInsufficientCapacity,
}

#[derive(Clone, Debug)]
pub struct AgentState {
    pub user: UserId,
    pub demand: DemandResult,
    pub phase: AgentPhase,
}

impl AgentState {
    pub fn new(user: UserId, demand: DemandResult) -> Self {
        let phase = match demand.min_rb {
            MinDemand::LocalOnly(_) => AgentPhase::LocalOnly,
            MinDemand::Offload(_) => AgentPhase::Requesting,
        };
        AgentState { user, demand, phase }
    }

    /// React to the controller's availability response. Returns the report to
    /// send, if any.
    pub fn on_availability(&mut self, remaining_rb: u32) -> Option<BufferStateReport> {
        if self.phase != AgentPhase::Requesting {
            return None;
        }
        match agent_decide(&self.demand, remaining_rb) {
            AgentAction::SendBsr(demand_rb) => Some(BufferStateReport {
                user: self.user,
                demand_rb,
            }),
            AgentAction::Withdraw => {
                self.phase = AgentPhase::WithdrawnInsufficientCapacity;
                None
            }
            AgentAction::StayLocal => None,
        }
    }

    pub fn on_grant(&mut self, grant: UplinkGrant) {
        debug_assert_eq!(grant.user, self.user);
        debug_assert_eq!(Some(grant.granted_rb), self.demand.rb());
        self.phase = AgentPhase::Granted(grant.granted_rb);
    }

    /// Resource blocks this user holds: its demand once granted, else 0.
    pub fn allocated(&self) -> u32 {
        match self.phase {
            AgentPhase::Granted(rb) => rb,
            _ => 0,
        }
    }
}

/// One decision slot as seen by the controller.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub slot: u64,
    pub remaining_rb_before: u32,
    pub requesters: Vec<UserId>,
    pub granted_user: Option<UserId>,
    pub remaining_rb_after: u32,
}

#[derive(Clone, Debug)]
pub struct ControllerState {
    capacity: u32,
    remaining_rb: u32,
    slot: u64,
    granted: BTreeMap<UserId, u32>,
    rng: ChaCha8Rng,
}

impl ControllerState {
    pub fn new(capacity: u32, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(CONTROLLER_STREAM);
        ControllerState {
            capacity,
            remaining_rb: capacity,
            slot: 0,
            granted: BTreeMap::new(),
            rng,
        }
    }

    pub fn capacity(&self) -> u32 {
        self.capacity
    }

    pub fn remaining_rb(&self) -> u32 {
        self.remaining_rb
    }

    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn granted(&self) -> &BTreeMap<UserId, u32> {
        &self.granted
    }

    pub fn availability(&self) -> Message {
        Message::AvailabilityResponse {
            remaining_rb: self.remaining_rb,
        }
    }

    /// Process one slot's buffer state reports: grant one uniformly chosen
    /// reporter its full demand, or keep the remaining capacity if nobody
    /// reported.
    pub fn step(&mut self, reports: &[BufferStateReport]) -> Result<(Option<UplinkGrant>, TraceRecord)> {
        let mut reports = reports.to_vec();
        reports.sort_by_key(|r| r.user);
        for pair in reports.windows(2) {
            if pair[0].user == pair[1].user {
                return Err(Error::Protocol(format!("duplicate report from user {}", pair[0].user)));
            }
        }
        for r in &reports {
            if r.demand_rb == 0 {
                return Err(Error::Protocol(format!("user {} requested zero blocks", r.user)));
            }
            if r.demand_rb > self.remaining_rb {
                return Err(Error::Protocol(format!(
                    "user {} requested {} blocks with only {} remaining",
                    r.user, r.demand_rb, self.remaining_rb
                )));
            }
            if self.granted.contains_key(&r.user) {
                return Err(Error::Protocol(format!("user {} already holds a grant", r.user)));
            }
        }

        let before = self.remaining_rb;
        let grant = if reports.is_empty() {
            None
        } else {
            let pick = reports[self.rng.random_range(0..reports.len())];
            self.remaining_rb -= pick.demand_rb;
            self.granted.insert(pick.user, pick.demand_rb);
            Some(UplinkGrant {
                user: pick.user,
                granted_rb: pick.demand_rb,
            })
        };
        let record = TraceRecord {
            slot: self.slot,
            remaining_rb_before: before,
            requesters: reports.iter().map(|r| r.user).collect(),
            granted_user: grant.map(|g| g.user),
            remaining_rb_after: self.remaining_rb,
        };
        self.slot += 1;
        Ok((grant, record))
    }
}

#[derive(Clone, Debug)]
pub struct SfaOutcome {
    pub capacity: u32,
    /// Resource blocks per user: 0 (local) or the user's minimum demand.
    pub assignment: Vec<u32>,
    pub demands: Vec<DemandResult>,
    pub phases: Vec<AgentPhase>,
    pub trace: Vec<TraceRecord>,
    pub remaining_rb: u32,
}

impl SfaOutcome {
    pub fn offloader_count(&self) -> usize {
        self.assignment.iter().filter(|&&a| a > 0).count()
    }
}

/// Run the protocol on precomputed demands. User ids are indices into
/// `demands`.
pub fn run_sfa_with_demands(demands: &[DemandResult], capacity: u32, seed: u64) -> Result<SfaOutcome> {
    let mut controller = ControllerState::new(capacity, seed);
    let mut agents: Vec<AgentState> = demands
        .iter()
        .enumerate()
        .map(|(i, d)| AgentState::new(UserId(i), *d))
        .collect();
    let mut trace = Vec::new();

    loop {
        let remaining = controller.remaining_rb();
        let reports: Vec<BufferStateReport> = agents
            .iter_mut()
            .filter_map(|a| a.on_availability(remaining))
            .collect();
        // Loop guard: some still-requesting agent fits in the remaining blocks.
        if reports.is_empty() {
            break;
        }
        let (grant, record) = controller.step(&reports)?;
        if let Some(g) = grant {
            agents[g.user.0].on_grant(g);
        }
        trace.push(record);
    }

    Ok(SfaOutcome {
        capacity,
        assignment: agents.iter().map(AgentState::allocated).collect(),
        demands: demands.to_vec(),
        phases: agents.iter().map(|a| a.phase).collect(),
        trace,
        remaining_rb: controller.remaining_rb(),
    })
}

/// Compute every user's minimum demand against `capacity` and run the
/// protocol.
pub fn run_sfa(users: &[Vehicle], capacity: u32, seed: u64) -> Result<SfaOutcome> {
    let demands: Vec<DemandResult> = users.iter().map(|u| u.demand(capacity)).collect();
    run_sfa_with_demands(&demands, capacity, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::LocalReason;

    fn fixed(rbs: &[u32]) -> Vec<DemandResult> {
        rbs.iter().map(|&r| DemandResult::fixed(r)).collect()
    }

    #[test]
    fn agent_decisions() {
        assert_eq!(agent_decide(&DemandResult::fixed(2), 5), AgentAction::SendBsr(2));
        assert_eq!(agent_decide(&DemandResult::fixed(2), 2), AgentAction::SendBsr(2));
        assert_eq!(agent_decide(&DemandResult::fixed(2), 1), AgentAction::Withdraw);
        assert_eq!(
            agent_decide(&DemandResult::local_only(LocalReason::RemoteInfeasible), 100),
            AgentAction::StayLocal
        );
    }

    #[test]
    fn withdrawal_is_terminal() {
        let mut a = AgentState::new(UserId(0), DemandResult::fixed(3));
        assert_eq!(a.on_availability(2), None);
        assert_eq!(a.phase, AgentPhase::WithdrawnInsufficientCapacity);
        assert_eq!(a.on_availability(10), None);
    }

    #[test]
    fn controller_grants_one_report() {
        let mut c = ControllerState::new(5, 11);
        let reports: Vec<_> = (1..=3)
            .map(|u| BufferStateReport { user: UserId(u), demand_rb: 2 })
            .collect();
        let (grant, rec) = c.step(&reports).unwrap();
        let grant = grant.unwrap();
        assert_eq!(grant.granted_rb, 2);
        assert!(rec.requesters.contains(&grant.user));
        assert_eq!((rec.remaining_rb_before, rec.remaining_rb_after), (5, 3));
        assert_eq!(c.remaining_rb(), 3);
        assert_eq!(c.slot(), 1);
    }

    #[test]
    fn empty_slot_keeps_capacity() {
        let mut c = ControllerState::new(5, 0);
        let (grant, rec) = c.step(&[]).unwrap();
        assert!(grant.is_none());
        assert_eq!(rec.remaining_rb_after, 5);
        assert_eq!(c.slot(), 1);
    }

    #[test]
    fn controller_rejects_oversized_report() {
        let mut c = ControllerState::new(3, 0);
        let err = c.step(&[BufferStateReport { user: UserId(0), demand_rb: 4 }]);
        assert!(matches!(err, Err(Error::Protocol(_))));
        let err = c.step(&[
            BufferStateReport { user: UserId(0), demand_rb: 1 },
            BufferStateReport { user: UserId(0), demand_rb: 1 },
        ]);
        assert!(matches!(err, Err(Error::Protocol(_))));
    }

    #[test]
    fn selection_ignores_arrival_order() {
        let reports: Vec<_> = (0..6)
            .map(|u| BufferStateReport { user: UserId(u), demand_rb: 1 })
            .collect();
        let mut reversed = reports.clone();
        reversed.reverse();
        let mut a = ControllerState::new(10, 99);
        let mut b = ControllerState::new(10, 99);
        assert_eq!(a.step(&reports).unwrap(), b.step(&reversed).unwrap());
    }

    #[test]
    fn three_users_capacity_five() {
        for seed in 0..50 {
            let out = run_sfa_with_demands(&fixed(&[2, 2, 2]), 5, seed).unwrap();
            assert_eq!(out.offloader_count(), 2);
            assert_eq!(out.trace.len(), 2);
            assert_eq!(out.remaining_rb, 1);
            assert_eq!(
                out.phases.iter().filter(|p| **p == AgentPhase::WithdrawnInsufficientCapacity).count(),
                1
            );
        }
    }

    #[test]
    fn slack_capacity_grants_everyone() {
        let out = run_sfa_with_demands(&fixed(&[1, 2, 3, 4]), 10, 3).unwrap();
        assert_eq!(out.assignment, vec![1, 2, 3, 4]);
        assert_eq!(out.trace.len(), 4);
        assert_eq!(out.remaining_rb, 0);
    }

    #[test]
    fn zero_capacity_keeps_everyone_local() {
        let out = run_sfa_with_demands(&fixed(&[1, 1]), 0, 3).unwrap();
        assert_eq!(out.assignment, vec![0, 0]);
        assert!(out.trace.is_empty());
    }

    #[test]
    fn local_only_users_never_request() {
        let mut d = fixed(&[1, 1]);
        d.push(DemandResult::local_only(LocalReason::NoFiniteEquilibrium));
        let out = run_sfa_with_demands(&d, 10, 1).unwrap();
        assert_eq!(out.assignment, vec![1, 1, 0]);
        assert_eq!(out.phases[2], AgentPhase::LocalOnly);
        assert!(out.trace.iter().all(|r| !r.requesters.contains(&UserId(2))));
    }

    #[test]
    fn same_seed_same_run() {
        let d = fixed(&[3, 1, 4, 1, 5, 9, 2, 6]);
        let a = run_sfa_with_demands(&d, 12, 42).unwrap();
        let b = run_sfa_with_demands(&d, 12, 42).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.assignment, b.assignment);
    }
}
