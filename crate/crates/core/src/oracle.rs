//! Exact solver for the joint "most offloaders, then least overhead" program
//! with each admitted user fixed at its minimum demand.
//!
//! The primary solver is a 0/1 knapsack dynamic program over capacity with a
//! lexicographic value `(count, overhead)`. Exhaustive subset enumeration is
//! kept alongside as an independent check for small instances.
//!
//! Overheads are accumulated as the sum of per-user changes `O_o − O_l` taken
//! in ascending user order, so both solvers and [`evaluate`] produce
//! bit-identical totals for the same set.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::allocation::DemandResult;
use crate::error::{Error, Result};
use crate::model::Vehicle;
use crate::sfa::{SfaOutcome, UserId};

/// Default cap on offload-eligible users accepted by the exact solvers.
pub const DEFAULT_ELIGIBILITY_BOUND: usize = 24;

/// Hard cap for subset enumeration.
pub const ENUMERATION_LIMIT: usize = 20;

/// Cost data of one user.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct UserCost {
    pub local: f64,
    /// Minimum demand and weighted overhead at that demand, when the user
    /// can offload at all.
    pub offload: Option<(u32, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AllocationProblem {
    pub capacity: u32,
    pub users: Vec<UserCost>,
}

impl AllocationProblem {
    pub fn new(capacity: u32, users: Vec<UserCost>) -> Self {
        AllocationProblem { capacity, users }
    }

    /// Build from vehicles and their demands (as computed against `capacity`).
    pub fn from_vehicles(vehicles: &[Vehicle], demands: &[DemandResult], capacity: u32) -> Result<Self> {
        assert_eq!(vehicles.len(), demands.len());
        let users = vehicles
            .iter()
            .zip(demands)
            .map(|(v, d)| {
                let offload = match d.rb() {
                    Some(rb) => Some((rb, v.offload(rb)?.weighted)),
                    None => None,
                };
                Ok(UserCost {
                    local: v.local().weighted,
                    offload,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AllocationProblem { capacity, users })
    }

    pub fn local_total(&self) -> f64 {
        self.users.iter().map(|u| u.local).sum()
    }

    /// Users that can be admitted: finite demand within capacity.
    fn eligible(&self) -> Vec<(usize, u32, f64)> {
        self.users
            .iter()
            .enumerate()
            .filter_map(|(i, u)| match u.offload {
                Some((rb, o)) if rb >= 1 && rb <= self.capacity => Some((i, rb, o - u.local)),
                _ => None,
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleSolution {
    pub offloader_set: BTreeSet<UserId>,
    pub offloader_count: usize,
    pub total_overhead: f64,
    pub capacity_used: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Gap {
    pub count_gap: i64,
    pub overhead_gap: f64,
}

#[derive(Clone, Copy, Debug)]
struct Best {
    count: u32,
    delta: f64,
    mask: u64,
}

impl Best {
    const EMPTY: Best = Best {
        count: 0,
        delta: 0.0,
        mask: 0,
    };

    /// Lexicographic: more users first, then lower overhead.
    fn cmp_value(&self, other: &Best) -> Ordering {
        self.count
            .cmp(&other.count)
            .then_with(|| other.delta.total_cmp(&self.delta))
    }
}

fn check_bound(eligible: usize, bound: usize) -> Result<()> {
    if eligible > bound {
        return Err(Error::Precondition(format!(
            "{eligible} offload-eligible users exceed the exact-solver bound of {bound}"
        )));
    }
    if eligible > 64 {
        return Err(Error::Precondition(format!("{eligible} eligible users exceed the 64-user solver limit")));
    }
    Ok(())
}

fn solution(problem: &AllocationProblem, eligible: &[(usize, u32, f64)], best: Best) -> OracleSolution {
    let picked: Vec<&(usize, u32, f64)> = eligible
        .iter()
        .enumerate()
        .filter(|(k, _)| best.mask & (1u64 << k) != 0)
        .map(|(_, e)| e)
        .collect();
    OracleSolution {
        offloader_set: picked.iter().map(|e| UserId(e.0)).collect(),
        offloader_count: picked.len(),
        total_overhead: problem.local_total() + best.delta,
        capacity_used: picked.iter().map(|e| e.1).sum(),
    }
}

/// Dynamic program over capacity.
pub fn solve_dp(problem: &AllocationProblem, bound: usize) -> Result<OracleSolution> {
    let eligible = problem.eligible();
    check_bound(eligible.len(), bound)?;
    let cap = problem.capacity as usize;
    // table[c]: best subset of the items seen so far with total demand <= c.
    let mut table = vec![Best::EMPTY; cap + 1];
    for (k, &(_, rb, delta)) in eligible.iter().enumerate() {
        let w = rb as usize;
        for c in (w..=cap).rev() {
            let base = table[c - w];
            let cand = Best {
                count: base.count + 1,
                delta: base.delta + delta,
                mask: base.mask | (1u64 << k),
            };
            if cand.cmp_value(&table[c]) == Ordering::Greater {
                table[c] = cand;
            }
        }
    }
    Ok(solution(problem, &eligible, table[cap]))
}

/// Exhaustive enumeration of all subsets of eligible users.
pub fn solve_enumeration(problem: &AllocationProblem) -> Result<OracleSolution> {
    let eligible = problem.eligible();
    check_bound(eligible.len(), ENUMERATION_LIMIT)?;
    let mut best = Best::EMPTY;
    for mask in 0u64..(1u64 << eligible.len()) {
        let mut used = 0u64;
        let mut delta = 0.0;
        for (k, &(_, rb, d)) in eligible.iter().enumerate() {
            if mask & (1u64 << k) != 0 {
                used += u64::from(rb);
                delta += d;
            }
        }
        if used > u64::from(problem.capacity) {
            continue;
        }
        let cand = Best {
            count: mask.count_ones(),
            delta,
            mask,
        };
        if cand.cmp_value(&best) == Ordering::Greater {
            best = cand;
        }
    }
    Ok(solution(problem, &eligible, best))
}

/// Solve the vehicles' instance exactly with the default eligibility bound.
pub fn solve_exact(vehicles: &[Vehicle], capacity: u32) -> Result<OracleSolution> {
    let demands: Vec<DemandResult> = vehicles.iter().map(|v| v.demand(capacity)).collect();
    let problem = AllocationProblem::from_vehicles(vehicles, &demands, capacity)?;
    solve_dp(&problem, DEFAULT_ELIGIBILITY_BOUND)
}

/// Score an arbitrary assignment (blocks per user, 0 = local) on the same
/// scale as the solvers. Panics if a nonzero entry is not the user's demand.
pub fn evaluate(problem: &AllocationProblem, assignment: &[u32]) -> OracleSolution {
    assert_eq!(problem.users.len(), assignment.len());
    let mut delta = 0.0;
    let mut set = BTreeSet::new();
    let mut used = 0;
    for (i, (u, &a)) in problem.users.iter().zip(assignment).enumerate() {
        if a == 0 {
            continue;
        }
        let (rb, o) = u.offload.expect("assigned user has no offload demand");
        assert_eq!(rb, a, "assignment differs from the user's demand");
        delta += o - u.local;
        used += rb;
        set.insert(UserId(i));
    }
    OracleSolution {
        offloader_count: set.len(),
        offloader_set: set,
        total_overhead: problem.local_total() + delta,
        capacity_used: used,
    }
}

pub fn evaluate_sfa(problem: &AllocationProblem, outcome: &SfaOutcome) -> OracleSolution {
    evaluate(problem, &outcome.assignment)
}

/// How far an allocation falls short of the optimum: fewer offloaders
/// (`count_gap`) and extra system overhead (`overhead_gap`).
pub fn gap(allocated: &OracleSolution, optimum: &OracleSolution) -> Gap {
    Gap {
        count_gap: optimum.offloader_count as i64 - allocated.offloader_count as i64,
        overhead_gap: allocated.total_overhead - optimum.total_overhead,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn problem(capacity: u32, users: &[(f64, Option<(u32, f64)>)]) -> AllocationProblem {
        AllocationProblem::new(
            capacity,
            users
                .iter()
                .map(|&(local, offload)| UserCost { local, offload })
                .collect(),
        )
    }

    #[test]
    fn count_first_then_overhead() {
        // u1: 2 RB saves 1.0, u2: 2 RB saves 0.5, u3: 3 RB saves 5.0.
        let p = problem(5, &[(2.0, Some((2, 1.0))), (2.0, Some((2, 1.5))), (9.0, Some((3, 4.0)))]);
        let s = solve_dp(&p, 24).unwrap();
        assert_eq!(s.offloader_count, 2);
        assert_eq!(s.offloader_set, BTreeSet::from([UserId(0), UserId(2)]));
        assert_eq!(s.capacity_used, 5);
        assert_eq!(s.total_overhead, 13.0 + (-1.0 + -5.0));

        let e = solve_enumeration(&p).unwrap();
        assert_eq!(e, s);
    }

    #[test]
    fn slack_takes_everyone() {
        let p = problem(100, &[(1.0, Some((2, 0.5))), (1.0, Some((3, 0.5))), (1.0, None)]);
        let s = solve_dp(&p, 24).unwrap();
        assert_eq!(s.offloader_set, BTreeSet::from([UserId(0), UserId(1)]));
    }

    #[test]
    fn zero_capacity() {
        let p = problem(0, &[(1.0, Some((2, 0.5))), (2.5, Some((1, 0.5)))]);
        let s = solve_dp(&p, 24).unwrap();
        assert!(s.offloader_set.is_empty());
        assert_eq!(s.total_overhead, 3.5);
        assert_eq!(solve_enumeration(&p).unwrap(), s);
    }

    #[test]
    fn bound_is_enforced() {
        let users: Vec<_> = (0..30).map(|_| (1.0, Some((1, 0.5)))).collect();
        let p = problem(10, &users);
        assert!(matches!(solve_dp(&p, 24), Err(Error::Precondition(_))));
        assert!(matches!(solve_enumeration(&p), Err(Error::Precondition(_))));
        assert!(solve_dp(&p, 30).is_ok());
    }

    #[test]
    fn unlucky_allocation_gap() {
        // Demands {2, 2, 3} with capacity 4: granting the 3-block user first
        // leaves room for nobody else.
        let p = problem(4, &[(1.0, Some((2, 0.5))), (1.0, Some((2, 0.5))), (1.0, Some((3, 0.5)))]);
        let best = solve_dp(&p, 24).unwrap();
        assert_eq!(best.offloader_count, 2);
        let unlucky = evaluate(&p, &[0, 0, 3]);
        let g = gap(&unlucky, &best);
        assert_eq!(g.count_gap, 1);
        assert_eq!(gap(&best, &best), Gap { count_gap: 0, overhead_gap: 0.0 });
    }
}
