//! Exhaustive exact optima, used as ground truth.

use serde::{Deserialize, Serialize};

use crate::cascade::WorldSpace;
use crate::error::{Error, Result};
use crate::instance::{BalanceInstance, Pair, SolutionProfile};
use crate::objective::{exact_batch, ObjectiveId};
use crate::reduction::combinations;

/// Values closer than this are treated as equal when picking an optimum.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleLimit {
    pub max_pairs: usize,
    pub max_budget: u32,
    pub max_slots: usize,
    /// Ceiling on `(solution, world)` evaluations.
    pub ceiling: u128,
}

impl Default for OracleLimit {
    fn default() -> Self {
        OracleLimit { max_pairs: 64, max_budget: 12, max_slots: crate::objective::EXACT_SLOT_LIMIT, ceiling: 5_000_000 }
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// All subsets of the objective's ground set with at most `k` pairs, ordered by size and
/// then lexicographically, with their exact values.
pub fn enumerate_values(
    instance: &BalanceInstance,
    objective: ObjectiveId,
    k: u32,
    limit: &OracleLimit,
) -> Result<Vec<(SolutionProfile, f64)>> {
    objective.check(instance)?;
    let domain = objective.domain(instance);
    if domain.len() > limit.max_pairs {
        return Err(Error::Limit { what: "oracle candidate pairs", size: domain.len() as u128, limit: limit.max_pairs as u128 });
    }
    if k > limit.max_budget {
        return Err(Error::Limit { what: "oracle budget", size: k as u128, limit: limit.max_budget as u128 });
    }
    let space = WorldSpace::new(instance);
    if space.slots() > limit.max_slots {
        return Err(Error::Limit { what: "oracle fractional slots", size: space.slots() as u128, limit: limit.max_slots as u128 });
    }
    let top = (k as usize).min(domain.len());
    let sets: u128 = (0..=top).map(|s| binomial(domain.len() as u128, s as u128)).sum();
    let work = sets.saturating_mul(space.world_count());
    if work > limit.ceiling {
        return Err(Error::Limit { what: "oracle (solution, world) evaluations", size: work, limit: limit.ceiling });
    }
    let candidates: Vec<Vec<Pair>> = (0..=top)
        .flat_map(|s| combinations(domain.len(), s))
        .map(|c| c.into_iter().map(|i| domain[i]).collect())
        .collect();
    let values = exact_batch(
        objective,
        &instance.seeds(),
        &SolutionProfile::new(),
        &candidates,
        instance,
        limit.max_slots,
    )?;
    Ok(candidates.into_iter().map(|c| c.into_iter().collect()).zip(values).collect())
}

/// An exact maximiser of `objective` over solutions with at most `k` pairs.
///
/// Ties (within [`TIE_TOLERANCE`]) go to the first set in enumeration order: smaller sets
/// first, then lexicographically smaller pair lists.
pub fn brute_force_solve(
    instance: &BalanceInstance,
    objective: ObjectiveId,
    k: u32,
    limit: &OracleLimit,
) -> Result<(SolutionProfile, f64)> {
    let table = enumerate_values(instance, objective, k, limit)?;
    let mut best = 0;
    for (i, (_, v)) in table.iter().enumerate() {
        if *v > table[best].1 + TIE_TOLERANCE {
            best = i;
        }
    }
    Ok(table.into_iter().nth(best).expect("the empty set is always enumerated"))
}
