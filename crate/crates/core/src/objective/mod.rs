//! The balanced-exposure objective family and its estimators.
//!
//! All objectives are expectations over outcome profiles of per-world node counts. The
//! per-world integrands are defined in [`eval_world`]; [`estimate`] averages them over `T`
//! sampled worlds and [`exact_value`] enumerates the world space.

pub(crate) mod engine;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cascade::{reach, reach_profile, OutcomeProfile};
use crate::error::{Error, Result};
use crate::instance::{BalanceInstance, EstimatorConfig, NodeId, Pair, SeedProfile, SolutionProfile};
use engine::{Plan, Rule};

/// Default bound on fractional slots for exact enumeration.
pub const EXACT_SLOT_LIMIT: usize = 20;

/// Which objective to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ObjectiveId {
    /// `Φ = Φ^{≥0}`.
    Phi,
    /// `Φ^ℓ`: balanced nodes among those at level exactly `ℓ`.
    Level(u16),
    /// `Φ^{≥ℓ}`.
    PhiGeq(u16),
    /// `Φ^{≥ℓ}_β(R, ·)`: nodes at base level `≥ ℓ` reached by `≥ β` campaigns.
    PhiBand(u16, u16),
    /// The correlated surrogate over `V × {0}`.
    Psi,
}

impl ObjectiveId {
    /// Checks the tag parameters against `instance`.
    pub fn check(&self, instance: &BalanceInstance) -> Result<()> {
        let (mu, nu) = (instance.mu(), instance.nu());
        match *self {
            ObjectiveId::Phi => Ok(()),
            ObjectiveId::Level(l) if l <= mu => Ok(()),
            ObjectiveId::PhiGeq(l) if l <= nu => Ok(()),
            ObjectiveId::PhiBand(l, b) if l >= 1 && l < nu && b >= 1 && b <= nu => Ok(()),
            ObjectiveId::Psi if instance.is_correlated() => Ok(()),
            ObjectiveId::Psi => Err(Error::Setting("Ψ is defined only for correlated instances".into())),
            other => Err(Error::parameter(format!("objective {other} out of range for mu={mu}, nu={nu}"))),
        }
    }

    /// Campaign range allowed in solutions: `V × {0}` for Ψ, `V × [μ]` otherwise.
    pub fn check_pairs<'a>(&self, instance: &BalanceInstance, pairs: impl IntoIterator<Item = &'a Pair>) -> Result<()> {
        for p in pairs {
            let ok = p.node < instance.n()
                && match self {
                    ObjectiveId::Psi => p.campaign == 0,
                    _ => p.campaign >= 1 && p.campaign <= instance.mu(),
                };
            if !ok {
                return Err(Error::parameter(format!("pair {p} outside the domain of {self}")));
            }
        }
        Ok(())
    }

    /// The ground set `D_f` in lexicographic order.
    pub fn domain(&self, instance: &BalanceInstance) -> Vec<Pair> {
        match self {
            ObjectiveId::Psi => instance.zero_pairs(),
            _ => instance.pairs(),
        }
    }
}

impl fmt::Display for ObjectiveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectiveId::Phi => f.write_str("phi"),
            ObjectiveId::Level(l) => write!(f, "level:{l}"),
            ObjectiveId::PhiGeq(l) => write!(f, "geq:{l}"),
            ObjectiveId::PhiBand(l, b) => write!(f, "band:{l}:{b}"),
            ObjectiveId::Psi => f.write_str("psi"),
        }
    }
}

impl FromStr for ObjectiveId {
    type Err = Error;

    /// Accepts `phi`, `psi`, `level:ℓ`, `geq:ℓ` and `band:ℓ:β`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::parameter(format!("unknown objective `{s}`"));
        let num = |t: &str| t.parse::<u16>().map_err(|_| bad());
        let parts: Vec<&str> = s.trim().split(':').collect();
        match parts.as_slice() {
            ["phi"] => Ok(ObjectiveId::Phi),
            ["psi"] => Ok(ObjectiveId::Psi),
            ["level", l] => Ok(ObjectiveId::Level(num(l)?)),
            ["geq", l] => Ok(ObjectiveId::PhiGeq(num(l)?)),
            ["band", l, b] => Ok(ObjectiveId::PhiBand(num(l)?, num(b)?)),
            _ => Err(bad()),
        }
    }
}

impl From<ObjectiveId> for String {
    fn from(o: ObjectiveId) -> String {
        o.to_string()
    }
}

impl TryFrom<String> for ObjectiveId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// `Λ_{μ,ν}`: nodes of `0..n` contained in none or in at least `nu` of the sets.
pub fn nosm(reached: &[Vec<NodeId>], n: usize, nu: u16) -> usize {
    let mut count = vec![0u16; n];
    for set in reached {
        for &v in set {
            count[v as usize] += 1;
        }
    }
    count.iter().filter(|&&c| c == 0 || c >= nu).count()
}

/// Number of campaigns reaching each node from a seed profile, in one world.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelPartition {
    pub level: Vec<u16>,
}

impl LevelPartition {
    /// `V^ℓ`, ascending.
    pub fn slice(&self, l: u16) -> Vec<NodeId> {
        (0..self.level.len() as NodeId).filter(|&v| self.level[v as usize] == l).collect()
    }
}

pub fn level_partition(instance: &BalanceInstance, profile: &OutcomeProfile, seeds: &SeedProfile) -> LevelPartition {
    let mut level = vec![0u16; instance.node_count()];
    for set in reach_profile(instance, profile, seeds) {
        for v in set {
            level[v as usize] += 1;
        }
    }
    LevelPartition { level }
}

/// The per-world integrand of `objective` for base seeds `base` and solution `s`.
///
/// This is the direct definition; the estimators use an incremental evaluator that is
/// checked against it.
pub fn eval_world(
    instance: &BalanceInstance,
    objective: ObjectiveId,
    profile: &OutcomeProfile,
    base: &SeedProfile,
    s: &SolutionProfile,
) -> Result<u32> {
    objective.check(instance)?;
    objective.check_pairs(instance, s)?;
    let n = instance.node_count();
    let nu = instance.nu();
    let level = level_partition(instance, profile, base).level;
    if objective == ObjectiveId::Psi {
        let t: Vec<NodeId> = s.iter().map(|p| p.node).collect();
        let mut zero = vec![false; n];
        for v in reach(instance, profile.live(0), &t) {
            zero[v as usize] = true;
        }
        let c = (0..n).filter(|&v| level[v] >= nu || (level[v] >= 1 && zero[v])).count();
        return Ok(c as u32);
    }
    let full = reach_profile(instance, profile, &base.with(s));
    let mut count = vec![0u16; n];
    for set in &full {
        for &v in set {
            count[v as usize] += 1;
        }
    }
    let rule = Rule::new(objective, nu);
    Ok((0..n).filter(|&v| rule.counts(level[v], count[v], false)).count() as u32)
}

/// An estimated objective value together with the sampling that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub samples_requested: u64,
    pub samples_used: u64,
    pub capped: bool,
    /// `deterministic`, `forward` or `grouped`.
    pub sampling: String,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
}

/// `approx(f, S, I, ν, ε, δ)`: mean of the integrand over `T` sampled worlds.
pub fn estimate(
    objective: ObjectiveId,
    s: &SolutionProfile,
    instance: &BalanceInstance,
    config: &EstimatorConfig,
) -> Result<Estimate> {
    estimate_with_base(objective, s, &instance.seeds(), instance, config)
}

/// [`estimate`] with an explicit base seed profile `R` in place of `I`.
pub fn estimate_with_base(
    objective: ObjectiveId,
    s: &SolutionProfile,
    base: &SeedProfile,
    instance: &BalanceInstance,
    config: &EstimatorConfig,
) -> Result<Estimate> {
    objective.check(instance)?;
    objective.check_pairs(instance, s)?;
    let (plan, info) = Plan::new(instance, config)?;
    let (totals, weight) =
        engine::sampled_totals(instance, Rule::new(objective, instance.nu()), base, &[], &[s.to_vec()], &plan);
    Ok(Estimate {
        value: totals[0] as f64 / weight as f64,
        samples_requested: info.requested,
        samples_used: info.used,
        capped: info.used < info.requested && info.mode != "deterministic",
        sampling: info.mode.to_string(),
        epsilon: config.epsilon,
        delta: config.delta,
        seed: config.master_seed,
    })
}

/// Result of evaluating a batch of candidate extensions on common samples.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchEstimate {
    /// `Σ_t n_t` per candidate; divide by `weight` for the estimate.
    pub totals: Vec<u128>,
    pub weight: u64,
    pub samples_requested: u64,
    pub samples_used: u64,
    pub sampling: &'static str,
}

impl BatchEstimate {
    pub fn value(&self, i: usize) -> f64 {
        self.totals[i] as f64 / self.weight as f64
    }
}

/// Estimates `f(current ∪ τ)` for every candidate `τ` using the same sampled worlds.
///
/// Sharing the samples makes candidate comparisons exact integer comparisons of totals.
pub fn estimate_batch(
    objective: ObjectiveId,
    base: &SeedProfile,
    current: &SolutionProfile,
    candidates: &[Vec<Pair>],
    instance: &BalanceInstance,
    config: &EstimatorConfig,
) -> Result<BatchEstimate> {
    objective.check(instance)?;
    objective.check_pairs(instance, current)?;
    for c in candidates {
        objective.check_pairs(instance, c)?;
    }
    let (plan, info) = Plan::new(instance, config)?;
    let (totals, weight) = engine::sampled_totals(
        instance,
        Rule::new(objective, instance.nu()),
        base,
        &current.to_vec(),
        candidates,
        &plan,
    );
    Ok(BatchEstimate {
        totals,
        weight,
        samples_requested: info.requested,
        samples_used: info.used,
        sampling: info.mode,
    })
}

/// Exact expectation by enumerating all worlds (at most `EXACT_SLOT_LIMIT` fractional slots).
pub fn exact_value(objective: ObjectiveId, s: &SolutionProfile, instance: &BalanceInstance) -> Result<f64> {
    exact_value_with(objective, s, &instance.seeds(), instance, EXACT_SLOT_LIMIT)
}

pub fn exact_value_with(
    objective: ObjectiveId,
    s: &SolutionProfile,
    base: &SeedProfile,
    instance: &BalanceInstance,
    slot_limit: usize,
) -> Result<f64> {
    Ok(exact_batch(objective, base, &SolutionProfile::new(), &[s.to_vec()], instance, slot_limit)?[0])
}

/// Exact values of `current ∪ τ` for each candidate; worlds outer, candidates inner.
pub fn exact_batch(
    objective: ObjectiveId,
    base: &SeedProfile,
    current: &SolutionProfile,
    candidates: &[Vec<Pair>],
    instance: &BalanceInstance,
    slot_limit: usize,
) -> Result<Vec<f64>> {
    objective.check(instance)?;
    objective.check_pairs(instance, current)?;
    for c in candidates {
        objective.check_pairs(instance, c)?;
    }
    engine::exact_totals(
        instance,
        Rule::new(objective, instance.nu()),
        base,
        &current.to_vec(),
        candidates,
        slot_limit,
    )
}

/// Exact probability that each node counts towards `objective` under solution `s`.
pub fn exact_node_values(objective: ObjectiveId, s: &SolutionProfile, instance: &BalanceInstance) -> Result<Vec<f64>> {
    objective.check(instance)?;
    objective.check_pairs(instance, s)?;
    engine::exact_nodes(
        instance,
        Rule::new(objective, instance.nu()),
        &instance.seeds(),
        &s.to_vec(),
        EXACT_SLOT_LIMIT,
    )
}
