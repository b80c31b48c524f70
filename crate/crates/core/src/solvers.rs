//! Greedy approximation algorithms.
//!
//! All solvers share one primitive: repeatedly add the candidate tuple (a set of
//! `size` pairs not yet chosen) that maximises the estimated objective of `S ∪ τ`.
//! Every candidate of an iteration is estimated on the same sampled worlds, so the
//! argmax compares exact integer totals; ties go to the lexicographically smallest tuple.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{BalanceInstance, EstimatorConfig, Pair, Sampling, SeedProfile, SolutionProfile};
use crate::objective::{estimate_batch, ObjectiveId};
use crate::reduction::combinations;
use crate::rng::derive_seed;

/// Default ceiling on candidate tuples evaluated per iteration.
pub const DEFAULT_TUPLE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub sample_cap: Option<u64>,
    pub sampling: Sampling,
    pub tuple_limit: u128,
}

impl SolverOptions {
    pub fn new(epsilon: f64, delta: f64, seed: u64) -> Self {
        SolverOptions {
            epsilon,
            delta,
            seed,
            sample_cap: None,
            sampling: Sampling::Auto,
            tuple_limit: DEFAULT_TUPLE_LIMIT,
        }
    }

    pub fn with_cap(mut self, cap: Option<u64>) -> Self {
        self.sample_cap = cap;
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_tuple_limit(mut self, limit: u128) -> Self {
        self.tuple_limit = limit;
        self
    }

    fn with_params(&self, epsilon: f64, delta: f64, seed: u64) -> Self {
        SolverOptions { epsilon, delta, seed, ..self.clone() }
    }

    fn estimator(&self, epsilon: f64, delta: f64) -> EstimatorConfig {
        EstimatorConfig::new(epsilon, delta, self.seed)
            .with_cap(self.sample_cap)
            .with_sampling(self.sampling)
    }

    fn check(&self) -> Result<()> {
        EstimatorConfig::new(self.epsilon, self.delta, self.seed).check()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub candidates_evaluated: u64,
    pub chosen: Vec<Pair>,
    pub estimated_value: f64,
    pub estimated_gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateValue {
    pub label: String,
    pub solution: SolutionProfile,
    pub estimated_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub algorithm: String,
    pub objective: ObjectiveId,
    pub chosen: SolutionProfile,
    /// Estimate of `objective` at `chosen`.
    pub estimated_value: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    /// Accuracy parameters handed to each estimator call.
    pub inner_epsilon: f64,
    pub inner_delta: f64,
    pub samples_requested: u64,
    pub samples_used: u64,
    pub sampling: String,
    pub trace: Vec<TraceStep>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub candidates: Vec<CandidateValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub stages: Vec<SolverReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn binomial_u128(n: u128, k: u128) -> u128 {
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

struct Run {
    chosen: SolutionProfile,
    value: f64,
    trace: Vec<TraceStep>,
    requested: u64,
    used: u64,
    sampling: String,
}

/// Tuple-greedy loop: while `|S| + size <= budget`, add the best `size`-tuple of unchosen pairs.
#[allow(clippy::too_many_arguments)]
fn tuple_greedy(
    instance: &BalanceInstance,
    objective: ObjectiveId,
    base: &SeedProfile,
    size: usize,
    budget: u32,
    config: &EstimatorConfig,
    tuple_limit: u128,
) -> Result<Run> {
    let domain = objective.domain(instance);
    let mut chosen = SolutionProfile::new();
    let mut trace = Vec::new();
    let mut value = None;
    let mut meta = (0, 0, String::new());
    while chosen.len() + size <= budget as usize {
        let free: Vec<Pair> = domain.iter().copied().filter(|p| !chosen.contains(p)).collect();
        if free.len() < size {
            break;
        }
        let count = binomial_u128(free.len() as u128, size as u128);
        if count > tuple_limit {
            return Err(Error::Limit { what: "candidate tuples per iteration", size: count, limit: tuple_limit });
        }
        // Index 0 is the empty extension, i.e. the current value on the same samples.
        let candidates: Vec<Vec<Pair>> = std::iter::once(Vec::new())
            .chain(combinations(free.len(), size).map(|c| c.into_iter().map(|i| free[i]).collect()))
            .collect();
        let batch = estimate_batch(objective, base, &chosen, &candidates, instance, config)?;
        meta = (batch.samples_requested, batch.samples_used, batch.sampling.to_string());
        let mut best = 1;
        for i in 2..candidates.len() {
            if batch.totals[i] > batch.totals[best] {
                best = i;
            }
        }
        let v = batch.value(best);
        trace.push(TraceStep {
            iteration: trace.len() + 1,
            candidates_evaluated: count as u64,
            chosen: candidates[best].clone(),
            estimated_value: v,
            estimated_gain: v - batch.value(0),
        });
        for &p in &candidates[best] {
            chosen.insert(p);
        }
        value = Some(v);
    }
    let value = match value {
        Some(v) => v,
        None => {
            let batch = estimate_batch(objective, base, &chosen, &[Vec::new()], instance, config)?;
            meta = (batch.samples_requested, batch.samples_used, batch.sampling.to_string());
            batch.value(0)
        }
    };
    Ok(Run { chosen, value, trace, requested: meta.0, used: meta.1, sampling: meta.2 })
}

#[allow(clippy::too_many_arguments)]
fn report(
    algorithm: &str,
    objective: ObjectiveId,
    opts: &SolverOptions,
    inner: (f64, f64),
    run: Run,
    warnings: Vec<String>,
) -> SolverReport {
    SolverReport {
        algorithm: algorithm.to_string(),
        objective,
        chosen: run.chosen,
        estimated_value: run.value,
        epsilon: opts.epsilon,
        delta: opts.delta,
        seed: opts.seed,
        inner_epsilon: inner.0,
        inner_delta: inner.1,
        samples_requested: run.requested,
        samples_used: run.used,
        sampling: run.sampling,
        trace: run.trace,
        candidates: Vec::new(),
        stages: Vec::new(),
        warnings,
    }
}

/// Standard greedy hill climbing on `objective` with base seeds `base`: adds `k` elements
/// of the objective's ground set, one per iteration.
///
/// Inner accuracy is `ε' = ε/(e·k)`, `δ' = δ/(k·|V̂|)`. The `(1 − 1/e − ε)` guarantee
/// applies to the monotone submodular objectives `Φ^{≥ν−1}`, `Ψ` and `Φ^{≥ℓ}_{ℓ+1}(R,·)`.
pub fn greedy(
    instance: &BalanceInstance,
    objective: ObjectiveId,
    base: &SeedProfile,
    k: u32,
    opts: &SolverOptions,
) -> Result<SolverReport> {
    opts.check()?;
    objective.check(instance)?;
    let kk = k.max(1) as f64;
    let eps = opts.epsilon / (E * kk);
    let delta = opts.delta / (kk * instance.pair_universe() as f64);
    let run = tuple_greedy(instance, objective, base, 1, k, &opts.estimator(eps, delta), opts.tuple_limit)?;
    Ok(report("greedy", objective, opts, (eps, delta), run, Vec::new()))
}

/// Adds the best `(ν − ℓ)`-tuple while `|S| ≤ k − (ν − ℓ)`, maximising `Φ^{≥ℓ}`.
pub fn greedy_tuple(instance: &BalanceInstance, l: u16, k: u32, opts: &SolverOptions) -> Result<SolverReport> {
    opts.check()?;
    let nu = instance.nu();
    if l < 1 || l >= nu {
        return Err(Error::parameter(format!("ℓ={l} outside [1, ν−1] for ν={nu}")));
    }
    let size = (nu - l) as u64;
    let universe = instance.pair_universe() as u64;
    let t = (k as u64).div_ceil(size) as f64 * binomial_f64(universe, size);
    let delta = opts.delta / t.max(1.0);
    let eps = opts.epsilon / (2.0 * E * binomial_f64(k as u64, size).max(1.0));
    let mut warnings = Vec::new();
    if (k as f64) < 2.0 * nu as f64 / opts.epsilon {
        warnings.push(format!("k={k} < 2ν/ε; the approximation guarantee does not apply"));
    }
    let objective = ObjectiveId::PhiGeq(l);
    let run = tuple_greedy(
        instance,
        objective,
        &instance.seeds(),
        size as usize,
        k,
        &opts.estimator(eps, delta),
        opts.tuple_limit,
    )?;
    Ok(report("tuple", objective, opts, (eps, delta), run, warnings))
}

/// For `ℓ = 1..ν−1`, greedily maximises `Φ^{≥ℓ}_{ℓ+1}(R^{[ℓ]}, ·)` with budget `⌊k/(ν−1)⌋`
/// and folds the result into the base seeds; returns the union of all rounds.
pub fn greedy_iter(instance: &BalanceInstance, k: u32, opts: &SolverOptions) -> Result<SolverReport> {
    opts.check()?;
    let nu = instance.nu();
    let eps = opts.epsilon / 2.0;
    let delta = opts.delta / nu as f64;
    let round_budget = k / (nu as u32 - 1);
    let inner = opts.with_params(eps, delta, opts.seed);
    let mut warnings = Vec::new();
    if (k as f64) < 2.0 * (nu - 1) as f64 / opts.epsilon {
        warnings.push(format!("k={k} < 2(ν−1)/ε; the approximation guarantee does not apply"));
    }
    let mut base = instance.seeds();
    let mut union = SolutionProfile::new();
    let mut stages = Vec::new();
    let mut trace = Vec::new();
    for l in 1..nu {
        let mut stage = greedy(instance, ObjectiveId::PhiBand(l, l + 1), &base, round_budget, &inner)?;
        stage.algorithm = format!("greedy[round {l}]");
        base = base.with(&stage.chosen);
        union = union.union(&stage.chosen);
        for step in &stage.trace {
            trace.push(TraceStep { iteration: trace.len() + 1, ..step.clone() });
        }
        stages.push(stage);
    }
    let last = stages.last().expect("ν ≥ 2 gives at least one round");
    let final_batch = estimate_batch(
        ObjectiveId::Phi,
        &instance.seeds(),
        &SolutionProfile::new(),
        &[union.to_vec()],
        instance,
        &opts.estimator(opts.epsilon, opts.delta),
    )?;
    Ok(SolverReport {
        algorithm: "iter".into(),
        objective: ObjectiveId::Phi,
        estimated_value: final_batch.value(0),
        chosen: union,
        epsilon: opts.epsilon,
        delta: opts.delta,
        seed: opts.seed,
        inner_epsilon: eps,
        inner_delta: delta,
        samples_requested: last.samples_requested,
        samples_used: last.samples_used,
        sampling: last.sampling.clone(),
        trace,
        candidates: Vec::new(),
        stages,
        warnings,
    })
}

/// Returns whichever of the labelled candidates has the largest estimated `Φ`; earlier
/// candidates win ties.
fn pick_best(
    algorithm: &str,
    instance: &BalanceInstance,
    opts: &SolverOptions,
    seed: u64,
    labelled: Vec<(String, SolutionProfile)>,
    stages: Vec<SolverReport>,
    warnings: Vec<String>,
) -> Result<SolverReport> {
    let config = opts.with_params(opts.epsilon, opts.delta, seed).estimator(opts.epsilon, opts.delta);
    let sets: Vec<Vec<Pair>> = labelled.iter().map(|(_, s)| s.to_vec()).collect();
    let batch = estimate_batch(ObjectiveId::Phi, &instance.seeds(), &SolutionProfile::new(), &sets, instance, &config)?;
    let mut best = 0;
    for i in 1..sets.len() {
        if batch.totals[i] > batch.totals[best] {
            best = i;
        }
    }
    let candidates: Vec<CandidateValue> = labelled
        .iter()
        .enumerate()
        .map(|(i, (label, s))| CandidateValue { label: label.clone(), solution: s.clone(), estimated_value: batch.value(i) })
        .collect();
    Ok(SolverReport {
        algorithm: algorithm.into(),
        objective: ObjectiveId::Phi,
        chosen: labelled[best].1.clone(),
        estimated_value: batch.value(best),
        epsilon: opts.epsilon,
        delta: opts.delta,
        seed: opts.seed,
        inner_epsilon: opts.epsilon,
        inner_delta: opts.delta,
        samples_requested: batch.samples_requested,
        samples_used: batch.samples_used,
        sampling: batch.sampling.into(),
        trace: Vec::new(),
        candidates,
        stages,
        warnings,
    })
}

/// Runs `GreedyTuple(ε, δ/2, 1)` and `GreedyIter(ε, δ/2)` and returns the best of `∅` and
/// the two solutions by estimated `Φ`.
pub fn solve_heterogeneous(instance: &BalanceInstance, opts: &SolverOptions) -> Result<SolverReport> {
    opts.check()?;
    let k = instance.k();
    let half = opts.delta / 2.0;
    let s1 = greedy_tuple(instance, 1, k, &opts.with_params(opts.epsilon, half, derive_seed(opts.seed, 1)))?;
    let s2 = greedy_iter(instance, k, &opts.with_params(opts.epsilon, half, derive_seed(opts.seed, 2)))?;
    let mut warnings = s1.warnings.clone();
    warnings.extend(s2.warnings.iter().cloned());
    warnings.dedup();
    let labelled = vec![
        ("empty".to_string(), SolutionProfile::new()),
        ("tuple".to_string(), s1.chosen.clone()),
        ("iter".to_string(), s2.chosen.clone()),
    ];
    pick_best("het", instance, opts, derive_seed(opts.seed, 3), labelled, vec![s1, s2], warnings)
}

/// Greedily maximises `Ψ` with budget `⌊k/ν⌋`, seeds every chosen node with campaigns
/// `1..=ν`, and returns the better of that and `∅` by estimated `Φ`.
pub fn solve_correlated(instance: &BalanceInstance, opts: &SolverOptions) -> Result<SolverReport> {
    opts.check()?;
    if !instance.is_correlated() {
        return Err(Error::Setting("the correlated solver requires a correlated instance".into()));
    }
    let nu = instance.nu();
    let k = instance.k();
    let mut warnings = Vec::new();
    if (k as f64) < 2.0 * nu as f64 / opts.epsilon {
        warnings.push(format!("k={k} < 2ν/ε; the approximation guarantee does not apply"));
    }
    let t = greedy(
        instance,
        ObjectiveId::Psi,
        &instance.seeds(),
        k / nu as u32,
        &opts.with_params(opts.epsilon / 2.0, opts.delta, derive_seed(opts.seed, 1)),
    )?;
    let expanded = expand_zero_pairs(&t.chosen, nu);
    let labelled = vec![("empty".to_string(), SolutionProfile::new()), ("expanded".to_string(), expanded)];
    pick_best("cor", instance, opts, derive_seed(opts.seed, 2), labelled, vec![t], warnings)
}

/// `{(v, j) : (v, 0) ∈ T, j ∈ [ν]}`.
pub fn expand_zero_pairs(t: &SolutionProfile, nu: u16) -> SolutionProfile {
    t.iter().flat_map(|p| (1..=nu).map(move |j| Pair::new(p.node, j))).collect()
}

/// Adds one isolated node seeded by campaigns `1..=ν`, raising every objective by exactly 1.
pub fn lower_bound_transform(instance: &BalanceInstance) -> BalanceInstance {
    let mut parts = instance.to_parts();
    let v = parts.n;
    parts.n += 1;
    for set in parts.seeds.iter_mut().take(parts.nu as usize) {
        set.push(v);
    }
    if let Some(names) = parts.names.as_mut() {
        names.push(format!("isolated_{v}"));
    }
    // The source instance was validated already; only the budget bounds may have been relaxed.
    BalanceInstance::new_relaxed_budget(parts).expect("adding an isolated seeded node preserves validity")
}

#[cfg(test)]
mod tests;
