//! Per-world evaluation shared by the estimator, the exact enumerator and the solvers.
//!
//! A [`WorldEval`] loads one outcome profile together with a base seed profile `R` and a
//! current solution `S`, after which the objective value of `S ∪ τ` for any candidate
//! `τ` is obtained from a small incremental search that only visits nodes newly reached
//! by `τ`.

use rand::distr::Distribution;
use rand_distr::Binomial;
use rayon::prelude::*;

use super::ObjectiveId;
use crate::cascade::{OutcomeProfile, WorldSpace};
use crate::error::{Error, Result};
use crate::instance::{BalanceInstance, Campaign, EstimatorConfig, NodeId, Pair, Sampling, SeedProfile};
use crate::rng::RngStream;

/// Decides whether a node counts, from its base level, its campaign count under `R ∪ S`,
/// and whether campaign 0 reaches it.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Rule {
    objective: ObjectiveId,
    nu: u16,
}

impl Rule {
    pub(crate) fn new(objective: ObjectiveId, nu: u16) -> Self {
        Rule { objective, nu }
    }

    #[inline]
    pub(crate) fn counts(&self, level: u16, count: u16, zero: bool) -> bool {
        let balanced = count == 0 || count >= self.nu;
        match self.objective {
            ObjectiveId::Phi => balanced,
            ObjectiveId::Level(l) => level == l && balanced,
            ObjectiveId::PhiGeq(l) => level >= l && balanced,
            ObjectiveId::PhiBand(l, beta) => level >= l && count >= beta,
            ObjectiveId::Psi => level >= self.nu || (level >= 1 && zero),
        }
    }
}

pub(crate) struct WorldEval<'a> {
    instance: &'a BalanceInstance,
    rule: Rule,
    n: usize,
    level: Vec<u16>,
    count: Vec<u16>,
    // reached[c * n + v]: campaign c reaches v from R ∪ S (c = 0 is the fictitious campaign).
    reached: Vec<bool>,
    value: u32,
    mark: Vec<u32>,
    generation: u32,
    extra: Vec<u16>,
    zero_new: Vec<bool>,
    touched: Vec<NodeId>,
    queue: Vec<NodeId>,
}

impl<'a> WorldEval<'a> {
    pub(crate) fn new(instance: &'a BalanceInstance, rule: Rule) -> Self {
        let n = instance.node_count();
        let slots = (instance.mu() as usize + 1) * n;
        WorldEval {
            instance,
            rule,
            n,
            level: vec![0; n],
            count: vec![0; n],
            reached: vec![false; slots],
            value: 0,
            mark: vec![0; slots],
            generation: 0,
            extra: vec![0; n],
            zero_new: vec![false; n],
            touched: Vec::new(),
            queue: Vec::new(),
        }
    }

    /// Value of the loaded `S`.
    #[cfg(test)]
    pub(crate) fn value(&self) -> u32 {
        self.value
    }

    /// Per-node indicator of the loaded state.
    pub(crate) fn node_counts(&self, v: usize) -> bool {
        self.rule.counts(self.level[v], self.count[v], self.reached[v])
    }

    /// Loads world `x` with base seeds `base` and current solution `current`.
    pub(crate) fn load(&mut self, x: &OutcomeProfile, base: &SeedProfile, current: &[Pair]) {
        let n = self.n;
        self.level.fill(0);
        self.count.fill(0);
        self.reached.fill(false);
        for c in 1..=self.instance.mu() {
            let live = x.live(c);
            self.flood(c, base.set(c).iter().copied(), live);
            for v in 0..n {
                if self.reached[c as usize * n + v] {
                    self.level[v] += 1;
                }
            }
            self.flood(c, current.iter().filter(|p| p.campaign == c).map(|p| p.node), live);
            for v in 0..n {
                if self.reached[c as usize * n + v] {
                    self.count[v] += 1;
                }
            }
        }
        if current.iter().any(|p| p.campaign == 0) {
            let live = x.live(0);
            self.flood(0, current.iter().filter(|p| p.campaign == 0).map(|p| p.node), live);
        }
        self.value = (0..n).filter(|&v| self.node_counts(v)).count() as u32;
    }

    fn flood(&mut self, c: Campaign, seeds: impl Iterator<Item = NodeId>, live: &crate::cascade::LiveEdgeSet) {
        let off = c as usize * self.n;
        self.queue.clear();
        for s in seeds {
            if !self.reached[off + s as usize] {
                self.reached[off + s as usize] = true;
                self.queue.push(s);
            }
        }
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            for &a in self.instance.out_arcs(u) {
                if live.is_live(a as usize) {
                    let w = self.instance.arcs()[a as usize].v;
                    if !self.reached[off + w as usize] {
                        self.reached[off + w as usize] = true;
                        self.queue.push(w);
                    }
                }
            }
        }
    }

    /// Value of `S ∪ tuple` in the loaded world; the loaded state is left unchanged.
    pub(crate) fn with(&mut self, x: &OutcomeProfile, tuple: &[Pair]) -> u32 {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.mark.fill(0);
            self.generation = 1;
        }
        let g = self.generation;
        let n = self.n;
        self.touched.clear();
        for p in tuple {
            let c = p.campaign;
            let off = c as usize * n;
            let live = x.live(c);
            self.queue.clear();
            let s = p.node as usize;
            if self.reached[off + s] || self.mark[off + s] == g {
                continue;
            }
            self.mark[off + s] = g;
            self.queue.push(p.node);
            let mut head = 0;
            while head < self.queue.len() {
                let u = self.queue[head];
                head += 1;
                let ui = u as usize;
                if self.extra[ui] == 0 && !self.zero_new[ui] {
                    self.touched.push(u);
                }
                if c == 0 {
                    self.zero_new[ui] = true;
                } else {
                    self.extra[ui] += 1;
                }
                for &a in self.instance.out_arcs(u) {
                    if live.is_live(a as usize) {
                        let w = self.instance.arcs()[a as usize].v as usize;
                        if !self.reached[off + w] && self.mark[off + w] != g {
                            self.mark[off + w] = g;
                            self.queue.push(w as NodeId);
                        }
                    }
                }
            }
        }
        let mut value = self.value as i64;
        for &u in &self.touched {
            let v = u as usize;
            let before = self.rule.counts(self.level[v], self.count[v], self.reached[v]);
            let after = self.rule.counts(
                self.level[v],
                self.count[v] + self.extra[v],
                self.reached[v] || self.zero_new[v],
            );
            value += after as i64 - before as i64;
            self.extra[v] = 0;
            self.zero_new[v] = false;
        }
        value as u32
    }
}

/// How the `T` samples of one estimate are realised.
#[derive(Debug, Clone)]
pub(crate) enum Plan {
    /// Every probability is 0 or 1: the single world is evaluated once.
    Deterministic,
    /// Sample `t` is the outcome profile keyed by `(seed, t)`, for `t < samples`.
    Forward { samples: u64, seed: u64 },
    /// Multinomial histogram of the `samples` draws over the enumerated world space.
    Grouped { space: WorldSpace, counts: Vec<(u64, u64)> },
}

/// Sampling metadata reported alongside an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct PlanInfo {
    pub requested: u64,
    pub used: u64,
    pub mode: &'static str,
}

/// Largest world space the grouped sampler will enumerate.
pub(crate) const GROUPED_MAX_SLOTS: usize = 16;

impl Plan {
    pub(crate) fn new(instance: &BalanceInstance, config: &EstimatorConfig) -> Result<(Plan, PlanInfo)> {
        config.check()?;
        let requested = config.requested_samples(instance.node_count());
        if instance.is_deterministic() {
            return Ok((Plan::Deterministic, PlanInfo { requested, used: 1, mode: "deterministic" }));
        }
        let used = config.used_samples(instance.node_count());
        let space = WorldSpace::new(instance);
        let small = space.slots() <= GROUPED_MAX_SLOTS;
        let grouped = match config.sampling {
            Sampling::Forward => false,
            Sampling::Grouped => {
                if !small {
                    return Err(Error::Limit {
                        what: "grouped sampling world space (fractional slots)",
                        size: space.slots() as u128,
                        limit: GROUPED_MAX_SLOTS as u128,
                    });
                }
                true
            }
            Sampling::Auto => small && space.world_count() < used as u128,
        };
        if grouped {
            let counts = multinomial(&space, used, config.master_seed);
            Ok((Plan::Grouped { space, counts }, PlanInfo { requested, used, mode: "grouped" }))
        } else {
            Ok((
                Plan::Forward { samples: used, seed: config.master_seed },
                PlanInfo { requested, used, mode: "forward" },
            ))
        }
    }
}

/// Draws the counts of `total` i.i.d. worlds by sequential conditional binomials.
fn multinomial(space: &WorldSpace, total: u64, seed: u64) -> Vec<(u64, u64)> {
    let worlds = space.world_count() as usize;
    let probs: Vec<f64> = (0..worlds as u64).map(|m| space.probability(m)).collect();
    let mut suffix = vec![0.0; worlds + 1];
    for i in (0..worlds).rev() {
        suffix[i] = suffix[i + 1] + probs[i];
    }
    let mut rng = RngStream::new(seed, u64::MAX, u16::MAX);
    let mut left = total;
    let mut out = Vec::new();
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        let c = if i + 1 == worlds || suffix[i] <= 0.0 {
            left
        } else {
            let q = (p / suffix[i]).clamp(0.0, 1.0);
            Binomial::new(left, q).expect("valid binomial").sample(&mut rng)
        };
        if c > 0 {
            out.push((i as u64, c));
            left -= c;
        }
    }
    out
}

/// Weighted totals `Σ_t value_t(current ∪ τ)` for every candidate `τ`, plus the total weight.
pub(crate) fn sampled_totals(
    instance: &BalanceInstance,
    rule: Rule,
    base: &SeedProfile,
    current: &[Pair],
    candidates: &[Vec<Pair>],
    plan: &Plan,
) -> (Vec<u128>, u64) {
    let k = candidates.len();
    let eval_into = |ev: &mut WorldEval, x: &OutcomeProfile, w: u64, acc: &mut Vec<u128>| {
        ev.load(x, base, current);
        for (slot, cand) in acc.iter_mut().zip(candidates) {
            *slot += ev.with(x, cand) as u128 * w as u128;
        }
    };
    let add = |mut a: Vec<u128>, b: Vec<u128>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };
    match plan {
        Plan::Deterministic => {
            let x = WorldSpace::new(instance).world(0);
            let mut ev = WorldEval::new(instance, rule);
            let mut acc = vec![0u128; k];
            eval_into(&mut ev, &x, 1, &mut acc);
            (acc, 1)
        }
        Plan::Forward { samples, seed } => {
            let acc = (0..*samples)
                .into_par_iter()
                .fold(
                    || (WorldEval::new(instance, rule), OutcomeProfile::empty(instance), vec![0u128; k]),
                    |(mut ev, mut x, mut acc), t| {
                        x.resample(instance, *seed, t);
                        eval_into(&mut ev, &x, 1, &mut acc);
                        (ev, x, acc)
                    },
                )
                .map(|(_, _, acc)| acc)
                .reduce(|| vec![0u128; k], add);
            (acc, *samples)
        }
        Plan::Grouped { space, counts } => {
            let acc = counts
                .par_iter()
                .fold(
                    || (WorldEval::new(instance, rule), OutcomeProfile::empty(instance), vec![0u128; k]),
                    |(mut ev, mut x, mut acc), &(mask, w)| {
                        space.fill(mask, &mut x);
                        eval_into(&mut ev, &x, w, &mut acc);
                        (ev, x, acc)
                    },
                )
                .map(|(_, _, acc)| acc)
                .reduce(|| vec![0u128; k], add);
            (acc, counts.iter().map(|&(_, c)| c).sum())
        }
    }
}

/// Exact expectations of `current ∪ τ` for every candidate, enumerating worlds in order.
pub(crate) fn exact_totals(
    instance: &BalanceInstance,
    rule: Rule,
    base: &SeedProfile,
    current: &[Pair],
    candidates: &[Vec<Pair>],
    slot_limit: usize,
) -> Result<Vec<f64>> {
    let space = checked_space(instance, slot_limit)?;
    let mut ev = WorldEval::new(instance, rule);
    let mut x = OutcomeProfile::empty(instance);
    let mut acc = vec![0.0; candidates.len()];
    for mask in 0..space.world_count() as u64 {
        let p = space.probability(mask);
        if p == 0.0 {
            continue;
        }
        space.fill(mask, &mut x);
        ev.load(&x, base, current);
        for (slot, cand) in acc.iter_mut().zip(candidates) {
            *slot += p * ev.with(&x, cand) as f64;
        }
    }
    Ok(acc)
}

/// Exact per-node probability of counting towards the objective, for `S = current`.
pub(crate) fn exact_nodes(
    instance: &BalanceInstance,
    rule: Rule,
    base: &SeedProfile,
    current: &[Pair],
    slot_limit: usize,
) -> Result<Vec<f64>> {
    let space = checked_space(instance, slot_limit)?;
    let mut ev = WorldEval::new(instance, rule);
    let mut x = OutcomeProfile::empty(instance);
    let mut acc = vec![0.0; instance.node_count()];
    for mask in 0..space.world_count() as u64 {
        let p = space.probability(mask);
        if p == 0.0 {
            continue;
        }
        space.fill(mask, &mut x);
        ev.load(&x, base, current);
        for (v, slot) in acc.iter_mut().enumerate() {
            if ev.node_counts(v) {
                *slot += p;
            }
        }
    }
    Ok(acc)
}

pub(crate) fn checked_space(instance: &BalanceInstance, slot_limit: usize) -> Result<WorldSpace> {
    let space = WorldSpace::new(instance);
    if space.slots() > slot_limit.min(62) {
        return Err(Error::Limit {
            what: "exact enumeration (fractional slots)",
            size: space.slots() as u128,
            limit: slot_limit.min(62) as u128,
        });
    }
    Ok(space)
}
