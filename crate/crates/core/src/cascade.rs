//! Live-edge sampling and reachability.
//!
//! An outcome profile fixes, per campaign, which arcs are live. Each arc is live
//! independently with its campaign's probability; in the correlated setting a single draw
//! is shared by every campaign, including the fictitious campaign 0.

use crate::instance::{BalanceInstance, Campaign, NodeId, SeedProfile};
use crate::rng::RngStream;

/// Live arcs of one campaign in one world, indexed by arc id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiveEdgeSet {
    live: Vec<bool>,
}

impl LiveEdgeSet {
    pub fn new(arc_count: usize) -> Self {
        LiveEdgeSet { live: vec![false; arc_count] }
    }

    pub fn from_bits(live: Vec<bool>) -> Self {
        LiveEdgeSet { live }
    }

    #[inline]
    pub fn is_live(&self, arc: usize) -> bool {
        self.live[arc]
    }

    pub fn set(&mut self, arc: usize, live: bool) {
        self.live[arc] = live;
    }

    pub fn live_arcs(&self) -> impl Iterator<Item = usize> + '_ {
        self.live.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    pub fn live_count(&self) -> usize {
        self.live.iter().filter(|&&b| b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.live
    }
}

/// Draws the live arcs of `campaign` (1-based, or 0 for the shared correlated draw).
pub fn sample_outcome(instance: &BalanceInstance, campaign: Campaign, rng: &RngStream) -> LiveEdgeSet {
    let mut set = LiveEdgeSet::new(instance.arcs().len());
    fill_outcome(instance, campaign, rng, &mut set);
    set
}

fn fill_outcome(instance: &BalanceInstance, campaign: Campaign, rng: &RngStream, out: &mut LiveEdgeSet) {
    for (a, slot) in out.live.iter_mut().enumerate() {
        let p = instance.probability(a, campaign);
        *slot = if p <= 0.0 {
            false
        } else if p >= 1.0 {
            true
        } else {
            rng.uniform_at(a as u64) < p
        };
    }
}

/// One possible world: a live-edge set per campaign.
///
/// In the correlated setting one set is stored and returned for every campaign `0..=mu`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeProfile {
    rows: Vec<LiveEdgeSet>,
    correlated: bool,
}

impl OutcomeProfile {
    pub fn empty(instance: &BalanceInstance) -> Self {
        let rows = if instance.is_correlated() { 1 } else { instance.mu() as usize };
        OutcomeProfile {
            rows: vec![LiveEdgeSet::new(instance.arcs().len()); rows],
            correlated: instance.is_correlated(),
        }
    }

    pub fn is_correlated(&self) -> bool {
        self.correlated
    }

    /// Live arcs of campaign `c`; `None` for campaign 0 of a heterogeneous profile.
    #[inline]
    pub fn get(&self, c: Campaign) -> Option<&LiveEdgeSet> {
        if self.correlated {
            Some(&self.rows[0])
        } else if c == 0 {
            None
        } else {
            self.rows.get(c as usize - 1)
        }
    }

    #[inline]
    pub fn live(&self, c: Campaign) -> &LiveEdgeSet {
        self.get(c).expect("campaign 0 exists only in correlated profiles")
    }

    fn row_mut(&mut self, c: Campaign) -> &mut LiveEdgeSet {
        if self.correlated {
            &mut self.rows[0]
        } else {
            &mut self.rows[c as usize - 1]
        }
    }

    /// Overwrites this profile with sample `sample_index` of the stream family `master_seed`.
    pub fn resample(&mut self, instance: &BalanceInstance, master_seed: u64, sample_index: u64) {
        if self.correlated {
            let rng = RngStream::new(master_seed, sample_index, 0);
            fill_outcome(instance, 0, &rng, &mut self.rows[0]);
        } else {
            for (i, row) in self.rows.iter_mut().enumerate() {
                let c = i as Campaign + 1;
                let rng = RngStream::new(master_seed, sample_index, c);
                fill_outcome(instance, c, &rng, row);
            }
        }
    }
}

/// Samples outcome profile number `sample_index` of the family keyed by `master_seed`.
pub fn sample_profile(instance: &BalanceInstance, master_seed: u64, sample_index: u64) -> OutcomeProfile {
    let mut x = OutcomeProfile::empty(instance);
    x.resample(instance, master_seed, sample_index);
    x
}

/// Reusable breadth-first search over live arcs.
#[derive(Debug, Clone)]
pub struct Reacher {
    stamp: Vec<u32>,
    generation: u32,
    queue: Vec<NodeId>,
}

impl Reacher {
    pub fn new(n: usize) -> Self {
        Reacher { stamp: vec![0; n], generation: 0, queue: Vec::new() }
    }

    /// Nodes reachable from `seeds` along live arcs, seeds included, in ascending order.
    pub fn reach(&mut self, instance: &BalanceInstance, live: &LiveEdgeSet, seeds: &[NodeId]) -> Vec<NodeId> {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        let g = self.generation;
        self.queue.clear();
        for &s in seeds {
            if self.stamp[s as usize] != g {
                self.stamp[s as usize] = g;
                self.queue.push(s);
            }
        }
        let mut head = 0;
        while head < self.queue.len() {
            let u = self.queue[head];
            head += 1;
            for &a in instance.out_arcs(u) {
                if live.is_live(a as usize) {
                    let v = instance.arcs()[a as usize].v;
                    if self.stamp[v as usize] != g {
                        self.stamp[v as usize] = g;
                        self.queue.push(v);
                    }
                }
            }
        }
        let mut out = self.queue.clone();
        out.sort_unstable();
        out
    }
}

/// `rho_X(A)`: nodes reachable from `seeds` in the live-edge graph `live`.
pub fn reach(instance: &BalanceInstance, live: &LiveEdgeSet, seeds: &[NodeId]) -> Vec<NodeId> {
    Reacher::new(instance.node_count()).reach(instance, live, seeds)
}

/// Element-wise reach: entry `i` is the set reached by campaign `i + 1`.
pub fn reach_profile(instance: &BalanceInstance, profile: &OutcomeProfile, sets: &SeedProfile) -> Vec<Vec<NodeId>> {
    let mut r = Reacher::new(instance.node_count());
    (1..=sets.campaigns() as Campaign)
        .map(|c| r.reach(instance, profile.live(c), sets.set(c)))
        .collect()
}

/// The finite world space of an instance: one binary slot per fractional probability.
///
/// Heterogeneous slots are `(arc, campaign)` pairs in arc-major order; correlated slots are
/// arcs (campaign recorded as 0, shared by all campaigns).
#[derive(Debug, Clone)]
pub struct WorldSpace {
    slots: Vec<(u32, Campaign, f64)>,
    base: OutcomeProfile,
}

impl WorldSpace {
    pub fn new(instance: &BalanceInstance) -> Self {
        let mut base = OutcomeProfile::empty(instance);
        let mut slots = Vec::new();
        let campaigns: Vec<Campaign> = if instance.is_correlated() {
            vec![0]
        } else {
            (1..=instance.mu()).collect()
        };
        for a in 0..instance.arcs().len() {
            for &c in &campaigns {
                let p = instance.probability(a, c);
                if p >= 1.0 {
                    base.row_mut(c).set(a, true);
                } else if p > 0.0 {
                    slots.push((a as u32, c, p));
                }
            }
        }
        WorldSpace { slots, base }
    }

    /// Number of fractional slots.
    pub fn slots(&self) -> usize {
        self.slots.len()
    }

    /// Number of worlds, `2^slots`, saturating.
    pub fn world_count(&self) -> u128 {
        if self.slots.len() >= 127 {
            u128::MAX
        } else {
            1u128 << self.slots.len()
        }
    }

    /// Probability of world `mask` (bit `j` set means slot `j` is live).
    pub fn probability(&self, mask: u64) -> f64 {
        self.slots
            .iter()
            .enumerate()
            .map(|(j, &(_, _, p))| if mask >> j & 1 == 1 { p } else { 1.0 - p })
            .product()
    }

    /// Writes world `mask` into `out`, which must come from the same instance.
    pub fn fill(&self, mask: u64, out: &mut OutcomeProfile) {
        out.clone_from(&self.base);
        for (j, &(a, c, _)) in self.slots.iter().enumerate() {
            if mask >> j & 1 == 1 {
                out.row_mut(c.max(1)).set(a as usize, true);
            }
        }
    }

    pub fn world(&self, mask: u64) -> OutcomeProfile {
        let mut out = self.base.clone();
        self.fill(mask, &mut out);
        out
    }
}
