//! Problem instances, solution profiles and estimator configuration.
//!
//! Campaigns are numbered `1..=mu`; campaign `0` is the fictitious campaign used by the
//! correlated surrogate objective and only ever appears in pairs drawn from `V x {0}`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violations};

pub type NodeId = u32;
pub type Campaign = u16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "het")]
    Heterogeneous,
    #[serde(rename = "cor")]
    Correlated,
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::Heterogeneous => "het",
            Setting::Correlated => "cor",
        })
    }
}

/// A directed arc with one activation probability per campaign.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub u: NodeId,
    pub v: NodeId,
    pub p: Vec<f64>,
}

/// On-disk layout of an instance. Field names are part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct InstanceFile {
    n: u32,
    mu: u16,
    nu: u16,
    k: u32,
    setting: Setting,
    seeds: Vec<Vec<NodeId>>,
    arcs: Vec<ArcSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    names: Option<Vec<String>>,
}

/// One invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    TooFewCampaigns { mu: u16 },
    ThresholdOutOfRange { nu: u16, mu: u16 },
    TooFewNodes { n: u32, mu: u16 },
    BudgetBelowNu { k: u32, nu: u16 },
    BudgetExceedsLimit { k: u32, limit: u64 },
    SeedProfileLength { expected: u16, found: usize },
    SeedOutOfRange { campaign: Campaign, node: NodeId },
    ArcEndpointOutOfRange { arc: usize, node: NodeId },
    ProbabilityCount { arc: usize, expected: u16, found: usize },
    ProbabilityOutOfRange { arc: usize, campaign: Campaign, value: f64 },
    CorrelatedProbabilitiesDiffer { arc: usize },
    NamesLength { expected: u32, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooFewCampaigns { mu } => write!(f, "mu: need at least 2 campaigns, got {mu}"),
            Violation::ThresholdOutOfRange { nu, mu } => {
                write!(f, "nu: threshold {nu} outside [2, mu={mu}]")
            }
            Violation::TooFewNodes { n, mu } => write!(f, "n: {n} nodes fewer than mu={mu}"),
            Violation::BudgetBelowNu { k, nu } => write!(f, "k: budget below ν ({k} < {nu})"),
            Violation::BudgetExceedsLimit { k, limit } => {
                write!(f, "k: budget exceeds ν|V| ({k} > {limit})")
            }
            Violation::SeedProfileLength { expected, found } => {
                write!(f, "seeds: expected {expected} seed sets, found {found}")
            }
            Violation::SeedOutOfRange { campaign, node } => {
                write!(f, "seeds: node {node} of campaign {campaign} out of range")
            }
            Violation::ArcEndpointOutOfRange { arc, node } => {
                write!(f, "arcs[{arc}]: endpoint {node} out of range")
            }
            Violation::ProbabilityCount { arc, expected, found } => {
                write!(f, "arcs[{arc}].p: expected {expected} probabilities, found {found}")
            }
            Violation::ProbabilityOutOfRange { arc, campaign, value } => write!(
                f,
                "arcs[{arc}].p[{}]: probability out of range ({value})",
                campaign - 1
            ),
            Violation::CorrelatedProbabilitiesDiffer { arc } => {
                write!(f, "arcs[{arc}].p: correlated probabilities differ")
            }
            Violation::NamesLength { expected, found } => {
                write!(f, "names: expected {expected} names, found {found}")
            }
        }
    }
}

/// A validated, immutable problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct BalanceInstance {
    n: u32,
    mu: u16,
    nu: u16,
    k: u32,
    setting: Setting,
    seeds: Vec<Vec<NodeId>>,
    arcs: Vec<ArcSpec>,
    names: Option<Vec<String>>,
    // CSR adjacency: arc ids leaving node u are out_arcs[out_start[u]..out_start[u + 1]].
    out_start: Vec<u32>,
    out_arcs: Vec<u32>,
}

/// Parameters needed to build an instance in code.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceParts {
    pub n: u32,
    pub mu: u16,
    pub nu: u16,
    pub k: u32,
    pub setting: Setting,
    pub seeds: Vec<Vec<NodeId>>,
    pub arcs: Vec<ArcSpec>,
    pub names: Option<Vec<String>>,
}

impl BalanceInstance {
    /// Validates `parts` and builds the instance.
    pub fn new(parts: InstanceParts) -> Result<Self> {
        let violations = check(&parts);
        if !violations.is_empty() {
            return Err(Error::Invalid(Violations(violations)));
        }
        Ok(Self::assemble(parts))
    }

    /// Builds an instance that may violate the budget bounds `nu <= k <= nu * n`.
    ///
    /// Every structural invariant (ranges, probability vectors, seeds) is still enforced.
    /// Used for reduction outputs whose budget is inherited from the source problem.
    pub fn new_relaxed_budget(parts: InstanceParts) -> Result<Self> {
        let violations: Vec<_> = check(&parts)
            .into_iter()
            .filter(|v| {
                !matches!(
                    v,
                    Violation::BudgetBelowNu { .. } | Violation::BudgetExceedsLimit { .. }
                )
            })
            .collect();
        if !violations.is_empty() {
            return Err(Error::Invalid(Violations(violations)));
        }
        Ok(Self::assemble(parts))
    }

    fn assemble(mut parts: InstanceParts) -> Self {
        for s in &mut parts.seeds {
            s.sort_unstable();
            s.dedup();
        }
        let n = parts.n as usize;
        let mut degree = vec![0u32; n + 1];
        for a in &parts.arcs {
            degree[a.u as usize + 1] += 1;
        }
        for i in 0..n {
            degree[i + 1] += degree[i];
        }
        let out_start = degree;
        let mut fill = out_start.clone();
        let mut out_arcs = vec![0u32; parts.arcs.len()];
        for (id, a) in parts.arcs.iter().enumerate() {
            let slot = &mut fill[a.u as usize];
            out_arcs[*slot as usize] = id as u32;
            *slot += 1;
        }
        BalanceInstance {
            n: parts.n,
            mu: parts.mu,
            nu: parts.nu,
            k: parts.k,
            setting: parts.setting,
            seeds: parts.seeds,
            arcs: parts.arcs,
            names: parts.names,
            out_start,
            out_arcs,
        }
    }

    pub fn into_parts(self) -> InstanceParts {
        InstanceParts {
            n: self.n,
            mu: self.mu,
            nu: self.nu,
            k: self.k,
            setting: self.setting,
            seeds: self.seeds,
            arcs: self.arcs,
            names: self.names,
        }
    }

    pub fn to_parts(&self) -> InstanceParts {
        self.clone().into_parts()
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn node_count(&self) -> usize {
        self.n as usize
    }
    pub fn mu(&self) -> u16 {
        self.mu
    }
    pub fn nu(&self) -> u16 {
        self.nu
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn setting(&self) -> Setting {
        self.setting
    }
    pub fn is_correlated(&self) -> bool {
        self.setting == Setting::Correlated
    }
    pub fn arcs(&self) -> &[ArcSpec] {
        &self.arcs
    }
    pub fn names(&self) -> Option<&[String]> {
        self.names.as_deref()
    }

    /// Seed set of campaign `c` (1-based).
    pub fn seed_set(&self, c: Campaign) -> &[NodeId] {
        &self.seeds[c as usize - 1]
    }

    /// The initial seed profile `I`.
    pub fn seeds(&self) -> SeedProfile {
        SeedProfile(self.seeds.clone())
    }

    /// Ids of arcs leaving `u`.
    pub fn out_arcs(&self, u: NodeId) -> &[u32] {
        let lo = self.out_start[u as usize] as usize;
        let hi = self.out_start[u as usize + 1] as usize;
        &self.out_arcs[lo..hi]
    }

    /// Probability of arc `arc` for campaign `c`; campaign 0 shares campaign 1's value.
    pub fn probability(&self, arc: usize, c: Campaign) -> f64 {
        self.arcs[arc].p[c.max(1) as usize - 1]
    }

    /// True when every probability is 0 or 1, so there is exactly one possible world.
    pub fn is_deterministic(&self) -> bool {
        self.arcs
            .iter()
            .all(|a| a.p.iter().all(|&p| p == 0.0 || p == 1.0))
    }

    /// `|V x [mu]|`.
    pub fn pair_universe(&self) -> usize {
        self.n as usize * self.mu as usize
    }

    /// All pairs `(v, i)`, `i in 1..=mu`, in lexicographic order.
    pub fn pairs(&self) -> Vec<Pair> {
        (0..self.n)
            .flat_map(|v| (1..=self.mu).map(move |c| Pair::new(v, c)))
            .collect()
    }

    /// All pairs `(v, 0)` in node order.
    pub fn zero_pairs(&self) -> Vec<Pair> {
        (0..self.n).map(|v| Pair::new(v, 0)).collect()
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        load_instance(bytes)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("instance serializes")
    }

    fn to_file(&self) -> InstanceFile {
        InstanceFile {
            n: self.n,
            mu: self.mu,
            nu: self.nu,
            k: self.k,
            setting: self.setting,
            seeds: self.seeds.clone(),
            arcs: self.arcs.clone(),
            names: self.names.clone(),
        }
    }
}

impl Serialize for BalanceInstance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(serializer)
    }
}

/// Parses and validates a JSON instance.
pub fn load_instance(bytes: &[u8]) -> Result<BalanceInstance> {
    let file: InstanceFile = serde_json::from_slice(bytes)?;
    BalanceInstance::new(InstanceParts {
        n: file.n,
        mu: file.mu,
        nu: file.nu,
        k: file.k,
        setting: file.setting,
        seeds: file.seeds,
        arcs: file.arcs,
        names: file.names,
    })
}

/// Checks every instance invariant and reports all violations found.
pub fn validate(parts: &InstanceParts) -> std::result::Result<(), Violations> {
    let v = check(parts);
    if v.is_empty() {
        Ok(())
    } else {
        Err(Violations(v))
    }
}

fn check(p: &InstanceParts) -> Vec<Violation> {
    let mut out = Vec::new();
    if p.mu < 2 {
        out.push(Violation::TooFewCampaigns { mu: p.mu });
    }
    if p.nu < 2 || p.nu > p.mu {
        out.push(Violation::ThresholdOutOfRange { nu: p.nu, mu: p.mu });
    }
    if p.n < p.mu as u32 {
        out.push(Violation::TooFewNodes { n: p.n, mu: p.mu });
    }
    if p.k < p.nu as u32 {
        out.push(Violation::BudgetBelowNu { k: p.k, nu: p.nu });
    }
    let limit = p.nu as u64 * p.n as u64;
    if p.k as u64 > limit {
        out.push(Violation::BudgetExceedsLimit { k: p.k, limit });
    }
    if p.seeds.len() != p.mu as usize {
        out.push(Violation::SeedProfileLength {
            expected: p.mu,
            found: p.seeds.len(),
        });
    }
    for (i, set) in p.seeds.iter().enumerate() {
        for &node in set {
            if node >= p.n {
                out.push(Violation::SeedOutOfRange {
                    campaign: i as Campaign + 1,
                    node,
                });
            }
        }
    }
    for (id, arc) in p.arcs.iter().enumerate() {
        for node in [arc.u, arc.v] {
            if node >= p.n {
                out.push(Violation::ArcEndpointOutOfRange { arc: id, node });
            }
        }
        if arc.p.len() != p.mu as usize {
            out.push(Violation::ProbabilityCount {
                arc: id,
                expected: p.mu,
                found: arc.p.len(),
            });
        }
        let mut in_range = true;
        for (c, &prob) in arc.p.iter().enumerate() {
            // NaN fails this test as well.
            if !(0.0..=1.0).contains(&prob) {
                in_range = false;
                out.push(Violation::ProbabilityOutOfRange {
                    arc: id,
                    campaign: c as Campaign + 1,
                    value: prob,
                });
            }
        }
        if in_range
            && p.setting == Setting::Correlated
            && arc.p.windows(2).any(|w| w[0] != w[1])
        {
            out.push(Violation::CorrelatedProbabilitiesDiffer { arc: id });
        }
    }
    if let Some(names) = &p.names {
        if names.len() != p.n as usize {
            out.push(Violation::NamesLength {
                expected: p.n,
                found: names.len(),
            });
        }
    }
    out
}

/// A candidate seed `(node, campaign)`; ordering is lexicographic by node, then campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pair {
    pub node: NodeId,
    pub campaign: Campaign,
}

impl Pair {
    pub const fn new(node: NodeId, campaign: Campaign) -> Self {
        Pair { node, campaign }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.node, self.campaign)
    }
}

impl std::str::FromStr for Pair {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (v, c) = s
            .split_once(':')
            .ok_or_else(|| Error::parameter(format!("pair `{s}` is not of the form node:campaign")))?;
        let node = v
            .trim()
            .parse()
            .map_err(|_| Error::parameter(format!("bad node id in pair `{s}`")))?;
        let campaign = c
            .trim()
            .parse()
            .map_err(|_| Error::parameter(format!("bad campaign in pair `{s}`")))?;
        Ok(Pair { node, campaign })
    }
}

/// A set of additional seeds `S`, viewed as pairs in `V x [mu]` (or `V x {0}`).
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolutionProfile(BTreeSet<Pair>);

impl SolutionProfile {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, p: Pair) -> bool {
        self.0.insert(p)
    }

    pub fn contains(&self, p: &Pair) -> bool {
        self.0.contains(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Pair> + '_ {
        self.0.iter()
    }

    /// Pairs in lexicographic order.
    pub fn to_vec(&self) -> Vec<Pair> {
        self.0.iter().copied().collect()
    }

    pub fn union(&self, other: &SolutionProfile) -> SolutionProfile {
        SolutionProfile(self.0.union(&other.0).copied().collect())
    }

    /// Checks budget and campaign range against `instance`.
    pub fn check(&self, instance: &BalanceInstance, budget: u32) -> Result<()> {
        if self.len() > budget as usize {
            return Err(Error::parameter(format!(
                "solution has {} pairs, budget is {budget}",
                self.len()
            )));
        }
        for p in self.iter() {
            if p.node >= instance.n() || p.campaign == 0 || p.campaign > instance.mu() {
                return Err(Error::parameter(format!("pair {p} outside V x [mu]")));
            }
        }
        Ok(())
    }

    /// Parses `"v:c,v:c,..."`; the empty string yields the empty profile.
    pub fn parse(s: &str) -> Result<Self> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl FromIterator<Pair> for SolutionProfile {
    fn from_iter<I: IntoIterator<Item = Pair>>(iter: I) -> Self {
        SolutionProfile(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a SolutionProfile {
    type Item = &'a Pair;
    type IntoIter = std::collections::btree_set::Iter<'a, Pair>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for SolutionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(Pair::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Per-campaign seed sets `(A_1, ..., A_mu)`, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeedProfile(Vec<Vec<NodeId>>);

impl SeedProfile {
    pub fn empty(mu: u16) -> Self {
        SeedProfile(vec![Vec::new(); mu as usize])
    }

    pub fn from_sets(mut sets: Vec<Vec<NodeId>>) -> Self {
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        SeedProfile(sets)
    }

    pub fn campaigns(&self) -> usize {
        self.0.len()
    }

    /// Seeds of campaign `c` (1-based).
    pub fn set(&self, c: Campaign) -> &[NodeId] {
        &self.0[c as usize - 1]
    }

    pub fn sets(&self) -> &[Vec<NodeId>] {
        &self.0
    }

    /// Element-wise union with the pairs of `s`; campaign-0 pairs are ignored.
    pub fn with(&self, s: &SolutionProfile) -> SeedProfile {
        let mut sets = self.0.clone();
        for p in s {
            if p.campaign >= 1 {
                sets[p.campaign as usize - 1].push(p.node);
            }
        }
        SeedProfile::from_sets(sets)
    }
}

/// How [`crate::objective::estimate`] draws its `T` outcome profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Grouped when the world space is small relative to `T`, forward otherwise.
    #[default]
    Auto,
    /// One independently keyed outcome profile per sample index.
    Forward,
    /// Draw the multinomial histogram of the `T` samples over the enumerated world space.
    Grouped,
}

/// Monte-Carlo estimator parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub sample_cap: Option<u64>,
    pub master_seed: u64,
    #[serde(default)]
    pub sampling: Sampling,
}

impl EstimatorConfig {
    pub fn new(epsilon: f64, delta: f64, master_seed: u64) -> Self {
        EstimatorConfig {
            epsilon,
            delta,
            sample_cap: None,
            master_seed,
            sampling: Sampling::Auto,
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

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn check(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::parameter(format!("epsilon {} not in (0,1)", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta <= 0.5) {
            return Err(Error::parameter(format!("delta {} not in (0,1/2]", self.delta)));
        }
        if self.sample_cap == Some(0) {
            return Err(Error::parameter("sample cap must be positive"));
        }
        Ok(())
    }

    /// `T = ceil(n^2 ln(1/delta) / epsilon^2)`, saturating at `u64::MAX`.
    pub fn requested_samples(&self, n: usize) -> u64 {
        let n = n as f64;
        let t = (n * n * (1.0 / self.delta).ln() / (self.epsilon * self.epsilon)).ceil();
        if t >= u64::MAX as f64 {
            u64::MAX
        } else {
            (t as u64).max(1)
        }
    }

    /// Samples actually drawn after applying the cap.
    pub fn used_samples(&self, n: usize) -> u64 {
        let t = self.requested_samples(n);
        self.sample_cap.map_or(t, |cap| t.min(cap))
    }
}
