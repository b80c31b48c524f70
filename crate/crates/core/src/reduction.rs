//! Reduction from Densest-k-Subhypergraph to deterministic balance instances.
//!
//! For a `d`-uniform hypergraph `G = (V, E)` and parameters `mu >= nu >= d + 1`, the
//! transform keeps every node of `V` (the rectangle nodes) and adds, for each hyperedge
//! `e`, each `d`-subset `ι` of the first `m = mu - nu + d` campaigns and each permutation
//! `π` of `[d]`, a path `e¹ → … → eˡ` of `l = |V| + 1` circle nodes. Endpoint `v_a` (the
//! `a`-th smallest node of `e`) enters `e¹` with probability 1 for campaign `ι[π(a)]`;
//! path arcs are live for exactly the campaigns of `ι`. Campaigns `m+1..=mu` seed every
//! node, so each node starts at level `nu - d`.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{ArcSpec, BalanceInstance, Campaign, InstanceParts, NodeId, Pair, Setting, SolutionProfile};
use crate::objective::{exact_node_values, ObjectiveId};

/// Ceiling on enumerated candidates for the brute-force hypergraph solvers.
pub const BRUTE_FORCE_CEILING: u128 = 5_000_000;

/// Largest instance the transform will materialise.
pub const MAX_REDUCED_NODES: u128 = 20_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypergraph {
    n: u32,
    d: usize,
    edges: Vec<Vec<NodeId>>,
}

impl Hypergraph {
    /// Validates and builds a `d`-uniform hypergraph; hyperedges are stored sorted.
    pub fn new(n: u32, d: usize, edges: Vec<Vec<NodeId>>) -> Result<Self> {
        if d < 2 {
            return Err(Error::parameter(format!("arity d={d} must be at least 2")));
        }
        let mut out = Vec::with_capacity(edges.len());
        for (i, mut e) in edges.into_iter().enumerate() {
            e.sort_unstable();
            check_edge(&e, n, d).map_err(|m| Error::parameter(format!("hyperedge {i}: {m}")))?;
            out.push(e);
        }
        Ok(Hypergraph { n, d, edges: out })
    }

    /// Parses `"n d"` followed by one hyperedge of `d` node ids per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hl, header) = lines
            .next()
            .ok_or(Error::Hypergraph { line: 1, message: "missing header `n d`".into() })?;
        let head: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || Error::Hypergraph { line: hl + 1, message: format!("header `{header}` is not `n d`") };
        if head.len() != 2 {
            return Err(bad_header());
        }
        let n: u32 = head[0].parse().map_err(|_| bad_header())?;
        let d: usize = head[1].parse().map_err(|_| bad_header())?;
        if d < 2 {
            return Err(Error::Hypergraph { line: hl + 1, message: format!("arity d={d} must be at least 2") });
        }
        let mut edges = Vec::new();
        for (i, line) in lines {
            let err = |message: String| Error::Hypergraph { line: i + 1, message };
            let mut e = line
                .split_whitespace()
                .map(|t| t.parse::<NodeId>().map_err(|_| err(format!("`{t}` is not a node id"))))
                .collect::<Result<Vec<_>>>()?;
            e.sort_unstable();
            check_edge(&e, n, d).map_err(err)?;
            edges.push(e);
        }
        Ok(Hypergraph { n, d, edges })
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.d);
        for e in &self.edges {
            let ids: Vec<String> = e.iter().map(u32::to_string).collect();
            s.push_str(&ids.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn edges(&self) -> &[Vec<NodeId>] {
        &self.edges
    }

    /// `|E(S)|`: hyperedges contained in `s`.
    pub fn induced_edges(&self, s: &[NodeId]) -> usize {
        let mut inside = vec![false; self.n as usize];
        for &v in s {
            inside[v as usize] = true;
        }
        self.edges.iter().filter(|e| e.iter().all(|&v| inside[v as usize])).count()
    }

    /// `|E_φ(S)|`: hyperedges inside the coloring's domain whose endpoints get distinct colors.
    pub fn rainbow_edges(&self, phi: &Coloring) -> usize {
        self.edges
            .iter()
            .filter(|e| {
                let mut seen = vec![false; self.d + 1];
                e.iter().all(|v| match phi.get(*v) {
                    Some(c) if (c as usize) <= self.d && !seen[c as usize] => {
                        seen[c as usize] = true;
                        true
                    }
                    _ => false,
                })
            })
            .count()
    }
}

fn check_edge(e: &[NodeId], n: u32, d: usize) -> std::result::Result<(), String> {
    if e.len() != d {
        return Err(format!("expected {d} nodes, found {}", e.len()));
    }
    if let Some(v) = e.iter().find(|&&v| v >= n) {
        return Err(format!("node {v} out of range (n={n})"));
    }
    if e.windows(2).any(|w| w[0] == w[1]) {
        return Err("repeated node".into());
    }
    Ok(())
}

/// A partial coloring `φ: S → [d]`, colors 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring(pub BTreeMap<NodeId, u16>);

impl Coloring {
    pub fn get(&self, v: NodeId) -> Option<u16> {
        self.0.get(&v).copied()
    }

    pub fn domain(&self) -> Vec<NodeId> {
        self.0.keys().copied().collect()
    }
}

/// `p = d! / d^d`, the probability that a uniform coloring makes a hyperedge rainbow.
pub fn rainbow_probability(d: usize) -> f64 {
    (1..=d).map(|i| i as f64 / d as f64).product()
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

fn factorial(d: usize) -> u128 {
    (1..=d as u128).product()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for j in i + 1..k {
                    c[j] = c[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}

/// All permutations of `0..d` in lexicographic order.
fn permutations(d: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..d).collect();
    let mut out = vec![p.clone()];
    while let Some(i) = (1..d).rev().find(|&i| p[i - 1] < p[i]) {
        let j = (i..d).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
    out
}

/// Locates circle nodes of a transformed instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GadgetIndex {
    /// Number of rectangle nodes; they keep their ids `0..rect_nodes`.
    pub rect_nodes: u32,
    pub d: usize,
    /// `m = mu - nu + d`; campaigns `1..=m` are the free ones.
    pub m: u16,
    /// Path length `l = |V| + 1`.
    pub l: u32,
    /// `λ = d! · C(m, d)`.
    pub lambda: u64,
    /// `J`: the `d`-subsets of `[m]` in lexicographic order.
    pub subsets: Vec<Vec<Campaign>>,
    /// `S_d` as 0-based permutations in lexicographic order.
    pub permutations: Vec<Vec<usize>>,
    pub edges: Vec<Vec<NodeId>>,
}

impl GadgetIndex {
    /// Id of circle node `e^t_{ι,π}` with `t` in `1..=l`.
    pub fn circle_node(&self, edge: usize, subset: usize, perm: usize, t: u32) -> NodeId {
        let per_edge = self.subsets.len() * self.permutations.len();
        let gadget = (edge * per_edge + subset * self.permutations.len() + perm) as u64;
        self.rect_nodes + (gadget * self.l as u64 + (t as u64 - 1)) as u32
    }

    pub fn circle_count(&self) -> u64 {
        self.lambda * self.l as u64 * self.edges.len() as u64
    }

    pub fn is_circle(&self, v: NodeId) -> bool {
        v >= self.rect_nodes
    }
}

/// Builds the transformed instance `τ(G, k)` and its gadget index.
pub fn transform_tau(h: &Hypergraph, k: u32, mu: u16, nu: u16) -> Result<(BalanceInstance, GadgetIndex)> {
    let d = h.d();
    if (nu as usize) < d + 1 {
        return Err(Error::parameter(format!("ν ≥ d+1 required (ν={nu}, d={d})")));
    }
    if mu < nu {
        return Err(Error::parameter(format!("μ ≥ ν required (μ={mu}, ν={nu})")));
    }
    if (k as usize) < d {
        return Err(Error::parameter(format!("k ≥ d required (k={k}, d={d})")));
    }
    let m = mu - nu + d as u16;
    let l = h.n() + 1;
    let lambda = factorial(d) * binomial(m as u128, d as u128);
    let total = h.n() as u128 + lambda * l as u128 * h.edges().len() as u128;
    if total > MAX_REDUCED_NODES {
        return Err(Error::Limit { what: "reduced instance nodes", size: total, limit: MAX_REDUCED_NODES });
    }
    let subsets: Vec<Vec<Campaign>> = combinations(m as usize, d)
        .map(|c| c.into_iter().map(|i| i as Campaign + 1).collect())
        .collect();
    let gadget = GadgetIndex {
        rect_nodes: h.n(),
        d,
        m,
        l,
        lambda: lambda as u64,
        subsets,
        permutations: permutations(d),
        edges: h.edges().to_vec(),
    };
    let mut arcs = Vec::new();
    let only = |campaigns: &[Campaign]| {
        let mut p = vec![0.0; mu as usize];
        for &c in campaigns {
            p[c as usize - 1] = 1.0;
        }
        p
    };
    for (ei, e) in h.edges().iter().enumerate() {
        for (ji, iota) in gadget.subsets.iter().enumerate() {
            for (pi, perm) in gadget.permutations.iter().enumerate() {
                let first = gadget.circle_node(ei, ji, pi, 1);
                for (a, &v) in e.iter().enumerate() {
                    arcs.push(ArcSpec { u: v, v: first, p: only(&[iota[perm[a]]]) });
                }
                for t in 1..l {
                    arcs.push(ArcSpec {
                        u: gadget.circle_node(ei, ji, pi, t),
                        v: gadget.circle_node(ei, ji, pi, t + 1),
                        p: only(iota),
                    });
                }
            }
        }
    }
    let n_bar = total as u32;
    let all: Vec<NodeId> = (0..n_bar).collect();
    let seeds = (1..=mu).map(|c| if c > m { all.clone() } else { Vec::new() }).collect();
    // The budget is inherited from the hypergraph problem and may be below ν.
    let instance = BalanceInstance::new_relaxed_budget(InstanceParts {
        n: n_bar,
        mu,
        nu,
        k,
        setting: Setting::Heterogeneous,
        seeds,
        arcs,
        names: None,
    })?;
    Ok((instance, gadget))
}

/// Exact `(Φ_□, Φ_○)`: the objective split over rectangle and circle nodes.
pub fn phi_split(instance: &BalanceInstance, gadget: &GadgetIndex, s: &SolutionProfile) -> Result<(f64, f64)> {
    let per_node = exact_node_values(ObjectiveId::Phi, s, instance)?;
    let (rect, circle) = per_node.split_at(gadget.rect_nodes as usize);
    Ok((rect.iter().sum(), circle.iter().sum()))
}

/// Rectangle nodes at which `solution` seeds some campaign in `1..=m`.
pub fn extract_dksh_solution(solution: &SolutionProfile, gadget: &GadgetIndex) -> Vec<NodeId> {
    let mut s: Vec<NodeId> = solution
        .iter()
        .filter(|p| !gadget.is_circle(p.node) && p.campaign >= 1 && p.campaign <= gadget.m)
        .map(|p| p.node)
        .collect();
    s.dedup();
    s
}

/// The solution seeding campaign `φ(v)` at every colored node.
pub fn witness_solution(phi: &Coloring) -> SolutionProfile {
    phi.0.iter().map(|(&v, &c)| Pair::new(v, c)).collect()
}

fn check_ceiling(what: &'static str, size: u128) -> Result<()> {
    if size > BRUTE_FORCE_CEILING {
        return Err(Error::Limit { what, size, limit: BRUTE_FORCE_CEILING });
    }
    Ok(())
}

/// Exhaustive DKSH optimum: the lexicographically first `min(k, n)`-set with most induced edges.
pub fn dksh_brute(h: &Hypergraph, k: u32) -> Result<(Vec<NodeId>, usize)> {
    let size = (k as usize).min(h.n() as usize);
    check_ceiling("dksh enumeration", binomial(h.n() as u128, size as u128))?;
    let mut best: (Vec<NodeId>, usize) = (Vec::new(), 0);
    let mut first = true;
    for c in combinations(h.n() as usize, size) {
        let s: Vec<NodeId> = c.into_iter().map(|v| v as NodeId).collect();
        let q = h.induced_edges(&s);
        if first || q > best.1 {
            best = (s, q);
            first = false;
        }
    }
    Ok(best)
}

/// Exhaustive MCDSH optimum over all `min(k, n)`-sets and all their `d`-colorings.
pub fn mcdsh_brute(h: &Hypergraph, k: u32) -> Result<(Coloring, usize)> {
    let size = (k as usize).min(h.n() as usize);
    let d = h.d() as u128;
    let colorings = d.checked_pow(size as u32).unwrap_or(u128::MAX);
    check_ceiling("mcdsh enumeration", binomial(h.n() as u128, size as u128).saturating_mul(colorings))?;
    let mut best: Option<(Coloring, usize)> = None;
    for c in combinations(h.n() as usize, size) {
        for code in 0..colorings {
            let mut x = code;
            let mut phi = Coloring::default();
            for &v in &c {
                phi.0.insert(v as NodeId, (x % d) as u16 + 1);
                x /= d;
            }
            let q = h.rainbow_edges(&phi);
            if best.as_ref().is_none_or(|b| q > b.1) {
                best = Some((phi, q));
            }
        }
    }
    Ok(best.unwrap_or_default())
}

/// Best of `attempts` uniform random `d`-colorings of `s` (default `64 · d^d`).
pub fn random_coloring<R: Rng + ?Sized>(h: &Hypergraph, s: &[NodeId], rng: &mut R, attempts: Option<usize>) -> Coloring {
    let d = h.d();
    let attempts = attempts.unwrap_or(64 * d.pow(d as u32)).max(1);
    let mut best: Option<(Coloring, usize)> = None;
    for _ in 0..attempts {
        let phi = Coloring(s.iter().map(|&v| (v, rng.random_range(1..=d as u16))).collect());
        let q = h.rainbow_edges(&phi);
        if best.as_ref().is_none_or(|b| q > b.1) {
            best = Some((phi, q));
        }
    }
    best.map(|b| b.0).unwrap_or_default()
}
