//! Seeded random instances for property tests, acceptance runs and the `corpus` command.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{ArcSpec, BalanceInstance, InstanceParts, Setting};
use crate::reduction::Hypergraph;
use crate::rng::RngStream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub n: u32,
    pub mu: u16,
    pub nu: u16,
    pub k: u32,
    pub setting: Setting,
    /// Probability that each ordered pair `(u, v)`, `u != v`, becomes an arc.
    pub density: f64,
    /// Maximum number of fractional probability slots: `(arc, campaign)` entries in the
    /// heterogeneous setting, arcs in the correlated one.
    pub fractional: usize,
    /// Probability that a node is an initial seed of a given campaign.
    pub seed_density: f64,
}

impl CorpusSpec {
    pub fn new(n: u32, mu: u16, nu: u16, k: u32, setting: Setting) -> Self {
        CorpusSpec { n, mu, nu, k, setting, density: 0.35, fractional: 6, seed_density: 0.25 }
    }

    pub fn density(mut self, d: f64) -> Self {
        self.density = d;
        self
    }

    pub fn fractional(mut self, f: usize) -> Self {
        self.fractional = f;
        self
    }

    pub fn seed_density(mut self, d: f64) -> Self {
        self.seed_density = d;
        self
    }
}

fn fractional_probability(rng: &mut RngStream) -> f64 {
    (rng.random_range(10..=90) as f64) / 100.0
}

/// Builds a valid random instance; the same `(spec, seed)` always yields the same instance.
pub fn random_instance(spec: &CorpusSpec, seed: u64) -> BalanceInstance {
    let mut rng = RngStream::new(seed, 0x636f_7270, 0);
    let mu = spec.mu as usize;
    let mut arcs = Vec::new();
    for u in 0..spec.n {
        for v in 0..spec.n {
            if u != v && rng.random_bool(spec.density.clamp(0.0, 1.0)) {
                let p = match spec.setting {
                    Setting::Correlated => vec![if rng.random_bool(0.7) { 1.0 } else { 0.0 }; mu],
                    Setting::Heterogeneous => {
                        (0..mu).map(|_| if rng.random_bool(0.6) { 1.0 } else { 0.0 }).collect()
                    }
                };
                arcs.push(ArcSpec { u, v, p });
            }
        }
    }
    let mut slots: Vec<(usize, usize)> = match spec.setting {
        Setting::Correlated => (0..arcs.len()).map(|a| (a, 0)).collect(),
        Setting::Heterogeneous => (0..arcs.len()).flat_map(|a| (0..mu).map(move |c| (a, c))).collect(),
    };
    slots.shuffle(&mut rng);
    slots.truncate(spec.fractional);
    slots.sort_unstable();
    for (a, c) in slots {
        let p = fractional_probability(&mut rng);
        match spec.setting {
            Setting::Correlated => arcs[a].p.iter_mut().for_each(|x| *x = p),
            Setting::Heterogeneous => arcs[a].p[c] = p,
        }
    }
    let seeds = (0..mu)
        .map(|_| (0..spec.n).filter(|_| rng.random_bool(spec.seed_density.clamp(0.0, 1.0))).collect())
        .collect();
    BalanceInstance::new(InstanceParts {
        n: spec.n,
        mu: spec.mu,
        nu: spec.nu,
        k: spec.k,
        setting: spec.setting,
        seeds,
        arcs,
        names: None,
    })
    .expect("corpus spec must describe valid instances")
}

/// A random `d`-uniform hypergraph with `edges` distinct hyperedges (fewer if impossible).
pub fn random_hypergraph(n: u32, d: usize, edges: usize, seed: u64) -> Hypergraph {
    let mut rng = RngStream::new(seed, 0x6879_7065, 0);
    let nodes: Vec<u32> = (0..n).collect();
    let mut out: Vec<Vec<u32>> = Vec::new();
    let mut attempts = 0;
    while out.len() < edges && attempts < 100 * edges.max(1) {
        attempts += 1;
        let mut e: Vec<u32> = nodes.choose_multiple(&mut rng, d).copied().collect();
        e.sort_unstable();
        if e.len() == d && !out.contains(&e) {
            out.push(e);
        }
    }
    Hypergraph::new(n, d, out).expect("generated hyperedges are valid")
}
