//! Fixtures shared by the benchmarks in `benches/`.

use balance_core::corpus::{random_hypergraph, random_instance, CorpusSpec};
use balance_core::{BalanceInstance, Hypergraph, Setting};

/// A heterogeneous instance with `n` nodes, three campaigns and `fractional` random slots.
pub fn heterogeneous(n: u32, fractional: usize) -> BalanceInstance {
    random_instance(&CorpusSpec::new(n, 3, 2, 4, Setting::Heterogeneous).density(4.0 / n as f64).fractional(fractional), 17)
}

pub fn correlated(n: u32, fractional: usize) -> BalanceInstance {
    random_instance(&CorpusSpec::new(n, 2, 2, 4, Setting::Correlated).density(4.0 / n as f64).fractional(fractional), 23)
}

pub fn hypergraph(n: u32, d: usize, edges: usize) -> Hypergraph {
    random_hypergraph(n, d, edges, 5)
}
