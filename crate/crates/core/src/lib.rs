//! Balanced information exposure, `BAL(μ,ν)`, under the multi-campaign independent
//! cascade model.
//!
//! Given a directed graph with per-campaign arc probabilities, initial seed sets for `μ`
//! campaigns and a budget `k`, choose at most `k` extra `(node, campaign)` seeds so as to
//! maximise the expected number of nodes reached by no campaign or by at least `ν` of them.
//!
//! Modules, bottom-up: [`instance`] (data and validation), [`cascade`] (live-edge worlds
//! and reachability), [`objective`] (the objective family, sampling estimator and exact
//! enumeration), [`solvers`] (greedy algorithms), [`oracle`] (exhaustive optima) and
//! [`reduction`] (the hypergraph transform used as an instance generator).

pub mod cascade;
pub mod corpus;
pub mod error;
pub mod instance;
pub mod objective;
pub mod oracle;
pub mod reduction;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use instance::{
    load_instance, validate, ArcSpec, BalanceInstance, Campaign, EstimatorConfig, InstanceParts, NodeId, Pair,
    Sampling, SeedProfile, Setting, SolutionProfile, Violation,
};
pub use objective::{estimate, exact_value, Estimate, ObjectiveId};
pub use oracle::{brute_force_solve, enumerate_values, OracleLimit};
pub use reduction::{transform_tau, GadgetIndex, Hypergraph};
pub use solvers::{
    greedy, greedy_iter, greedy_tuple, lower_bound_transform, solve_correlated, solve_heterogeneous, SolverOptions,
    SolverReport,
};
