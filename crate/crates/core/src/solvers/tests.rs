use proptest::prelude::*;

use super::*;
use crate::corpus::{random_instance, CorpusSpec};
use crate::instance::{ArcSpec, InstanceParts, Setting};
use crate::objective::exact_value;
use crate::oracle::{brute_force_solve, OracleLimit};

#[allow(clippy::too_many_arguments)]
fn build(
    n: u32,
    mu: u16,
    nu: u16,
    k: u32,
    setting: Setting,
    seeds: Vec<Vec<u32>>,
    arcs: Vec<(u32, u32, Vec<f64>)>,
) -> BalanceInstance {
    BalanceInstance::new(InstanceParts {
        n,
        mu,
        nu,
        k,
        setting,
        seeds,
        arcs: arcs.into_iter().map(|(u, v, p)| ArcSpec { u, v, p }).collect(),
        names: None,
    })
    .unwrap()
}

fn isolated_pair(k: u32) -> BalanceInstance {
    build(2, 2, 2, k, Setting::Heterogeneous, vec![vec![0], vec![]], vec![])
}

fn star(k: u32) -> BalanceInstance {
    build(
        3,
        2,
        2,
        k,
        Setting::Correlated,
        vec![vec![1], vec![]],
        vec![(0, 1, vec![1.0, 1.0]), (0, 2, vec![1.0, 1.0])],
    )
}

fn saturated(setting: Setting) -> BalanceInstance {
    build(3, 2, 2, 2, setting, vec![vec![0, 1, 2]; 2], vec![(0, 1, vec![1.0, 1.0])])
}

fn pairs(s: &str) -> SolutionProfile {
    SolutionProfile::parse(s).unwrap()
}

fn opts() -> SolverOptions {
    SolverOptions::new(0.2, 0.1, 7)
}

#[test]
fn greedy_fixes_the_singly_covered_node() {
    let r = greedy(&isolated_pair(2), ObjectiveId::PhiGeq(1), &isolated_pair(2).seeds(), 1, &opts()).unwrap();
    assert_eq!(r.chosen, pairs("0:2"));
    assert_eq!(r.estimated_value, 1.0);
    assert_eq!(r.trace.len(), 1);
    assert_eq!(r.trace[0].estimated_gain, 1.0);
}

#[test]
fn constant_objective_takes_smallest_pair() {
    let i = saturated(Setting::Heterogeneous);
    let r = greedy(&i, ObjectiveId::Phi, &i.seeds(), 1, &opts()).unwrap();
    assert_eq!(r.chosen, pairs("0:1"));
    assert_eq!(r.estimated_value, 3.0);
    let r = greedy(&i, ObjectiveId::Phi, &i.seeds(), 3, &opts()).unwrap();
    assert_eq!(r.chosen, pairs("0:1,0:2,1:1"));
}

#[test]
fn psi_tie_goes_to_smaller_node() {
    let i = star(2);
    assert_eq!(exact_value(ObjectiveId::Psi, &pairs("0:0"), &i).unwrap(), 1.0);
    assert_eq!(exact_value(ObjectiveId::Psi, &pairs("1:0"), &i).unwrap(), 1.0);
    assert_eq!(exact_value(ObjectiveId::Psi, &pairs("2:0"), &i).unwrap(), 0.0);
    let r = greedy(&i, ObjectiveId::Psi, &i.seeds(), 1, &opts()).unwrap();
    assert_eq!(r.chosen, pairs("0:0"));
}

#[test]
fn greedy_inner_parameters() {
    let i = isolated_pair(2);
    let r = greedy(&i, ObjectiveId::PhiGeq(1), &i.seeds(), 2, &opts()).unwrap();
    assert!((r.inner_epsilon - 0.2 / (E * 2.0)).abs() < 1e-15);
    assert!((r.inner_delta - 0.1 / (2.0 * 4.0)).abs() < 1e-15);
    assert_eq!(r.chosen.len(), 2);
}

#[test]
fn invalid_parameters_are_rejected() {
    let i = isolated_pair(2);
    for (e, d) in [(0.0, 0.1), (1.0, 0.1), (0.2, 0.0), (0.2, 0.6)] {
        assert!(greedy(&i, ObjectiveId::Phi, &i.seeds(), 1, &SolverOptions::new(e, d, 0)).is_err());
    }
    assert!(matches!(
        greedy(&i, ObjectiveId::Psi, &i.seeds(), 1, &opts()),
        Err(Error::Setting(_))
    ));
}

#[test]
fn tuple_of_size_one_matches_greedy() {
    for seed in 0..4 {
        let spec = CorpusSpec::new(4, 2, 2, 3, Setting::Heterogeneous).fractional(4);
        let i = random_instance(&spec, seed);
        let base = SolverOptions::new(0.2, 0.2, seed).with_cap(Some(400));
        let g = greedy(&i, ObjectiveId::PhiGeq(1), &i.seeds(), 3, &base).unwrap();
        let t = greedy_tuple(&i, 1, 3, &SolverOptions { epsilon: 0.4, ..base }).unwrap();
        assert_eq!(g.trace, t.trace);
        assert_eq!(g.chosen, t.chosen);
        assert!((g.inner_epsilon - t.inner_epsilon).abs() < 1e-15);
        assert!((g.inner_delta - t.inner_delta).abs() < 1e-15);
    }
}

#[test]
fn tuple_on_isolated_pair() {
    let r = greedy_tuple(&isolated_pair(2), 1, 2, &opts()).unwrap();
    assert_eq!(r.trace[0].chosen, vec![Pair::new(0, 2)]);
    assert_eq!(r.trace[0].estimated_gain, 1.0);
    assert_eq!(r.chosen.len(), 2);
    assert!(!r.warnings.is_empty(), "k=2 < 2ν/ε must warn");
}

#[test]
fn tuple_with_zero_objective_still_terminates() {
    let i = build(3, 3, 3, 4, Setting::Heterogeneous, vec![vec![]; 3], vec![]);
    let r = greedy_tuple(&i, 1, 4, &opts()).unwrap();
    assert_eq!(r.trace.len(), 2);
    assert_eq!(r.trace[0].chosen, vec![Pair::new(0, 1), Pair::new(0, 2)]);
    assert_eq!(r.trace[1].chosen, vec![Pair::new(0, 3), Pair::new(1, 1)]);
    assert!(r.trace.iter().all(|s| s.estimated_value == 0.0));
    // Budget 5 leaves one unit unused: the guard needs room for a whole tuple.
    assert_eq!(greedy_tuple(&i, 1, 5, &opts()).unwrap().chosen.len(), 4);
}

#[test]
fn tuple_parameters_and_range() {
    let i = build(3, 3, 3, 4, Setting::Heterogeneous, vec![vec![]; 3], vec![]);
    let r = greedy_tuple(&i, 1, 4, &opts()).unwrap();
    // t = ⌈4/2⌉·C(9,2) = 72, C(4,2) = 6
    assert!((r.inner_delta - 0.1 / 72.0).abs() < 1e-15);
    assert!((r.inner_epsilon - 0.2 / (2.0 * E * 6.0)).abs() < 1e-15);
    assert!(greedy_tuple(&i, 0, 4, &opts()).is_err());
    assert!(greedy_tuple(&i, 3, 4, &opts()).is_err());
}

#[test]
fn tuple_limit_aborts() {
    let i = build(3, 3, 3, 4, Setting::Heterogeneous, vec![vec![]; 3], vec![]);
    let err = greedy_tuple(&i, 1, 4, &opts().with_tuple_limit(10)).unwrap_err();
    assert!(err.is_limit());
}

#[test]
fn iter_with_two_campaigns_is_one_greedy_round() {
    for seed in 0..3 {
        let i = random_instance(&CorpusSpec::new(4, 2, 2, 3, Setting::Heterogeneous), seed);
        let o = SolverOptions::new(0.3, 0.2, seed).with_cap(Some(300));
        let it = greedy_iter(&i, 3, &o).unwrap();
        let g = greedy(&i, ObjectiveId::PhiBand(1, 2), &i.seeds(), 3, &o.with_params(0.15, 0.1, seed)).unwrap();
        assert_eq!(it.chosen, g.chosen);
        assert_eq!(it.trace, g.trace);
        assert_eq!(it.stages.len(), 1);
    }
}

#[test]
fn iter_lifts_level_by_level() {
    // u -> m live for campaign 1 only; u is seeded by campaign 1; node 2 is isolated.
    let i = build(3, 3, 3, 3, Setting::Heterogeneous, vec![vec![0], vec![], vec![]], vec![(0, 1, vec![1.0, 0.0, 0.0])]);
    let r = greedy_iter(&i, 2, &opts()).unwrap();
    assert_eq!(r.stages.len(), 2);
    assert_eq!(r.stages[0].chosen, pairs("0:2"));
    assert_eq!(r.stages[1].chosen, pairs("0:3"));
    assert_eq!(r.chosen, pairs("0:2,0:3"));
    assert_eq!(r.estimated_value, exact_value(ObjectiveId::Phi, &r.chosen, &i).unwrap());
}

#[test]
fn iter_on_saturated_instance_fills_lexicographically() {
    let i = saturated(Setting::Heterogeneous);
    let r = greedy_iter(&i, 2, &opts()).unwrap();
    assert_eq!(r.chosen, pairs("0:1,0:2"));
    assert_eq!(r.estimated_value, 3.0);
}

#[test]
fn combined_solver_keeps_empty_when_nothing_improves() {
    for setting in [Setting::Heterogeneous, Setting::Correlated] {
        let i = saturated(setting);
        let r = solve_heterogeneous(&i, &opts()).unwrap();
        assert!(r.chosen.is_empty());
        assert_eq!(r.estimated_value, 3.0);
        assert_eq!(r.candidates.len(), 3);
        assert_eq!(r.stages.len(), 2);
    }
}

#[test]
fn combined_solver_reaches_oracle_on_isolated_pair() {
    let i = isolated_pair(2);
    let r = solve_heterogeneous(&i, &opts()).unwrap();
    let (_, best) = brute_force_solve(&i, ObjectiveId::Phi, 2, &OracleLimit::default()).unwrap();
    assert_eq!(best, 2.0);
    assert_eq!(r.estimated_value, 2.0);
    assert_eq!(exact_value(ObjectiveId::Phi, &r.chosen, &i).unwrap(), 2.0);
}

#[test]
fn correlated_solver_on_star() {
    let i = star(2);
    let r = solve_correlated(&i, &opts()).unwrap();
    assert_eq!(r.chosen, pairs("0:1,0:2"));
    assert_eq!(r.estimated_value, 3.0);
    assert_eq!(r.candidates[0].estimated_value, 2.0);
    // ⌊3/2⌋ = 1 node, expanded to ν pairs.
    let r = solve_correlated(&star(3), &opts()).unwrap();
    assert_eq!(r.chosen.len(), 2);
}

#[test]
fn correlated_solver_keeps_empty_on_saturated_instance() {
    let r = solve_correlated(&saturated(Setting::Correlated), &opts()).unwrap();
    assert!(r.chosen.is_empty());
    assert_eq!(r.estimated_value, 3.0);
}

#[test]
fn correlated_solver_refuses_heterogeneous() {
    assert!(matches!(solve_correlated(&isolated_pair(2), &opts()), Err(Error::Setting(_))));
}

#[test]
fn expansion_seeds_first_nu_campaigns() {
    assert_eq!(expand_zero_pairs(&pairs("1:0,4:0"), 3), pairs("1:1,1:2,1:3,4:1,4:2,4:3"));
}

#[test]
fn lower_bound_transform_adds_one() {
    let i = random_instance(&CorpusSpec::new(3, 3, 2, 2, Setting::Heterogeneous).fractional(3), 5);
    let once = lower_bound_transform(&i);
    let twice = lower_bound_transform(&once);
    assert_eq!(once.n(), 4);
    for c in 1..=3 {
        assert_eq!(once.seed_set(c).contains(&3), c <= 2);
    }
    let domain = i.pairs();
    let mut sets = vec![SolutionProfile::new()];
    for a in 0..domain.len() {
        sets.push([domain[a]].into_iter().collect());
        for b in a + 1..domain.len() {
            sets.push([domain[a], domain[b]].into_iter().collect());
        }
    }
    let objectives = [
        ObjectiveId::Phi,
        ObjectiveId::PhiGeq(0),
        ObjectiveId::PhiGeq(1),
        ObjectiveId::PhiGeq(2),
    ];
    for s in &sets {
        for obj in objectives {
            let f = exact_value(obj, s, &i).unwrap();
            assert!((exact_value(obj, s, &once).unwrap() - f - 1.0).abs() < 1e-9);
            assert!((exact_value(obj, s, &twice).unwrap() - f - 2.0).abs() < 1e-9);
        }
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let i = random_instance(&CorpusSpec::new(5, 2, 2, 4, Setting::Heterogeneous).fractional(8), 11);
    let o = SolverOptions::new(0.3, 0.2, 3).with_cap(Some(2000)).with_sampling(Sampling::Forward);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| serde_json::to_string(&solve_heterogeneous(&i, &o).unwrap()).unwrap())
    };
    assert_eq!(run(1), run(4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solutions_respect_budget(seed in 0u64..1000, n in 2u32..5, k in 2u32..5, cor in any::<bool>()) {
        let setting = if cor { Setting::Correlated } else { Setting::Heterogeneous };
        let i = random_instance(&CorpusSpec::new(n, 2, 2, k, setting).fractional(3), seed);
        let o = SolverOptions::new(0.3, 0.2, seed).with_cap(Some(200));
        let het = solve_heterogeneous(&i, &o).unwrap();
        prop_assert!(het.chosen.len() <= k as usize);
        prop_assert!(het.chosen.check(&i, k).is_ok());
        let g = greedy(&i, ObjectiveId::PhiGeq(1), &i.seeds(), k, &o).unwrap();
        prop_assert_eq!(g.chosen.len(), (k as usize).min(i.pair_universe()));
        prop_assert!(g.trace.len() <= k as usize);
        if cor {
            let c = solve_correlated(&i, &o).unwrap();
            prop_assert!(c.chosen.len() <= k as usize);
        }
    }

    #[test]
    fn equal_inputs_give_equal_reports(seed in 0u64..1000) {
        let i = random_instance(&CorpusSpec::new(4, 3, 3, 4, Setting::Heterogeneous).fractional(4), seed);
        let o = SolverOptions::new(0.3, 0.2, seed).with_cap(Some(200));
        prop_assert_eq!(solve_heterogeneous(&i, &o).unwrap(), solve_heterogeneous(&i, &o).unwrap());
    }
}
