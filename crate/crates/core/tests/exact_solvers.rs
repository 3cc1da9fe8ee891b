mod common;

use common::{random_assignment, random_instance};
use otbench::auction::{default_scaling, solve_auction, solve_auction_scaled};
use otbench::hungarian::{solve_batched_km, solve_km};
use otbench::model::{objective, residue, OTInstance, SolveResult};
use otbench::netsimplex::solve_network_simplex;
use otbench::oracle::{brute_force_assignment, brute_force_optimum};
use proptest::prelude::*;

fn exact_assignment_results(inst: &OTInstance) -> Vec<SolveResult> {
    let n = inst.n() as f64;
    let eps = 1.0 / (n + 1.0);
    let (eps0, theta) = default_scaling(inst, eps);
    vec![
        solve_network_simplex(inst).unwrap(),
        solve_km(inst).unwrap(),
        solve_batched_km(inst, inst.max_cost().max(1) * inst.n() as i64).unwrap(),
        solve_auction(inst, eps).unwrap(),
        solve_auction_scaled(inst, eps0, theta, eps).unwrap(),
    ]
}

fn assert_consistent(inst: &OTInstance, res: &SolveResult) {
    let recomputed = objective(inst, &res.flow).unwrap();
    assert_eq!(recomputed, res.objective, "{}", res.solver);
    assert_eq!(residue(inst, &res.flow), res.residue, "{}", res.solver);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn network_simplex_matches_enumeration(
        seed in any::<u64>(),
        n in 1usize..=4,
        m in 1usize..=4,
    ) {
        let inst = random_instance(seed, n, m, 9, 3);
        let best = brute_force_optimum(&inst).unwrap();
        let res = solve_network_simplex(&inst).unwrap();
        assert_consistent(&inst, &res);
        prop_assert_eq!(res.objective.as_integer(), Some(best));
        prop_assert_eq!(res.residue, 0.0);
        prop_assert!(res.flow.is_integral());
        prop_assert!(res.exact);
    }

    #[test]
    fn assignment_solvers_match_enumeration(seed in any::<u64>(), n in 1usize..=4) {
        let inst = random_assignment(seed, n, 9);
        let best = brute_force_assignment(inst.costs(), n);
        for res in exact_assignment_results(&inst) {
            assert_consistent(&inst, &res);
            prop_assert_eq!(res.objective.as_integer(), Some(best), "{}", res.solver);
            prop_assert_eq!(res.residue, 0.0);
            prop_assert!(res.exact, "{}", res.solver);
        }
    }

    #[test]
    fn auction_within_n_epsilon(
        seed in any::<u64>(),
        n in 1usize..=4,
        eps in 0.01f64..20.0,
    ) {
        let inst = random_assignment(seed, n, 9);
        let best = brute_force_assignment(inst.costs(), n) as f64;
        let bound = best + n as f64 * eps + 1e-9;
        let plain = solve_auction(&inst, eps).unwrap();
        prop_assert!(plain.objective.value() <= bound);
        let (eps0, theta) = default_scaling(&inst, eps);
        let scaled = solve_auction_scaled(&inst, eps0, theta, eps).unwrap();
        prop_assert!(scaled.objective.value() <= bound);
        prop_assert!(plain.objective.value() >= best && scaled.objective.value() >= best);
    }

    #[test]
    fn batched_km_within_quantization_bound(
        seed in any::<u64>(),
        n in 1usize..=12,
        levels in 1i64..64,
    ) {
        let inst = random_assignment(seed, n, 1000);
        let best = solve_km(&inst).unwrap().objective.value();
        let res = solve_batched_km(&inst, levels).unwrap();
        assert_consistent(&inst, &res);
        let slack = n as f64 * inst.max_cost().max(1) as f64 / levels as f64;
        prop_assert!(res.objective.value() >= best);
        prop_assert!(res.objective.value() <= best + slack + 1e-9);
    }
}

#[test]
fn solvers_agree_on_moderate_random_matchings() {
    for seed in 0..20 {
        let inst = random_assignment(seed, 40, 1_000_000);
        let results = exact_assignment_results(&inst);
        let want = results[0].objective;
        for res in &results {
            assert_consistent(&inst, res);
            assert_eq!(res.objective, want, "{} on seed {seed}", res.solver);
        }
    }
}

#[test]
fn network_simplex_handles_skewed_amounts() {
    for seed in 0..30 {
        let inst = random_instance(seed, 25, 7, 50, 1000);
        let res = solve_network_simplex(&inst).unwrap();
        assert_consistent(&inst, &res);
        assert_eq!(res.residue, 0.0);
        assert!(res.flow.is_integral());
    }
}

#[test]
fn assignment_solvers_reject_general_instances() {
    let inst = random_instance(3, 3, 4, 9, 3);
    assert!(solve_km(&inst).is_err());
    assert!(solve_batched_km(&inst, 8).is_err());
    assert!(solve_auction(&inst, 0.1).is_err());
}
