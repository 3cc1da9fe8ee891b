mod common;

use std::collections::HashMap;

use common::{random_assignment, random_instance};
use otbench::bench::{
    calibrate_all, eta_sweep, performance_profile, ratio, read_params, read_results, run_suite,
    solve, write_params, write_results, BenchConfig, BenchRecord, CalibrateOptions, RecordStatus,
    SolverKind, SolverParams,
};
use otbench::datasets::gen_circle_square;
use otbench::model::{Deadline, OTInstance};
use otbench::scaling::ScalingConfig;
use proptest::prelude::*;

fn temp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("otbench-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn record(dataset: &str, solver: SolverKind, time: f64, status: RecordStatus) -> BenchRecord {
    BenchRecord {
        dataset: dataset.into(),
        solver,
        wall_time: Some(time),
        objective: Some(1.0),
        exact_objective: Some(1.0),
        ratio: Some(1.0),
        iterations: 1,
        params: SolverParams::default(),
        status,
    }
}

#[test]
fn suite_records_carry_consistent_ratios() {
    let instances = vec![
        gen_circle_square(100).unwrap(),
        random_instance(5, 30, 20, 1000, 20),
    ];
    let cfg = BenchConfig {
        repeats: 1,
        ..Default::default()
    };
    let records = run_suite(&instances, &SolverKind::ALL, &cfg).unwrap();
    assert_eq!(records.len(), 2 * SolverKind::ALL.len());
    for r in &records {
        if r.status == RecordStatus::NotApplicable {
            assert!(r.solver.unit_only() && r.dataset != "CS100");
            continue;
        }
        assert_eq!(r.status, RecordStatus::Ok, "{r:?}");
        let (obj, exact) = (r.objective.unwrap(), r.exact_objective.unwrap());
        assert_eq!(r.ratio, Some(ratio(obj, exact)));
        if r.solver.feasible_output() {
            assert!(r.ratio.unwrap() >= 1.0 - 1e-12, "{r:?}");
        }
    }
    let exact: Vec<&BenchRecord> = records
        .iter()
        .filter(|r| {
            r.dataset == "CS100" && matches!(r.solver, SolverKind::NetworkSimplex | SolverKind::Km)
        })
        .collect();
    assert_eq!(exact.len(), 2);
    assert!(exact.iter().all(|r| r.ratio == Some(1.0)));
}

#[test]
fn results_round_trip_through_csv() {
    let instances = vec![random_assignment(1, 12, 100)];
    let cfg = BenchConfig {
        repeats: 1,
        ..Default::default()
    };
    let records = run_suite(&instances, &SolverKind::ALL, &cfg).unwrap();
    let path = temp_dir("results").join("results.csv");
    write_results(&path, &records).unwrap();
    let back = read_results(&path).unwrap();
    assert_eq!(back.len(), records.len());
    for (a, b) in records.iter().zip(&back) {
        assert_eq!(
            (&a.dataset, a.solver, a.status),
            (&b.dataset, b.solver, b.status)
        );
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.params.levels, b.params.levels);
        let close = |x: Option<f64>, y: Option<f64>| match (x, y) {
            (Some(x), Some(y)) => (x - y).abs() <= 1e-5 * x.abs().max(1e-300),
            (None, None) => true,
            _ => false,
        };
        assert!(close(a.objective, b.objective) && close(a.ratio, b.ratio));
        assert!(close(a.params.eta, b.params.eta) && close(a.params.epsilon, b.params.epsilon));
    }
}

#[test]
fn profile_of_two_solvers_on_one_dataset() {
    let records = vec![
        record("d", SolverKind::Km, 1.0, RecordStatus::Ok),
        record("d", SolverKind::Auction, 2.0, RecordStatus::Ok),
    ];
    let curves = performance_profile(&records).unwrap();
    let by: HashMap<SolverKind, Vec<(f64, usize)>> =
        curves.into_iter().map(|c| (c.solver, c.points)).collect();
    assert_eq!(by[&SolverKind::Km], vec![(1.0, 1)]);
    assert_eq!(by[&SolverKind::Auction], vec![(1.0, 0), (2.0, 1)]);
    assert!(performance_profile(&[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn profile_counts_are_monotone_and_bounded(
        times in prop::collection::vec((0.001f64..10.0, 0u8..4), 3..60),
    ) {
        let solvers = [SolverKind::NetworkSimplex, SolverKind::Sinkhorn, SolverKind::Greenkhorn];
        let records: Vec<BenchRecord> = times
            .iter()
            .enumerate()
            .map(|(k, &(t, s))| {
                let status = if s == 0 { RecordStatus::Timeout } else { RecordStatus::Ok };
                record(&format!("d{}", k / 3), solvers[k % 3], t, status)
            })
            .collect();
        let datasets = times.len().div_ceil(3);
        for curve in performance_profile(&records).unwrap() {
            let finished = records
                .iter()
                .filter(|r| r.solver == curve.solver && r.finished())
                .count();
            prop_assert_eq!(curve.points[0].0, 1.0);
            for w in curve.points.windows(2) {
                prop_assert!(w[0].0 < w[1].0 && w[0].1 <= w[1].1);
            }
            let last = curve.points.last().unwrap().1;
            prop_assert_eq!(last, finished);
            prop_assert!(last <= datasets);
        }
    }
}

#[test]
fn fastest_everywhere_reaches_full_count_at_one() {
    let records: Vec<BenchRecord> = (0..5)
        .flat_map(|d| {
            let name = format!("d{d}");
            [
                record(&name, SolverKind::NetworkSimplex, 1.0, RecordStatus::Ok),
                record(
                    &name,
                    SolverKind::Sinkhorn,
                    1.5 + d as f64,
                    RecordStatus::Ok,
                ),
            ]
        })
        .collect();
    let curves = performance_profile(&records).unwrap();
    let ns = curves
        .iter()
        .find(|c| c.solver == SolverKind::NetworkSimplex)
        .unwrap();
    assert_eq!(ns.points, vec![(1.0, 5)]);
}

#[test]
fn sweep_on_constant_costs_is_exact() {
    let inst = OTInstance::assignment("flat", &vec![vec![4; 5]; 5]).unwrap();
    let rows = eta_sweep(&inst, &[1.0, 10.0, 100.0], 20.0, &ScalingConfig::new(1.0)).unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!((r.ratio.unwrap() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn sweep_on_two_by_two_converges_to_optimum() {
    let inst = OTInstance::assignment("t", &[vec![1, 3], vec![2, 1]]).unwrap();
    let rows = eta_sweep(
        &inst,
        &[1.0, 10.0, 50.0, 200.0],
        2.0,
        &ScalingConfig::new(1.0),
    )
    .unwrap();
    for pair in rows.chunks(2).collect::<Vec<_>>().windows(2) {
        for (a, b) in pair[0].iter().zip(pair[1]) {
            assert!(b.ratio.unwrap() <= a.ratio.unwrap() + 1e-12);
        }
    }
    for r in rows.iter().filter(|r| r.eta == 200.0) {
        assert!((r.ratio.unwrap() - 1.0).abs() <= 1e-3, "{r:?}");
    }
}

#[test]
fn calibration_of_constant_costs_is_minimal() {
    let inst = OTInstance::assignment("flat", &vec![vec![7; 6]; 6]).unwrap();
    let rec = &calibrate_all(&[inst], &CalibrateOptions::default()).unwrap()[0];
    assert_eq!(rec.eta, Some(1.0));
    assert_eq!(rec.levels, Some(1));
}

#[test]
fn calibrated_auction_epsilon_on_two_by_two() {
    let inst = OTInstance::assignment("t", &[vec![1, 3], vec![2, 1]]).unwrap();
    let rec = &calibrate_all(std::slice::from_ref(&inst), &CalibrateOptions::default()).unwrap()[0];
    let eps = rec.epsilon.unwrap();
    assert!(eps >= 0.4, "{eps}");
    let res = solve(
        SolverKind::AuctionScaled,
        &inst,
        &rec.params(),
        Deadline::NONE,
    )
    .unwrap();
    assert_eq!(res.objective.value(), 2.0);
}

#[test]
fn calibration_is_idempotent_and_cached() {
    let instances = vec![
        random_assignment(3, 20, 500),
        random_instance(4, 12, 15, 300, 9),
    ];
    let cache = temp_dir("calib").join("params.csv");
    let _ = std::fs::remove_file(&cache);
    let opts = CalibrateOptions {
        cache: Some(cache.clone()),
        ..Default::default()
    };
    let first = calibrate_all(&instances, &opts).unwrap();
    let written = std::fs::read_to_string(&cache).unwrap();
    let second = calibrate_all(&instances, &opts).unwrap();
    assert_eq!(first, second);
    assert_eq!(std::fs::read_to_string(&cache).unwrap(), written);
    assert_eq!(read_params(&cache).unwrap(), first);

    // a changed instance under the same name is recalibrated
    let changed = vec![random_assignment(99, 20, 500).with_name(instances[0].name())];
    let third = calibrate_all(&changed, &opts).unwrap();
    assert_ne!(third[0].hash, first[0].hash);

    let fresh = temp_dir("calib2").join("params.csv");
    write_params(&fresh, &first).unwrap();
    assert_eq!(read_params(&fresh).unwrap(), first);
}

#[test]
fn calibrated_parameters_meet_the_target() {
    let instances = vec![
        random_assignment(8, 30, 1000),
        random_instance(9, 20, 25, 1000, 15),
    ];
    let recs = calibrate_all(&instances, &CalibrateOptions::default()).unwrap();
    let cfg = BenchConfig {
        repeats: 1,
        params: recs
            .iter()
            .map(|r| (r.dataset.clone(), r.params()))
            .collect(),
        ..Default::default()
    };
    for r in run_suite(&instances, &SolverKind::ALL, &cfg).unwrap() {
        if r.status == RecordStatus::NotApplicable {
            continue;
        }
        assert!(r.ratio.unwrap() <= 1.1 + 1e-9, "{r:?}");
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

#[test]
fn timing_is_stable_between_runs() {
    let inst = gen_circle_square(900).unwrap();
    let params = SolverParams {
        levels: Some(64),
        ..Default::default()
    };
    let timed = || {
        median(
            (0..5)
                .map(|_| {
                    solve(SolverKind::BatchedKm, &inst, &params, Deadline::NONE)
                        .unwrap()
                        .wall_time
                })
                .collect(),
        )
    };
    let (a, b) = (timed(), timed());
    assert!(
        (a - b).abs() <= 0.25 * a.min(b),
        "consecutive median-of-5 timings {a}s and {b}s differ by more than 25%"
    );
}
