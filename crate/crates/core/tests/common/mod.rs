#![allow(dead_code)]

use otbench::model::OTInstance;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Splits `total` into `parts` positive integers.
pub fn composition(rng: &mut ChaCha8Rng, total: i64, parts: usize) -> Vec<i64> {
    assert!(total >= parts as i64 && parts > 0);
    let mut out = vec![1i64; parts];
    for _ in 0..total - parts as i64 {
        out[rng.random_range(0..parts)] += 1;
    }
    out
}

/// Balanced instance with costs in `0..=max_cost` and supplies in
/// `1..=max_amount`.
pub fn random_instance(
    seed: u64,
    n: usize,
    m: usize,
    max_cost: i64,
    max_amount: i64,
) -> OTInstance {
    let mut rng = rng(seed);
    let supplies: Vec<i64> = (0..n).map(|_| rng.random_range(1..=max_amount)).collect();
    let total: i64 = supplies.iter().sum::<i64>().max(m as i64);
    let mut supplies = supplies;
    let short = total - supplies.iter().sum::<i64>();
    supplies[0] += short;
    let demands = composition(&mut rng, total, m);
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(0..=max_cost)).collect())
        .collect();
    OTInstance::from_rows(format!("r{seed}"), &rows, supplies, demands).unwrap()
}

/// Unit-capacity square instance.
pub fn random_assignment(seed: u64, n: usize, max_cost: i64) -> OTInstance {
    let mut rng = rng(seed);
    let rows: Vec<Vec<i64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.random_range(0..=max_cost)).collect())
        .collect();
    OTInstance::assignment(format!("a{seed}"), &rows).unwrap()
}

/// Plain (not log-domain) Sinkhorn on `K = exp(-eta * C / N)`, written
/// independently of the library as a reference for moderate `eta`.
/// Returns the dense plan after `iterations` row+column passes.
pub fn dense_sinkhorn(inst: &OTInstance, eta: f64, iterations: usize) -> Vec<f64> {
    let (n, m) = (inst.n(), inst.m());
    let norm = inst.max_cost().max(1) as f64;
    let k: Vec<f64> = inst
        .costs()
        .iter()
        .map(|&c| (-eta * c as f64 / norm).exp())
        .collect();
    let (mut u, mut v) = (vec![1.0; n], vec![1.0; m]);
    for _ in 0..iterations {
        for i in 0..n {
            let s: f64 = (0..m).map(|j| k[i * m + j] * v[j]).sum();
            u[i] = inst.supplies()[i] as f64 / s;
        }
        for j in 0..m {
            let s: f64 = (0..n).map(|i| k[i * m + j] * u[i]).sum();
            v[j] = inst.demands()[j] as f64 / s;
        }
    }
    let mut x = vec![0.0; n * m];
    for i in 0..n {
        for j in 0..m {
            x[i * m + j] = u[i] * k[i * m + j] * v[j];
        }
    }
    x
}

pub fn sum_rows(x: &[f64], n: usize, m: usize) -> Vec<f64> {
    (0..n).map(|i| x[i * m..(i + 1) * m].iter().sum()).collect()
}

pub fn sum_cols(x: &[f64], n: usize, m: usize) -> Vec<f64> {
    (0..m).map(|j| (0..n).map(|i| x[i * m + j]).sum()).collect()
}
