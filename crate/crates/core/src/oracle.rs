//! Reference answers for tiny instances and independent certificate checks.
//!
//! Nothing here shares code with the solvers: the optimum is found by
//! enumerating every integral feasible flow, and the certificate checks only
//! read the returned duals and flow.

use thiserror::Error;

use crate::model::{Certificate, Flow, OTInstance};

/// Minimum cost over all integral feasible flows, by exhaustive enumeration.
///
/// Intended for instances with `n * m` up to about 16 and small capacities.
/// Returns `None` when no feasible flow exists.
pub fn brute_force_optimum(inst: &OTInstance) -> Option<i64> {
    let (n, m) = (inst.n(), inst.m());
    let mut rows = inst.supplies().to_vec();
    let mut cols = inst.demands().to_vec();
    let mut best = None;
    enumerate(inst, 0, n, m, &mut rows, &mut cols, 0, &mut best);
    best
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    inst: &OTInstance,
    cell: usize,
    n: usize,
    m: usize,
    rows: &mut [i64],
    cols: &mut [i64],
    cost: i64,
    best: &mut Option<i64>,
) {
    if cell == n * m {
        if rows.iter().all(|&r| r == 0) && cols.iter().all(|&c| c == 0) {
            *best = Some(best.map_or(cost, |b: i64| b.min(cost)));
        }
        return;
    }
    let (i, j) = (cell / m, cell % m);
    let hi = rows[i].min(cols[j]);
    // the last cell of a row must absorb whatever supply is left
    let lo = if j + 1 == m { rows[i] } else { 0 };
    if lo > hi {
        return;
    }
    for x in lo..=hi {
        rows[i] -= x;
        cols[j] -= x;
        enumerate(
            inst,
            cell + 1,
            n,
            m,
            rows,
            cols,
            cost + x * inst.cost(i, j),
            best,
        );
        rows[i] += x;
        cols[j] += x;
    }
}

/// Minimum-cost perfect matching by trying every permutation (n <= 8).
pub fn brute_force_assignment(cost: &[i64], n: usize) -> i64 {
    fn go(cost: &[i64], n: usize, row: usize, used: &mut [bool], acc: i64, best: &mut i64) {
        if row == n {
            *best = (*best).min(acc);
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                go(cost, n, row + 1, used, acc + cost[row * n + j], best);
                used[j] = false;
            }
        }
    }
    let mut best = i64::MAX;
    go(cost, n, 0, &mut vec![false; n], 0, &mut best);
    best
}

/// Why a certificate failed to verify.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("certificate check failed: {0}")]
pub struct CertificateFailure(pub String);

/// Nonnegative reduced cost `C[i][j] + pi_i - pi_j >= 0` on every arc and
/// zero reduced cost wherever flow is routed.
pub fn check_potentials(
    inst: &OTInstance,
    flow: &Flow,
    cert: &Certificate,
) -> Result<(), CertificateFailure> {
    let Certificate::Potentials { supply, demand } = cert else {
        return Err(CertificateFailure("not a potential certificate".into()));
    };
    for i in 0..inst.n() {
        for j in 0..inst.m() {
            let rc = inst.cost(i, j) + supply[i] - demand[j];
            if rc < 0 {
                return Err(CertificateFailure(format!(
                    "arc ({i}, {j}) has reduced cost {rc}"
                )));
            }
        }
    }
    for e in flow.entries() {
        let rc = inst.cost(e.row, e.col) + supply[e.row] - demand[e.col];
        if rc != 0 {
            return Err(CertificateFailure(format!(
                "flow on ({}, {}) with reduced cost {rc}",
                e.row, e.col
            )));
        }
    }
    Ok(())
}

/// Dual feasibility `u[i] + v[j] <= C[i][j]` and tightness of every matched
/// edge, against the cost matrix the duals were computed for.
pub fn check_duals(
    inst: &OTInstance,
    flow: &Flow,
    cert: &Certificate,
) -> Result<(), CertificateFailure> {
    let Certificate::Duals { u, v, costs } = cert else {
        return Err(CertificateFailure("not a dual certificate".into()));
    };
    let m = inst.m();
    let c = |i: usize, j: usize| match costs {
        Some(q) => q[i * m + j],
        None => inst.cost(i, j),
    };
    for i in 0..inst.n() {
        for j in 0..m {
            if u[i] + v[j] > c(i, j) {
                return Err(CertificateFailure(format!(
                    "dual infeasible at ({i}, {j}): {} + {} > {}",
                    u[i],
                    v[j],
                    c(i, j)
                )));
            }
        }
    }
    for e in flow.entries() {
        if u[e.row] + v[e.col] != c(e.row, e.col) {
            return Err(CertificateFailure(format!(
                "matched edge ({}, {}) is not tight",
                e.row, e.col
            )));
        }
    }
    Ok(())
}

/// epsilon-complementary slackness of an assignment with object prices, in
/// reward units `R = -C`: each matched bidder is within `epsilon` of its best
/// net value.
pub fn check_epsilon_cs(
    inst: &OTInstance,
    flow: &Flow,
    cert: &Certificate,
) -> Result<(), CertificateFailure> {
    let Certificate::Prices { prices, epsilon } = cert else {
        return Err(CertificateFailure("not a price certificate".into()));
    };
    for e in flow.entries() {
        let i = e.row;
        let best = (0..inst.m())
            .map(|k| -(inst.cost(i, k) as f64) - prices[k])
            .fold(f64::NEG_INFINITY, f64::max);
        let got = -(inst.cost(i, e.col) as f64) - prices[e.col];
        let slack = 1e-9 * (1.0 + best.abs());
        if got < best - epsilon - slack {
            return Err(CertificateFailure(format!(
                "bidder {i} holds value {got} but could get {best} (eps {epsilon})"
            )));
        }
    }
    Ok(())
}
