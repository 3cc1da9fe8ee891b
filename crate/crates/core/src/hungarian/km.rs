use std::time::Instant;

use super::{check_unit, AssignmentError, DualPotentials, Matching};
use crate::model::{Certificate, Deadline, OTInstance, SolveResult, SolveStatus};

/// O(n^3) Hungarian method with per-row slack arrays.
///
/// Rows are inserted one at a time; each insertion grows a shortest
/// alternating path tree over columns, adjusting duals by the smallest slack
/// until a free column is reached. Returns `None` if the deadline passes.
pub fn km_assign(
    costs: &[i64],
    n: usize,
    deadline: Deadline,
) -> Option<(Matching, DualPotentials)> {
    const INF: i64 = i64::MAX / 4;
    // 1-based, column 0 is the virtual source
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![INF; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=n {
        if i % 64 == 0 && deadline.expired() {
            return None;
        }
        p[0] = i;
        let mut j0 = 0usize;
        minv.fill(INF);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let row = &costs[(i0 - 1) * n..i0 * n];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut matching = Matching::empty(n, n);
    for j in 1..=n {
        if p[j] > 0 {
            matching.assign(p[j] - 1, j - 1);
        }
    }
    let duals = DualPotentials {
        u: u[1..].to_vec(),
        v: v[1..].to_vec(),
    };
    Some((matching, duals))
}

/// Exact minimum-cost perfect matching.
pub fn solve_km(inst: &OTInstance) -> Result<SolveResult, AssignmentError> {
    solve_km_with(inst, Deadline::NONE)
}

pub fn solve_km_with(
    inst: &OTInstance,
    deadline: Deadline,
) -> Result<SolveResult, AssignmentError> {
    check_unit(inst)?;
    let started = Instant::now();
    let n = inst.n();
    match km_assign(inst.costs(), n, deadline) {
        Some((matching, duals)) => {
            debug_assert_eq!(duals.value(), matching.cost(inst));
            Ok(
                SolveResult::from_flow("km", inst, matching.to_flow(), n as u64, started)
                    .exact(true)
                    .certificate(Certificate::Duals {
                        u: duals.u,
                        v: duals.v,
                        costs: None,
                    }),
            )
        }
        None => Ok(
            SolveResult::from_flow("km", inst, crate::model::Flow::empty(n, n), 0, started)
                .status(SolveStatus::TimedOut),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Objective;
    use crate::oracle::check_duals;

    #[test]
    fn zero_diagonal_gives_identity() {
        let inst =
            OTInstance::assignment("d", &[vec![0, 4, 5], vec![3, 0, 9], vec![2, 7, 0]]).unwrap();
        let res = solve_km(&inst).unwrap();
        assert_eq!(res.objective, Objective::Integer(0));
        for e in res.flow.entries() {
            assert_eq!(e.row, e.col);
        }
    }

    #[test]
    fn two_by_two() {
        let inst = OTInstance::assignment("t", &[vec![1, 3], vec![2, 1]]).unwrap();
        let res = solve_km(&inst).unwrap();
        assert_eq!(res.objective, Objective::Integer(2));
        let cert = res.certificate.as_ref().unwrap();
        check_duals(&inst, &res.flow, cert).unwrap();
        let Certificate::Duals { u, v, .. } = cert else {
            unreachable!()
        };
        assert_eq!(u.iter().sum::<i64>() + v.iter().sum::<i64>(), 2);
    }

    #[test]
    fn rejects_non_unit() {
        let inst =
            OTInstance::from_rows("t", &[vec![1, 3], vec![2, 1]], vec![2, 1], vec![1, 2]).unwrap();
        assert_eq!(solve_km(&inst).unwrap_err(), AssignmentError::NotUnitSquare);
        let rect = OTInstance::from_rows("r", &[vec![1, 2]], vec![2], vec![1, 1]).unwrap();
        assert!(solve_km(&rect).is_err());
    }
}
