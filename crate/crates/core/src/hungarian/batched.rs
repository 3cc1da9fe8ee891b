use std::collections::VecDeque;
use std::time::Instant;

use super::{check_unit, quantize_costs, AssignmentError, DualPotentials, Matching};
use crate::model::{Certificate, Deadline, OTInstance, SolveResult, SolveStatus};

const UNSEEN: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BatchedKmStats {
    /// Tight-subgraph rebuilds.
    pub phases: u64,
    /// Hopcroft-Karp rounds (one layered search plus extraction each).
    pub rounds: u64,
    pub augmentations: u64,
    pub dual_adjustments: u64,
}

/// Batched Kuhn-Munkres on an integer cost matrix.
///
/// Each phase collects the tight edges `u[i] + v[j] == C[i][j]`, then runs
/// Hopcroft-Karp rounds on that subgraph, augmenting a maximal set of
/// vertex-disjoint shortest augmenting paths per round. When the tight
/// subgraph has no augmenting path left, duals move across the cut between
/// the vertices reachable from free rows and the rest, by the smallest slack
/// crossing it, until a free column becomes reachable.
pub struct BatchedKm<'a> {
    costs: &'a [i64],
    n: usize,
    u: Vec<i64>,
    v: Vec<i64>,
    matching: Matching,
    stats: BatchedKmStats,
    // tight subgraph in CSR form
    adj_start: Vec<usize>,
    adj: Vec<usize>,
    dist: Vec<u32>,
    cursor: Vec<usize>,
}

impl<'a> BatchedKm<'a> {
    pub fn new(costs: &'a [i64], n: usize) -> Self {
        assert_eq!(costs.len(), n * n);
        let mut u = vec![0i64; n];
        let mut v = vec![i64::MAX; n];
        for i in 0..n {
            u[i] = costs[i * n..(i + 1) * n].iter().copied().min().unwrap_or(0);
        }
        for i in 0..n {
            for (j, &c) in costs[i * n..(i + 1) * n].iter().enumerate() {
                v[j] = v[j].min(c - u[i]);
            }
        }
        if n == 0 {
            v.clear();
        }
        Self {
            costs,
            n,
            u,
            v,
            matching: Matching::empty(n, n),
            stats: BatchedKmStats::default(),
            adj_start: vec![0; n + 1],
            adj: Vec::new(),
            dist: vec![UNSEEN; n],
            cursor: vec![0; n],
        }
    }

    pub fn stats(&self) -> BatchedKmStats {
        self.stats
    }

    pub fn matching(&self) -> &Matching {
        &self.matching
    }

    pub fn duals(&self) -> DualPotentials {
        DualPotentials {
            u: self.u.clone(),
            v: self.v.clone(),
        }
    }

    #[inline]
    fn slack(&self, i: usize, j: usize) -> i64 {
        self.costs[i * self.n + j] - self.u[i] - self.v[j]
    }

    fn build_tight(&mut self) {
        let n = self.n;
        self.adj.clear();
        for i in 0..n {
            self.adj_start[i] = self.adj.len();
            let row = &self.costs[i * n..(i + 1) * n];
            let ui = self.u[i];
            for (j, (&c, &vj)) in row.iter().zip(&self.v).enumerate() {
                let s = c - ui - vj;
                debug_assert!(s >= 0, "dual infeasible at ({i}, {j}): slack {s}");
                if s == 0 {
                    self.adj.push(j);
                }
            }
        }
        self.adj_start[n] = self.adj.len();
    }

    /// Layered BFS from all free rows. Returns the layer at which a free
    /// column was first reached.
    fn layer(&mut self) -> Option<u32> {
        let mut queue = VecDeque::new();
        for i in 0..self.n {
            if self.matching.match_of_row[i].is_none() {
                self.dist[i] = 0;
                queue.push_back(i);
            } else {
                self.dist[i] = UNSEEN;
            }
        }
        let mut limit = None;
        while let Some(i) = queue.pop_front() {
            let d = self.dist[i];
            if limit.is_some_and(|l| d >= l) {
                continue;
            }
            for &j in &self.adj[self.adj_start[i]..self.adj_start[i + 1]] {
                match self.matching.match_of_col[j] {
                    None => {
                        limit.get_or_insert(d + 1);
                    }
                    Some(r) if self.dist[r] == UNSEEN => {
                        self.dist[r] = d + 1;
                        queue.push_back(r);
                    }
                    Some(_) => {}
                }
            }
        }
        limit
    }

    fn extend(&mut self, i: usize, limit: u32) -> bool {
        while self.cursor[i] < self.adj_start[i + 1] {
            let j = self.adj[self.cursor[i]];
            self.cursor[i] += 1;
            let next = match self.matching.match_of_col[j] {
                None => self.dist[i] + 1 == limit,
                Some(r) => self.dist[r] == self.dist[i] + 1 && self.extend(r, limit),
            };
            if next {
                self.matching.assign(i, j);
                return true;
            }
        }
        self.dist[i] = UNSEEN;
        false
    }

    /// Augments along a maximal set of disjoint shortest paths. Returns the
    /// number of paths found.
    fn augment_round(&mut self) -> usize {
        let Some(limit) = self.layer() else {
            return 0;
        };
        for i in 0..self.n {
            self.cursor[i] = self.adj_start[i];
        }
        let mut found = 0;
        for i in 0..self.n {
            if self.matching.match_of_row[i].is_none() && self.dist[i] == 0 && self.extend(i, limit)
            {
                found += 1;
            }
        }
        found
    }

    /// Raises duals on the reachable side until some free column becomes
    /// reachable through tight edges.
    fn adjust_duals(&mut self) {
        let n = self.n;
        let mut row_in = vec![false; n];
        let mut col_in = vec![false; n];
        let mut slack = vec![i64::MAX; n];
        let mut queue: Vec<usize> = (0..n)
            .filter(|&i| self.matching.match_of_row[i].is_none())
            .collect();
        for &i in &queue {
            row_in[i] = true;
        }
        let mut reached: Vec<usize> = Vec::new();
        loop {
            while let Some(i) = queue.pop() {
                for j in 0..n {
                    if col_in[j] {
                        continue;
                    }
                    let s = self.slack(i, j);
                    if s == 0 {
                        col_in[j] = true;
                        reached.push(j);
                        match self.matching.match_of_col[j] {
                            None => return,
                            Some(r) => {
                                if !row_in[r] {
                                    row_in[r] = true;
                                    queue.push(r);
                                }
                            }
                        }
                    } else if s < slack[j] {
                        slack[j] = s;
                    }
                }
            }
            let delta = (0..n)
                .filter(|&j| !col_in[j])
                .map(|j| slack[j])
                .min()
                .expect("an unreached column remains while the matching is imperfect");
            debug_assert!(delta > 0);
            for i in 0..n {
                if row_in[i] {
                    self.u[i] += delta;
                }
            }
            for j in 0..n {
                if col_in[j] {
                    self.v[j] -= delta;
                } else {
                    slack[j] -= delta;
                }
            }
            self.stats.dual_adjustments += 1;
            let mut free_reached = false;
            for j in 0..n {
                if !col_in[j] && slack[j] == 0 {
                    col_in[j] = true;
                    match self.matching.match_of_col[j] {
                        None => free_reached = true,
                        Some(r) => {
                            if !row_in[r] {
                                row_in[r] = true;
                                queue.push(r);
                            }
                        }
                    }
                }
            }
            if free_reached {
                return;
            }
        }
    }

    /// Runs to a perfect matching. Returns false if the deadline passed.
    pub fn run(&mut self, deadline: Deadline) -> bool {
        let n = self.n;
        let mut matched = self.matching.size();
        while matched < n {
            if deadline.expired() {
                return false;
            }
            self.stats.phases += 1;
            self.build_tight();
            loop {
                let found = self.augment_round();
                self.stats.rounds += 1;
                if found == 0 {
                    break;
                }
                matched += found;
                self.stats.augmentations += found as u64;
            }
            if matched < n {
                let before = self.duals().value();
                self.adjust_duals();
                debug_assert!(self.duals().value() > before);
            }
        }
        debug_assert!(self.duals().is_feasible(self.costs));
        true
    }
}

/// Batched KM with quantization level `B = levels`.
pub fn solve_batched_km(inst: &OTInstance, levels: i64) -> Result<SolveResult, AssignmentError> {
    solve_batched_km_with(inst, levels, Deadline::NONE)
}

/// Optimal for the quantized costs `floor(C * B / N)`; in original units
/// within `n * N / B` of the optimum.
pub fn solve_batched_km_with(
    inst: &OTInstance,
    levels: i64,
    deadline: Deadline,
) -> Result<SolveResult, AssignmentError> {
    check_unit(inst)?;
    let started = Instant::now();
    let q = quantize_costs(inst.costs(), levels)?;
    let mut solver = BatchedKm::new(&q.costs, inst.n());
    let done = solver.run(deadline);
    let flow = solver.matching().to_flow();
    let duals = solver.duals();
    let phases = solver.stats().phases;
    // total loss is below n * unit, so under one unit of integral cost is exact
    let exact = q.unit == 1.0 || q.unit * inst.n() as f64 <= 1.0;
    let res =
        SolveResult::from_flow("batched_km", inst, flow, phases, started).exact(done && exact);
    Ok(if done {
        res.certificate(Certificate::Duals {
            u: duals.u,
            v: duals.v,
            costs: Some(q.costs),
        })
    } else {
        res.status(SolveStatus::TimedOut)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hungarian::solve_km;
    use crate::model::Objective;
    use crate::oracle::{brute_force_assignment, check_duals};

    #[test]
    fn identity_quantization_matches_km() {
        let inst = OTInstance::assignment("t", &[vec![1, 3], vec![2, 1]]).unwrap();
        let res = solve_batched_km(&inst, inst.max_cost()).unwrap();
        assert_eq!(res.objective, Objective::Integer(2));
        assert_eq!(res.objective, solve_km(&inst).unwrap().objective);
        check_duals(&inst, &res.flow, res.certificate.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn constant_costs_take_one_phase() {
        let rows = vec![vec![7; 5]; 5];
        let inst = OTInstance::assignment("k", &rows).unwrap();
        let q = quantize_costs(inst.costs(), 100).unwrap();
        let mut s = BatchedKm::new(&q.costs, 5);
        assert!(s.run(Deadline::NONE));
        assert_eq!(s.stats().phases, 1);
        assert!(s.matching().is_perfect());
        let res = solve_batched_km(&inst, 100).unwrap();
        assert_eq!(res.objective, Objective::Integer(35));
    }

    #[test]
    fn matches_permutation_oracle_on_small_matrices() {
        let mut seed = 17u64;
        for n in 1..=6 {
            for _ in 0..20 {
                let rows: Vec<Vec<i64>> = (0..n)
                    .map(|_| {
                        (0..n)
                            .map(|_| {
                                seed = seed
                                    .wrapping_mul(6364136223846793005)
                                    .wrapping_add(1442695040888963407);
                                ((seed >> 33) % 20) as i64
                            })
                            .collect()
                    })
                    .collect();
                let inst = OTInstance::assignment("r", &rows).unwrap();
                let best = brute_force_assignment(inst.costs(), n);
                let levels = inst.max_cost().max(1) * n as i64;
                let res = solve_batched_km(&inst, levels).unwrap();
                assert_eq!(res.objective, Objective::Integer(best));
                check_duals(&inst, &res.flow, res.certificate.as_ref().unwrap()).unwrap();
            }
        }
    }

    #[test]
    fn coarse_levels_stay_within_bound() {
        let rows: Vec<Vec<i64>> = (0..8)
            .map(|i| {
                (0..8)
                    .map(|j| ((i * 37 + j * 11) % 23) as i64 * 100)
                    .collect()
            })
            .collect();
        let inst = OTInstance::assignment("c", &rows).unwrap();
        let exact = solve_km(&inst).unwrap().objective.value();
        for levels in [1, 2, 4, 8, 16] {
            let res = solve_batched_km(&inst, levels).unwrap();
            let bound = 8.0 * inst.max_cost() as f64 / levels as f64;
            assert!(res.objective.value() <= exact + bound);
            assert!(res.objective.value() >= exact);
        }
    }
}
