//! Forward auction for the assignment problem, plain and with epsilon scaling.
//!
//! Bidders are supply rows and objects are demand columns, with reward
//! `R[i][j] = -C[i][j]`. An unassigned bidder (lowest index first) bids for
//! the object of best net value `R[i][j] - p[j]`, raising its price by the gap
//! to the second-best value plus `epsilon`, and evicts the previous holder.
//! On integral costs the final assignment is within `n * epsilon` of optimal,
//! so any `epsilon < 1/n` is exact.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::hungarian::{check_unit, AssignmentError, Matching};
use crate::model::{Certificate, Deadline, OTInstance, SolveResult, SolveStatus};

/// How the bidding loop finishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Completion {
    /// Bid until every bidder holds an object.
    #[default]
    Full,
    /// Stop bidding once at most two bidders are left and give them the
    /// cheaper of the (at most two) ways to take the remaining objects. The
    /// last pairs are not covered by the epsilon-slackness guarantee.
    LastTwo,
}

#[derive(Debug, Clone, Copy)]
pub struct AuctionOptions {
    pub completion: Completion,
    /// Total bid budget across all epsilon phases.
    pub max_bids: u64,
    pub deadline: Deadline,
}

impl Default for AuctionOptions {
    fn default() -> Self {
        Self {
            completion: Completion::Full,
            max_bids: 1_000_000_000,
            deadline: Deadline::NONE,
        }
    }
}

/// Prices, assignment and slack of a running auction.
#[derive(Debug, Clone)]
pub struct AuctionState {
    pub prices: Vec<f64>,
    pub assignment: Matching,
    pub epsilon: f64,
    pub bids: u64,
}

impl AuctionState {
    pub fn new(n: usize) -> Self {
        Self {
            prices: vec![0.0; n],
            assignment: Matching::empty(n, n),
            epsilon: 0.0,
            bids: 0,
        }
    }

    /// Largest violation of epsilon-complementary slackness over matched
    /// bidders (zero or negative when it holds).
    pub fn cs_violation(&self, inst: &OTInstance) -> f64 {
        let n = inst.n();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..n {
            let Some(j) = self.assignment.match_of_row[i] else {
                continue;
            };
            let row = inst.cost_row(i);
            let best = (0..n)
                .map(|k| -(row[k] as f64) - self.prices[k])
                .fold(f64::NEG_INFINITY, f64::max);
            let got = -(row[j] as f64) - self.prices[j];
            worst = worst.max(best - self.epsilon - got);
        }
        worst
    }
}

enum PhaseEnd {
    Done,
    OutOfBudget,
}

fn run_phase(inst: &OTInstance, state: &mut AuctionState, opts: &AuctionOptions) -> PhaseEnd {
    let n = inst.n();
    let eps = state.epsilon;
    state.assignment = Matching::empty(n, n);
    let mut queue: BinaryHeap<Reverse<usize>> = (0..n).map(Reverse).collect();
    let stop_at = match opts.completion {
        Completion::Full => 0,
        Completion::LastTwo => 2,
    };
    while queue.len() > stop_at {
        let Reverse(i) = queue.pop().expect("non-empty queue");
        if state.bids >= opts.max_bids
            || (state.bids.is_multiple_of(4096) && opts.deadline.expired())
        {
            queue.push(Reverse(i));
            return PhaseEnd::OutOfBudget;
        }
        state.bids += 1;
        let row = inst.cost_row(i);
        let (mut best, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut best_j = 0;
        for (j, (&c, &p)) in row.iter().zip(&state.prices).enumerate() {
            let value = -(c as f64) - p;
            if value > best {
                second = best;
                best = value;
                best_j = j;
            } else if value > second {
                second = value;
            }
        }
        let increment = if second.is_finite() {
            best - second + eps
        } else {
            eps
        };
        state.prices[best_j] += increment;
        if let Some(prev) = state.assignment.match_of_col[best_j] {
            state.assignment.match_of_row[prev] = None;
            queue.push(Reverse(prev));
        }
        state.assignment.assign(i, best_j);
    }
    if !queue.is_empty() {
        finish_last(inst, state, queue.into_iter().map(|Reverse(i)| i).collect());
    }
    PhaseEnd::Done
}

/// Assigns the one or two bidders left over to the free objects, taking the
/// cheaper of the two pairings when there is a choice.
fn finish_last(inst: &OTInstance, state: &mut AuctionState, mut bidders: Vec<usize>) {
    bidders.sort_unstable();
    let free: Vec<usize> = (0..inst.n())
        .filter(|&j| state.assignment.match_of_col[j].is_none())
        .collect();
    match (bidders.as_slice(), free.as_slice()) {
        ([x], [a]) => state.assignment.assign(*x, *a),
        ([x, y], [a, b]) => {
            let straight = inst.cost(*x, *a) + inst.cost(*y, *b);
            let crossed = inst.cost(*x, *b) + inst.cost(*y, *a);
            if straight <= crossed {
                state.assignment.assign(*x, *a);
                state.assignment.assign(*y, *b);
            } else {
                state.assignment.assign(*x, *b);
                state.assignment.assign(*y, *a);
            }
        }
        _ => unreachable!("leftover bidders and free objects differ in number"),
    }
}

fn result(
    name: &'static str,
    inst: &OTInstance,
    state: AuctionState,
    timed_out: bool,
    started: Instant,
) -> SolveResult {
    let flow = state.assignment.to_flow();
    let exact = !timed_out && (inst.n() as f64) * state.epsilon < 1.0;
    SolveResult::from_flow(name, inst, flow, state.bids, started)
        .exact(exact)
        .status(if timed_out {
            SolveStatus::TimedOut
        } else {
            SolveStatus::Converged
        })
        .certificate(Certificate::Prices {
            prices: state.prices,
            epsilon: state.epsilon,
        })
}

/// Single-phase auction at a fixed `epsilon`, from zero prices.
pub fn solve_auction(inst: &OTInstance, epsilon: f64) -> Result<SolveResult, AssignmentError> {
    solve_auction_with(inst, epsilon, &AuctionOptions::default())
}

pub fn solve_auction_with(
    inst: &OTInstance,
    epsilon: f64,
    opts: &AuctionOptions,
) -> Result<SolveResult, AssignmentError> {
    check_unit(inst)?;
    assert!(epsilon > 0.0, "epsilon must be positive");
    let started = Instant::now();
    let mut state = AuctionState::new(inst.n());
    state.epsilon = epsilon;
    let end = run_phase(inst, &mut state, opts);
    debug_assert!(
        matches!(end, PhaseEnd::OutOfBudget)
            || opts.completion == Completion::LastTwo
            || state.cs_violation(inst) <= 1e-9 * (1.0 + inst.max_cost() as f64)
    );
    Ok(result(
        "auction",
        inst,
        state,
        matches!(end, PhaseEnd::OutOfBudget),
        started,
    ))
}

/// Default epsilon-scaling parameters: start at `N/2`, divide by 4.
pub fn default_scaling(inst: &OTInstance, epsilon_final: f64) -> (f64, f64) {
    ((inst.max_cost() as f64 / 2.0).max(epsilon_final), 4.0)
}

/// Auction rounds at `eps0, eps0/theta, ...` down to `eps_final`, keeping
/// prices and releasing every bidder between rounds.
pub fn solve_auction_scaled(
    inst: &OTInstance,
    epsilon0: f64,
    theta: f64,
    epsilon_final: f64,
) -> Result<SolveResult, AssignmentError> {
    solve_auction_scaled_with(
        inst,
        epsilon0,
        theta,
        epsilon_final,
        &AuctionOptions::default(),
    )
}

pub fn solve_auction_scaled_with(
    inst: &OTInstance,
    epsilon0: f64,
    theta: f64,
    epsilon_final: f64,
    opts: &AuctionOptions,
) -> Result<SolveResult, AssignmentError> {
    check_unit(inst)?;
    assert!(epsilon_final > 0.0 && epsilon0 >= epsilon_final && theta > 1.0);
    let started = Instant::now();
    let mut state = AuctionState::new(inst.n());
    let mut eps = epsilon0;
    let mut timed_out = false;
    loop {
        state.epsilon = eps;
        if let PhaseEnd::OutOfBudget = run_phase(inst, &mut state, opts) {
            timed_out = true;
            break;
        }
        debug_assert!(
            opts.completion == Completion::LastTwo
                || state.cs_violation(inst) <= 1e-9 * (1.0 + inst.max_cost() as f64)
        );
        if eps <= epsilon_final {
            break;
        }
        eps = (eps / theta).max(epsilon_final);
    }
    Ok(result("auction_scaled", inst, state, timed_out, started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Objective;
    use crate::oracle::check_epsilon_cs;

    fn two() -> OTInstance {
        OTInstance::assignment("t", &[vec![1, 3], vec![2, 1]]).unwrap()
    }

    #[test]
    fn small_epsilon_is_exact() {
        let res = solve_auction(&two(), 0.4).unwrap();
        assert_eq!(res.objective, Objective::Integer(2));
        assert!(res.exact);
        check_epsilon_cs(&two(), &res.flow, res.certificate.as_ref().unwrap()).unwrap();
    }

    #[test]
    fn constant_costs() {
        let inst = OTInstance::assignment("k", &vec![vec![4; 6]; 6]).unwrap();
        let res = solve_auction(&inst, 0.1).unwrap();
        assert_eq!(res.objective, Objective::Integer(24));
        assert_eq!(res.residue, 0.0);
    }

    #[test]
    fn scaled_single_round_equals_plain() {
        let inst = two();
        let a = solve_auction(&inst, 0.3).unwrap();
        let b = solve_auction_scaled(&inst, 0.3, 4.0, 0.3).unwrap();
        assert_eq!(a.objective, b.objective);
        assert_eq!(a.flow, b.flow);
        assert_eq!(a.certificate, b.certificate);
    }

    #[test]
    fn scaled_two_by_two() {
        let res = solve_auction_scaled(&two(), 4.0, 4.0, 0.4).unwrap();
        assert_eq!(res.objective, Objective::Integer(2));
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let inst = OTInstance::assignment("b", &vec![vec![1, 2, 3]; 3]).unwrap();
        let opts = AuctionOptions {
            max_bids: 2,
            ..Default::default()
        };
        let res = solve_auction_with(&inst, 0.01, &opts).unwrap();
        assert_eq!(res.status, SolveStatus::TimedOut);
        assert!(!res.exact);
        assert!(res.residue > 0.0);
    }

    #[test]
    fn last_two_completion_is_perfect() {
        let inst = OTInstance::assignment(
            "l",
            &[
                vec![5, 1, 9, 4],
                vec![2, 8, 3, 7],
                vec![6, 4, 1, 2],
                vec![3, 9, 8, 1],
            ],
        )
        .unwrap();
        let opts = AuctionOptions {
            completion: Completion::LastTwo,
            ..Default::default()
        };
        let res = solve_auction_with(&inst, 0.2, &opts).unwrap();
        assert_eq!(res.residue, 0.0);
        assert_eq!(res.flow.entries().len(), 4);
    }

    #[test]
    fn single_bidder() {
        let inst = OTInstance::assignment("1", &[vec![3]]).unwrap();
        assert_eq!(
            solve_auction(&inst, 1.0).unwrap().objective,
            Objective::Integer(3)
        );
    }
}
