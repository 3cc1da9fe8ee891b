//! Transport instances, flows and solver results.
//!
//! An [`OTInstance`] is a balanced transportation problem: an `n x m` matrix of
//! nonnegative integer costs, integer supplies on the rows and integer demands
//! on the columns. Every solver in the crate returns a [`SolveResult`] whose
//! objective and residue are recomputed from the returned [`Flow`].

use std::fmt;
use std::time::{Duration, Instant};

use thiserror::Error;

/// First violated invariant found by [`validate_instance`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("instance has no supply or no demand nodes")]
    Empty,
    #[error("negative cost {cost} at ({row}, {col})")]
    NegativeCost { row: usize, col: usize, cost: i64 },
    #[error("supply {value} at row {row} is not positive")]
    NonPositiveSupply { row: usize, value: i64 },
    #[error("demand {value} at column {col} is not positive")]
    NonPositiveDemand { col: usize, value: i64 },
    #[error("supply/demand totals differ ({supply} vs {demand})")]
    Unbalanced { supply: i128, demand: i128 },
    #[error("total demand {total} times max cost {max_cost} overflows 64-bit objectives")]
    Overflow { total: i128, max_cost: i64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("cost matrix has {got} entries, expected {n} x {m}")]
    CostShape { n: usize, m: usize, got: usize },
    #[error("expected {expected} {side} values, got {got}")]
    VectorLength {
        side: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("flow entry ({row}, {col}) is outside a {n} x {m} instance")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        n: usize,
        m: usize,
    },
    #[error("flow amount {amount} at ({row}, {col}) is negative or not finite")]
    BadAmount { row: usize, col: usize, amount: f64 },
}

/// A balanced transportation problem with integer data.
#[derive(Debug, Clone, PartialEq)]
pub struct OTInstance {
    name: String,
    n: usize,
    m: usize,
    cost: Vec<i64>,
    supplies: Vec<i64>,
    demands: Vec<i64>,
    scale: Option<u64>,
}

impl OTInstance {
    /// Builds an instance from a row-major cost matrix. Only shapes are checked
    /// here; use [`validate_instance`] for the full invariants.
    pub fn new(
        name: impl Into<String>,
        n: usize,
        m: usize,
        cost: Vec<i64>,
        supplies: Vec<i64>,
        demands: Vec<i64>,
    ) -> Result<Self, ModelError> {
        if cost.len() != n * m {
            return Err(ModelError::CostShape {
                n,
                m,
                got: cost.len(),
            });
        }
        if supplies.len() != n {
            return Err(ModelError::VectorLength {
                side: "supply",
                expected: n,
                got: supplies.len(),
            });
        }
        if demands.len() != m {
            return Err(ModelError::VectorLength {
                side: "demand",
                expected: m,
                got: demands.len(),
            });
        }
        Ok(Self {
            name: name.into(),
            n,
            m,
            cost,
            supplies,
            demands,
            scale: None,
        })
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows(
        name: impl Into<String>,
        rows: &[Vec<i64>],
        supplies: Vec<i64>,
        demands: Vec<i64>,
    ) -> Result<Self, ModelError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut cost = Vec::with_capacity(n * m);
        for row in rows {
            if row.len() != m {
                return Err(ModelError::CostShape {
                    n,
                    m,
                    got: cost.len() + row.len(),
                });
            }
            cost.extend_from_slice(row);
        }
        Self::new(name, n, m, cost, supplies, demands)
    }

    /// Unit supplies and demands on a square cost matrix.
    pub fn assignment(name: impl Into<String>, rows: &[Vec<i64>]) -> Result<Self, ModelError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        Self::from_rows(name, rows, vec![1; n], vec![1; m])
    }

    /// Records the distance-to-integer scale the costs were produced with.
    pub fn with_scale(mut self, scale: u64) -> Self {
        self.scale = Some(scale);
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn scale(&self) -> Option<u64> {
        self.scale
    }

    #[inline]
    pub fn cost(&self, i: usize, j: usize) -> i64 {
        self.cost[i * self.m + j]
    }

    /// Row-major cost matrix.
    pub fn costs(&self) -> &[i64] {
        &self.cost
    }

    pub fn cost_row(&self, i: usize) -> &[i64] {
        &self.cost[i * self.m..(i + 1) * self.m]
    }

    pub fn supplies(&self) -> &[i64] {
        &self.supplies
    }

    pub fn demands(&self) -> &[i64] {
        &self.demands
    }

    /// Largest entry of the cost matrix (N).
    pub fn max_cost(&self) -> i64 {
        self.cost.iter().copied().max().unwrap_or(0)
    }

    pub fn min_cost(&self) -> i64 {
        self.cost.iter().copied().min().unwrap_or(0)
    }

    /// Total supply (S). Equal to the total demand on a valid instance.
    pub fn total_supply(&self) -> i64 {
        self.supplies.iter().sum()
    }

    pub fn total_demand(&self) -> i64 {
        self.demands.iter().sum()
    }

    /// True when every supply and demand is one and the matrix is square.
    pub fn is_unit(&self) -> bool {
        self.n == self.m
            && self.supplies.iter().all(|&s| s == 1)
            && self.demands.iter().all(|&d| d == 1)
    }

    /// Dense cost matrix memory footprint in bytes.
    pub fn dense_bytes(&self) -> usize {
        self.cost.len() * std::mem::size_of::<i64>()
    }
}

/// Checks every instance invariant and reports the first one violated.
pub fn validate_instance(inst: &OTInstance) -> Result<(), Violation> {
    if inst.n == 0 || inst.m == 0 {
        return Err(Violation::Empty);
    }
    for i in 0..inst.n {
        for (j, &c) in inst.cost_row(i).iter().enumerate() {
            if c < 0 {
                return Err(Violation::NegativeCost {
                    row: i,
                    col: j,
                    cost: c,
                });
            }
        }
    }
    if let Some((row, &value)) = inst.supplies.iter().enumerate().find(|(_, &s)| s < 1) {
        return Err(Violation::NonPositiveSupply { row, value });
    }
    if let Some((col, &value)) = inst.demands.iter().enumerate().find(|(_, &d)| d < 1) {
        return Err(Violation::NonPositiveDemand { col, value });
    }
    let supply: i128 = inst.supplies.iter().map(|&s| s as i128).sum();
    let demand: i128 = inst.demands.iter().map(|&d| d as i128).sum();
    if supply != demand {
        return Err(Violation::Unbalanced { supply, demand });
    }
    let max_cost = inst.max_cost();
    if supply * (max_cost as i128) > i64::MAX as i128 {
        return Err(Violation::Overflow {
            total: supply,
            max_cost,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowEntry {
    pub row: usize,
    pub col: usize,
    pub amount: f64,
}

/// Sparse transport plan. Zero amounts are dropped on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    n: usize,
    m: usize,
    entries: Vec<FlowEntry>,
    row_sums: Vec<f64>,
    col_sums: Vec<f64>,
}

impl Flow {
    pub fn empty(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            entries: Vec::new(),
            row_sums: vec![0.0; n],
            col_sums: vec![0.0; m],
        }
    }

    pub fn new(
        n: usize,
        m: usize,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, ModelError> {
        let mut flow = Self::empty(n, m);
        for (row, col, amount) in entries {
            if row >= n || col >= m {
                return Err(ModelError::IndexOutOfBounds { row, col, n, m });
            }
            if !amount.is_finite() || amount < 0.0 {
                return Err(ModelError::BadAmount { row, col, amount });
            }
            if amount == 0.0 {
                continue;
            }
            flow.row_sums[row] += amount;
            flow.col_sums[col] += amount;
            flow.entries.push(FlowEntry { row, col, amount });
        }
        Ok(flow)
    }

    /// Flow of a (possibly partial) assignment; `None` rows are unmatched.
    pub fn from_assignment(n: usize, m: usize, match_of_row: &[Option<usize>]) -> Self {
        Self::new(
            n,
            m,
            match_of_row
                .iter()
                .enumerate()
                .filter_map(|(i, j)| j.map(|j| (i, j, 1.0))),
        )
        .expect("assignment indices in range")
    }

    /// Flow from a dense row-major matrix, keeping the nonzero entries.
    pub fn from_dense(n: usize, m: usize, dense: &[f64]) -> Result<Self, ModelError> {
        assert_eq!(dense.len(), n * m);
        Self::new(
            n,
            m,
            dense
                .iter()
                .enumerate()
                .map(|(k, &x)| (k / m.max(1), k % m.max(1), x)),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn entries(&self) -> &[FlowEntry] {
        &self.entries
    }

    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    pub fn col_sums(&self) -> &[f64] {
        &self.col_sums
    }

    pub fn total(&self) -> f64 {
        self.row_sums.iter().sum()
    }

    pub fn is_integral(&self) -> bool {
        self.entries
            .iter()
            .all(|e| e.amount.fract() == 0.0 && e.amount < 9.0e15)
    }

    /// Dense row-major copy, mostly for tests and small instances.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; self.n * self.m];
        for e in &self.entries {
            dense[e.row * self.m + e.col] += e.amount;
        }
        dense
    }
}

/// Total transport cost. Integral flows are summed exactly in 64-bit integers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Objective {
    Integer(i64),
    Real(f64),
}

impl Objective {
    pub fn value(self) -> f64 {
        match self {
            Objective::Integer(v) => v as f64,
            Objective::Real(v) => v,
        }
    }

    pub fn as_integer(self) -> Option<i64> {
        match self {
            Objective::Integer(v) => Some(v),
            Objective::Real(_) => None,
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Objective::Integer(v) => write!(f, "{v}"),
            Objective::Real(v) => write!(f, "{v}"),
        }
    }
}

fn check_dims(inst: &OTInstance, flow: &Flow) -> Result<(), ModelError> {
    match flow
        .entries
        .iter()
        .find(|e| e.row >= inst.n || e.col >= inst.m)
    {
        Some(e) => Err(ModelError::IndexOutOfBounds {
            row: e.row,
            col: e.col,
            n: inst.n,
            m: inst.m,
        }),
        None => Ok(()),
    }
}

/// `sum C[i][j] * amount` over the flow entries. Feasibility is not required.
pub fn objective(inst: &OTInstance, flow: &Flow) -> Result<Objective, ModelError> {
    check_dims(inst, flow)?;
    if flow.is_integral() {
        let mut total: i128 = 0;
        for e in &flow.entries {
            total += inst.cost(e.row, e.col) as i128 * e.amount as i128;
        }
        if let Ok(v) = i64::try_from(total) {
            return Ok(Objective::Integer(v));
        }
    }
    let total = flow
        .entries
        .iter()
        .map(|e| inst.cost(e.row, e.col) as f64 * e.amount)
        .sum();
    Ok(Objective::Real(total))
}

/// L1 distance of the flow marginals from the supplies and demands.
pub fn residue(inst: &OTInstance, flow: &Flow) -> f64 {
    let rows: f64 = (0..inst.n)
        .map(|i| {
            let got = flow.row_sums.get(i).copied().unwrap_or(0.0);
            (inst.supplies[i] as f64 - got).abs()
        })
        .sum();
    let cols: f64 = (0..inst.m)
        .map(|j| {
            let got = flow.col_sums.get(j).copied().unwrap_or(0.0);
            (inst.demands[j] as f64 - got).abs()
        })
        .sum();
    rows + cols
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Exact optimum, or the solver's own stopping rule was met.
    Converged,
    /// Iteration cap reached before the stopping rule.
    NotConverged,
    /// Deadline or work budget exhausted; the flow is partial.
    TimedOut,
}

/// Dual information a solver leaves behind, used for optimality certificates.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// Node potentials over supply nodes then demand nodes (network simplex).
    Potentials { supply: Vec<i64>, demand: Vec<i64> },
    /// `u[i] + v[j] <= C[i][j]` duals, with respect to `costs` when the solver
    /// worked on a transformed matrix.
    Duals {
        u: Vec<i64>,
        v: Vec<i64>,
        costs: Option<Vec<i64>>,
    },
    /// Auction object prices in reward units with the final slack.
    Prices { prices: Vec<f64>, epsilon: f64 },
    /// Log-domain scalings of a matrix-scaling run.
    LogScaling { eta: f64, f: Vec<f64>, g: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub solver: &'static str,
    pub objective: Objective,
    pub flow: Flow,
    pub iterations: u64,
    pub wall_time: f64,
    pub residue: f64,
    pub exact: bool,
    pub status: SolveStatus,
    pub certificate: Option<Certificate>,
}

impl SolveResult {
    /// Assembles a result, recomputing objective and residue from the flow.
    pub fn from_flow(
        solver: &'static str,
        inst: &OTInstance,
        flow: Flow,
        iterations: u64,
        started: Instant,
    ) -> Self {
        let objective = objective(inst, &flow).expect("solver flow matches instance shape");
        let residue = residue(inst, &flow);
        Self {
            solver,
            objective,
            flow,
            iterations,
            wall_time: started.elapsed().as_secs_f64(),
            residue,
            exact: false,
            status: SolveStatus::Converged,
            certificate: None,
        }
    }

    pub fn exact(mut self, exact: bool) -> Self {
        self.exact = exact;
        self
    }

    pub fn status(mut self, status: SolveStatus) -> Self {
        self.status = status;
        self
    }

    pub fn certificate(mut self, cert: Certificate) -> Self {
        self.certificate = Some(cert);
        self
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Optional wall-clock cutoff checked cooperatively by the iterative solvers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Deadline(Option<Instant>);

impl Deadline {
    pub const NONE: Deadline = Deadline(None);

    pub fn after(limit: Duration) -> Self {
        Deadline(Instant::now().checked_add(limit))
    }

    pub fn at(instant: Instant) -> Self {
        Deadline(Some(instant))
    }

    #[inline]
    pub fn expired(&self) -> bool {
        self.0.is_some_and(|t| Instant::now() >= t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two(r: Vec<i64>, c: Vec<i64>) -> OTInstance {
        OTInstance::from_rows("t", &[vec![1, 3], vec![2, 1]], r, c).unwrap()
    }

    #[test]
    fn balanced_singleton_is_valid() {
        let inst = OTInstance::from_rows("one", &[vec![5]], vec![2], vec![2]).unwrap();
        assert_eq!(validate_instance(&inst), Ok(()));
    }

    #[test]
    fn unbalanced_totals_are_reported() {
        let inst = OTInstance::from_rows("bad", &[vec![5]], vec![2], vec![3]).unwrap();
        let err = validate_instance(&inst).unwrap_err();
        assert_eq!(
            err,
            Violation::Unbalanced {
                supply: 2,
                demand: 3
            }
        );
        assert!(err.to_string().starts_with("supply/demand totals differ"));
    }

    #[test]
    fn first_violation_wins() {
        let inst = OTInstance::from_rows("neg", &[vec![1, -1]], vec![0], vec![1, 1]).unwrap();
        assert!(matches!(
            validate_instance(&inst),
            Err(Violation::NegativeCost { row: 0, col: 1, .. })
        ));
        let inst = OTInstance::from_rows("zero", &[vec![1, 1]], vec![0], vec![1, 1]).unwrap();
        assert!(matches!(
            validate_instance(&inst),
            Err(Violation::NonPositiveSupply { row: 0, value: 0 })
        ));
    }

    #[test]
    fn overflow_is_detected() {
        let inst = OTInstance::from_rows("big", &[vec![i64::MAX / 2]], vec![4], vec![4]).unwrap();
        assert!(matches!(
            validate_instance(&inst),
            Err(Violation::Overflow { .. })
        ));
    }

    #[test]
    fn shape_errors() {
        assert!(OTInstance::new("x", 2, 2, vec![0; 3], vec![1, 1], vec![1, 1]).is_err());
        assert!(OTInstance::new("x", 2, 2, vec![0; 4], vec![1], vec![1, 1]).is_err());
    }

    #[test]
    fn objective_examples() {
        let one = OTInstance::from_rows("one", &[vec![5]], vec![3], vec![3]).unwrap();
        let flow = Flow::new(1, 1, [(0, 0, 3.0)]).unwrap();
        assert_eq!(objective(&one, &flow).unwrap(), Objective::Integer(15));

        let inst = two_by_two(vec![1, 1], vec![1, 1]);
        let flow = Flow::new(2, 2, [(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(objective(&inst, &flow).unwrap(), Objective::Integer(2));

        let inst = two_by_two(vec![2, 1], vec![1, 2]);
        let flow = Flow::new(2, 2, [(0, 0, 1.0), (0, 1, 1.0), (1, 1, 1.0)]).unwrap();
        assert_eq!(objective(&inst, &flow).unwrap(), Objective::Integer(5));
        assert_eq!(residue(&inst, &flow), 0.0);
    }

    #[test]
    fn objective_rejects_out_of_bounds_flow() {
        let inst = two_by_two(vec![1, 1], vec![1, 1]);
        let flow = Flow::new(3, 2, [(2, 0, 1.0)]).unwrap();
        assert!(matches!(
            objective(&inst, &flow),
            Err(ModelError::IndexOutOfBounds { row: 2, .. })
        ));
        assert!(Flow::new(2, 2, [(0, 2, 1.0)]).is_err());
        assert!(Flow::new(2, 2, [(0, 0, -1.0)]).is_err());
    }

    #[test]
    fn residue_examples() {
        let inst =
            OTInstance::from_rows("r", &[vec![0, 0], vec![0, 0]], vec![1, 1], vec![1, 1]).unwrap();
        assert_eq!(residue(&inst, &Flow::empty(2, 2)), 4.0);

        let inst = two_by_two(vec![2, 1], vec![1, 2]);
        let flow = Flow::new(2, 2, [(0, 0, 1.0)]).unwrap();
        assert_eq!(residue(&inst, &flow), 4.0);
    }

    #[test]
    fn fractional_flow_objective_is_real() {
        let inst = two_by_two(vec![1, 1], vec![1, 1]);
        let flow = Flow::new(2, 2, [(0, 0, 0.5), (0, 1, 0.5), (1, 0, 0.5), (1, 1, 0.5)]).unwrap();
        assert_eq!(objective(&inst, &flow).unwrap(), Objective::Real(3.5));
        assert_eq!(flow.row_sums(), &[1.0, 1.0]);
    }

    #[test]
    fn zero_amounts_are_dropped() {
        let flow = Flow::new(1, 2, [(0, 0, 0.0), (0, 1, 2.0)]).unwrap();
        assert_eq!(flow.entries().len(), 1);
    }
}
