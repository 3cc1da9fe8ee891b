//! Assignment solvers built on dual potentials: classical Kuhn-Munkres and
//! the batched variant that augments maximal path sets over tight edges of a
//! cost matrix quantized to a few integer levels.

mod batched;
mod km;

pub use batched::{solve_batched_km, solve_batched_km_with, BatchedKm, BatchedKmStats};
pub use km::{km_assign, solve_km, solve_km_with};

use thiserror::Error;

use crate::model::{validate_instance, Flow, OTInstance, Violation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("assignment solvers require unit square instances")]
    NotUnitSquare,
    #[error("quantization level must be at least 1, got {0}")]
    BadLevel(i64),
    #[error(transparent)]
    Invalid(#[from] Violation),
}

pub(crate) fn check_unit(inst: &OTInstance) -> Result<(), AssignmentError> {
    validate_instance(inst)?;
    if !inst.is_unit() {
        return Err(AssignmentError::NotUnitSquare);
    }
    Ok(())
}

/// Row/column duals with `u[i] + v[j] <= C[i][j]`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DualPotentials {
    pub u: Vec<i64>,
    pub v: Vec<i64>,
}

impl DualPotentials {
    pub fn value(&self) -> i64 {
        self.u.iter().sum::<i64>() + self.v.iter().sum::<i64>()
    }

    /// True when no edge of the row-major `costs` is violated.
    pub fn is_feasible(&self, costs: &[i64]) -> bool {
        let m = self.v.len();
        self.u.iter().enumerate().all(|(i, &ui)| {
            costs[i * m..(i + 1) * m]
                .iter()
                .zip(&self.v)
                .all(|(&c, &vj)| ui + vj <= c)
        })
    }
}

/// A (possibly partial) bipartite matching kept as two inverse maps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    pub match_of_row: Vec<Option<usize>>,
    pub match_of_col: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(n: usize, m: usize) -> Self {
        Self {
            match_of_row: vec![None; n],
            match_of_col: vec![None; m],
        }
    }

    pub fn from_rows(match_of_row: Vec<Option<usize>>, m: usize) -> Self {
        let mut match_of_col = vec![None; m];
        for (i, j) in match_of_row.iter().enumerate() {
            if let Some(j) = *j {
                assert!(match_of_col[j].is_none(), "column {j} matched twice");
                match_of_col[j] = Some(i);
            }
        }
        Self {
            match_of_row,
            match_of_col,
        }
    }

    pub fn assign(&mut self, i: usize, j: usize) {
        self.match_of_row[i] = Some(j);
        self.match_of_col[j] = Some(i);
    }

    pub fn size(&self) -> usize {
        self.match_of_row.iter().flatten().count()
    }

    pub fn is_perfect(&self) -> bool {
        self.match_of_row.iter().all(Option::is_some)
    }

    /// Both maps agree and no column is used twice.
    pub fn is_consistent(&self) -> bool {
        self.match_of_row
            .iter()
            .enumerate()
            .all(|(i, j)| j.is_none_or(|j| self.match_of_col.get(j) == Some(&Some(i))))
            && self
                .match_of_col
                .iter()
                .enumerate()
                .all(|(j, i)| i.is_none_or(|i| self.match_of_row.get(i) == Some(&Some(j))))
    }

    pub fn cost(&self, inst: &OTInstance) -> i64 {
        self.match_of_row
            .iter()
            .enumerate()
            .filter_map(|(i, j)| j.map(|j| inst.cost(i, j)))
            .sum()
    }

    pub fn to_flow(&self) -> Flow {
        Flow::from_assignment(
            self.match_of_row.len(),
            self.match_of_col.len(),
            &self.match_of_row,
        )
    }
}

/// Costs mapped into `0..=levels` plus the factor back to original units.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedCosts {
    pub costs: Vec<i64>,
    /// `N / levels`: one quantized unit in original cost units.
    pub unit: f64,
    pub levels: i64,
}

/// `floor(C * levels / N)` where `N` is the largest cost.
///
/// Every entry lands in `0..=levels` and each edge loses less than `N/levels`
/// in original units. An all-zero matrix is returned unchanged with unit 1.
pub fn quantize_costs(costs: &[i64], levels: i64) -> Result<QuantizedCosts, AssignmentError> {
    if levels < 1 {
        return Err(AssignmentError::BadLevel(levels));
    }
    let max = costs.iter().copied().max().unwrap_or(0);
    if max <= 0 {
        return Ok(QuantizedCosts {
            costs: costs.to_vec(),
            unit: 1.0,
            levels,
        });
    }
    let q = costs
        .iter()
        .map(|&c| ((c as i128 * levels as i128) / max as i128) as i64)
        .collect();
    Ok(QuantizedCosts {
        costs: q,
        unit: max as f64 / levels as f64,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_exact_rescale() {
        let q = quantize_costs(&[100, 200, 300, 400], 4).unwrap();
        assert_eq!(q.costs, vec![1, 2, 3, 4]);
        assert_eq!(q.unit, 100.0);
    }

    #[test]
    fn quantize_floors() {
        assert_eq!(quantize_costs(&[7], 2).unwrap().costs, vec![2]);
        assert_eq!(quantize_costs(&[7, 3], 2).unwrap().costs, vec![2, 0]);
    }

    #[test]
    fn quantize_identity_at_max() {
        let c = vec![0, 5, 13, 2, 13, 9];
        assert_eq!(quantize_costs(&c, 13).unwrap().costs, c);
    }

    #[test]
    fn quantize_zero_matrix_and_bad_level() {
        let q = quantize_costs(&[0, 0], 5).unwrap();
        assert_eq!((q.costs, q.unit), (vec![0, 0], 1.0));
        assert_eq!(quantize_costs(&[1], 0), Err(AssignmentError::BadLevel(0)));
    }

    #[test]
    fn matching_consistency() {
        let m = Matching::from_rows(vec![Some(1), None, Some(0)], 3);
        assert!(m.is_consistent());
        assert_eq!(m.size(), 2);
        assert!(!m.is_perfect());
    }
}
