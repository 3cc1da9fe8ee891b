use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::csvio::{self, fmt_g};
use super::{read_results, BenchError, BenchRecord, RecordStatus, SolverKind};

/// Number of datasets a solver finished within factor `f` of the fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileCurve {
    pub solver: SolverKind,
    /// `(f, count)` at `f = 1` and at each factor the solver realized.
    pub points: Vec<(f64, usize)>,
}

/// Performance profile over the datasets in `records`.
///
/// On each dataset a finished solver gets `f = time / fastest time`;
/// unfinished runs get `f = inf` and never count. Not-applicable records
/// are left out.
pub fn performance_profile(records: &[BenchRecord]) -> Result<Vec<ProfileCurve>, BenchError> {
    let considered: Vec<&BenchRecord> = records
        .iter()
        .filter(|r| r.status != RecordStatus::NotApplicable)
        .collect();
    if considered.is_empty() {
        return Err(BenchError::Empty);
    }
    let mut fastest: BTreeMap<&str, f64> = BTreeMap::new();
    for r in considered.iter().filter(|r| r.finished()) {
        let t = r.wall_time.unwrap_or(f64::INFINITY);
        let e = fastest.entry(r.dataset.as_str()).or_insert(f64::INFINITY);
        *e = e.min(t);
    }
    let mut factors: BTreeMap<SolverKind, Vec<f64>> = BTreeMap::new();
    for r in &considered {
        let f = match (r.finished(), r.wall_time, fastest.get(r.dataset.as_str())) {
            (true, Some(t), Some(&best)) if best > 0.0 => t / best,
            (true, Some(_), Some(_)) => 1.0,
            _ => f64::INFINITY,
        };
        factors.entry(r.solver).or_default().push(f);
    }
    Ok(factors
        .into_iter()
        .map(|(solver, fs)| {
            let mut grid: BTreeSet<u64> = fs
                .iter()
                .filter(|f| f.is_finite())
                .map(|f| f.to_bits())
                .collect();
            grid.insert(1f64.to_bits());
            let points = grid
                .into_iter()
                .map(f64::from_bits)
                .map(|x| (x, fs.iter().filter(|&&f| f <= x).count()))
                .collect();
            ProfileCurve { solver, points }
        })
        .collect())
}

pub fn read_profile_input(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>, BenchError> {
    read_results(path)
}

pub fn write_profile(path: impl AsRef<Path>, curves: &[ProfileCurve]) -> Result<(), BenchError> {
    csvio::write_csv(
        path,
        &csvio::environment_header(),
        &["solver", "factor", "count"],
        curves.iter().flat_map(|c| {
            c.points
                .iter()
                .map(move |&(f, n)| vec![c.solver.name().to_string(), fmt_g(f), n.to_string()])
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::SolverParams;

    fn rec(dataset: &str, solver: SolverKind, t: f64, status: RecordStatus) -> BenchRecord {
        BenchRecord {
            dataset: dataset.into(),
            solver,
            wall_time: Some(t),
            objective: Some(1.0),
            exact_objective: Some(1.0),
            ratio: Some(1.0),
            iterations: 1,
            params: SolverParams::default(),
            status,
        }
    }

    #[test]
    fn two_solver_example() {
        let recs = [
            rec("d", SolverKind::Km, 1.0, RecordStatus::Ok),
            rec("d", SolverKind::Sinkhorn, 2.0, RecordStatus::Ok),
        ];
        let curves = performance_profile(&recs).unwrap();
        assert_eq!(curves[0].points, vec![(1.0, 1)]);
        assert_eq!(curves[1].points, vec![(1.0, 0), (2.0, 1)]);
    }

    #[test]
    fn timeout_never_counts() {
        let recs = [
            rec("a", SolverKind::Km, 1.0, RecordStatus::Ok),
            rec("a", SolverKind::Auction, 50.0, RecordStatus::Timeout),
            rec("b", SolverKind::Km, 3.0, RecordStatus::Ok),
            rec("b", SolverKind::Auction, 1.0, RecordStatus::Ok),
        ];
        let curves = performance_profile(&recs).unwrap();
        let km = &curves[0];
        let auction = &curves[1];
        assert_eq!(km.solver, SolverKind::Km);
        assert_eq!(km.points, vec![(1.0, 1), (3.0, 2)]);
        assert_eq!(auction.points, vec![(1.0, 1)]);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(performance_profile(&[]), Err(BenchError::Empty)));
    }
}
