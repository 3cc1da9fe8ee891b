use std::path::Path;

use super::csvio::{self, fmt_g, fmt_opt};
use super::{ratio, BenchError, SolveError, SolverKind};
use crate::model::{OTInstance, SolveStatus};
use crate::scaling::{greenkhorn, sinkhorn, ScalingConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub eta: f64,
    pub solver: SolverKind,
    pub ratio: Option<f64>,
    /// Sinkhorn: full passes. Greenkhorn: single updates.
    pub iterations: u64,
    pub wall_time: f64,
    pub status: SolveStatus,
}

/// Runs Sinkhorn and Greenkhorn at every grid point.
///
/// Non-converged points are kept with their status; `ratio` is only set for
/// converged runs.
pub fn eta_sweep(
    inst: &OTInstance,
    etas: &[f64],
    exact_objective: f64,
    template: &ScalingConfig,
) -> Result<Vec<SweepRow>, BenchError> {
    let mut rows = Vec::new();
    for &eta in etas {
        let cfg = ScalingConfig { eta, ..*template };
        for solver in [SolverKind::Sinkhorn, SolverKind::Greenkhorn] {
            let res = if solver == SolverKind::Sinkhorn {
                sinkhorn(inst, &cfg)
            } else {
                greenkhorn(inst, &cfg)
            }
            .map_err(SolveError::from)?;
            rows.push(SweepRow {
                eta,
                solver,
                ratio: res
                    .converged()
                    .then(|| ratio(res.objective.value(), exact_objective)),
                iterations: res.iterations,
                wall_time: res.wall_time,
                status: res.status,
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<(), BenchError> {
    csvio::write_csv(
        path,
        &csvio::environment_header(),
        &[
            "eta",
            "solver",
            "ratio",
            "iterations",
            "wall_time",
            "status",
        ],
        rows.iter().map(|r| {
            vec![
                fmt_g(r.eta),
                r.solver.name().to_string(),
                fmt_opt(r.ratio),
                r.iterations.to_string(),
                fmt_g(r.wall_time),
                match r.status {
                    SolveStatus::Converged => "ok",
                    SolveStatus::NotConverged => "not_converged",
                    SolveStatus::TimedOut => "timeout",
                }
                .to_string(),
            ]
        }),
    )
}
