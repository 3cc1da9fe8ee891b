//! Benchmark protocol: solver dispatch, suite runs with median timings,
//! performance profiles, eta sweeps and per-dataset parameter calibration.
//!
//! Every timing is single-threaded and sequential. CSV outputs start with
//! `#` lines recording the CPU model and build flags.

mod calibrate;
pub mod csvio;
mod profile;
mod sweep;

pub use calibrate::{
    calibrate_all, instance_hash, read_params, write_params, CalibrateOptions, ParamRecord,
};
pub use profile::{performance_profile, read_profile_input, write_profile, ProfileCurve};
pub use sweep::{eta_sweep, write_sweep, SweepRow};

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Duration;

use thiserror::Error;

use crate::auction::{self, AuctionOptions};
use crate::hungarian::{self, AssignmentError};
use crate::io::{read_instance, FormatError};
use crate::model::{Deadline, OTInstance, SolveResult, SolveStatus, Violation};
use crate::netsimplex;
use crate::scaling::{self, ScalingConfig, ScalingError};
use csvio::{fmt_g, fmt_num, fmt_opt, parse_opt};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error("no records to profile")]
    Empty,
    #[error("unknown solver `{0}`")]
    UnknownSolver(String),
    #[error("bad value in column `{column}`: `{value}`")]
    BadField { column: &'static str, value: String },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    NetworkSimplex,
    Km,
    BatchedKm,
    Auction,
    AuctionScaled,
    Sinkhorn,
    Greenkhorn,
}

impl SolverKind {
    pub const ALL: [SolverKind; 7] = [
        SolverKind::NetworkSimplex,
        SolverKind::Km,
        SolverKind::BatchedKm,
        SolverKind::Auction,
        SolverKind::AuctionScaled,
        SolverKind::Sinkhorn,
        SolverKind::Greenkhorn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::NetworkSimplex => "network_simplex",
            SolverKind::Km => "km",
            SolverKind::BatchedKm => "batched_km",
            SolverKind::Auction => "auction",
            SolverKind::AuctionScaled => "auction_scaled",
            SolverKind::Sinkhorn => "sinkhorn",
            SolverKind::Greenkhorn => "greenkhorn",
        }
    }

    /// Requires unit supplies and demands with `n == m`.
    pub fn unit_only(self) -> bool {
        matches!(
            self,
            SolverKind::Km
                | SolverKind::BatchedKm
                | SolverKind::Auction
                | SolverKind::AuctionScaled
        )
    }

    /// Output always has objective at least the optimum.
    pub fn feasible_output(self) -> bool {
        !matches!(self, SolverKind::Sinkhorn | SolverKind::Greenkhorn)
    }

    pub fn parse_list(s: &str) -> Result<Vec<SolverKind>, BenchError> {
        s.split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect()
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.to_ascii_lowercase().replace('-', "_");
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s || (s == "ns" && *k == SolverKind::NetworkSimplex))
            .ok_or(BenchError::UnknownSolver(s))
    }
}

/// Approximation parameters; unset fields fall back to per-solver defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolverParams {
    pub eta: Option<f64>,
    pub levels: Option<i64>,
    pub epsilon: Option<f64>,
}

pub const DEFAULT_ETA: f64 = 100.0;
pub const DEFAULT_LEVELS: i64 = 100;

impl SolverParams {
    /// The values actually used by `kind` on `inst`.
    pub fn resolved(&self, kind: SolverKind, inst: &OTInstance) -> SolverParams {
        match kind {
            SolverKind::Sinkhorn | SolverKind::Greenkhorn => SolverParams {
                eta: Some(self.eta.unwrap_or(DEFAULT_ETA)),
                ..Default::default()
            },
            SolverKind::BatchedKm => SolverParams {
                levels: Some(self.levels.unwrap_or(DEFAULT_LEVELS)),
                ..Default::default()
            },
            SolverKind::Auction | SolverKind::AuctionScaled => SolverParams {
                epsilon: Some(self.epsilon.unwrap_or(1.0 / (inst.n() as f64 + 1.0))),
                ..Default::default()
            },
            _ => SolverParams::default(),
        }
    }
}

/// Runs one solver with resolved parameters and an optional cutoff.
pub fn solve(
    kind: SolverKind,
    inst: &OTInstance,
    params: &SolverParams,
    deadline: Deadline,
) -> Result<SolveResult, SolveError> {
    let p = params.resolved(kind, inst);
    Ok(match kind {
        SolverKind::NetworkSimplex => netsimplex::solve_network_simplex_with(inst, deadline)?,
        SolverKind::Km => hungarian::solve_km_with(inst, deadline)?,
        SolverKind::BatchedKm => {
            hungarian::solve_batched_km_with(inst, p.levels.expect("resolved"), deadline)?
        }
        SolverKind::Auction => {
            let opts = AuctionOptions {
                deadline,
                ..Default::default()
            };
            auction::solve_auction_with(inst, p.epsilon.expect("resolved"), &opts)?
        }
        SolverKind::AuctionScaled => {
            let eps = p.epsilon.expect("resolved");
            let (eps0, theta) = auction::default_scaling(inst, eps);
            let opts = AuctionOptions {
                deadline,
                ..Default::default()
            };
            auction::solve_auction_scaled_with(inst, eps0, theta, eps, &opts)?
        }
        SolverKind::Sinkhorn | SolverKind::Greenkhorn => {
            let cfg = ScalingConfig {
                deadline,
                ..ScalingConfig::new(p.eta.expect("resolved"))
            };
            if kind == SolverKind::Sinkhorn {
                scaling::sinkhorn(inst, &cfg)?
            } else {
                scaling::greenkhorn(inst, &cfg)?
            }
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecordStatus {
    Ok,
    NotConverged,
    Timeout,
    NotApplicable,
    Failed,
}

impl RecordStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RecordStatus::Ok => "ok",
            RecordStatus::NotConverged => "not_converged",
            RecordStatus::Timeout => "timeout",
            RecordStatus::NotApplicable => "n/a",
            RecordStatus::Failed => "failed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            RecordStatus::Ok,
            RecordStatus::NotConverged,
            RecordStatus::Timeout,
            RecordStatus::NotApplicable,
            RecordStatus::Failed,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub dataset: String,
    pub solver: SolverKind,
    /// Median wall time in seconds; for timeouts, the time until cutoff.
    pub wall_time: Option<f64>,
    pub objective: Option<f64>,
    pub exact_objective: Option<f64>,
    pub ratio: Option<f64>,
    pub iterations: u64,
    pub params: SolverParams,
    pub status: RecordStatus,
}

impl BenchRecord {
    pub fn finished(&self) -> bool {
        self.status == RecordStatus::Ok
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub repeats: usize,
    pub timeout: Duration,
    /// Per-dataset calibrated parameters, keyed by instance name.
    pub params: HashMap<String, SolverParams>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            repeats: 3,
            timeout: Duration::from_secs(3600),
            params: HashMap::new(),
        }
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

/// Times every applicable solver on every instance.
///
/// The exact objective comes from one network simplex run per instance.
pub fn run_suite(
    instances: &[OTInstance],
    solvers: &[SolverKind],
    cfg: &BenchConfig,
) -> Result<Vec<BenchRecord>, BenchError> {
    let mut records = Vec::new();
    for inst in instances {
        let exact = netsimplex::solve_network_simplex(inst)
            .map_err(SolveError::from)?
            .objective
            .value();
        let given = cfg.params.get(inst.name()).copied().unwrap_or_default();
        for &kind in solvers {
            records.push(run_one(inst, kind, &given, exact, cfg));
        }
    }
    Ok(records)
}

fn run_one(
    inst: &OTInstance,
    kind: SolverKind,
    given: &SolverParams,
    exact: f64,
    cfg: &BenchConfig,
) -> BenchRecord {
    let params = given.resolved(kind, inst);
    let mut rec = BenchRecord {
        dataset: inst.name().to_string(),
        solver: kind,
        wall_time: None,
        objective: None,
        exact_objective: Some(exact),
        ratio: None,
        iterations: 0,
        params,
        status: RecordStatus::NotApplicable,
    };
    if kind.unit_only() && !inst.is_unit() {
        return rec;
    }
    let mut times = Vec::new();
    for _ in 0..cfg.repeats.max(1) {
        let res = match solve(kind, inst, &params, Deadline::after(cfg.timeout)) {
            Ok(r) => r,
            Err(_) => {
                rec.status = RecordStatus::Failed;
                return rec;
            }
        };
        times.push(res.wall_time);
        if res.status == SolveStatus::TimedOut {
            rec.status = RecordStatus::Timeout;
            rec.wall_time = Some(res.wall_time);
            return rec;
        }
        rec.objective = Some(res.objective.value());
        rec.iterations = res.iterations;
        rec.status = if res.converged() {
            RecordStatus::Ok
        } else {
            RecordStatus::NotConverged
        };
    }
    rec.wall_time = Some(median(times));
    rec.ratio = rec.objective.map(|o| ratio(o, exact));
    rec
}

pub fn ratio(objective: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        if objective.abs() < 1e-12 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        objective / exact
    }
}

/// Instance files (`*.ot`) of a directory, sorted by file name.
pub fn load_suite(dir: impl AsRef<Path>) -> Result<Vec<OTInstance>, BenchError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "ot"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| read_instance(p).map_err(BenchError::from))
        .collect()
}

pub const RESULT_COLUMNS: [&str; 11] = [
    "dataset",
    "solver",
    "wall_time",
    "objective",
    "exact_objective",
    "ratio",
    "iterations",
    "eta",
    "levels",
    "epsilon",
    "status",
];

pub fn write_results(path: impl AsRef<Path>, records: &[BenchRecord]) -> Result<(), BenchError> {
    csvio::write_csv(
        path,
        &csvio::environment_header(),
        &RESULT_COLUMNS,
        records.iter().map(|r| {
            vec![
                r.dataset.clone(),
                r.solver.name().to_string(),
                fmt_opt(r.wall_time),
                r.objective.map(fmt_num).unwrap_or_default(),
                r.exact_objective.map(fmt_num).unwrap_or_default(),
                fmt_opt(r.ratio),
                r.iterations.to_string(),
                fmt_opt(r.params.eta),
                r.params.levels.map(|l| l.to_string()).unwrap_or_default(),
                fmt_opt(r.params.epsilon),
                r.status.as_str().to_string(),
            ]
        }),
    )
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<BenchRecord>, BenchError> {
    let bad = |column: &'static str, value: &str| BenchError::BadField {
        column,
        value: value.to_string(),
    };
    csvio::read_csv(path)?
        .iter()
        .map(|row| {
            if row.len() != RESULT_COLUMNS.len() {
                return Err(bad("row", &format!("{row:?}")));
            }
            Ok(BenchRecord {
                dataset: row[0].to_string(),
                solver: row[1].parse()?,
                wall_time: parse_opt(&row[2]),
                objective: parse_opt(&row[3]),
                exact_objective: parse_opt(&row[4]),
                ratio: parse_opt(&row[5]),
                iterations: row[6].parse().map_err(|_| bad("iterations", &row[6]))?,
                params: SolverParams {
                    eta: parse_opt(&row[7]),
                    levels: parse_opt(&row[8]),
                    epsilon: parse_opt(&row[9]),
                },
                status: RecordStatus::parse(&row[10]).ok_or_else(|| bad("status", &row[10]))?,
            })
        })
        .collect()
}

/// One-line rendering used by the CLI.
pub fn describe(rec: &BenchRecord) -> String {
    format!(
        "{:<12} {:<16} {:>10} {:>12} ratio {:>8} {}",
        rec.dataset,
        rec.solver.name(),
        rec.wall_time
            .map(|t| format!("{}s", fmt_g(t)))
            .unwrap_or("-".into()),
        fmt_opt(rec.objective),
        fmt_opt(rec.ratio),
        rec.status.as_str()
    )
}
