use std::collections::HashMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::csvio::{self, fmt_g, fmt_num, fmt_opt, parse_opt};
use super::{ratio, solve, BenchError, SolveError, SolverKind, SolverParams};
use crate::model::{Deadline, OTInstance};
use crate::netsimplex::solve_network_simplex;
use crate::scaling::{calibrate_eta, greenkhorn, ScalingConfig};

/// Calibrated parameters of one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamRecord {
    pub dataset: String,
    pub hash: String,
    pub exact_objective: f64,
    /// Smallest eta meeting the target for Sinkhorn (and Greenkhorn when
    /// checked).
    pub eta: Option<f64>,
    /// Smallest power-of-two quantization level meeting the target.
    pub levels: Option<i64>,
    /// Largest auction epsilon on the doubling grid that stays exact.
    pub epsilon: Option<f64>,
    /// Empty, or what went wrong.
    pub note: String,
}

impl ParamRecord {
    pub fn params(&self) -> SolverParams {
        SolverParams {
            eta: self.eta,
            levels: self.levels,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CalibrateOptions {
    pub target_ratio: f64,
    /// Limits for the Sinkhorn runs of the eta search.
    pub scaling: ScalingConfig,
    /// Also require Greenkhorn to meet the target at the chosen eta, raising
    /// eta in 10% steps until it does.
    pub check_greenkhorn: bool,
    pub cache: Option<PathBuf>,
}

impl Default for CalibrateOptions {
    fn default() -> Self {
        Self {
            target_ratio: 1.1,
            scaling: ScalingConfig::new(1.0),
            check_greenkhorn: true,
            cache: None,
        }
    }
}

/// Short SHA-256 of the instance contents (shape, amounts and costs).
pub fn instance_hash(inst: &OTInstance) -> String {
    let mut h = Sha256::new();
    h.update((inst.n() as u64).to_le_bytes());
    h.update((inst.m() as u64).to_le_bytes());
    for v in inst
        .supplies()
        .iter()
        .chain(inst.demands())
        .chain(inst.costs())
    {
        h.update(v.to_le_bytes());
    }
    h.finalize()[..8]
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Rounds to the 6 significant digits the CSV files keep.
fn sig6(x: f64) -> f64 {
    fmt_g(x).parse().expect("formatted float parses")
}

/// Calibrates every instance, reusing cache entries whose name and content
/// hash match, and rewrites the cache when one is configured.
pub fn calibrate_all(
    instances: &[OTInstance],
    opts: &CalibrateOptions,
) -> Result<Vec<ParamRecord>, BenchError> {
    let mut cached: Vec<ParamRecord> = match &opts.cache {
        Some(p) if p.exists() => read_params(p)?,
        _ => Vec::new(),
    };
    let index: HashMap<(String, String), usize> = cached
        .iter()
        .enumerate()
        .map(|(k, r)| ((r.dataset.clone(), r.hash.clone()), k))
        .collect();
    let mut out = Vec::new();
    let mut fresh = Vec::new();
    for inst in instances {
        let hash = instance_hash(inst);
        if let Some(&k) = index.get(&(inst.name().to_string(), hash.clone())) {
            out.push(cached[k].clone());
            continue;
        }
        let rec = calibrate_one(inst, hash, opts)?;
        fresh.push(rec.clone());
        out.push(rec);
    }
    if let Some(path) = &opts.cache {
        if !fresh.is_empty() || !path.exists() {
            cached.retain(|r| !fresh.iter().any(|f| f.dataset == r.dataset));
            cached.extend(fresh);
            cached.sort_by(|a, b| a.dataset.cmp(&b.dataset));
            write_params(path, &cached)?;
        }
    }
    Ok(out)
}

fn calibrate_one(
    inst: &OTInstance,
    hash: String,
    opts: &CalibrateOptions,
) -> Result<ParamRecord, BenchError> {
    let exact = solve_network_simplex(inst)
        .map_err(SolveError::from)?
        .objective
        .value();
    let mut rec = ParamRecord {
        dataset: inst.name().to_string(),
        hash,
        exact_objective: exact,
        eta: None,
        levels: None,
        epsilon: None,
        note: String::new(),
    };
    let mut notes = Vec::new();
    match calibrate_eta(inst, opts.target_ratio, exact, &opts.scaling) {
        Ok(c) => {
            let mut eta = sig6(c.eta);
            if opts.check_greenkhorn {
                while eta < crate::scaling::ETA_CAP {
                    let cfg = ScalingConfig {
                        eta,
                        ..opts.scaling
                    };
                    let res = greenkhorn(inst, &cfg).map_err(SolveError::from)?;
                    if res.converged() && ratio(res.objective.value(), exact) <= opts.target_ratio {
                        break;
                    }
                    eta = sig6(eta * 1.1);
                }
            }
            rec.eta = Some(eta);
        }
        Err(e) => notes.push(format!("eta: {e}")),
    }
    if inst.is_unit() {
        rec.levels = calibrate_levels(inst, exact, opts.target_ratio)?;
        if rec.levels.is_none() {
            notes.push("levels: no power of two met the target".to_string());
        }
        rec.epsilon = Some(calibrate_epsilon(inst, exact)?);
    }
    rec.note = notes.join("; ");
    Ok(rec)
}

/// Smallest `B = 2^k` whose batched KM ratio is within `target`.
fn calibrate_levels(inst: &OTInstance, exact: f64, target: f64) -> Result<Option<i64>, BenchError> {
    let cap = (inst.max_cost().max(1) as i128 * inst.n().max(1) as i128).min(1 << 40) as i64;
    let mut b = 1i64;
    loop {
        let p = SolverParams {
            levels: Some(b),
            ..Default::default()
        };
        let res = solve(SolverKind::BatchedKm, inst, &p, Deadline::NONE)?;
        if ratio(res.objective.value(), exact) <= target {
            return Ok(Some(b));
        }
        if b >= cap {
            return Ok(None);
        }
        b *= 2;
    }
}

/// Largest `epsilon = 2^k / (n + 1)` (up to the largest cost) for which the
/// scaled auction still returns the exact objective.
fn calibrate_epsilon(inst: &OTInstance, exact: f64) -> Result<f64, BenchError> {
    let base = 1.0 / (inst.n() as f64 + 1.0);
    let mut best = sig6(base);
    let mut k = 1;
    loop {
        let eps = sig6(base * f64::powi(2.0, k));
        if eps > inst.max_cost().max(1) as f64 {
            return Ok(best);
        }
        let p = SolverParams {
            epsilon: Some(eps),
            ..Default::default()
        };
        let res = solve(SolverKind::AuctionScaled, inst, &p, Deadline::NONE)?;
        if res.objective.value() != exact {
            return Ok(best);
        }
        best = eps;
        k += 1;
    }
}

const PARAM_COLUMNS: [&str; 7] = [
    "dataset",
    "hash",
    "exact_objective",
    "eta",
    "levels",
    "epsilon",
    "note",
];

pub fn write_params(path: impl AsRef<Path>, records: &[ParamRecord]) -> Result<(), BenchError> {
    csvio::write_csv(
        path,
        &csvio::environment_header(),
        &PARAM_COLUMNS,
        records.iter().map(|r| {
            vec![
                r.dataset.clone(),
                r.hash.clone(),
                fmt_num(r.exact_objective),
                fmt_opt(r.eta),
                r.levels.map(|l| l.to_string()).unwrap_or_default(),
                fmt_opt(r.epsilon),
                r.note.clone(),
            ]
        }),
    )
}

pub fn read_params(path: impl AsRef<Path>) -> Result<Vec<ParamRecord>, BenchError> {
    csvio::read_csv(path)?
        .iter()
        .map(|row| {
            if row.len() != PARAM_COLUMNS.len() {
                return Err(BenchError::BadField {
                    column: "row",
                    value: format!("{row:?}"),
                });
            }
            Ok(ParamRecord {
                dataset: row[0].to_string(),
                hash: row[1].to_string(),
                exact_objective: row[2].parse().map_err(|_| BenchError::BadField {
                    column: "exact_objective",
                    value: row[2].to_string(),
                })?,
                eta: parse_opt(&row[3]),
                levels: parse_opt(&row[4]),
                epsilon: parse_opt(&row[5]),
                note: row[6].to_string(),
            })
        })
        .collect()
}
