use std::time::Instant;

use super::{finish, log_amounts, lse_into, Kernel, LogScalingState, ScalingConfig, ScalingError};
use super::{ScalingRun, ScalingStats};
use crate::model::{validate_instance, OTInstance, SolveResult, SolveStatus};

/// Log-domain Sinkhorn.
///
/// One iteration is a row pass followed by a column pass. After the column
/// pass the column marginals are exact, so the residue is the row mismatch,
/// which the next row pass gets for free from its log-sum-exps: the check
/// happens there, before `f` is overwritten.
pub fn sinkhorn(inst: &OTInstance, cfg: &ScalingConfig) -> Result<SolveResult, ScalingError> {
    let started = Instant::now();
    let run = sinkhorn_run(inst, cfg)?;
    Ok(finish("sinkhorn", inst, cfg, run, started))
}

pub fn sinkhorn_run(inst: &OTInstance, cfg: &ScalingConfig) -> Result<ScalingRun, ScalingError> {
    validate_instance(inst)?;
    cfg.validate()?;
    let (n, m) = (inst.n(), inst.m());
    let k = Kernel::new(inst, cfg.eta, true);
    let log_r = log_amounts(inst.supplies());
    let log_c = log_amounts(inst.demands());
    let r: Vec<f64> = inst.supplies().iter().map(|&x| x as f64).collect();
    let threshold = cfg.eps_fraction * inst.total_demand() as f64;

    let mut state = LogScalingState::new(cfg.eta, n, m);
    let mut stats = ScalingStats::default();
    let mut buf = Vec::with_capacity(n.max(m));
    let mut lse_rows = vec![0.0; n];
    let status = loop {
        for (i, out) in lse_rows.iter_mut().enumerate() {
            *out = lse_into(k.row(i), &state.g, &mut buf).0;
        }
        if stats.iterations > 0 {
            state.residue = (0..n)
                .map(|i| (r[i] - (state.f[i] + lse_rows[i]).exp()).abs())
                .sum();
            stats.checks += 1;
            if !state.residue.is_finite() {
                return Err(ScalingError::NonFinite("row pass"));
            }
            if state.residue <= threshold {
                break SolveStatus::Converged;
            }
        }
        if stats.iterations >= cfg.max_iterations {
            break SolveStatus::NotConverged;
        }
        if cfg.deadline.expired() {
            break SolveStatus::TimedOut;
        }
        for i in 0..n {
            state.f[i] = log_r[i] - lse_rows[i];
        }
        for j in 0..m {
            let (l, _) = lse_into(k.col(j), &state.f, &mut buf);
            state.g[j] = log_c[j] - l;
        }
        if state.f.iter().chain(&state.g).any(|v| !v.is_finite()) {
            return Err(ScalingError::NonFinite("scaling update"));
        }
        stats.iterations += 1;
        stats.updates += (n + m) as u64;
    };
    Ok(ScalingRun {
        state,
        status,
        stats,
    })
}
