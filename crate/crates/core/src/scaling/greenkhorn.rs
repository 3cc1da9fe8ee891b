use std::time::Instant;

use super::{finish, log_amounts, lse_into, Kernel, LogScalingState, ScalingConfig, ScalingError};
use super::{ScalingRun, ScalingStats};
use crate::model::{validate_instance, OTInstance, SolveResult, SolveStatus};

/// Log-domain Greenkhorn.
///
/// Each step rescales the one row or column whose marginal is furthest from
/// its target. Marginals are maintained incrementally: rescaling row `i`
/// moves `X[i][j]` by `w[j] * (r[i] - rowsum[i])` with `w` the normalized row
/// weights. Every `(n + m) / 2` updates the marginals are recomputed exactly
/// and the residue is checked. `iterations` counts single updates.
pub fn greenkhorn(inst: &OTInstance, cfg: &ScalingConfig) -> Result<SolveResult, ScalingError> {
    let started = Instant::now();
    let run = greenkhorn_run(inst, cfg)?;
    Ok(finish("greenkhorn", inst, cfg, run, started))
}

fn exact_sums(k: &Kernel, s: &LogScalingState, rs: &mut [f64], cs: &mut [f64]) {
    cs.fill(0.0);
    for (i, out) in rs.iter_mut().enumerate() {
        let mut acc = 0.0;
        for ((&kij, &gj), c) in k.row(i).iter().zip(&s.g).zip(cs.iter_mut()) {
            let x = (s.f[i] + kij + gj).exp();
            acc += x;
            *c += x;
        }
        *out = acc;
    }
}

pub fn greenkhorn_run(inst: &OTInstance, cfg: &ScalingConfig) -> Result<ScalingRun, ScalingError> {
    validate_instance(inst)?;
    cfg.validate()?;
    let (n, m) = (inst.n(), inst.m());
    let k = Kernel::new(inst, cfg.eta, true);
    let (log_r, log_c) = (log_amounts(inst.supplies()), log_amounts(inst.demands()));
    let r: Vec<f64> = inst.supplies().iter().map(|&x| x as f64).collect();
    let c: Vec<f64> = inst.demands().iter().map(|&x| x as f64).collect();
    let total = inst.total_demand() as f64;
    let threshold = cfg.eps_fraction * total;
    let floor = 1e-12 * total;
    let block = ((n + m) / 2).max(1) as u64;

    let mut state = LogScalingState::new(cfg.eta, n, m);
    let mut stats = ScalingStats::default();
    let (mut rs, mut cs) = (vec![0.0; n], vec![0.0; m]);
    let mut buf = Vec::with_capacity(n.max(m));
    let status = loop {
        if stats.iterations % block == 0 {
            exact_sums(&k, &state, &mut rs, &mut cs);
            state.residue = residue_of(&r, &rs) + residue_of(&c, &cs);
            stats.checks += 1;
            if !state.residue.is_finite() {
                return Err(ScalingError::NonFinite("marginals"));
            }
            if state.residue <= threshold {
                break SolveStatus::Converged;
            }
        }
        let (row_best, row_gap) = argmax_gap(&r, &rs);
        let (col_best, col_gap) = argmax_gap(&c, &cs);
        let stalled = row_gap.max(col_gap) <= floor;
        if stalled {
            // nothing left to fix at this resolution; settle on exact sums
            exact_sums(&k, &state, &mut rs, &mut cs);
            state.residue = residue_of(&r, &rs) + residue_of(&c, &cs);
            stats.checks += 1;
            break if state.residue <= threshold {
                SolveStatus::Converged
            } else {
                SolveStatus::NotConverged
            };
        }
        if stats.iterations >= cfg.max_iterations {
            break SolveStatus::NotConverged;
        }
        if stats.iterations % block == 0 && cfg.deadline.expired() {
            break SolveStatus::TimedOut;
        }
        if row_gap >= col_gap {
            let i = row_best;
            let (lse, max) = lse_into(k.row(i), &state.g, &mut buf);
            let old = (state.f[i] + lse).exp();
            state.f[i] = log_r[i] - lse;
            let scale = (max - lse).exp() * (r[i] - old);
            for (cj, w) in cs.iter_mut().zip(&buf) {
                *cj += w * scale;
            }
            rs[i] = r[i];
        } else {
            let j = col_best;
            let (lse, max) = lse_into(k.col(j), &state.f, &mut buf);
            let old = (state.g[j] + lse).exp();
            state.g[j] = log_c[j] - lse;
            let scale = (max - lse).exp() * (c[j] - old);
            for (ri, w) in rs.iter_mut().zip(&buf) {
                *ri += w * scale;
            }
            cs[j] = c[j];
        }
        stats.iterations += 1;
        stats.updates += 1;
    };
    if state.f.iter().chain(&state.g).any(|v| !v.is_finite()) {
        return Err(ScalingError::NonFinite("scaling update"));
    }
    Ok(ScalingRun {
        state,
        status,
        stats,
    })
}

fn residue_of(target: &[f64], got: &[f64]) -> f64 {
    target.iter().zip(got).map(|(t, g)| (t - g).abs()).sum()
}

/// Index and size of the largest `|target - got|`; first index on ties.
fn argmax_gap(target: &[f64], got: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (idx, (t, g)) in target.iter().zip(got).enumerate() {
        let gap = (t - g).abs();
        if gap > best.1 {
            best = (idx, gap);
        }
    }
    best
}
