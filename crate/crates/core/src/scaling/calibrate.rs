use thiserror::Error;

use super::{sinkhorn, ScalingConfig, ScalingError};
use crate::model::OTInstance;

/// Result of an eta search.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub eta: f64,
    /// Cost ratio to the exact objective at `eta`.
    pub ratio: f64,
    /// Largest failing eta examined below `eta` and its ratio (`None` when
    /// the smallest grid point already met the target).
    pub predecessor: Option<(f64, f64)>,
    /// Number of Sinkhorn runs performed.
    pub runs: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("no eta up to {cap} reached ratio {target}; best ratio {best}")]
    Unreachable { cap: f64, target: f64, best: f64 },
    #[error("exact objective must be positive, got {0}")]
    BadReference(f64),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
}

pub const ETA_CAP: f64 = 1e5;

/// Smallest eta (doubling from 1, then bisection to a 10% bracket) at which
/// Sinkhorn converges with `objective <= target_ratio * exact_objective`.
///
/// An eta counts as failing when Sinkhorn does not converge under the
/// template's limits.
pub fn calibrate_eta(
    inst: &OTInstance,
    target_ratio: f64,
    exact_objective: f64,
    template: &ScalingConfig,
) -> Result<Calibration, CalibrationError> {
    let mut runs = 0u32;
    let mut best = f64::INFINITY;
    let mut probe = |eta: f64| -> Result<Option<f64>, CalibrationError> {
        runs += 1;
        let cfg = ScalingConfig { eta, ..*template };
        let res = sinkhorn(inst, &cfg)?;
        if !res.converged() {
            return Ok(None);
        }
        Ok(Some(ratio_of(res.objective.value(), exact_objective)))
    };
    if exact_objective < 0.0 || !exact_objective.is_finite() {
        return Err(CalibrationError::BadReference(exact_objective));
    }

    let mut lo: Option<(f64, f64)> = None;
    let mut eta = 1.0;
    let (mut hi, mut hi_ratio) = loop {
        let r = probe(eta)?;
        if let Some(r) = r {
            best = best.min(r);
            if r <= target_ratio {
                break (eta, r);
            }
        }
        lo = Some((eta, r.unwrap_or(f64::INFINITY)));
        if eta >= ETA_CAP {
            return Err(CalibrationError::Unreachable {
                cap: ETA_CAP,
                target: target_ratio,
                best,
            });
        }
        eta = (eta * 2.0).min(ETA_CAP);
    };
    if let Some((mut l, mut l_ratio)) = lo {
        while hi / l > 1.1 {
            let mid: f64 = format!("{:.5e}", (l * hi).sqrt()).parse().expect("float");
            if mid <= l || mid >= hi {
                break;
            }
            match probe(mid)? {
                Some(r) if r <= target_ratio => {
                    hi = mid;
                    hi_ratio = r;
                }
                r => {
                    l = mid;
                    l_ratio = r.unwrap_or(f64::INFINITY);
                }
            }
        }
        lo = Some((l, l_ratio));
    }
    Ok(Calibration {
        eta: hi,
        ratio: hi_ratio,
        predecessor: lo,
        runs,
    })
}

fn ratio_of(objective: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        if objective == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        objective / exact
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_costs_take_smallest_eta() {
        let inst = OTInstance::assignment("k", &vec![vec![3; 4]; 4]).unwrap();
        let c = calibrate_eta(&inst, 1.1, 12.0, &ScalingConfig::new(1.0)).unwrap();
        assert_eq!(c.eta, 1.0);
        assert_eq!(c.predecessor, None);
    }

    #[test]
    fn two_by_two_bracket() {
        let inst = OTInstance::assignment("t", &[vec![1, 3], vec![2, 1]]).unwrap();
        let c = calibrate_eta(&inst, 1.1, 2.0, &ScalingConfig::new(1.0)).unwrap();
        assert!(c.ratio <= 1.1);
        let (pe, pr) = c.predecessor.unwrap();
        assert!(pr > 1.1);
        assert!(c.eta / pe <= 1.1 + 1e-12);
    }
}
