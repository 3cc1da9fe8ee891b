//! Entropy-regularized transport by matrix scaling, computed in the log
//! domain.
//!
//! With normalized costs `Ĉ = C / N` (largest cost 1) the regularized plan is
//! `X[i][j] = exp(f[i] - eta * Ĉ[i][j] + g[j])`. Sinkhorn rescales all rows
//! then all columns; Greenkhorn rescales the single row or column with the
//! largest marginal discrepancy. Neither output is feasible in general;
//! [`round_flow`] projects a plan onto the transport polytope.

mod calibrate;
mod greenkhorn;
mod round;
mod sinkhorn;

pub use calibrate::{calibrate_eta, Calibration, CalibrationError, ETA_CAP};
pub use greenkhorn::{greenkhorn, greenkhorn_run};
pub use round::round_flow;
pub use sinkhorn::{sinkhorn, sinkhorn_run};

use thiserror::Error;

use crate::model::{Deadline, Flow, OTInstance, SolveStatus, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error("eta must be positive and finite, got {0}")]
    BadEta(f64),
    #[error("eps_fraction must lie in (0, 1), got {0}")]
    BadFraction(f64),
    #[error(transparent)]
    Invalid(#[from] Violation),
    #[error("non-finite value in log-sum-exp at {0}")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingConfig {
    /// Regularization strength for costs normalized to a maximum of 1.
    pub eta: f64,
    /// Stop once the residue is at most this fraction of the total demand.
    pub eps_fraction: f64,
    /// Sinkhorn: full row+column passes. Greenkhorn: single updates.
    pub max_iterations: u64,
    pub round_output: bool,
    pub deadline: Deadline,
}

impl ScalingConfig {
    pub fn new(eta: f64) -> Self {
        Self {
            eta,
            eps_fraction: 1e-3,
            max_iterations: 10_000_000,
            round_output: false,
            deadline: Deadline::NONE,
        }
    }

    pub fn validate(&self) -> Result<(), ScalingError> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(ScalingError::BadEta(self.eta));
        }
        if !(self.eps_fraction > 0.0 && self.eps_fraction < 1.0) {
            return Err(ScalingError::BadFraction(self.eps_fraction));
        }
        Ok(())
    }
}

/// Log scalings of a scaling run; the plan itself is implicit.
#[derive(Debug, Clone, PartialEq)]
pub struct LogScalingState {
    pub eta: f64,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub residue: f64,
}

impl LogScalingState {
    pub fn new(eta: f64, n: usize, m: usize) -> Self {
        Self {
            eta,
            f: vec![0.0; n],
            g: vec![0.0; m],
            residue: f64::INFINITY,
        }
    }

    /// `log X[i][j]`.
    pub fn log_entry(&self, inst: &OTInstance, i: usize, j: usize) -> f64 {
        self.f[i] + log_kernel(self.eta, inst.cost(i, j), norm(inst)) + self.g[j]
    }

    /// Dense row-major plan.
    pub fn dense(&self, inst: &OTInstance) -> Vec<f64> {
        let k = Kernel::new(inst, self.eta, false);
        let mut x = vec![0.0; inst.n() * inst.m()];
        for i in 0..inst.n() {
            let row = k.row(i);
            for (j, out) in x[i * inst.m()..(i + 1) * inst.m()].iter_mut().enumerate() {
                *out = (self.f[i] + row[j] + self.g[j]).exp();
            }
        }
        x
    }

    pub fn flow(&self, inst: &OTInstance) -> Flow {
        Flow::from_dense(inst.n(), inst.m(), &self.dense(inst)).expect("plan entries are finite")
    }

    /// Shannon entropy `-sum X log X` of the plan.
    pub fn entropy(&self, inst: &OTInstance) -> f64 {
        let mut h = 0.0;
        for i in 0..inst.n() {
            for j in 0..inst.m() {
                let lx = self.log_entry(inst, i, j);
                let x = lx.exp();
                if x > 0.0 {
                    h -= x * lx;
                }
            }
        }
        h
    }
}

/// Counters of a scaling run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScalingStats {
    /// Sinkhorn: full passes. Greenkhorn: single row or column updates.
    pub iterations: u64,
    /// Rows plus columns rescaled in total.
    pub updates: u64,
    /// Residue evaluations (for Greenkhorn, blocks of `(n + m) / 2` updates).
    pub checks: u64,
}

/// Finished scaling run before the plan is materialized.
#[derive(Debug, Clone)]
pub struct ScalingRun {
    pub state: LogScalingState,
    pub status: SolveStatus,
    pub stats: ScalingStats,
}

fn norm(inst: &OTInstance) -> f64 {
    match inst.max_cost() {
        n if n > 0 => n as f64,
        _ => 1.0,
    }
}

#[inline]
fn log_kernel(eta: f64, cost: i64, norm: f64) -> f64 {
    -eta * (cost as f64 / norm)
}

/// `-eta * Ĉ` row-major, optionally with a column-major copy.
pub(crate) struct Kernel {
    n: usize,
    m: usize,
    rows: Vec<f64>,
    cols: Vec<f64>,
}

impl Kernel {
    pub(crate) fn new(inst: &OTInstance, eta: f64, with_cols: bool) -> Self {
        let (n, m) = (inst.n(), inst.m());
        let nrm = norm(inst);
        let rows: Vec<f64> = inst
            .costs()
            .iter()
            .map(|&c| log_kernel(eta, c, nrm))
            .collect();
        let mut cols = Vec::new();
        if with_cols {
            cols = vec![0.0; n * m];
            for i in 0..n {
                for j in 0..m {
                    cols[j * n + i] = rows[i * m + j];
                }
            }
        }
        Self { n, m, rows, cols }
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.m..(i + 1) * self.m]
    }

    #[inline]
    pub(crate) fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }
}

/// `log sum_k exp(a[k] + b[k])`, leaving `exp(a[k] + b[k] - max)` in `buf`.
///
/// Written as separate passes with independent lanes so each one
/// vectorizes. On x86-64 with AVX2 the same code runs compiled for the wider
/// registers; the arithmetic, and so the result, is identical.
#[inline]
pub(crate) fn lse_into(a: &[f64], b: &[f64], buf: &mut Vec<f64>) -> (f64, f64) {
    #[cfg(target_arch = "x86_64")]
    if std::arch::is_x86_feature_detected!("avx2") {
        // SAFETY: the CPU supports AVX2, checked just above.
        return unsafe { lse_avx2(a, b, buf) };
    }
    lse_lanes(a, b, buf)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn lse_avx2(a: &[f64], b: &[f64], buf: &mut Vec<f64>) -> (f64, f64) {
    use std::arch::x86_64::*;
    let len = a.len().min(b.len());
    let (a, b) = (&a[..len], &b[..len]);
    buf.resize(len, 0.0);
    let full = len - len % 8;
    let mut lanes = [f64::NEG_INFINITY; 8];
    // SAFETY: every load and store below stays inside `0..full`, which all
    // three slices cover.
    unsafe {
        let (pa, pb, po) = (a.as_ptr(), b.as_ptr(), buf.as_mut_ptr());
        let mut m0 = _mm256_set1_pd(f64::NEG_INFINITY);
        let mut m1 = m0;
        let mut k = 0;
        while k < full {
            let v0 = _mm256_add_pd(_mm256_loadu_pd(pa.add(k)), _mm256_loadu_pd(pb.add(k)));
            let v1 = _mm256_add_pd(
                _mm256_loadu_pd(pa.add(k + 4)),
                _mm256_loadu_pd(pb.add(k + 4)),
            );
            _mm256_storeu_pd(po.add(k), v0);
            _mm256_storeu_pd(po.add(k + 4), v1);
            // max_pd(v, m) is `v > m ? v : m`, as in the portable path
            m0 = _mm256_max_pd(v0, m0);
            m1 = _mm256_max_pd(v1, m1);
            k += 8;
        }
        _mm256_storeu_pd(lanes.as_mut_ptr(), m0);
        _mm256_storeu_pd(lanes.as_mut_ptr().add(4), m1);
    }
    let max = lse_tail_max(a, b, buf, full, &mut lanes);
    if max == f64::NEG_INFINITY {
        buf.fill(0.0);
        return (f64::NEG_INFINITY, max);
    }
    for t in buf.iter_mut() {
        *t = exp_nonpos(*t - max);
    }
    let mut acc = [0.0; 8];
    // SAFETY: as above, loads stay inside `0..full`.
    unsafe {
        let p = buf.as_ptr();
        let mut s0 = _mm256_setzero_pd();
        let mut s1 = s0;
        let mut k = 0;
        while k < full {
            s0 = _mm256_add_pd(s0, _mm256_loadu_pd(p.add(k)));
            s1 = _mm256_add_pd(s1, _mm256_loadu_pd(p.add(k + 4)));
            k += 8;
        }
        _mm256_storeu_pd(acc.as_mut_ptr(), s0);
        _mm256_storeu_pd(acc.as_mut_ptr().add(4), s1);
    }
    (max + lse_tail_sum(buf, full, &mut acc).ln(), max)
}

/// Folds the elements past `full` into the lane maxima and returns the
/// overall maximum.
#[inline(always)]
fn lse_tail_max(a: &[f64], b: &[f64], buf: &mut [f64], full: usize, lanes: &mut [f64; 8]) -> f64 {
    for k in full..buf.len() {
        let v = a[k] + b[k];
        buf[k] = v;
        let l = k - full;
        lanes[l] = if v > lanes[l] { v } else { lanes[l] };
    }
    lanes
        .iter()
        .fold(f64::NEG_INFINITY, |m, &v| if v > m { v } else { m })
}

#[inline(always)]
fn lse_tail_sum(buf: &[f64], full: usize, acc: &mut [f64; 8]) -> f64 {
    for (l, &t) in buf[full..].iter().enumerate() {
        acc[l] += t;
    }
    acc.iter().sum()
}

#[inline(always)]
fn lse_lanes(a: &[f64], b: &[f64], buf: &mut Vec<f64>) -> (f64, f64) {
    let len = a.len().min(b.len());
    let (a, b) = (&a[..len], &b[..len]);
    buf.resize(len, 0.0);
    let full = len - len % 8;
    let mut lanes = [f64::NEG_INFINITY; 8];
    for ((out, xs), ys) in buf[..full]
        .chunks_exact_mut(8)
        .zip(a.chunks_exact(8))
        .zip(b.chunks_exact(8))
    {
        for l in 0..8 {
            let v = xs[l] + ys[l];
            out[l] = v;
            lanes[l] = if v > lanes[l] { v } else { lanes[l] };
        }
    }
    let max = lse_tail_max(a, b, buf, full, &mut lanes);
    if max == f64::NEG_INFINITY {
        buf.fill(0.0);
        return (f64::NEG_INFINITY, max);
    }
    for t in buf.iter_mut() {
        *t = exp_nonpos(*t - max);
    }
    let mut acc = [0.0; 8];
    for chunk in buf[..full].chunks_exact(8) {
        for l in 0..8 {
            acc[l] += chunk[l];
        }
    }
    (max + lse_tail_sum(buf, full, &mut acc).ln(), max)
}

/// `exp(x)` for `x <= 0`, branch-free so the callers' loops vectorize.
///
/// Range reduction `x = k ln 2 + r` with `|r| <= ln 2 / 2`, a degree-12
/// Taylor polynomial for `exp(r)`, and `2^k` assembled from exponent bits.
/// Relative error stays within a few ulp; results below `exp(-708)` flush to
/// zero, which only drops terms negligible next to the leading `exp(0) = 1`.
#[inline(always)]
pub(crate) fn exp_nonpos(x: f64) -> f64 {
    const LN2_HI: f64 = 6.931_471_803_691_238e-1;
    const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
    const INV_LN2: f64 = std::f64::consts::LOG2_E;
    let xc = x.max(-708.0);
    // adding 1.5 * 2^52 rounds to an integer held in the low mantissa bits
    const SHIFT: f64 = 6_755_399_441_055_744.0;
    let shifted = xc * INV_LN2 + SHIFT;
    let k = shifted - SHIFT;
    let r = (xc - k * LN2_HI) - k * LN2_LO;
    // Estrin evaluation keeps the dependency chain short
    let r2 = r * r;
    let r4 = r2 * r2;
    let r8 = r4 * r4;
    let q0 = 1.0 + r;
    let q1 = 0.5 + r * (1.0 / 6.0);
    let q2 = 1.0 / 24.0 + r * (1.0 / 120.0);
    let q3 = 1.0 / 720.0 + r * (1.0 / 5_040.0);
    let q4 = 1.0 / 40_320.0 + r * (1.0 / 362_880.0);
    let q5 = 1.0 / 3_628_800.0 + r * (1.0 / 39_916_800.0);
    let q6 = 1.0 / 479_001_600.0;
    let lo = (q0 + r2 * q1) + r4 * (q2 + r2 * q3);
    let hi = (q4 + r2 * q5) + r4 * q6;
    let p = lo + r8 * hi;
    let scale = f64::from_bits(shifted.to_bits().wrapping_add(1023) << 52);
    if x < -708.0 {
        0.0
    } else {
        p * scale
    }
}

fn log_amounts(v: &[i64]) -> Vec<f64> {
    v.iter().map(|&x| (x as f64).ln()).collect()
}

pub(crate) fn finish(
    name: &'static str,
    inst: &OTInstance,
    cfg: &ScalingConfig,
    run: ScalingRun,
    started: std::time::Instant,
) -> crate::model::SolveResult {
    use crate::model::{Certificate, SolveResult};
    let mut flow = run.state.flow(inst);
    if cfg.round_output {
        flow = round_flow(inst, &flow);
    }
    SolveResult::from_flow(name, inst, flow, run.stats.iterations, started)
        .status(run.status)
        .certificate(Certificate::LogScaling {
            eta: run.state.eta,
            f: run.state.f,
            g: run.state.g,
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lse_is_stable() {
        let mut buf = Vec::new();
        let (l, _) = lse_into(&[-1e5, -1e5 + 1.0], &[0.0, 0.0], &mut buf);
        let expect = -1e5 + 1.0 + (1.0 + (-1.0f64).exp()).ln();
        assert!((l - expect).abs() < 1e-9);
        let (l, _) = lse_into(&[0.0; 4], &[0.0; 4], &mut buf);
        assert!((l - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn fast_exp_matches_std() {
        let mut worst: f64 = 0.0;
        let mut x = 0.0;
        while x > -707.0 {
            let (a, b) = (exp_nonpos(x), x.exp());
            worst = worst.max(((a - b) / b).abs());
            x -= 0.0123;
        }
        assert!(worst < 1e-15, "{worst}");
        assert_eq!(exp_nonpos(0.0), 1.0);
        assert_eq!(exp_nonpos(-1e5), 0.0);
        assert_eq!(exp_nonpos(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(ScalingConfig::new(1.0).validate().is_ok());
        assert!(ScalingConfig::new(0.0).validate().is_err());
        let mut c = ScalingConfig::new(1.0);
        c.eps_fraction = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn entropy_of_uniform_plan() {
        let inst =
            OTInstance::from_rows("u", &[vec![1, 1], vec![1, 1]], vec![1, 1], vec![1, 1]).unwrap();
        let mut s = LogScalingState::new(1.0, 2, 2);
        // eta * Ĉ = 1 everywhere, so f = 1 - ln 2 gives entries 1/2
        s.f = vec![1.0 - 2f64.ln(); 2];
        let x = s.dense(&inst);
        assert!(x.iter().all(|&v| (v - 0.5).abs() < 1e-15));
        assert!((s.entropy(&inst) - 4.0 * 0.5 * 2f64.ln()).abs() < 1e-12);
    }
}
