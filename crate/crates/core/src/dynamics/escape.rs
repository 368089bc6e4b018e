use serde::{Deserialize, Serialize};

use super::{eval_homogeneous, gamma_arch_certified, MapParams, ProjPair, Sign, C64};
use crate::error::{invalid, Error, Result};

pub const MAX_ESCAPE_ITERATIONS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EscapeRateResult {
    pub value: f64,
    pub iterations: usize,
    pub tail_bound: f64,
}

/// Per-step bounds `log c' <= log(||F_t v|| / ||v||^2) <= log C'` where
/// `c' = min(|lambda|/2, 1/4) / T`, `C' = max(|lambda|, 3) T`, `T = max(|t|, 1)`.
pub(crate) fn step_log_bounds(lambda: C64, t: C64) -> (f64, f64) {
    let tm = t.norm().max(1.0);
    let lo = ((lambda.norm() / 2.0).min(0.25) / tm).ln();
    let hi = (lambda.norm().max(3.0) * tm).ln();
    (lo, hi)
}

/// `H^sign_lambda(t) = lim 2^{-n} log ||F_t^n(sign 1, 1)||`.
///
/// The orbit is renormalised to unit max-norm each step and the weighted
/// log-scales are accumulated; after `n` steps the remainder lies within
/// `2^{-n} max(|log c'|, |log C'|)` of the partial sum.
pub fn escape_rate(p: &MapParams, sign: Sign, tol: f64) -> Result<EscapeRateResult> {
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    let (lo, hi) = step_log_bounds(p.lambda, p.t);
    let spread = lo.abs().max(hi.abs());
    let mut v = ProjPair { z1: C64::new(sign.value(), 0.0), z2: C64::new(1.0, 0.0) };
    let mut sum = 0.0;
    let mut weight = 1.0;
    for k in 1..=MAX_ESCAPE_ITERATIONS {
        let (next, scale) = eval_homogeneous(p, &v).normalized();
        weight *= 0.5;
        sum += weight * scale.ln();
        v = next;
        let tail = weight * spread;
        if tail <= tol {
            return Ok(EscapeRateResult { value: sum, iterations: k, tail_bound: tail });
        }
    }
    Err(Error::NonConvergence { iterations: MAX_ESCAPE_ITERATIONS, tol })
}

/// The homogeneous potential on parameter space,
/// `G(t1, t2) = 2 H(t1/t2) + log|t2|` for `t2 != 0` and
/// `log|t1| + gamma(lambda)` on the line `t2 = 0`.
pub fn green_homogeneous(lambda: C64, v: &ProjPair, sign: Sign, tol: f64) -> Result<f64> {
    if v.z2 == C64::new(0.0, 0.0) {
        let gamma = gamma_arch_certified(lambda, tol)?;
        return Ok(v.z1.norm().ln() + gamma.value);
    }
    let p = MapParams::new(lambda, v.z1 / v.z2)?;
    let h = escape_rate(&p, sign, tol / 2.0)?;
    Ok(2.0 * h.value + v.z2.norm().ln())
}
