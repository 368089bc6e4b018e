use serde::{Deserialize, Serialize};

use super::C64;
use crate::error::{Error, Result};

/// A truncated series value together with a bound on the discarded tail.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certified {
    pub value: f64,
    pub tail: f64,
    pub terms: usize,
}

/// Geometric weight `w` in `sum_{i>=1} w^i log|1 + lambda + ... + lambda^i|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeriesWeight {
    Half,
    Quarter,
}

impl SeriesWeight {
    pub fn value(self) -> f64 {
        match self {
            SeriesWeight::Half => 0.5,
            SeriesWeight::Quarter => 0.25,
        }
    }
}

const MAX_TERMS: usize = 100_000;
const UNIT_CIRCLE_SLACK: f64 = 1e-13;

/// `sum_{i>N} w^i (a i + b)`
pub(crate) fn linear_tail(w: f64, n: usize, a: f64, b: f64) -> f64 {
    let wn = w.powi(n as i32 + 1);
    let nf = n as f64;
    a * wn * ((nf + 1.0) * (1.0 - w) + w) / ((1.0 - w) * (1.0 - w)) + b * wn / (1.0 - w)
}

/// Bound `|log|S_i|| <= a i + b` valid for every `i > n`, where
/// `S_i = 1 + lambda + ... + lambda^i`. `None` if no such bound holds yet.
fn term_bound(lambda: C64, n: usize) -> Option<(f64, f64)> {
    let r = lambda.norm();
    if lambda == C64::new(1.0, 0.0) {
        // log(i + 1) <= log(n + 2) + (i - n - 1) / (n + 2) for i > n
        let m = n as f64 + 2.0;
        return Some((1.0 / m, m.ln() - (n as f64 + 1.0) / m));
    }
    if r > 1.0 {
        // S_i = lambda^i (lambda - lambda^{-i}) / (lambda - 1), and
        // |1 - lambda^{-(i+1)}| lies in [1/2, 3/2] once r^{-(i+1)} <= 1/2
        if r.powi(-(n as i32 + 2)) > 0.5 {
            return None;
        }
        let l = r.ln();
        return Some((l, l + (lambda - 1.0).norm().ln().abs() + 2f64.ln()));
    }
    // |S_i| lies in [1 - r, 1 / (1 - r)] for i >= 1
    Some((0.0, -(1.0 - r).ln()))
}

/// `sum_{i>=1} w^i log|1 + lambda + ... + lambda^i|` with a certified tail.
///
/// Fails with `GammaDivergence` on the unit circle away from `lambda = 1`,
/// where the terms are not bounded below by anything computable.
pub fn log_sum_series(lambda: C64, weight: SeriesWeight, tol: f64) -> Result<Certified> {
    if !(tol > 0.0) {
        return Err(crate::error::invalid("tol must be positive"));
    }
    let r = lambda.norm();
    let is_one = lambda == C64::new(1.0, 0.0);
    if !is_one && ((r - 1.0).abs() <= UNIT_CIRCLE_SLACK || r == 0.0 || !r.is_finite()) {
        return Err(Error::GammaDivergence(format!("{lambda}")));
    }
    let w = weight.value();
    let big = r > 1.0;
    let log_r = r.ln();
    let inv = C64::new(1.0, 0.0) / lambda;
    // For |lambda| > 1 track U_i = S_i / lambda^i = 1 + U_{i-1} / lambda,
    // otherwise S_i = 1 + lambda S_{i-1}.
    let mut acc_state = C64::new(1.0, 0.0);
    let mut sum = 0.0;
    let mut wi = 1.0;
    for i in 1..=MAX_TERMS {
        wi *= w;
        let log_term = if big {
            acc_state = C64::new(1.0, 0.0) + acc_state * inv;
            i as f64 * log_r + acc_state.norm().ln()
        } else {
            acc_state = C64::new(1.0, 0.0) + lambda * acc_state;
            acc_state.norm().ln()
        };
        sum += wi * log_term;
        if let Some((a, b)) = term_bound(lambda, i) {
            let tail = linear_tail(w, i, a, b);
            if tail <= tol {
                return Ok(Certified { value: sum, tail, terms: i });
            }
        }
    }
    Err(Error::GammaDivergence(format!(
        "{lambda}: tail not certified within {MAX_TERMS} terms"
    )))
}

/// `gamma(lambda) = 1/2 sum_{i>=1} 2^{-i} log|1 + lambda + ... + lambda^i|`
/// with its certified tail.
pub fn gamma_arch_certified(lambda: C64, tol: f64) -> Result<Certified> {
    let s = log_sum_series(lambda, SeriesWeight::Half, 2.0 * tol)?;
    Ok(Certified { value: 0.5 * s.value, tail: 0.5 * s.tail, terms: s.terms })
}

pub fn gamma_arch(lambda: C64, tol: f64) -> Result<f64> {
    gamma_arch_certified(lambda, tol).map(|c| c.value)
}
