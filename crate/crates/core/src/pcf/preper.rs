use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::log_abs_bigint;
use crate::dynamics::Sign;
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OrbitStatus {
    /// `f^{preperiod + period}(c) = f^{preperiod}(c)` with both minimal.
    Preperiodic { period: usize, preperiod: usize },
    Escaping { iterations: usize, height: f64 },
    Undecided { iterations: usize, height: f64 },
}

/// Weil height `log max(|num|, |den|)` of a rational.
pub fn weil_height(x: &BigRational) -> f64 {
    let m = x.numer().abs().max(x.denom().abs());
    if m.is_zero() {
        0.0
    } else {
        log_abs_bigint(&m)
    }
}

/// `64 + 4 h(lambda) + 4 h(t)`.
pub fn default_height_bound(lambda: &BigRational, t: &BigRational) -> f64 {
    64.0 + 4.0 * weil_height(lambda) + 4.0 * weil_height(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreperiodicOptions {
    pub height_bound: Option<f64>,
    pub max_iterations: usize,
    /// Height growth factor counted as doubling behaviour.
    pub growth: f64,
}

impl Default for PreperiodicOptions {
    fn default() -> Self {
        PreperiodicOptions { height_bound: None, max_iterations: 512, growth: 1.5 }
    }
}

fn reduce(x: BigInt, y: BigInt) -> (BigInt, BigInt) {
    let g = crate::algebra::gcd_int(&x, &y);
    let (mut x, mut y) = if g.is_zero() || g.is_one() { (x, y) } else { (x / &g, y / &g) };
    // canonical sign: second coordinate positive, or first if the second vanishes
    if y.is_negative() || (y.is_zero() && x.is_negative()) {
        x = -x;
        y = -y;
    }
    (x, y)
}

/// Exact forward orbit of `sign 1` under `f_{lambda,t}` on the projective line
/// over the rationals, with cycle detection.
pub fn is_preperiodic(
    lambda: &BigRational,
    t: &BigRational,
    sign: Sign,
    opts: &PreperiodicOptions,
) -> Result<OrbitStatus> {
    if lambda.is_zero() {
        return Err(invalid("lambda must be nonzero"));
    }
    let bound = opts.height_bound.unwrap_or_else(|| default_height_bound(lambda, t));
    if !(bound > 0.0) {
        return Err(invalid("height bound must be positive"));
    }
    // clear denominators: lambda = a/b, t = c/e
    let (a, b) = (lambda.numer().clone(), lambda.denom().clone());
    let (c, e) = (t.numer().clone(), t.denom().clone());
    let ae = &a * &e;
    let mut point = reduce(BigInt::from(sign.value() as i64), BigInt::one());
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut heights: Vec<f64> = Vec::new();
    for k in 0..=opts.max_iterations {
        if let Some(&j) = seen.get(&point) {
            return Ok(OrbitStatus::Preperiodic { period: k - j, preperiod: j });
        }
        let h = log_abs_bigint(&point.0.abs().max(point.1.abs()));
        heights.push(h);
        if h > bound && heights.len() >= 4 {
            let tail = &heights[heights.len() - 4..];
            if tail.windows(2).all(|w| w[1] >= opts.growth * w[0] && w[0] > 0.0) {
                return Ok(OrbitStatus::Escaping { iterations: k, height: h });
            }
        }
        if k == opts.max_iterations {
            break;
        }
        seen.insert(point.clone(), k);
        let (x, y) = &point;
        let xy = x * y;
        let nx = &ae * &xy;
        let ny = &b * &(&e * &(x * x) + &c * &xy + &e * &(y * y));
        point = reduce(nx, ny);
    }
    Ok(OrbitStatus::Undecided { iterations: opts.max_iterations, height: *heights.last().unwrap() })
}
