use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{log_biguint, ord_int, ord_p};
use crate::dynamics::Sign;
use crate::error::{Error, Result};

/// Stand-in valuation for an exact zero.
const EXACT_ZERO: i64 = 1 << 40;

/// `p^ord * unit` with the unit known modulo `p^prec`.
///
/// A zero `unit` stands for a value only known to be `0 mod p^ord`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Padic {
    pub ord: i64,
    pub unit: BigUint,
    pub prec: u32,
}

impl Padic {
    pub fn from_rational(x: &BigRational, p: &BigUint, prec: u32) -> Padic {
        if x.is_zero() {
            // exact zero: known to any precision we will ever ask for
            return Padic { ord: EXACT_ZERO, unit: BigUint::zero(), prec: 0 };
        }
        let e = ord_p(x, p);
        let strip = |n: &BigInt| -> BigInt {
            let k = ord_int(n, p);
            n / BigInt::from(p.pow(k as u32))
        };
        let (num, den) = (strip(x.numer()), strip(x.denom()));
        let m = BigInt::from(p.pow(prec));
        let inv = mod_inverse(&den.mod_floor(&m), &m);
        let unit = (num.mod_floor(&m) * inv).mod_floor(&m);
        Padic { ord: e, unit: unit.magnitude().clone(), prec }
    }

    pub fn is_zero(&self) -> bool {
        self.unit.is_zero()
    }

    /// Valuation, or the absolute precision when the value is zero at that precision.
    pub fn valuation(&self) -> i64 {
        self.ord
    }

    pub fn mul(&self, o: &Padic, p: &BigUint) -> Padic {
        match (self.is_zero(), o.is_zero()) {
            (true, _) | (_, true) => {
                Padic { ord: self.ord.saturating_add(o.ord).min(EXACT_ZERO), unit: BigUint::zero(), prec: 0 }
            }
            (false, false) => {
                let prec = self.prec.min(o.prec);
                let m = p.pow(prec);
                Padic { ord: self.ord + o.ord, unit: (&self.unit * &o.unit) % m, prec }
            }
        }
    }

    /// Absolute precision: the value is known modulo `p^abs`.
    fn abs_prec(&self) -> i64 {
        if self.is_zero() {
            self.ord
        } else {
            self.ord + self.prec as i64
        }
    }

    pub fn add(&self, o: &Padic, p: &BigUint) -> Padic {
        if self.is_zero() && o.is_zero() {
            return Padic { ord: self.ord.min(o.ord), unit: BigUint::zero(), prec: 0 };
        }
        let abs = self.abs_prec().min(o.abs_prec());
        let base = [self, o].iter().filter(|x| !x.is_zero()).map(|x| x.ord).min().unwrap();
        if abs <= base {
            return Padic { ord: abs, unit: BigUint::zero(), prec: 0 };
        }
        let width = (abs - base) as u32;
        let m = p.pow(width);
        let mut s = BigUint::zero();
        for x in [self, o] {
            if !x.is_zero() && x.ord < abs {
                s += &x.unit * p.pow((x.ord - base) as u32);
            }
        }
        s %= &m;
        if s.is_zero() {
            return Padic { ord: abs, unit: BigUint::zero(), prec: 0 };
        }
        let mut v = 0u32;
        while (&s % p).is_zero() {
            s /= p;
            v += 1;
        }
        Padic { ord: base + v as i64, unit: s, prec: width - v }
    }

    fn shift(&self, e: i64) -> Padic {
        Padic { ord: self.ord - e, unit: self.unit.clone(), prec: self.prec }
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// Result of the p-adic escape-rate iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct PadicRate {
    pub value: f64,
    pub tail: f64,
    pub steps: usize,
    pub digits: u32,
}

/// Per-step bounds `c' <= ||F_t(z)||_p / ||z||_p^2 <= C'` with
/// `c' = min(1, |lambda|, |lambda| / |t|)` and `C' = max(1, |lambda|, |t|)`.
pub(crate) fn padic_step_bounds(lambda: &BigRational, t: &BigRational, p: &BigUint) -> (f64, f64) {
    let lp = log_biguint(p);
    let log_l = -(ord_p(lambda, p) as f64) * lp;
    let log_t = if t.is_zero() { f64::NEG_INFINITY } else { -(ord_p(t, p) as f64) * lp };
    let lo = 0f64.min(log_l).min(log_l - log_t);
    let hi = 0f64.max(log_l).max(log_t);
    (lo, hi)
}

const MAX_STEPS: usize = 2000;

/// `H_p(t) = lim 2^{-n} log ||F_t^n(sign 1, 1)||_p` at fixed working precision.
pub(crate) fn padic_escape_rate(
    lambda: &BigRational,
    t: &BigRational,
    p: &BigUint,
    sign: Sign,
    tol: f64,
    digits: u32,
) -> Result<PadicRate> {
    let (lo, hi) = padic_step_bounds(lambda, t, p);
    let spread = lo.abs().max(hi.abs());
    if spread == 0.0 {
        // good reduction: every step has norm exactly one
        return Ok(PadicRate { value: 0.0, tail: 0.0, steps: 0, digits });
    }
    let lp = log_biguint(p);
    let lam = Padic::from_rational(lambda, p, digits);
    let tt = Padic::from_rational(t, p, digits);
    let one = BigRational::one();
    let start = if sign == Sign::Plus { one.clone() } else { -one.clone() };
    let mut x = Padic::from_rational(&start, p, digits);
    let mut y = Padic::from_rational(&one, p, digits);
    let mut sum = 0.0;
    let mut w = 1.0;
    for k in 1..=MAX_STEPS {
        let xy = x.mul(&y, p);
        let nx = lam.mul(&xy, p);
        let ny = x.mul(&x, p).add(&tt.mul(&xy, p), p).add(&y.mul(&y, p), p);
        let live: Vec<i64> = [&nx, &ny].iter().filter(|z| !z.is_zero()).map(|z| z.ord).collect();
        let e = match live.iter().min() {
            Some(&e) if [&nx, &ny].iter().all(|z| !z.is_zero() || z.ord > e) => e,
            _ => return Err(Error::PrecisionExhausted { prime: p.to_string(), digits }),
        };
        w *= 0.5;
        sum += w * -(e as f64) * lp;
        x = nx.shift(e);
        y = ny.shift(e);
        let tail = w * spread;
        if tail <= tol {
            return Ok(PadicRate { value: sum, tail, steps: k, digits });
        }
    }
    Err(Error::NonConvergence { iterations: MAX_STEPS, tol })
}
