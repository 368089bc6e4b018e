use std::ops::{Add, Mul, Sub};

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::dynamics::{eval_map, ExtComplex, MapParams, C64};

/// `a + b sqrt(3)` with rational `a`, `b`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSqrt3 {
    pub a: BigRational,
    pub b: BigRational,
}

impl QSqrt3 {
    pub fn rational(a: BigRational) -> Self {
        QSqrt3 { a, b: BigRational::zero() }
    }

    pub fn from_i64(a: i64, b: i64) -> Self {
        QSqrt3 { a: BigRational::from_integer(a.into()), b: BigRational::from_integer(b.into()) }
    }
}

impl Add for &QSqrt3 {
    type Output = QSqrt3;
    fn add(self, o: &QSqrt3) -> QSqrt3 {
        QSqrt3 { a: &self.a + &o.a, b: &self.b + &o.b }
    }
}

impl Sub for &QSqrt3 {
    type Output = QSqrt3;
    fn sub(self, o: &QSqrt3) -> QSqrt3 {
        QSqrt3 { a: &self.a - &o.a, b: &self.b - &o.b }
    }
}

impl Mul for &QSqrt3 {
    type Output = QSqrt3;
    fn mul(self, o: &QSqrt3) -> QSqrt3 {
        let three = BigRational::from_integer(3.into());
        QSqrt3 {
            a: &self.a * &o.a + three * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }
}

/// `l(t) = 16 (2+t)^2 + 4 (2+t)^2 (8-t^2) + (8-t^2)^2`.
pub fn ell(t: f64) -> f64 {
    let u = (2.0 + t) * (2.0 + t);
    let v = 8.0 - t * t;
    16.0 * u + 4.0 * u * v + v * v
}

fn ell_exact(t: &QSqrt3) -> QSqrt3 {
    let two = QSqrt3::from_i64(2, 0);
    let s = &two + t;
    let u = &s * &s;
    let v = &QSqrt3::from_i64(8, 0) - &(t * t);
    let sixteen = QSqrt3::from_i64(16, 0);
    let four = QSqrt3::from_i64(4, 0);
    &(&(&sixteen * &u) + &(&(&four * &u) * &v)) + &(&v * &v)
}

/// `l(2 sqrt 3)` evaluated exactly in `Q(sqrt 3)`.
pub fn ell_at_two_sqrt3() -> QSqrt3 {
    ell_exact(&QSqrt3::from_i64(0, 2))
}

fn ell_prime(t: f64) -> f64 {
    let s = 2.0 + t;
    let v = 8.0 - t * t;
    32.0 * s + 8.0 * s * v - 8.0 * s * s * t - 4.0 * t * v
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Period3Witness {
    pub t0: f64,
    pub ell_residual: f64,
    /// `|f^3(1) - 1|` at `lambda = -2`, `t = t0`.
    pub orbit_residual: f64,
    /// `f(1)`, which must differ from 1.
    pub first_image: f64,
    pub ell_at_left_end_is_16: bool,
    pub ell_at_right_end: f64,
}

/// A parameter `t0 > 2 sqrt 3` where `+1` has exact period 3 for `lambda = -2`.
///
/// `l` changes sign on `[2 sqrt 3, 10]` (`l(2 sqrt 3) = 16`, `l(10) = -42224`),
/// so bisection brackets a zero; Newton then finishes it.
pub fn period3_witness() -> Period3Witness {
    let exact = ell_at_two_sqrt3();
    let left_is_16 = exact == QSqrt3::rational(BigRational::from_integer(16.into()));
    let (mut lo, mut hi) = (2.0 * 3f64.sqrt(), 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ell(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut t0 = 0.5 * (lo + hi);
    for _ in 0..3 {
        let step = ell(t0) / ell_prime(t0);
        if !step.is_finite() {
            break;
        }
        t0 -= step;
    }
    let p = MapParams::real(-2.0, t0).expect("nonzero lambda");
    let one = ExtComplex::Finite(C64::new(1.0, 0.0));
    let mut z = one;
    let mut first = f64::NAN;
    for k in 0..3 {
        z = eval_map(&p, z);
        if k == 0 {
            first = z.finite().map_or(f64::INFINITY, |w| w.re);
        }
    }
    let orbit_residual = z.finite().map_or(f64::INFINITY, |w| (w - 1.0).norm());
    Period3Witness {
        t0,
        ell_residual: ell(t0).abs(),
        orbit_residual,
        first_image: first,
        ell_at_left_end_is_16: left_is_16,
        ell_at_right_end: ell(10.0),
    }
}
