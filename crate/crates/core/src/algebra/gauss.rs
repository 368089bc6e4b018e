use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dynamics::C64;
use crate::error::{invalid, Error, Result};

/// `ln |x|` for integers of any size; `-inf` at zero.
pub fn log_abs_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return x.abs().to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top: BigInt = x.abs() >> shift;
    top.to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// gcd taking Euclidean steps while the operands differ much in size; the
/// binary gcd of num-integer is quadratic when one side is far larger.
pub(crate) fn gcd_int(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.abs(), b.abs());
    loop {
        if a < b {
            std::mem::swap(&mut a, &mut b);
        }
        if b.is_zero() || b.is_one() {
            return if b.is_zero() { a } else { b };
        }
        if a.bits() <= b.bits() + 64 {
            return a.gcd(&b);
        }
        a = &a % &b;
    }
}

/// `m * 2^e` as a pair with `m` in `[1/2, 1)` (or 0), usable past f64 range.
fn mantissa_exp(x: &BigInt) -> (f64, i64) {
    let bits = x.bits();
    if bits == 0 {
        return (0.0, 0);
    }
    let shift = bits.saturating_sub(64);
    let top: BigInt = x >> shift;
    let f = top.to_f64().unwrap();
    let (m, e) = frexp(f);
    (m, e + shift as i64)
}

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 {
        return (0.0, 0);
    }
    let e = x.abs().log2().floor() as i64 + 1;
    let m = x / 2f64.powi(e as i32);
    // guard against log2 rounding at exact powers of two
    if m.abs() >= 1.0 {
        (m / 2.0, e + 1)
    } else if m.abs() < 0.5 {
        (m * 2.0, e - 1)
    } else {
        (m, e)
    }
}

/// `num / den` as `f64` for operands past the f64 range.
pub(crate) fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    let (mn, en) = mantissa_exp(num);
    let (md, ed) = mantissa_exp(den);
    if md == 0.0 {
        return f64::NAN;
    }
    let e = en - ed;
    let q = mn / md;
    q * 2f64.powi(e.clamp(-2000, 2000) as i32)
}

/// Gaussian integer `re + im i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct GaussInt {
    pub re: BigInt,
    pub im: BigInt,
}

impl GaussInt {
    pub fn new(re: BigInt, im: BigInt) -> Self {
        GaussInt { re, im }
    }

    pub fn from_int(re: BigInt) -> Self {
        GaussInt { re, im: BigInt::zero() }
    }

    pub fn from_i64(re: i64) -> Self {
        GaussInt::from_int(BigInt::from(re))
    }

    pub fn zero() -> Self {
        GaussInt::default()
    }

    pub fn one() -> Self {
        GaussInt::from_i64(1)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussInt { re: self.re.clone(), im: -&self.im }
    }

    pub fn norm_sqr(&self) -> BigInt {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        GaussInt { re: &self.re * k, im: &self.im * k }
    }

    /// Exact quotient by a rational integer; panics if inexact.
    pub fn div_int_exact(&self, k: &BigInt) -> Self {
        let (qr, rr) = self.re.div_rem(k);
        let (qi, ri) = self.im.div_rem(k);
        assert!(rr.is_zero() && ri.is_zero(), "inexact division");
        GaussInt { re: qr, im: qi }
    }

    /// Exact quotient; panics if `d` does not divide `self`.
    pub fn div_exact(&self, d: &GaussInt) -> Self {
        if d.is_real() {
            return self.div_int_exact(&d.re);
        }
        let n = d.norm_sqr();
        (self * &d.conj()).div_int_exact(&n)
    }

    /// gcd of the two rational-integer parts.
    pub fn content(&self) -> BigInt {
        gcd_int(&self.re, &self.im)
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = GaussInt::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn log_abs(&self) -> f64 {
        0.5 * log_abs_bigint(&self.norm_sqr())
    }

    pub fn to_c64(&self) -> C64 {
        let one = BigInt::one();
        C64::new(ratio_to_f64(&self.re, &one), ratio_to_f64(&self.im, &one))
    }

    pub fn bits(&self) -> u64 {
        self.re.bits().max(self.im.bits())
    }
}

impl<'a> Add<&'a GaussInt> for &'a GaussInt {
    type Output = GaussInt;
    fn add(self, o: &GaussInt) -> GaussInt {
        GaussInt { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl<'a> Sub<&'a GaussInt> for &'a GaussInt {
    type Output = GaussInt;
    fn sub(self, o: &GaussInt) -> GaussInt {
        GaussInt { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl<'a> Mul<&'a GaussInt> for &'a GaussInt {
    type Output = GaussInt;
    fn mul(self, o: &GaussInt) -> GaussInt {
        if self.is_real() && o.is_real() {
            return GaussInt::from_int(&self.re * &o.re);
        }
        GaussInt {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
}

impl Neg for &GaussInt {
    type Output = GaussInt;
    fn neg(self) -> GaussInt {
        GaussInt { re: -&self.re, im: -&self.im }
    }
}

impl fmt::Display for GaussInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", self.re)
        } else if self.re.is_zero() {
            write!(f, "{}i", self.im)
        } else if self.im.is_negative() {
            write!(f, "{}-{}i", self.re, -&self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// Gaussian rational `(re + im i) / den` in lowest terms with `den > 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GaussRat {
    num: GaussInt,
    den: BigInt,
}

impl GaussRat {
    pub fn new(num: GaussInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        let mut r = GaussRat { num, den };
        r.reduce();
        r
    }

    fn reduce(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            self.num = -&self.num;
        }
        let g = gcd_int(&self.num.content(), &self.den);
        if !g.is_one() && !g.is_zero() {
            self.num = self.num.div_int_exact(&g);
            self.den = &self.den / &g;
        }
    }

    pub fn from_int(n: GaussInt) -> Self {
        GaussRat { num: n, den: BigInt::one() }
    }

    pub fn from_i64(n: i64) -> Self {
        GaussRat::from_int(GaussInt::from_i64(n))
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        GaussRat::new(GaussInt::from_i64(p), BigInt::from(q))
    }

    pub fn from_rational(r: &BigRational) -> Self {
        GaussRat::new(GaussInt::from_int(r.numer().clone()), r.denom().clone())
    }

    pub fn from_parts(re: &BigRational, im: &BigRational) -> Self {
        let den = re.denom().lcm(im.denom());
        let num = GaussInt::new(re.numer() * (&den / re.denom()), im.numer() * (&den / im.denom()));
        GaussRat::new(num, den)
    }

    pub fn zero() -> Self {
        GaussRat::from_i64(0)
    }

    pub fn one() -> Self {
        GaussRat::from_i64(1)
    }

    pub fn numer(&self) -> &GaussInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.num.is_real()
    }

    pub fn re(&self) -> BigRational {
        BigRational::new(self.num.re.clone(), self.den.clone())
    }

    pub fn im(&self) -> BigRational {
        BigRational::new(self.num.im.clone(), self.den.clone())
    }

    /// The value as a rational, if it is real.
    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_real().then(|| self.re())
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(invalid("division by zero"));
        }
        // den / (a + bi) = den (a - bi) / (a^2 + b^2)
        Ok(GaussRat::new(self.num.conj().scale(&self.den), self.num.norm_sqr()))
    }

    pub fn div(&self, o: &GaussRat) -> Result<Self> {
        Ok(self * &o.inv()?)
    }

    pub fn pow(&self, e: u64) -> Self {
        GaussRat { num: self.num.pow(e), den: num_traits::pow(self.den.clone(), e as usize) }
    }

    pub fn to_c64(&self) -> C64 {
        C64::new(ratio_to_f64(&self.num.re, &self.den), ratio_to_f64(&self.num.im, &self.den))
    }

    pub fn log_abs(&self) -> f64 {
        self.num.log_abs() - log_abs_bigint(&self.den)
    }

    /// `1 + x + ... + x^i` for `i = 0..=n`.
    pub fn partial_geometric_sums(&self, n: usize) -> Vec<GaussRat> {
        let mut out = Vec::with_capacity(n + 1);
        let mut s = GaussRat::one();
        out.push(s.clone());
        for _ in 0..n {
            s = &(&s * self) + &GaussRat::one();
            out.push(s.clone());
        }
        out
    }
}

impl<'a> Add<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        if self.den == o.den {
            return GaussRat::new(&self.num + &o.num, self.den.clone());
        }
        GaussRat::new(&self.num.scale(&o.den) + &o.num.scale(&self.den), &self.den * &o.den)
    }
}

impl<'a> Sub<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        self + &(-o)
    }
}

impl<'a> Mul<&'a GaussRat> for &'a GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.num * &o.num, &self.den * &o.den)
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat { num: -&self.num, den: self.den.clone() }
    }
}

impl From<BigRational> for GaussRat {
    fn from(r: BigRational) -> Self {
        GaussRat::from_rational(&r)
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for GaussRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = (self.re(), self.im());
        if im.is_zero() {
            return f.write_str(&fmt_rational(&re));
        }
        let im_str = if im.is_one() {
            "i".to_string()
        } else if (-&im).is_one() {
            "-i".to_string()
        } else {
            format!("{}i", fmt_rational(&im))
        };
        if re.is_zero() {
            return f.write_str(&im_str);
        }
        if im.is_positive() {
            write!(f, "{}+{}", fmt_rational(&re), im_str)
        } else {
            write!(f, "{}{}", fmt_rational(&re), im_str)
        }
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || invalid(format!("not an exact rational: {s:?}"));
    match s.split_once('/') {
        Some((p, q)) => {
            let p = BigInt::from_str(p.trim()).map_err(|_| bad())?;
            let q = BigInt::from_str(q.trim()).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(p, q))
        }
        None => Ok(BigRational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
    }
}

/// Accepts `p`, `p/q`, `p/q i`, and `a+bi` / `a-bi` with rational `a`, `b`.
impl FromStr for GaussRat {
    type Err = Error;

    fn from_str(s: &str) -> Result<GaussRat> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(invalid("empty number"));
        }
        let Some(body) = s.strip_suffix('i') else {
            return Ok(GaussRat::from_rational(&parse_rational(&s)?));
        };
        // split at the last sign that is not leading
        let cut = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(k, _)| k)
            .last();
        let (re, im) = match cut {
            Some(k) => (parse_rational(&body[..k])?, &body[k..]),
            None => (BigRational::zero(), body),
        };
        let im = match im {
            "" | "+" => BigRational::one(),
            "-" => -BigRational::one(),
            other => parse_rational(other.strip_prefix('+').unwrap_or(other))?,
        };
        Ok(GaussRat::from_parts(&re, &im))
    }
}

impl Serialize for GaussRat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for GaussRat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for s in ["3/2", "-4", "0", "1/2+3/4i", "2-i", "i", "-5/3i"] {
            let x: GaussRat = s.parse().unwrap();
            let again: GaussRat = x.to_string().parse().unwrap();
            assert_eq!(x, again, "{s}");
        }
        assert_eq!("6/4".parse::<GaussRat>().unwrap(), GaussRat::from_ratio(3, 2));
        assert_eq!("2-i".parse::<GaussRat>().unwrap().to_c64(), C64::new(2.0, -1.0));
        assert!("1.5".parse::<GaussRat>().is_err());
        assert!("1/0".parse::<GaussRat>().is_err());
    }

    #[test]
    fn field_operations() {
        let a: GaussRat = "1/2+3i".parse().unwrap();
        let b: GaussRat = "-2/3-i".parse().unwrap();
        let q = a.div(&b).unwrap();
        assert_eq!(&q * &b, a);
        assert_eq!(&(&a - &b) + &b, a);
        assert!(((&a * &b).to_c64() - a.to_c64() * b.to_c64()).norm() < 1e-14);
    }

    #[test]
    fn huge_values_convert() {
        let x = GaussInt::from_int(BigInt::from(3).pow(5000));
        assert!((x.log_abs() - 5000.0 * 3f64.ln()).abs() < 1e-9);
        let r = GaussRat::new(x.clone(), BigInt::from(3).pow(4999));
        assert!((r.to_c64().re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_division() {
        let a = GaussInt::new(BigInt::from(3), BigInt::from(4));
        let b = GaussInt::new(BigInt::from(-7), BigInt::from(2));
        assert_eq!((&a * &b).div_exact(&b), a);
    }
}
