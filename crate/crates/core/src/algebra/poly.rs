use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use super::gauss::{gcd_int, GaussInt, GaussRat};
use crate::dynamics::{Sign, C64};
use crate::error::{Error, Result};

/// Coefficient ring for dense polynomials.
pub trait Coeff: Clone + PartialEq + Send + Sync {
    fn zero() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
}

impl Coeff for GaussInt {
    fn zero() -> Self {
        GaussInt::zero()
    }
    fn is_zero(&self) -> bool {
        GaussInt::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

impl Coeff for GaussRat {
    fn zero() -> Self {
        GaussRat::zero()
    }
    fn is_zero(&self) -> bool {
        GaussRat::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
}

/// Dense polynomial in one variable, coefficients low to high.
/// The zero polynomial has no coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Poly<R> {
    coeffs: Vec<R>,
}

pub type RatPoly = Poly<GaussRat>;
pub type IntPoly = Poly<GaussInt>;

const PARALLEL_MUL_MIN: usize = 64;

impl<R: Coeff> Poly<R> {
    pub fn new(mut coeffs: Vec<R>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: R) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<R> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> R {
        self.coeffs.get(i).cloned().unwrap_or_else(R::zero)
    }

    pub fn leading(&self) -> Option<&R> {
        self.coeffs.last()
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i).add(&o.coeff(i))).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i).sub(&o.coeff(i))).collect())
    }

    pub fn scale(&self, k: &R) -> Self {
        Poly::new(self.coeffs.iter().map(|c| c.mul(k)).collect())
    }

    /// Multiply by the variable.
    pub fn shift(&self) -> Self {
        if self.is_zero() {
            return Poly::zero();
        }
        let mut c = Vec::with_capacity(self.coeffs.len() + 1);
        c.push(R::zero());
        c.extend(self.coeffs.iter().cloned());
        Poly { coeffs: c }
    }

    /// Schoolbook product; output coefficients are computed in parallel.
    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        let (a, b) = (&self.coeffs, &o.coeffs);
        let n = a.len() + b.len() - 1;
        let coeff = |k: usize| {
            let lo = k.saturating_sub(b.len() - 1);
            let hi = k.min(a.len() - 1);
            let mut acc = R::zero();
            for i in lo..=hi {
                if !a[i].is_zero() && !b[k - i].is_zero() {
                    acc = acc.add(&a[i].mul(&b[k - i]));
                }
            }
            acc
        };
        let coeffs = if n >= PARALLEL_MUL_MIN {
            (0..n).into_par_iter().map(coeff).collect()
        } else {
            (0..n).map(coeff).collect()
        };
        Poly::new(coeffs)
    }

    pub fn eval(&self, x: &R) -> R {
        self.coeffs.iter().rev().fold(R::zero(), |acc, c| acc.mul(x).add(c))
    }
}

impl IntPoly {
    /// Divide out the gcd of all rational-integer parts, making the leading
    /// coefficient's first nonzero part positive.
    pub fn primitive(&self) -> IntPoly {
        let mut g = BigInt::zero();
        for c in &self.coeffs {
            g = gcd_int(&g, &c.content());
            if g.is_one() {
                break;
            }
        }
        let Some(lead) = self.leading() else {
            return Poly::zero();
        };
        let first = if lead.re.is_zero() { &lead.im } else { &lead.re };
        if first < &BigInt::zero() {
            g = -g;
        }
        Poly { coeffs: self.coeffs.iter().map(|c| c.div_int_exact(&g)).collect() }
    }

    pub fn to_rat(&self) -> RatPoly {
        Poly { coeffs: self.coeffs.iter().cloned().map(GaussRat::from_int).collect() }
    }

    pub fn max_bits(&self) -> u64 {
        self.coeffs.iter().map(|c| c.bits()).max().unwrap_or(0)
    }
}

impl RatPoly {
    pub fn to_c64(&self) -> Vec<C64> {
        self.coeffs.iter().map(|c| c.to_c64()).collect()
    }

    pub fn eval_c64(&self, x: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * x + c.to_c64())
    }
}

pub const DEFAULT_N_MAX: u32 = 14;

/// Integer-scaled orbit of `(sign 1, 1)` under the parameter family.
///
/// With `lambda = a / b` (`b` a positive integer), the pair
/// `(P~, Q~) = (a P~ Q~, b (P~^2 + t P~ Q~ + Q~^2))` stays integral and
/// `(P_k, Q_k) = (P~_k, Q~_k) / b^{e_k}` with `e_0 = 0`, `e_{k+1} = 2 e_k + 1`.
#[derive(Clone, Debug)]
pub struct ScaledOrbit {
    pub lambda: GaussRat,
    pub sign: Sign,
    /// Entry `k` holds `(P~_k, Q~_k)` for `k = 0..=n`.
    pub polys: Vec<(IntPoly, IntPoly)>,
}

impl ScaledOrbit {
    pub fn exponent(k: usize) -> u64 {
        (1u64 << k) - 1
    }

    pub fn n(&self) -> usize {
        self.polys.len() - 1
    }
}

pub fn check_budget(n: u32, n_max: u32) -> Result<()> {
    if n > n_max {
        return Err(Error::BudgetExceeded(format!("n = {n} exceeds N_max = {n_max}")));
    }
    Ok(())
}

pub fn scaled_orbit(lambda: &GaussRat, n: u32, sign: Sign, n_max: u32) -> Result<ScaledOrbit> {
    check_budget(n, n_max)?;
    if lambda.is_zero() {
        return Err(crate::error::invalid("lambda must be nonzero"));
    }
    let a = lambda.numer().clone();
    let b = GaussInt::from_int(lambda.denom().clone());
    let start = match sign {
        Sign::Plus => GaussInt::one(),
        Sign::Minus => GaussInt::from_i64(-1),
    };
    let mut polys = vec![(Poly::constant(start), Poly::constant(GaussInt::one()))];
    for _ in 0..n {
        let (p, q) = polys.last().unwrap();
        let pq = p.mul(q);
        let (pp, qq) = rayon::join(|| p.mul(p), || q.mul(q));
        let next_p = pq.scale(&a);
        let next_q = pp.add(&pq.shift()).add(&qq).scale(&b);
        polys.push((next_p, next_q));
    }
    Ok(ScaledOrbit { lambda: lambda.clone(), sign, polys })
}

/// `F_t^n(sign 1, 1) = (P_n(t), Q_n(t))` with exact coefficients.
pub fn iterate_param_poly_signed(
    lambda: &GaussRat,
    n: u32,
    sign: Sign,
    n_max: u32,
) -> Result<(RatPoly, RatPoly)> {
    if n == 0 {
        return Err(crate::error::invalid("n must be at least 1"));
    }
    let orbit = scaled_orbit(lambda, n, sign, n_max)?;
    let (p, q) = &orbit.polys[n as usize];
    let scale = GaussRat::new(
        GaussInt::one(),
        num_traits::pow(lambda.denom().clone(), ScaledOrbit::exponent(n as usize) as usize),
    );
    Ok((p.to_rat().scale(&scale), q.to_rat().scale(&scale)))
}

/// `F_t^n(1, 1) = (P_n(t), Q_n(t))` with `N_max` defaulting to 14.
pub fn iterate_param_poly(lambda: &GaussRat, n: u32) -> Result<(RatPoly, RatPoly)> {
    iterate_param_poly_signed(lambda, n, Sign::Plus, DEFAULT_N_MAX)
}

/// Expansion coefficients of `F_n(1, s)` near `s = 0`:
/// `(s B_n + s^2 A_n + ..., C_n + s D_n + ...)`, plus the reduced
/// sequences `A*_n`, `D*_n`. Entry `k` of each vector is index `n = k + 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoeffSeq {
    pub lambda: GaussRat,
    pub b: Vec<GaussRat>,
    pub c: Vec<GaussRat>,
    pub a: Vec<GaussRat>,
    pub d: Vec<GaussRat>,
    pub a_star: Vec<GaussRat>,
    pub d_star: Vec<GaussRat>,
}

impl CoeffSeq {
    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }
}

pub fn coeff_sequences(lambda: &GaussRat, n: u32) -> Result<CoeffSeq> {
    if n == 0 {
        return Err(crate::error::invalid("n must be at least 1"));
    }
    let n = n as usize;
    let l = lambda;
    let two = GaussRat::from_i64(2);
    let (mut b, mut c, mut a, mut d) = (vec![l.clone()], vec![GaussRat::one()], vec![GaussRat::zero()], vec![two.clone()]);
    for k in 0..n - 1 {
        let (bk, ck, ak, dk) = (&b[k], &c[k], &a[k], &d[k]);
        let nb = &(l * bk) * ck;
        let nc = ck * &(bk + ck);
        let na = l * &(&(bk * dk) + &(ck * ak));
        let nd = &(ck * &(&(&two * dk) + ak)) + &(dk * bk);
        b.push(nb);
        c.push(nc);
        a.push(na);
        d.push(nd);
    }
    // S_i = 1 + lambda + ... + lambda^i
    let s = l.partial_geometric_sums(n);
    let (mut a_star, mut d_star) = (vec![GaussRat::zero()], vec![two.clone()]);
    for k in 1..n {
        // index m = k uses S_{m-1} and lambda + ... + lambda^m = S_m - 1
        let (am, dm) = (&a_star[k - 1], &d_star[k - 1]);
        let na = &(&l.pow(k as u64 + 1) * dm) + &(&(&s[k] - &GaussRat::one()) * am);
        let nd = &(&(&(&two * &s[k - 1]) + &l.pow(k as u64)) * dm) + &(&s[k - 1] * am);
        a_star.push(na);
        d_star.push(nd);
    }
    let seq = CoeffSeq { lambda: l.clone(), b, c, a, d, a_star, d_star };
    check_closed_forms(&seq, &s)?;
    Ok(seq)
}

/// `B_n = lambda^n prod_{j=1}^{n-2} S_j^{2^{n-2-j}}` and `C_n = B_n S_{n-1} / lambda^n` for `n >= 3`.
fn check_closed_forms(seq: &CoeffSeq, s: &[GaussRat]) -> Result<()> {
    let l = &seq.lambda;
    for n in 3..=seq.len() {
        let mut prod = GaussRat::one();
        for j in 1..=n - 2 {
            prod = &prod * &s[j].pow(1u64 << (n - 2 - j));
        }
        let b = &l.pow(n as u64) * &prod;
        let c = &prod * &s[n - 1];
        if b != seq.b[n - 1] || c != seq.c[n - 1] {
            return Err(Error::CrossCheckFailed(format!("closed form for B_{n} or C_{n}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{eval_homogeneous, MapParams, ProjPair};

    fn q(s: &str) -> GaussRat {
        s.parse().unwrap()
    }

    #[test]
    fn first_iterate() {
        let (p, qq) = iterate_param_poly(&q("2"), 1).unwrap();
        assert_eq!(p, Poly::constant(q("2")));
        assert_eq!(qq, Poly::new(vec![q("2"), q("1")]));
    }

    #[test]
    fn third_iterate_matches_float_orbit() {
        let (p, qq) = iterate_param_poly(&q("2"), 3).unwrap();
        let mp = MapParams::real(2.0, 1.0).unwrap();
        let one = C64::new(1.0, 0.0);
        let mut v = ProjPair::new(one, one).unwrap();
        for _ in 0..3 {
            v = eval_homogeneous(&mp, &v);
        }
        let (pe, qe) = (p.eval_c64(one), qq.eval_c64(one));
        assert!((pe - v.z1).norm() <= 1e-9 * v.z1.norm());
        assert!((qe - v.z2).norm() <= 1e-9 * v.z2.norm());
    }

    #[test]
    fn degrees_follow_powers_of_two() {
        for lambda in ["2", "-3/2", "1/2+i"] {
            for n in 1..=7u32 {
                let (p, qq) = iterate_param_poly(&q(lambda), n).unwrap();
                assert_eq!(p.degree(), Some((1usize << (n - 1)) - 1));
                assert_eq!(qq.degree(), Some(1usize << (n - 1)));
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            iterate_param_poly_signed(&q("2"), 5, Sign::Plus, 4),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn small_coefficients() {
        let seq = coeff_sequences(&q("2"), 4).unwrap();
        assert_eq!(seq.c[1], q("3"));
        assert_eq!(seq.b[3], q("1008"));
        let seq = coeff_sequences(&q("1/2"), 5).unwrap();
        let bound = 2.0 * 3f64.powi(15);
        assert!(seq.a_star[4].to_c64().norm() <= bound);
        assert!(seq.d_star[4].to_c64().norm() <= bound);
    }

    #[test]
    fn expansion_coefficients_match_polynomials() {
        // F_n(1, s) = s^d (P_n(1/s), Q_n(1/s)) with d = 2^{n-1}
        for lambda in ["2", "-2", "5/3", "1/2-3/2i"] {
            let seq = coeff_sequences(&q(lambda), 7).unwrap();
            for n in 1..=7u32 {
                let (p, qq) = iterate_param_poly(&q(lambda), n).unwrap();
                let d = 1usize << (n - 1);
                let k = n as usize - 1;
                assert_eq!(qq.coeff(d), seq.c[k]);
                assert_eq!(p.coeff(d - 1), seq.b[k]);
                assert_eq!(qq.coeff(d - 1), seq.d[k]);
                let a = if d >= 2 { p.coeff(d - 2) } else { GaussRat::zero() };
                assert_eq!(a, seq.a[k]);
            }
        }
    }

    #[test]
    fn reduced_sequences_factor_a_and_d() {
        // A_n = prod_{j=1}^{n-3} S_j^{2^{n-2-j} - 1} A*_n, likewise for D_n.
        // The exponent is one less than 2^{n-2-j}, not two less; checked
        // symbolically up to n = 7.
        for lambda in ["2", "-5/3", "1/3+i"] {
            let l = q(lambda);
            let seq = coeff_sequences(&l, 8).unwrap();
            let s = l.partial_geometric_sums(8);
            for n in 3..=8usize {
                let mut prod = GaussRat::one();
                for j in 1..=n - 3 {
                    prod = &prod * &s[j].pow((1u64 << (n - 2 - j)) - 1);
                }
                assert_eq!(seq.a[n - 1], &prod * &seq.a_star[n - 1], "A_{n} at {lambda}");
                assert_eq!(seq.d[n - 1], &prod * &seq.d_star[n - 1], "D_{n} at {lambda}");
            }
        }
    }

    #[test]
    fn sign_flip_is_reflection() {
        // F_t^n(-1, 1) = (-P_n(-t), Q_n(-t)) since f_{-t}(z) = -f_t(-z)
        let lambda = q("-3/2");
        for n in 1..=5u32 {
            let (p, qq) = iterate_param_poly_signed(&lambda, n, Sign::Plus, 14).unwrap();
            let (pm, qm) = iterate_param_poly_signed(&lambda, n, Sign::Minus, 14).unwrap();
            for k in 0..=qq.degree().unwrap() {
                let odd = k % 2 == 1;
                let flip = |c: GaussRat| if odd { -&c } else { c };
                assert_eq!(pm.coeff(k), -&flip(p.coeff(k)));
                assert_eq!(qm.coeff(k), flip(qq.coeff(k)));
            }
        }
    }

    #[test]
    fn primitive_part() {
        let p = Poly::new(vec![GaussInt::from_i64(-6), GaussInt::from_i64(4), GaussInt::from_i64(-2)]);
        let pp = p.primitive();
        assert_eq!(pp.coeffs(), &[GaussInt::from_i64(3), GaussInt::from_i64(-2), GaussInt::from_i64(1)]);
    }
}
