use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{check_lambda, factor, log_biguint, ord_int, ord_p, rational_primes, Place};
use crate::algebra::{capacity_closed_form, log_abs_bigint};
use crate::dynamics::{gamma_arch_certified, linear_tail, C64};
use crate::error::{invalid, Error, Result};

const MAX_TERMS: usize = 4000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaV {
    pub place: Place,
    pub value: f64,
    pub tail: f64,
    pub terms: usize,
    /// `c = 1/M` in `|1 + ... + lambda^i|_p >= (i + 1)^{-1} c^i`, on the unit branch.
    pub unit_constant: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum PlaceClass {
    Exceptional,
    /// `|S_i|_p = 1` for `i < n` and `|S_n|_p < 1`.
    Mn { n: usize },
    /// No witness up to the search bound.
    M0 { checked_up_to: usize },
}

fn split(lambda: &BigRational) -> (BigInt, BigInt) {
    (lambda.numer().clone(), lambda.denom().clone())
}

/// `N_0 = 1, N_i = b N_{i-1} + a^i`, so that `1 + ... + lambda^i = N_i / b^i`.
fn numerators(lambda: &BigRational, n: usize) -> Vec<BigInt> {
    let (a, b) = split(lambda);
    let mut out = Vec::with_capacity(n + 1);
    let mut cur = BigInt::one();
    let mut ai = BigInt::one();
    out.push(cur.clone());
    for _ in 1..=n {
        ai *= &a;
        cur = &b * &cur + &ai;
        out.push(cur.clone());
    }
    out
}

/// Unit-branch series `sum_{i>=1} w^i log|S_i|_p` for `|lambda|_p = 1`, with
/// tail from `-log|S_i|_p <= log|N_i| <= i log M + log(i + 1)`.
fn unit_series(lambda: &BigRational, p: &BigUint, w: f64, tol: f64) -> Result<(f64, f64, usize, f64)> {
    let (a, b) = split(lambda);
    let log_m = log_abs_bigint(&a.abs().max(b.abs()));
    let lp = log_biguint(p);
    let mut cur = BigInt::one();
    let mut ai = BigInt::one();
    let mut sum = 0.0;
    let mut wi = 1.0;
    for i in 1..=MAX_TERMS {
        ai *= &a;
        cur = &b * &cur + &ai;
        wi *= w;
        sum -= wi * ord_int(&cur, p) as f64 * lp;
        let m = i as f64 + 2.0;
        let tail = linear_tail(w, i, log_m + 1.0 / m, m.ln() - (i as f64 + 1.0) / m);
        if tail <= tol {
            return Ok((sum, tail, i, (-log_m).exp()));
        }
    }
    Err(Error::GammaDivergence(format!("{lambda} at {p}: tail not certified")))
}

/// `gamma_v(lambda) = 1/2 sum_{i>=1} 2^{-i} log|1 + lambda + ... + lambda^i|_v`.
pub fn gamma_v(lambda: &BigRational, v: &Place, tol: f64) -> Result<GammaV> {
    check_lambda(lambda)?;
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    match v {
        Place::Archimedean => {
            let l = lambda.to_f64().unwrap_or(f64::NAN);
            let c = gamma_arch_certified(C64::new(l, 0.0), tol)?;
            Ok(GammaV { place: v.clone(), value: c.value, tail: c.tail, terms: c.terms, unit_constant: None })
        }
        Place::Prime(p) => {
            let e = ord_p(lambda, p);
            let exact = |value| GammaV { place: v.clone(), value, tail: 0.0, terms: 0, unit_constant: None };
            if e > 0 {
                return Ok(exact(0.0));
            }
            if e < 0 {
                return Ok(exact(-(e as f64) * log_biguint(p)));
            }
            let (s, tail, terms, c) = unit_series(lambda, p, 0.5, 2.0 * tol)?;
            Ok(GammaV { place: v.clone(), value: 0.5 * s, tail: 0.5 * tail, terms, unit_constant: Some(c) })
        }
    }
}

/// `log Cap(K_v) = -2 log|lambda|_v - 3/4 sum_{j>=1} 4^{-j} log|1 + ... + lambda^j|_v`.
pub fn log_capacity_v(lambda: &BigRational, v: &Place, tol: f64) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    match v {
        Place::Archimedean => {
            let l = lambda.to_f64().unwrap_or(f64::NAN);
            let c = capacity_closed_form(C64::new(l, 0.0), tol)?;
            Ok((c.log_capacity, c.tail.unwrap_or(0.0)))
        }
        Place::Prime(p) => {
            let e = ord_p(lambda, p);
            let log_abs = -(e as f64) * log_biguint(p);
            if e > 0 {
                return Ok((-2.0 * log_abs, 0.0));
            }
            if e < 0 {
                // sum_j 4^{-j} j = 4/9
                return Ok((-2.0 * log_abs - log_abs / 3.0, 0.0));
            }
            let (s, tail, _, _) = unit_series(lambda, p, 0.25, tol / 0.75)?;
            Ok((-0.75 * s, 0.75 * tail))
        }
    }
}

/// Least `n <= n_max` with `|1 + ... + lambda^n|_p < 1`, computed mod `p`.
pub fn classify_place(lambda: &BigRational, p: &BigUint, n_max: usize) -> Result<PlaceClass> {
    check_lambda(lambda)?;
    if ord_p(lambda, p) != 0 {
        return Ok(PlaceClass::Exceptional);
    }
    let pi = BigInt::from_biguint(BigSign::Plus, p.clone());
    let (a, b) = split(lambda);
    let b_inv = b.mod_floor(&pi).modpow(&(&pi - 2u32), &pi);
    let lam = (a.mod_floor(&pi) * b_inv).mod_floor(&pi);
    let mut s = BigInt::one();
    for n in 1..=n_max {
        s = (BigInt::one() + &lam * &s).mod_floor(&pi);
        if s.is_zero() {
            return Ok(PlaceClass::Mn { n });
        }
    }
    Ok(PlaceClass::M0 { checked_up_to: n_max })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaceTerm {
    /// A place, or an unfactored composite standing for the places dividing it.
    pub place: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlobalSum {
    pub total: f64,
    pub tail: f64,
    pub truncation: usize,
    pub places: Vec<PlaceTerm>,
}

fn mobius(mut n: usize) -> i32 {
    let mut m = 1;
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            n /= d;
            if n % d == 0 {
                return 0;
            }
            m = -m;
        }
        d += 1;
    }
    if n > 1 {
        m = -m;
    }
    m
}

/// `|Phi_d(b, a)|` for `2 <= d <= n + 1`, the homogeneous cyclotomic values
/// whose products over `d | i + 1` give the numerators `N_i`.
fn cyclotomic_pieces(a: &BigInt, b: &BigInt, n: usize) -> Vec<BigUint> {
    if a == b {
        return (2..=n + 1).map(BigUint::from).collect();
    }
    (2..=n + 1)
        .map(|d| {
            let mut num = BigInt::one();
            let mut den = BigInt::one();
            for e in (1..=d).filter(|e| d % e == 0) {
                let f = b.pow(e as u32) - a.pow(e as u32);
                match mobius(d / e) {
                    1 => num *= f,
                    -1 => den *= f,
                    _ => {}
                }
            }
            (num / den).magnitude().clone()
        })
        .collect()
}

/// Split a list of pairwise-unrelated integers into pairwise coprime pieces.
fn coprime_base(mut v: Vec<BigUint>) -> Vec<BigUint> {
    v.retain(|x| !x.is_one() && !x.is_zero());
    'outer: loop {
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                let g = v[i].gcd(&v[j]);
                if !g.is_one() {
                    let (x, y) = (&v[i] / &g, &v[j] / &g);
                    v.swap_remove(j);
                    v.swap_remove(i);
                    v.extend([x, y, g].into_iter().filter(|z| !z.is_one()));
                    continue 'outer;
                }
            }
        }
        break;
    }
    v.sort();
    v
}

/// Truncation of `sum_v sum_{i<=N} w^i log|S_i|_v` over every place where some
/// `S_i` with `i <= N` is not a unit; each term index sums to zero by the
/// product formula.
fn global_series(lambda: &BigRational, truncation: usize, w: f64) -> Result<(Vec<(String, f64)>, f64)> {
    check_lambda(lambda)?;
    if truncation == 0 {
        return Err(invalid("truncation must be positive"));
    }
    let (a, b) = split(lambda);
    let nums = numerators(lambda, truncation);
    let mut primes: Vec<BigUint> = rational_primes(lambda);
    let mut composite: Vec<BigUint> = Vec::new();
    for n in cyclotomic_pieces(&a, &b, truncation) {
        let (f, rest) = factor(&n);
        primes.extend(f.into_keys());
        composite.extend(rest);
    }
    primes.sort();
    primes.dedup();
    // strip known primes from the unfactored pieces before refining them
    let composite: Vec<BigUint> = composite
        .into_iter()
        .map(|mut c| {
            for p in &primes {
                while (&c % p).is_zero() {
                    c /= p;
                }
            }
            c
        })
        .collect();
    let bundles = coprime_base(composite);

    let log_b = log_abs_bigint(&b);
    let mut arch = 0.0;
    let mut at_p = vec![0.0; primes.len()];
    let mut at_bundle = vec![0.0; bundles.len()];
    let ord_b: Vec<u64> = primes.iter().map(|p| ord_int(&b, p)).collect();
    let mut wi = 1.0;
    for (i, n) in nums.iter().enumerate().skip(1) {
        wi *= w;
        arch += wi * (log_abs_bigint(n) - i as f64 * log_b);
        let mut rebuilt = BigUint::one();
        for (k, p) in primes.iter().enumerate() {
            let e = ord_int(n, p);
            rebuilt *= p.pow(e as u32);
            at_p[k] -= wi * (e as f64 - i as f64 * ord_b[k] as f64) * log_biguint(p);
        }
        for (k, q) in bundles.iter().enumerate() {
            let e = ord_int(n, q);
            rebuilt *= q.pow(e as u32);
            at_bundle[k] -= wi * e as f64 * log_biguint(q);
        }
        if rebuilt != *n.magnitude() {
            return Err(Error::CrossCheckFailed(format!("place enumeration misses part of N_{i}")));
        }
    }
    let mut out = vec![(Place::Archimedean.to_string(), arch)];
    out.extend(primes.iter().zip(at_p).map(|(p, x)| (p.to_string(), x)));
    out.extend(bundles.iter().zip(at_bundle).map(|(q, x)| (format!("composite {q}"), x)));
    // sum_v |log|S_i|_v| <= 2 (log(i + 1) + 2 i log M) bounds the neglected terms
    let log_m = log_abs_bigint(&a.abs().max(b.abs()));
    let m = truncation as f64 + 2.0;
    let tail = 2.0 * linear_tail(w, truncation, 2.0 * log_m + 1.0 / m, m.ln() - (truncation as f64 + 1.0) / m);
    Ok((out, tail))
}

fn finish(parts: Vec<(String, f64)>, tail: f64, truncation: usize) -> GlobalSum {
    let total = parts.iter().map(|(_, x)| x).sum();
    GlobalSum {
        total,
        tail,
        truncation,
        places: parts.into_iter().map(|(place, value)| PlaceTerm { place, value }).collect(),
    }
}

/// `sum_v N_v gamma_v(lambda)`, truncated in the term index.
pub fn global_gamma_sum(lambda: &BigRational, truncation: usize) -> Result<GlobalSum> {
    let (parts, tail) = global_series(lambda, truncation, 0.5)?;
    let parts = parts.into_iter().map(|(p, x)| (p, 0.5 * x)).collect();
    Ok(finish(parts, 0.5 * tail, truncation))
}

/// `sum_v N_v log Cap(K_v)`, truncated in the term index.
pub fn global_log_capacity_sum(lambda: &BigRational, truncation: usize) -> Result<GlobalSum> {
    let (parts, tail) = global_series(lambda, truncation, 0.25)?;
    let (a, b) = split(lambda);
    let parts = parts
        .into_iter()
        .map(|(place, x)| {
            let log_lambda = match place.parse::<Place>() {
                Ok(Place::Archimedean) => log_abs_bigint(&a) - log_abs_bigint(&b),
                Ok(Place::Prime(p)) => -(ord_int(&a, &p) as f64 - ord_int(&b, &p) as f64) * log_biguint(&p),
                // composite pieces divide some N_i and so are prime to a and b
                Err(_) => 0.0,
            };
            (place, -2.0 * log_lambda - 0.75 * x)
        })
        .collect();
    Ok(finish(parts, 0.75 * tail, truncation))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    /// 60-term truncation straight from the definition.
    fn brute(lambda: &BigRational, p: u64) -> f64 {
        let mut s = BigRational::zero();
        let mut pw = BigRational::one();
        let mut acc = 0.0;
        for i in 1..=60 {
            pw = &pw * lambda;
            s = if i == 1 { BigRational::one() + lambda } else { s + &pw };
            acc += 0.5f64.powi(i + 1) * super::super::log_abs_at(&s, &Place::prime(p));
        }
        acc
    }

    #[test]
    fn unit_branch_matches_truncation() {
        let g = gamma_v(&q(2, 1), &Place::prime(3), 1e-14).unwrap();
        assert!(g.unit_constant.is_some());
        assert!((g.value - brute(&q(2, 1), 3)).abs() < 1e-13);
        assert!(g.value < 0.0);
    }

    #[test]
    fn gamma_one_at_two_is_negative() {
        let g = gamma_v(&q(1, 1), &Place::prime(2), 1e-14).unwrap();
        // 1/2 sum 2^{-i} log|i + 1|_2
        let direct: f64 = (1..80).map(|i| 0.5f64.powi(i + 1) * -(((i + 1) as u32).trailing_zeros() as f64) * 2f64.ln()).sum();
        assert!((g.value - direct).abs() < 1e-13);
        assert!(g.value < 0.0);
    }

    #[test]
    fn shortcuts() {
        let g = gamma_v(&q(3, 1), &Place::prime(3), 1e-12).unwrap();
        assert_eq!((g.value, g.tail), (0.0, 0.0));
        // |1/3|_3 = 3, so this is the expanding branch
        let g = gamma_v(&q(1, 3), &Place::prime(3), 1e-12).unwrap();
        assert!((g.value - 3f64.ln()).abs() < 1e-15);
        assert!((brute(&q(1, 3), 3) - g.value).abs() < 1e-15);
        let g = gamma_v(&q(5, 9), &Place::prime(3), 1e-12).unwrap();
        assert!((g.value - 2.0 * 3f64.ln()).abs() < 1e-15);
        assert!((brute(&q(5, 9), 3) - g.value).abs() < 1e-15);
        assert!(brute(&q(3, 1), 3) == 0.0);
    }

    #[test]
    fn root_of_unity_rejected() {
        assert!(matches!(gamma_v(&q(-1, 1), &Place::prime(3), 1e-9), Err(Error::RootOfUnity(_))));
    }

    #[test]
    fn classification_examples() {
        let big = |p: u64| BigUint::from(p);
        assert_eq!(classify_place(&q(1, 1), &big(5), 20).unwrap(), PlaceClass::Mn { n: 4 });
        assert_eq!(classify_place(&q(2, 1), &big(2), 20).unwrap(), PlaceClass::Exceptional);
        assert_eq!(classify_place(&q(2, 1), &big(7), 20).unwrap(), PlaceClass::Mn { n: 2 });
        assert_eq!(classify_place(&q(2, 1), &big(1000003), 5).unwrap(), PlaceClass::M0 { checked_up_to: 5 });
    }

    #[test]
    fn global_sums_vanish() {
        for lambda in [q(2, 1), q(1, 1), q(3, 2), q(-5, 7)] {
            let g = global_gamma_sum(&lambda, 50).unwrap();
            assert!(g.total.abs() < 1e-12, "{lambda}: {}", g.total);
            assert!(g.tail < 1e-10);
            let c = global_log_capacity_sum(&lambda, 30).unwrap();
            assert!(c.total.abs() < 1e-12, "{lambda}: {}", c.total);
        }
    }

    #[test]
    fn global_parts_match_local_gamma() {
        let lambda = q(3, 2);
        let g = global_gamma_sum(&lambda, 60).unwrap();
        for t in &g.places {
            if let Ok(v) = t.place.parse::<Place>() {
                let local = gamma_v(&lambda, &v, 1e-13).unwrap();
                assert!((local.value - t.value).abs() < 1e-12 + local.tail, "{}", t.place);
            }
        }
    }

    #[test]
    fn cyclotomic_pieces_multiply_to_numerators() {
        let (a, b) = (BigInt::from(-5), BigInt::from(7));
        let pieces = cyclotomic_pieces(&a, &b, 12);
        let nums = numerators(&q(-5, 7), 12);
        for i in 1..=12 {
            let prod = (2..=i + 1).filter(|d| (i + 1) % d == 0).fold(BigUint::one(), |acc, d| acc * &pieces[d - 2]);
            assert_eq!(prod, *nums[i].magnitude());
        }
        assert_eq!((mobius(1), mobius(6), mobius(12), mobius(7)), (1, 1, 0, -1));
    }

    #[test]
    fn coprime_refinement() {
        let n = |x: u64| BigUint::from(x);
        assert_eq!(coprime_base(vec![n(6), n(10)]), vec![n(2), n(3), n(5)]);
        assert_eq!(coprime_base(vec![n(35), n(35)]), vec![n(35)]);
    }
}
