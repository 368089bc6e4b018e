use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gauss::{GaussInt, GaussRat};
use super::poly::{check_budget, RatPoly};
use crate::dynamics::{log_sum_series, Certified, SeriesWeight, C64};
use crate::error::{invalid, Result};

/// Determinant by fraction-free (Bareiss) elimination with row pivoting.
pub fn bareiss_det(mut m: Vec<Vec<GaussInt>>) -> GaussInt {
    let n = m.len();
    if n == 0 {
        return GaussInt::one();
    }
    let mut negate = false;
    let mut prev = GaussInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return GaussInt::zero();
            };
            m.swap(k, r);
            negate = !negate;
        }
        let (top, rest) = m.split_at_mut(k + 1);
        let pivot = &top[k];
        let prev_ref = &prev;
        rest.par_iter_mut().for_each(|row| {
            for j in k + 1..n {
                let v = &(&pivot[k] * &row[j]) - &(&row[k] * &pivot[j]);
                row[j] = v.div_exact(prev_ref);
            }
            row[k] = GaussInt::zero();
        });
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -&det
    } else {
        det
    }
}

/// Sylvester determinant of the degree-`d` homogenizations of `p` and `q`.
/// Coefficients enter from the highest power of the first variable down.
pub fn sylvester_resultant_deg(p: &RatPoly, q: &RatPoly, d: usize) -> Result<GaussRat> {
    if p.degree().unwrap_or(0) > d || q.degree().unwrap_or(0) > d {
        return Err(invalid("formal degree below actual degree"));
    }
    if p.is_zero() && q.is_zero() {
        return Err(invalid("both polynomials are zero"));
    }
    if d == 0 {
        return Ok(GaussRat::one());
    }
    let size = 2 * d;
    let mut rows = Vec::with_capacity(size);
    let mut scale = BigInt::one();
    for (poly, count) in [(p, d), (q, d)] {
        let high_first: Vec<GaussRat> = (0..=d).rev().map(|i| poly.coeff(i)).collect();
        let lcm = high_first.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<GaussInt> = high_first
            .iter()
            .map(|c| c.numer().scale(&(&lcm / c.denom())))
            .collect();
        for shift in 0..count {
            let mut row = vec![GaussInt::zero(); size];
            for (k, c) in ints.iter().enumerate() {
                row[shift + k] = c.clone();
            }
            rows.push(row);
            scale *= &lcm;
        }
    }
    let det = bareiss_det(rows);
    Ok(GaussRat::new(det, scale))
}

/// Sylvester resultant of the homogenizations at formal degree `max(deg p, deg q)`.
pub fn sylvester_resultant(p: &RatPoly, q: &RatPoly) -> Result<GaussRat> {
    let d = p.degree().unwrap_or(0).max(q.degree().unwrap_or(0));
    sylvester_resultant_deg(p, q, d)
}

/// `Res(F_n)` from the closed form:
/// `Res(F_1) = -lambda`, `Res(F_2) = lambda^6 (1 + lambda)`, and for `n >= 3`
/// `lambda^{2 4^{n-1} - 2^{n-1}} S_{n-1} prod_{j=1}^{n-2} S_j^{3 4^{n-2-j}}`.
pub fn resultant_recursive(lambda: &GaussRat, n: u32) -> Result<GaussRat> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    if lambda.is_zero() {
        return Err(invalid("lambda must be nonzero"));
    }
    let value = closed_form(lambda, n as usize);
    if n <= 6 {
        let chained = by_recursion(lambda, n as usize);
        if let Some(chained) = chained {
            assert_eq!(chained, value, "resultant recursion disagrees with closed form");
        }
    }
    Ok(value)
}

fn closed_form(lambda: &GaussRat, n: usize) -> GaussRat {
    match n {
        1 => -lambda,
        2 => &lambda.pow(6) * &(&GaussRat::one() + lambda),
        _ => {
            let s = lambda.partial_geometric_sums(n - 1);
            let e = 2 * (1u64 << (2 * (n - 1))) - (1u64 << (n - 1));
            let parts: Vec<GaussRat> = (1..=n - 2)
                .into_par_iter()
                .map(|j| s[j].pow(3 * (1u64 << (2 * (n - 2 - j)))))
                .collect();
            let mut acc = &lambda.pow(e) * &s[n - 1];
            for part in &parts {
                acc = &acc * part;
            }
            acc
        }
    }
}

/// `Res(F_{k+1}) = (S_k / S_{k-1}) lambda^{2^k} Res(F_k)^4` from `Res(F_2)`;
/// `None` when some `S_k` vanishes.
fn by_recursion(lambda: &GaussRat, n: usize) -> Option<GaussRat> {
    if n <= 2 {
        return Some(closed_form(lambda, n));
    }
    let s = lambda.partial_geometric_sums(n);
    let mut r = closed_form(lambda, 2);
    for k in 2..n {
        let ratio = s[k].div(&s[k - 1]).ok()?;
        r = &(&ratio * &lambda.pow(1u64 << k)) * &r.pow(4);
    }
    Some(r)
}

/// `log |Res(F_n)|` from the closed form in floating point, for any complex lambda.
pub fn log_abs_resultant(lambda: C64, n: u32) -> f64 {
    let n = n as usize;
    let ll = lambda.norm().ln();
    let mut s = C64::new(1.0, 0.0);
    let mut logs = vec![0.0];
    for _ in 1..n.max(2) {
        s = s * lambda + 1.0;
        logs.push(s.norm().ln());
    }
    match n {
        1 => ll,
        2 => 6.0 * ll + logs[1],
        _ => {
            let e = 2.0 * 4f64.powi(n as i32 - 1) - 2f64.powi(n as i32 - 1);
            let mut acc = e * ll + logs[n - 1];
            for (j, lj) in logs.iter().enumerate().take(n - 1).skip(1) {
                acc += 3.0 * 4f64.powi((n - 2 - j) as i32) * lj;
            }
            acc
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CapacityMode {
    ClosedForm,
    ResultantLimit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityValue {
    pub mode: CapacityMode,
    pub log_capacity: f64,
    pub capacity: f64,
    /// Certified tail for the closed form; `None` for the resultant limit,
    /// whose distance to the limit is not bounded here.
    pub tail: Option<f64>,
    pub n: Option<u32>,
    /// Bit length of the exact resultant, when one was formed.
    pub resultant_bits: Option<u64>,
}

/// `log Cap = -2 log|lambda| - 3/4 sum_{j>=1} 4^{-j} log|1 + ... + lambda^j|`.
pub fn capacity_closed_form(lambda: C64, tol: f64) -> Result<CapacityValue> {
    let series: Certified = log_sum_series(lambda, SeriesWeight::Quarter, tol / 0.75)?;
    let log_cap = -2.0 * lambda.norm().ln() - 0.75 * series.value;
    Ok(CapacityValue {
        mode: CapacityMode::ClosedForm,
        log_capacity: log_cap,
        capacity: log_cap.exp(),
        tail: Some(0.75 * series.tail),
        n: None,
        resultant_bits: None,
    })
}

/// `-log|Res(F_n)| / 4^{n-1}` with the resultant formed exactly.
pub fn capacity_resultant_limit(lambda: &GaussRat, n: u32, n_max: u32) -> Result<CapacityValue> {
    check_budget(n, n_max)?;
    let res = resultant_recursive(lambda, n)?;
    let log_res = res.log_abs();
    let log_cap = -log_res / 4f64.powi(n as i32 - 1);
    Ok(CapacityValue {
        mode: CapacityMode::ResultantLimit,
        log_capacity: log_cap,
        capacity: log_cap.exp(),
        tail: None,
        n: Some(n),
        resultant_bits: Some(res.numer().bits().max(res.denom().bits())),
    })
}

/// Resultant-limit capacity for a lambda without an exact representation.
pub fn capacity_resultant_limit_float(lambda: C64, n: u32, n_max: u32) -> Result<CapacityValue> {
    check_budget(n, n_max)?;
    let log_cap = -log_abs_resultant(lambda, n) / 4f64.powi(n as i32 - 1);
    Ok(CapacityValue {
        mode: CapacityMode::ResultantLimit,
        log_capacity: log_cap,
        capacity: log_cap.exp(),
        tail: None,
        n: Some(n),
        resultant_bits: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::poly::{iterate_param_poly, iterate_param_poly_signed, Poly};
    use crate::dynamics::Sign;

    fn q(s: &str) -> GaussRat {
        s.parse().unwrap()
    }

    fn ints(v: &[i64]) -> RatPoly {
        Poly::new(v.iter().map(|&c| GaussRat::from_i64(c)).collect())
    }

    #[test]
    fn first_resultant_is_minus_lambda() {
        let lambda = q("5/3");
        let (p, qq) = iterate_param_poly(&lambda, 1).unwrap();
        assert_eq!(sylvester_resultant(&p, &qq).unwrap(), -&lambda);
        assert_eq!(resultant_recursive(&lambda, 1).unwrap(), -&lambda);
    }

    #[test]
    fn shared_root_gives_zero() {
        let r = sylvester_resultant(&ints(&[-1, 0, 1]), &ints(&[-1, 1])).unwrap();
        assert!(r.is_zero());
        let r = sylvester_resultant(&ints(&[-1, 0, 1]), &ints(&[2, 1])).unwrap();
        assert!(!r.is_zero());
    }

    #[test]
    fn second_resultant_closed_form() {
        let lambda = q("-2/7");
        let expect = &lambda.pow(6) * &(&GaussRat::one() + &lambda);
        assert_eq!(resultant_recursive(&lambda, 2).unwrap(), expect);
    }

    #[test]
    fn sylvester_matches_closed_form_small() {
        for lambda in ["2", "3/2", "-1/2+i"] {
            for n in 1..=4 {
                let (p, qq) = iterate_param_poly(&q(lambda), n).unwrap();
                assert_eq!(
                    sylvester_resultant(&p, &qq).unwrap(),
                    resultant_recursive(&q(lambda), n).unwrap(),
                    "lambda {lambda} n {n}"
                );
            }
        }
    }

    #[test]
    fn minus_sign_resultant_has_same_modulus() {
        let lambda = q("5/3");
        for n in 1..=4 {
            let (p, qq) = iterate_param_poly_signed(&lambda, n, Sign::Plus, 14).unwrap();
            let (pm, qm) = iterate_param_poly_signed(&lambda, n, Sign::Minus, 14).unwrap();
            let a = sylvester_resultant(&p, &qq).unwrap();
            let b = sylvester_resultant(&pm, &qm).unwrap();
            assert!(a == b || a == -&b);
        }
    }

    #[test]
    fn float_log_resultant_agrees_with_exact() {
        let lambda = q("5/3");
        for n in 1..=7 {
            let exact = resultant_recursive(&lambda, n).unwrap().log_abs();
            let float = log_abs_resultant(lambda.to_c64(), n);
            assert!((exact - float).abs() <= 1e-9 * exact.abs().max(1.0));
        }
    }

    #[test]
    fn capacity_at_one() {
        // Cap(1) = prod_j (j + 1)^{-3 4^{-j-1}}
        let oracle: f64 = (1..60).map(|j| -3.0 * 4f64.powi(-j - 1) * ((j + 1) as f64).ln()).sum();
        let got = capacity_closed_form(C64::new(1.0, 0.0), 1e-14).unwrap();
        assert!((got.log_capacity - oracle).abs() < 1e-13);
    }

    #[test]
    fn capacity_modes_converge() {
        let closed = capacity_closed_form(C64::new(2.0, 0.0), 1e-14).unwrap();
        let mut last = f64::INFINITY;
        for n in [4, 6, 8] {
            let lim = capacity_resultant_limit(&q("2"), n, 14).unwrap();
            let gap = (lim.log_capacity - closed.log_capacity).abs();
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 0.01);
    }
}
