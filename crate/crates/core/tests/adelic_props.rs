use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

use per1_core::adelic::*;
use per1_core::algebra::{GaussRat, Lambda};
use per1_core::dynamics::Sign;
use per1_core::pcf::{build_pcf_equation, is_preperiodic, solve_all_roots, OrbitStatus};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

fn nonzero_rational() -> impl Strategy<Value = BigRational> {
    (-10_000i64..10_000, 1i64..10_000)
        .prop_filter("nonzero", |(p, _)| *p != 0)
        .prop_map(|(p, d)| q(p, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn product_formula_is_exact(x in nonzero_rational()) {
        let mut places = vec![Place::Archimedean];
        for n in [x.numer(), x.denom()] {
            for (p, _) in num_prime::nt_funcs::factorize64(n.abs().to_u64().unwrap()) {
                places.push(Place::prime(p));
            }
        }
        let prod = places.iter().fold(BigRational::one(), |acc, v| acc * abs_at_exact(&x, v));
        prop_assert_eq!(prod, BigRational::one());
    }

    #[test]
    fn local_gamma_matches_truncation(
        (a, b) in (1i64..40, 1i64..40).prop_filter("not one", |(a, b)| a != b),
        neg in any::<bool>(),
        p in prop::sample::select(vec![2u64, 3, 5, 7, 11, 13]),
    ) {
        let lambda = q(if neg { -a } else { a }, b);
        let v = Place::prime(p);
        let g = gamma_v(&lambda, &v, 1e-13).unwrap();
        // 60 terms of 1/2 sum 2^{-i} log|S_i|_p straight from the definition
        let mut s = BigRational::zero();
        let mut pw = BigRational::one();
        let mut brute = 0.0;
        for i in 1..=60 {
            if i == 1 {
                s = BigRational::one();
            }
            pw = &pw * &lambda;
            s = &s + &pw;
            brute += 0.5f64.powi(i + 1) * log_abs_at(&s, &v);
        }
        let slack = 2f64.powi(-55) * (1.0 + (a.max(b) as f64).ln()) * 64.0;
        prop_assert!((g.value - brute).abs() <= g.tail + slack, "{} vs {}", g.value, brute);
    }
}

#[test]
fn places_in_each_class_grow_at_most_linearly() {
    // every prime of M_n divides N_n, and N_n has at most n log2 M + log2(n + 1) prime factors
    let primes = num_prime::nt_funcs::primes(20_000);
    for (lambda, log2_m) in [(q(1, 1), 0.0), (q(2, 1), 1.0), (q(3, 2), 3f64.log2())] {
        let mut counts = vec![0usize; 21];
        for &p in &primes {
            if let Ok(PlaceClass::Mn { n }) = classify_place(&lambda, &BigUint::from(p), 20) {
                counts[n] += 1;
            }
        }
        for (n, &c) in counts.iter().enumerate().skip(1) {
            let bound = n as f64 * log2_m + ((n + 1) as f64).log2();
            assert!(c as f64 <= bound.max(1.0), "{lambda} n={n}: {c} > {bound}");
        }
    }
}

#[test]
fn global_sums_vanish_within_tail() {
    for lambda in [q(2, 1), q(1, 1), q(3, 2), q(-2, 9), q(5, 3)] {
        let g = global_gamma_sum(&lambda, 50).unwrap();
        assert!(g.total.abs() <= g.tail + 1e-12, "{lambda}: {}", g.total);
        let c = global_log_capacity_sum(&lambda, 40).unwrap();
        assert!(c.total.abs() <= c.tail + 1e-12, "{lambda}: {}", c.total);
    }
}

#[test]
fn per_term_product_formula() {
    // 1 + 3/2 + 9/4 = 19/4
    let s = q(19, 4);
    let total: f64 = [Place::Archimedean, Place::prime(2), Place::prime(19)]
        .iter()
        .map(|v| log_abs_at(&s, v))
        .sum();
    assert!(total.abs() < 1e-15);
    let exact = [Place::Archimedean, Place::prime(2), Place::prime(19)]
        .iter()
        .fold(BigRational::one(), |acc, v| acc * abs_at_exact(&s, v));
    assert_eq!(exact, BigRational::one());
}

/// Continued-fraction convergents of `x` with denominators up to `max_den`.
fn convergents(x: f64, max_den: i64) -> Vec<BigRational> {
    let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
    let mut r = x;
    let mut out = Vec::new();
    for _ in 0..40 {
        let a = r.floor();
        if a.abs() > 1e12 {
            break;
        }
        let a = a as i64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_den {
            break;
        }
        out.push(q(h2, k2));
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let f = r - a as f64;
        if f.abs() < 1e-14 {
            break;
        }
        r = 1.0 / f;
    }
    out
}

#[test]
fn rational_pcf_roots_have_height_zero() {
    let mut found = 0;
    for lambda in [2i64, 3, -3] {
        for (n, m) in [(2u32, 0u32), (3, 0), (3, 1), (4, 2), (4, 0)] {
            for sign in Sign::both() {
                let l = Lambda::Exact(GaussRat::from_i64(lambda));
                let eq = build_pcf_equation(&l, n, m, sign).unwrap();
                let poly = eq.poly.as_ref().unwrap().to_rat();
                let roots = solve_all_roots(&eq).unwrap();
                for r in roots.roots.iter().filter(|r| r.im.abs() < 1e-9) {
                    for c in convergents(r.re, 1_000_000) {
                        if !poly.eval(&GaussRat::from_rational(&c)).is_zero() {
                            continue;
                        }
                        found += 1;
                        let h = canonical_height(&q(lambda, 1), &c, sign, 1e-10).unwrap();
                        assert!(h.value.abs() <= h.tail + 1e-9, "lambda={lambda} t={c}: {}", h.value);
                        break;
                    }
                }
            }
        }
    }
    assert!(found >= 10, "only {found} rational roots seen");
}

#[test]
fn escaping_rationals_have_positive_height() {
    let mut checked = 0;
    for lambda in [q(2, 1), q(3, 1), q(1, 2), q(-5, 3)] {
        for tn in -12i64..=12 {
            for td in [1i64, 2, 3, 7] {
                let t = q(tn, td);
                let status = is_preperiodic(&lambda, &t, Sign::Plus, &Default::default()).unwrap();
                if let OrbitStatus::Escaping { .. } = status {
                    let h = canonical_height(&lambda, &t, Sign::Plus, 1e-10).unwrap();
                    assert!(h.value > 3.0 * h.tail, "{lambda} {t}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 50);
}

#[test]
fn weil_extrapolation_oracle() {
    let (lambda, t) = (q(3, 1), q(7, 1));
    let h = canonical_height(&lambda, &t, Sign::Plus, 1e-12).unwrap();
    let mut z = BigRational::one();
    let mut last = 0.0;
    for k in 1..=12 {
        z = &lambda * &z / (&z * &z + &t * &z + BigRational::one());
        let m = z.numer().abs().max(z.denom().abs());
        last = per1_core::algebra::log_abs_bigint(&BigInt::from(m)) / 2f64.powi(k);
    }
    assert!((h.value - last).abs() < 1e-3, "{} vs {}", h.value, last);
}
