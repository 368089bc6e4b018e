use proptest::prelude::*;

use per1_core::algebra::*;
use num_rational::BigRational;

use per1_core::adelic::{gamma_v, log_abs_at, Place};
use per1_core::dynamics::gamma_arch;

/// Small nonzero rationals other than -1.
fn small_lambda() -> impl Strategy<Value = GaussRat> {
    (-9i64..=9, 1i64..=6)
        .prop_filter("nonzero, not -1", |(p, q)| *p != 0 && p + q != 0)
        .prop_map(|(p, q)| GaussRat::from_ratio(p, q))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sylvester_equals_closed_form(lambda in small_lambda(), n in 1u32..=4) {
        let (p, q) = iterate_param_poly(&lambda, n).unwrap();
        let syl = sylvester_resultant(&p, &q).unwrap();
        prop_assert_eq!(&syl, &resultant_recursive(&lambda, n).unwrap());
        prop_assert!(!syl.is_zero());
    }

    #[test]
    fn degrees_follow_powers_of_two(lambda in small_lambda(), n in 1u32..=7) {
        let (p, q) = iterate_param_poly(&lambda, n).unwrap();
        let d = 1usize << (n - 1);
        prop_assert_eq!(q.degree(), Some(d));
        prop_assert_eq!(p.degree(), Some(d - 1));
    }

    #[test]
    fn expansion_coefficients(lambda in small_lambda(), n in 1u32..=6) {
        let seq = coeff_sequences(&lambda, n).unwrap();
        let (p, q) = iterate_param_poly(&lambda, n).unwrap();
        let d = 1usize << (n - 1);
        let k = n as usize - 1;
        prop_assert_eq!(q.coeff(d), seq.c[k].clone());
        prop_assert_eq!(p.coeff(d - 1), seq.b[k].clone());
        prop_assert_eq!(q.coeff(d - 1), seq.d[k].clone());
    }

    #[test]
    fn leading_coefficients_tend_to_gamma(num in 2i64..12, den in 1i64..4) {
        // C_n = S_{n-1} prod_{j<n-1} S_j^{2^{n-2-j}}, so log|C_n|_v / 2^{n-1} tends
        // to gamma_v, from below at the archimedean place when |lambda| > 1.
        // At a prime where lambda is a unit |C_n|_v is non-increasing, but the
        // normalised sequence need not be (lambda = 4, p = 5 goes up at n = 3).
        prop_assume!(num > den);
        let lambda = GaussRat::from_ratio(num, den);
        let seq = coeff_sequences(&lambda, 12).unwrap();
        let vals: Vec<f64> = seq.c.iter().enumerate().map(|(k, c)| c.log_abs() / 2f64.powi(k as i32)).collect();
        for w in vals.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "{:?}", vals);
        }
        let gamma = gamma_arch(lambda.to_c64(), 1e-12).unwrap();
        let last = *vals.last().unwrap();
        prop_assert!(last <= gamma + 1e-12);
        prop_assert!(gamma - last <= 2f64.powi(-11) * (13.0 * lambda.to_c64().norm().ln() + 3.0));

        for p in [5u64, 7, 11, 13] {
            let l = BigRational::new(num.into(), den.into());
            let v = Place::prime(p);
            if log_abs_at(&l, &v) != 0.0 {
                continue;
            }
            let logs: Vec<f64> = seq.c.iter().map(|c| log_abs_at(&c.to_rational().unwrap(), &v)).collect();
            for w in logs.windows(2) {
                prop_assert!(w[1] <= w[0], "p = {}: {:?}", p, logs);
            }
            let vals: Vec<f64> = logs.iter().enumerate().map(|(k, l)| l / 2f64.powi(k as i32)).collect();
            let g = gamma_v(&l, &v, 1e-12).unwrap();
            prop_assert!((vals[11] - g.value).abs() <= g.tail + 2f64.powi(-11) * (24.0 * 12f64.ln() + 2.0 * 13f64.ln()));
        }
    }
}
