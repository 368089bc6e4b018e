use proptest::prelude::*;

use per1_core::algebra::{GaussRat, Lambda};
use per1_core::dynamics::{Sign, C64};
use per1_core::pcf::*;

fn small_lambda() -> impl Strategy<Value = Lambda> {
    (-7i64..=7, 1i64..=4)
        .prop_filter("nonzero, not -1", |(p, q)| *p != 0 && p + q != 0)
        .prop_map(|(p, q)| Lambda::Exact(GaussRat::from_ratio(p, q)))
}

fn relation() -> impl Strategy<Value = (u32, u32)> {
    (1u32..=4).prop_flat_map(|n| (Just(n), 0..n))
}

fn sorted(points: Vec<C64>) -> Vec<C64> {
    let mut p = points;
    p.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
    p
}

/// Greedy matching distance between two multisets of equal size.
fn matched(a: &[C64], b: &[C64], tol: f64) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let best = (0..b.len())
            .filter(|&j| !used[j])
            .min_by(|&i, &j| (b[i] - x).norm().partial_cmp(&(b[j] - x).norm()).unwrap());
        match best {
            Some(j) if (b[j] - x).norm() <= tol * (1.0 + x.norm()) => {
                used[j] = true;
                true
            }
            _ => false,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn roots_satisfy_the_orbit_relation(lambda in small_lambda(), (n, m) in relation(), plus in any::<bool>()) {
        let sign = if plus { Sign::Plus } else { Sign::Minus };
        let eq = match build_pcf_equation(&lambda, n, m, sign) {
            Ok(eq) => eq,
            Err(per1_core::Error::DegenerateRelation { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let roots = solve_all_roots(&eq).unwrap();
        prop_assert_eq!(roots.count_with_multiplicity(), eq.degree());
        for r in &roots.roots {
            prop_assert!(relation_residual(lambda.to_c64(), r.z(), &eq.relation) < 1e-8, "{:?}", r);
        }
    }

    #[test]
    fn sign_symmetry_and_conjugation(lambda in small_lambda(), (n, m) in relation()) {
        let plus = build_pcf_equation(&lambda, n, m, Sign::Plus);
        let minus = build_pcf_equation(&lambda, n, m, Sign::Minus);
        let (Ok(plus), Ok(minus)) = (plus, minus) else { return Ok(()) };
        let a = solve_all_roots(&plus).unwrap().points();
        let b = solve_all_roots(&minus).unwrap().points();
        let neg: Vec<C64> = a.iter().map(|z| -z).collect();
        prop_assert!(matched(&sorted(neg), &sorted(b), 1e-6));
        let conj: Vec<C64> = a.iter().map(|z| z.conj()).collect();
        prop_assert!(matched(&conj, &a, 1e-6));
    }

    #[test]
    fn no_synchrony_inside_the_unit_disk(p in -5i64..=5, q in 5i64..=9, k in 1u32..=4) {
        prop_assume!(p != 0);
        let lambda = Lambda::Exact(GaussRat::from_ratio(p, q));
        let a = solve_all_roots(&build_pcf_equation(&lambda, k, 0, Sign::Plus).unwrap()).unwrap();
        let b = solve_all_roots(&build_pcf_equation(&lambda, k, 0, Sign::Minus).unwrap()).unwrap();
        for x in &a.roots {
            for y in &b.roots {
                prop_assert!((x.z() - y.z()).norm() > 1e-6, "{:?} {:?}", x, y);
            }
        }
    }
}
