use proptest::prelude::*;

use per1_core::algebra::{GaussRat, Lambda};
use per1_core::dynamics::{Sign, C64};
use per1_core::measure::*;

/// Plain membership iteration: does the orbit of 0 stay in the closed disk of radius 2?
fn stays_bounded(c: C64, budget: usize) -> bool {
    let mut z = C64::new(0.0, 0.0);
    for _ in 0..budget {
        z = z * z + c;
        if z.norm() > 2.0 {
            return false;
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn green_vanishes_exactly_on_bounded_orbits(re in -2.2f64..0.7, im in -1.3f64..1.3) {
        let c = C64::new(re, im);
        let g = mandelbrot_green(c, 1e-12);
        prop_assert!(g >= 0.0);
        prop_assert_eq!(g == 0.0, stays_bounded(c, MANDELBROT_BUDGET + 1));
    }

    #[test]
    fn quadratic_parameter_bound(r in 0.05f64..30.0, theta in 0.0f64..std::f64::consts::TAU) {
        let lambda = C64::from_polar(r, theta);
        prop_assume!(lambda.re <= 1.0);
        let g = mandelbrot_green(quadratic_parameter(lambda), 1e-13);
        prop_assert!(g >= 2.0 * (lambda.norm() / 2.0).ln() - 1e-9, "{} {}", lambda, g);
    }

    #[test]
    fn h_minus_gap_is_positive_off_minus_two(r in 0.1f64..10.0, theta in 0.0f64..std::f64::consts::TAU) {
        let lambda = C64::from_polar(r, theta);
        prop_assume!(lambda.re <= 1.0 && (lambda + 2.0).norm() > 1e-3);
        let rep = distinct_measure_report(lambda, 1e-12).unwrap();
        prop_assert!(rep.gap > -1e-9, "{:?}", rep);
    }

    #[test]
    fn claim2_closed_form_matches(theta in std::f64::consts::FRAC_PI_3..(5.0 * std::f64::consts::FRAC_PI_3)) {
        prop_assert!((claim2_profile(theta) - claim2_direct(theta)).abs() <= 1e-10);
        prop_assert!(claim2_profile(theta) >= 2.0 - 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn render_reflection_and_determinism(re in -4.0f64..4.0, im in -4.0f64..4.0) {
        prop_assume!(C64::new(re, im).norm() > 0.2);
        let lambda = C64::new(re, im);
        let w = Window::square(3.0).unwrap();
        let r = Resolution::square(24).unwrap();
        let opts = RenderOptions { budget: 400, ..Default::default() };
        let a = render_bifurcation(lambda, w, r, Sign::Plus, &opts).unwrap();
        let b = render_bifurcation(lambda, w, r, Sign::Plus, &opts).unwrap();
        prop_assert_eq!(&a.image, &b.image);
        let m = render_bifurcation(lambda, w, r, Sign::Minus, &opts).unwrap();
        prop_assert_eq!(a.rate.reflected().values, m.rate.values);
    }

    #[test]
    fn density_reflection(re in -4.0f64..4.0, im in -4.0f64..4.0) {
        prop_assume!(C64::new(re, im).norm() > 0.2 && (C64::new(re, im).norm() - 1.0).abs() > 0.1);
        let lambda = C64::new(re, im);
        let w = Window::square(4.0).unwrap();
        let r = Resolution::square(15).unwrap();
        let p = measure_density(lambda, w, r, Sign::Plus, 1e-6).unwrap();
        let m = measure_density(lambda, w, r, Sign::Minus, 1e-6).unwrap();
        prop_assert!(p.density.reflected().max_abs_diff(&m.density) <= 1e-6);
    }
}

#[test]
fn laplacian_mass_matches_root_clouds() {
    // (1/2pi) Delta(2 H^+) over a window holding the whole locus against the
    // share of the roots of f_t^8(1) = 1 inside it
    for (l, rad) in [(-4i64, 7.0), (2, 4.0)] {
        let w = Window::square(rad).unwrap();
        let d = measure_density(C64::new(l as f64, 0.0), w, Resolution::square(121).unwrap(), Sign::Plus, 1e-6).unwrap();
        let rep = equidistribution_experiment(
            &Lambda::Exact(GaussRat::from_i64(l)),
            Sign::Plus,
            &[8],
            &[C64::new(rad + 2.0, 0.0)],
            1e-12,
        )
        .unwrap();
        let cloud = rep.clouds[0].cloud.mass_in(&w);
        let mass = 2.0 * d.mass;
        assert!((mass - cloud).abs() <= 0.1 * cloud, "lambda {l}: {mass} vs {cloud}");
    }
}

#[test]
fn unbounded_component_critical_orbits_agree() {
    let opts = RenderOptions::default();
    for k in 0..12 {
        let t = C64::from_polar(25.0, k as f64 * 0.5);
        let p = per1_core::dynamics::MapParams::new(C64::new(2.0, 0.0), t).unwrap();
        let a = classify_critical_orbit(&p, Sign::Plus, &opts).unwrap();
        let b = classify_critical_orbit(&p, Sign::Minus, &opts).unwrap();
        assert_eq!(a.period, 1);
        assert!((a.signature - b.signature).norm() < 1e-6);
    }
}
