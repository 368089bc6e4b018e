use std::f64::consts::PI;

use num_rational::BigRational;
use per1_core::adelic::{canonical_height, global_gamma_sum, global_log_capacity_sum};
use per1_core::algebra::{iterate_param_poly, resultant_recursive, sylvester_resultant, GaussRat, Lambda};
use per1_core::dynamics::{escape_rate, eval_homogeneous, MapParams, ProjPair, Sign, C64};
use per1_core::measure::{claim2_direct, claim2_scan, distinct_measure_report, verify_h12};
use per1_core::pcf::{period3_witness, OrbitStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Check;
use crate::error::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Value,
}

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

pub fn run_checks(
    checks: &[Check],
    lambda: Option<&Lambda>,
    tol: f64,
    seed: u64,
    inject_fault: bool,
) -> Result<Vec<CheckResult>, CliError> {
    let mut out = Vec::with_capacity(checks.len());
    for (k, &c) in checks.iter().enumerate() {
        let (mut passed, detail) = match c {
            Check::H12 => h12(lambda, tol)?,
            Check::Symmetry => symmetry(lambda, tol, seed)?,
            Check::Sandwich => sandwich(lambda, seed)?,
            Check::Resultant => resultant(lambda)?,
            Check::GlobalSums => global_sums(lambda)?,
            Check::Heights => heights(lambda, tol)?,
            Check::Witness => witness(),
            Check::Claim2 => claim2()?,
            Check::Distinct => distinct(lambda, tol)?,
        };
        if inject_fault && k == 0 {
            passed = false;
        }
        out.push(CheckResult { name: c.name(), passed, detail });
    }
    Ok(out)
}

fn h12(lambda: Option<&Lambda>, tol: f64) -> Result<(bool, Value), CliError> {
    let lambdas = match lambda {
        Some(l) => vec![l.to_c64()],
        None => vec![C64::new(2.0, 0.0), C64::new(-4.0, 0.0), C64::new(3.0, 0.0), C64::new(0.0, 1.1), C64::new(-2.0, 0.0)],
    };
    let mut ok = true;
    let mut rows = Vec::new();
    for l in lambdas {
        let r = verify_h12(l, tol)?;
        ok &= r.deviation_plus < 1e-8 && r.deviation_minus < 1e-6;
        rows.push(r);
    }
    Ok((ok, json!(rows)))
}

fn random_lambda(rng: &mut ChaCha8Rng) -> C64 {
    loop {
        let r: f64 = rng.gen_range(0.2..5.0);
        if (r - 1.0).abs() > 0.05 {
            return C64::from_polar(r, rng.gen_range(0.0..2.0 * PI));
        }
    }
}

fn symmetry(lambda: Option<&Lambda>, tol: f64, seed: u64) -> Result<(bool, Value), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = tol.min(1e-11);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let l = match lambda {
            Some(l) => l.to_c64(),
            None if k == 0 => C64::new(1.0, 0.0),
            None => random_lambda(&mut rng),
        };
        let t = C64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let a = escape_rate(&MapParams::new(l, t)?, Sign::Minus, tol)?;
        let b = escape_rate(&MapParams::new(l, -t)?, Sign::Plus, tol)?;
        worst = worst.max((a.value - b.value).abs());
    }
    Ok((worst < 1e-9, json!({ "samples": 100, "max_difference": worst })))
}

fn sandwich(lambda: Option<&Lambda>, seed: u64) -> Result<(bool, Value), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5a5a);
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let l = match lambda {
            Some(l) => l.to_c64(),
            None => C64::from_polar(rng.gen_range(0.05..8.0), rng.gen_range(0.0..2.0 * PI)),
        };
        let t = C64::from_polar(rng.gen_range(1.0..50.0), rng.gen_range(0.0..2.0 * PI));
        let z1 = C64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let z2 = C64::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let Ok(v) = ProjPair::new(z1, z2) else { continue };
        let f = eval_homogeneous(&MapParams::new(l, t)?, &v);
        let ratio = f.norm() / (v.norm() * v.norm());
        let lo = (l.norm() / 2.0).min(0.25) / t.norm();
        let hi = l.norm().max(3.0) * t.norm();
        if !(ratio >= lo * (1.0 - 1e-12) && ratio <= hi * (1.0 + 1e-12)) {
            violations += 1;
        }
    }
    Ok((violations == 0, json!({ "samples": 10_000, "violations": violations })))
}

fn resultant(lambda: Option<&Lambda>) -> Result<(bool, Value), CliError> {
    let lambdas: Vec<GaussRat> = match lambda {
        Some(Lambda::Exact(g)) => vec![g.clone()],
        Some(Lambda::Float(_)) => return Err(CliError::usage("the resultant check needs an exact lambda")),
        None => ["2", "-2", "1/2", "5/3"].iter().map(|s| s.parse().expect("literal")).collect(),
    };
    let mut ok = true;
    let mut rows = Vec::new();
    for l in &lambdas {
        for n in 1..=5 {
            let (p, qq) = iterate_param_poly(l, n)?;
            let same = sylvester_resultant(&p, &qq)? == resultant_recursive(l, n)?;
            ok &= same;
            rows.push(json!({ "lambda": l.to_string(), "n": n, "equal": same }));
        }
    }
    Ok((ok, json!(rows)))
}

fn global_sums(lambda: Option<&Lambda>) -> Result<(bool, Value), CliError> {
    let lambdas = match lambda {
        Some(l) => vec![l.exact().and_then(|g| g.to_rational()).ok_or_else(|| CliError::usage("global sums need a rational lambda"))?],
        None => vec![q(1, 1), q(2, 1), q(3, 2)],
    };
    let mut ok = true;
    let mut rows = Vec::new();
    for l in &lambdas {
        let g = global_gamma_sum(l, 60)?;
        let c = global_log_capacity_sum(l, 60)?;
        let pass = g.total.abs() <= g.tail.max(1e-12) && c.total.abs() <= c.tail.max(1e-12) && g.tail <= 1e-10 && c.tail <= 1e-10;
        ok &= pass;
        rows.push(json!({
            "lambda": l.to_string(),
            "gamma_sum": g.total, "gamma_tail": g.tail,
            "log_capacity_sum": c.total, "log_capacity_tail": c.tail,
        }));
    }
    Ok((ok, json!(rows)))
}

fn heights(lambda: Option<&Lambda>, tol: f64) -> Result<(bool, Value), CliError> {
    let lambdas = match lambda {
        Some(l) => vec![l.exact().and_then(|g| g.to_rational()).ok_or_else(|| CliError::usage("heights need a rational lambda"))?],
        None => vec![q(2, 1), q(3, 1), q(-2, 1)],
    };
    let mut ok = true;
    let mut rows = Vec::new();
    for l in &lambdas {
        let t = l - q(2, 1);
        let h = canonical_height(l, &t, Sign::Plus, tol)?;
        let pass = matches!(h.status, OrbitStatus::Preperiodic { .. }) && h.value == 0.0;
        ok &= pass;
        rows.push(json!({ "lambda": l.to_string(), "t": t.to_string(), "height": h.value, "status": h.status }));
    }
    Ok((ok, json!(rows)))
}

fn witness() -> (bool, Value) {
    let w = period3_witness();
    let ok = w.t0 > 2.0 * 3f64.sqrt()
        && w.t0 < 10.0
        && w.ell_residual < 1e-10
        && w.orbit_residual < 1e-8
        && w.first_image != 1.0
        && w.ell_at_left_end_is_16;
    (ok, json!(w))
}

fn claim2() -> Result<(bool, Value), CliError> {
    let scan = claim2_scan(200_001, 1e-6)?;
    let targets = [PI / 3.0, PI, 5.0 * PI / 3.0];
    let located = scan.argmins.len() == 3 && scan.argmins.iter().zip(&targets).all(|(a, b)| (a - b).abs() < 1e-2);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let th = PI / 3.0 + 4.0 * PI / 3.0 * (k as f64 + 0.5) / 100.0;
        let u = th.cos();
        let closed = (2.0 * (5.0 - 5.0 * u - 4.0 * u * u + 4.0 * u * u * u)).sqrt();
        worst = worst.max((closed - claim2_direct(th)).abs());
    }
    let ok = (scan.minimum - 2.0).abs() < 1e-9 && located && worst < 1e-10;
    Ok((ok, json!({ "scan": scan, "max_direct_difference": worst })))
}

fn distinct(lambda: Option<&Lambda>, tol: f64) -> Result<(bool, Value), CliError> {
    let lambdas = match lambda {
        Some(l) => vec![l.to_c64()],
        None => vec![C64::new(-4.0, 0.0), C64::new(-2.0, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 1.1), C64::new(-1.0, 1.0)],
    };
    let reports = lambdas.iter().map(|&l| distinct_measure_report(l, tol)).collect::<Result<Vec<_>, _>>()?;
    Ok((reports.iter().all(|r| r.consistent), json!(reports)))
}
