use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gamma::{classify_place, gamma_v, global_gamma_sum, global_log_capacity_sum, PlaceClass};
use super::padic::padic_escape_rate;
use super::{check_lambda, log_abs_at, support, Place};
use crate::algebra::capacity_closed_form;
use crate::dynamics::{escape_rate, green_homogeneous, wedge, ExtComplex, MapParams, ProjPair, Sign, C64};
use crate::error::{invalid, Error, Result};
use crate::pcf::{is_preperiodic, OrbitStatus, PreperiodicOptions};

const START_DIGITS: u32 = 64;
const MAX_DIGITS: u32 = 4096;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalHeight {
    pub place: Place,
    pub value: f64,
    pub certified_tail: f64,
    pub steps: usize,
    /// Working p-adic precision that sufficed, in digits.
    pub digits: Option<u32>,
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `H^sign_{lambda,v}(t) = lim 2^{-n} log ||F_t^n(sign 1, 1)||_v`.
pub fn local_height(lambda: &BigRational, t: &BigRational, v: &Place, sign: Sign, tol: f64) -> Result<LocalHeight> {
    check_lambda(lambda)?;
    if !(tol > 0.0) {
        return Err(invalid("tol must be positive"));
    }
    match v {
        Place::Archimedean => {
            let p = MapParams::real(to_f64(lambda), to_f64(t))?;
            let r = escape_rate(&p, sign, tol)?;
            Ok(LocalHeight { place: v.clone(), value: r.value, certified_tail: r.tail_bound, steps: r.iterations, digits: None })
        }
        Place::Prime(p) => {
            let mut digits = START_DIGITS;
            loop {
                match padic_escape_rate(lambda, t, p, sign, tol, digits) {
                    Ok(r) => {
                        return Ok(LocalHeight {
                            place: v.clone(),
                            value: r.value,
                            certified_tail: r.tail,
                            steps: r.steps,
                            digits: Some(r.digits),
                        })
                    }
                    Err(Error::PrecisionExhausted { .. }) if digits < MAX_DIGITS => digits *= 2,
                    Err(e) => return Err(e),
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalHeight {
    /// Exactly 0 for a preperiodic orbit, otherwise the sum of local heights.
    pub value: f64,
    /// Sum of the computed local heights.
    pub local_sum: f64,
    pub tail: f64,
    pub places: Vec<LocalHeight>,
    pub status: OrbitStatus,
}

/// `h^sign(t) = sum_v N_v H_v(t)`; every place outside the support of
/// `lambda` and `t` has good reduction and contributes exactly zero.
///
/// The result is compared with the exact orbit classification and a
/// disagreement is reported as `CrossCheckFailed`.
pub fn canonical_height(lambda: &BigRational, t: &BigRational, sign: Sign, tol: f64) -> Result<CanonicalHeight> {
    check_lambda(lambda)?;
    let places = support(&[lambda, t]);
    let each = tol / places.len() as f64;
    let locals: Vec<LocalHeight> = places
        .par_iter()
        .map(|v| local_height(lambda, t, v, sign, each))
        .collect::<Result<_>>()?;
    let local_sum: f64 = locals.iter().map(|l| l.value * l.place.n_v() as f64).sum();
    let tail: f64 = locals.iter().map(|l| l.certified_tail).sum();
    let status = is_preperiodic(lambda, t, sign, &PreperiodicOptions::default())?;
    let slack = tail + 1e-12 * (1.0 + locals.iter().map(|l| l.value.abs()).sum::<f64>());
    match status {
        OrbitStatus::Preperiodic { .. } if local_sum.abs() > slack => {
            return Err(Error::CrossCheckFailed(format!(
                "lambda={lambda} t={t} {sign}: preperiodic orbit but height {local_sum:e}"
            )))
        }
        OrbitStatus::Escaping { .. } if local_sum <= 3.0 * tail => {
            return Err(Error::CrossCheckFailed(format!(
                "lambda={lambda} t={t} {sign}: infinite orbit but height {local_sum:e} within tail {tail:e}"
            )))
        }
        _ => {}
    }
    let value = if matches!(status, OrbitStatus::Preperiodic { .. }) { 0.0 } else { local_sum };
    Ok(CanonicalHeight { value, local_sum, tail, places: locals, status })
}

/// `g(x, y) = -log|x~ ^ y~| + G(x~) + G(y~) + log Cap(K)` at the archimedean place.
pub fn arakelov_green_arch_lifts(x: &ProjPair, y: &ProjPair, lambda: C64, sign: Sign, tol: f64) -> Result<f64> {
    let w = wedge(x, y);
    if w.norm() <= f64::MIN_POSITIVE * x.norm() * y.norm() {
        return Err(Error::CoincidentPoints);
    }
    let cap = capacity_closed_form(lambda, tol / 4.0)?;
    let gx = green_homogeneous(lambda, x, sign, tol / 4.0)?;
    let gy = green_homogeneous(lambda, y, sign, tol / 4.0)?;
    Ok(-w.norm().ln() + gx + gy + cap.log_capacity)
}

pub fn arakelov_green_arch(x: ExtComplex, y: ExtComplex, lambda: C64, sign: Sign, tol: f64) -> Result<f64> {
    arakelov_green_arch_lifts(&x.lift(), &y.lift(), lambda, sign, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiAdelicHeight {
    /// `|S|^{-1} sum_{x in S} sum_v N_v G_v(x~)`.
    pub value: f64,
    /// Mean canonical height over `S`.
    pub mean_canonical: f64,
    pub tail: f64,
}

/// `sum_v N_v G_v(x~)` for the integral lift `x~ = (num, den)`.
fn global_potential(lambda: &BigRational, x: &BigRational, sign: Sign, tol: f64) -> Result<(f64, f64)> {
    let den = BigRational::from_integer(x.denom().clone());
    let places = support(&[lambda, x]);
    let each = tol / places.len() as f64;
    let parts: Vec<(f64, f64)> = places
        .par_iter()
        .map(|v| {
            let h = local_height(lambda, x, v, sign, each / 2.0)?;
            Ok((2.0 * h.value + log_abs_at(&den, v), 2.0 * h.certified_tail))
        })
        .collect::<Result<_>>()?;
    Ok(parts.iter().fold((0.0, 0.0), |(a, b), (x, t)| (a + x, b + t)))
}

/// Height attached to the family of measures `{mu_v}` on a finite set of
/// rational parameters, together with the mean canonical height it should
/// equal twice.
pub fn quasi_adelic_height(s: &[BigRational], lambda: &BigRational, sign: Sign, tol: f64) -> Result<QuasiAdelicHeight> {
    check_lambda(lambda)?;
    if s.is_empty() {
        return Err(invalid("S must be nonempty"));
    }
    let n = s.len() as f64;
    let mut value = 0.0;
    let mut mean = 0.0;
    let mut tail = 0.0;
    for x in s {
        let (g, gt) = global_potential(lambda, x, sign, tol)?;
        let h = canonical_height(lambda, x, sign, tol)?;
        value += g / n;
        mean += h.value / n;
        tail += (gt + 2.0 * h.tail) / n;
    }
    Ok(QuasiAdelicHeight { value, mean_canonical: mean, tail })
}

/// The same height from the pairwise energy
/// `(2|S|(|S|-1))^{-1} sum_{x != y} sum_v N_v g_v(x, y)`, with the capacity
/// sum over all places truncated at `truncation` terms.
pub fn pairwise_energy_height(
    s: &[BigRational],
    lambda: &BigRational,
    sign: Sign,
    tol: f64,
    truncation: usize,
) -> Result<(f64, f64)> {
    check_lambda(lambda)?;
    if s.len() < 2 {
        return Err(invalid("pairwise energy needs at least two points"));
    }
    let cap = global_log_capacity_sum(lambda, truncation)?;
    let wedges: Vec<BigRational> = {
        let mut w = Vec::new();
        for (i, x) in s.iter().enumerate() {
            for y in &s[i + 1..] {
                let v: BigInt = x.numer() * y.denom() - y.numer() * x.denom();
                if v.is_zero() {
                    return Err(Error::CoincidentPoints);
                }
                w.push(BigRational::from_integer(v));
            }
        }
        w
    };
    let mut refs: Vec<&BigRational> = vec![lambda];
    refs.extend(s.iter());
    refs.extend(wedges.iter());
    let places = support(&refs);
    let each = tol / (places.len() * s.len()) as f64;
    // G_v at every point and place
    let g: Vec<Vec<(f64, f64)>> = s
        .iter()
        .map(|x| {
            let den = BigRational::from_integer(x.denom().clone());
            places
                .par_iter()
                .map(|v| {
                    let h = local_height(lambda, x, v, sign, each / 2.0)?;
                    Ok((2.0 * h.value + log_abs_at(&den, v), 2.0 * h.certified_tail))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let m = s.len();
    let mut total = 0.0;
    let mut tail = 0.0;
    let mut k = 0;
    for i in 0..m {
        for j in i + 1..m {
            let w = &wedges[k];
            k += 1;
            let mut pair = cap.total;
            for (pi, v) in places.iter().enumerate() {
                pair += -log_abs_at(w, v) + g[i][pi].0 + g[j][pi].0;
                tail += 2.0 * (g[i][pi].1 + g[j][pi].1);
            }
            // ordered pairs count each unordered pair twice
            total += 2.0 * pair;
            tail += 2.0 * cap.tail;
        }
    }
    let norm = 2.0 * (m * (m - 1)) as f64;
    Ok((total / norm, tail / norm))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaceReport {
    pub place: Place,
    /// `null` at the archimedean place.
    pub class: Option<PlaceClass>,
    pub gamma_v: f64,
    pub local_height: f64,
    pub tail: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdelicReport {
    pub lambda: String,
    pub t: String,
    pub sign: Sign,
    pub places: Vec<PlaceReport>,
    pub canonical_height: f64,
    pub global_gamma_sum: f64,
}

pub fn adelic_report(
    lambda: &BigRational,
    t: &BigRational,
    sign: Sign,
    tol: f64,
    truncation: usize,
    n_max: usize,
) -> Result<AdelicReport> {
    let h = canonical_height(lambda, t, sign, tol)?;
    let places = h
        .places
        .iter()
        .map(|l| {
            let g = gamma_v(lambda, &l.place, tol)?;
            let class = match &l.place {
                Place::Archimedean => None,
                Place::Prime(p) => Some(classify_place(lambda, p, n_max)?),
            };
            Ok(PlaceReport {
                place: l.place.clone(),
                class,
                gamma_v: g.value,
                local_height: l.value,
                tail: l.certified_tail + g.tail,
            })
        })
        .collect::<Result<_>>()?;
    let global = global_gamma_sum(lambda, truncation)?;
    Ok(AdelicReport {
        lambda: lambda.to_string(),
        t: t.to_string(),
        sign,
        places,
        canonical_height: h.value,
        global_gamma_sum: global.total,
    })
}
