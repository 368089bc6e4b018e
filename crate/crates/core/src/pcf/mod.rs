//! Orbit relations `f_t^n(c) = f_t^m(c)` for the critical points `c = +1, -1`
//! as polynomial equations in `t`, their complex roots, exact preperiodicity
//! tests over the rationals, and the period-3 witness at `lambda = -2`.

mod dd;
mod preper;
mod solve;
mod witness;

pub use preper::{default_height_bound, is_preperiodic, weil_height, OrbitStatus, PreperiodicOptions};
pub use solve::{solve_all_roots, solve_all_roots_with, RootEntry, RootSet, SolveOptions};
pub use witness::{ell, ell_at_two_sqrt3, period3_witness, Period3Witness, QSqrt3};

use std::ops::{Add, Mul, Sub};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::algebra::{check_budget, scaled_orbit, GaussInt, IntPoly, Lambda, DEFAULT_N_MAX};
use crate::dynamics::{Sign, C64};
use crate::error::{invalid, Error, Result};
use dd::{CDd, Dd};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitRelation {
    pub n: u32,
    pub m: u32,
    pub sign: Sign,
}

impl OrbitRelation {
    pub fn new(n: u32, m: u32, sign: Sign) -> Result<OrbitRelation> {
        if m >= n {
            return Err(invalid(format!("need 0 <= m < n, got n = {n}, m = {m}")));
        }
        Ok(OrbitRelation { n, m, sign })
    }

    /// Degree of `P_n Q_m - P_m Q_n` when no leading cancellation occurs.
    pub fn generic_degree(&self) -> usize {
        let hn = 1usize << (self.n - 1);
        if self.m == 0 {
            hn
        } else {
            hn + (1usize << (self.m - 1)) - 1
        }
    }
}

/// `P_n Q_m - P_m Q_n = 0` with `(P_0, Q_0) = (sign 1, 1)`.
#[derive(Clone, Debug)]
pub struct PcfEquation {
    pub lambda: Lambda,
    pub relation: OrbitRelation,
    /// Primitive integral form of the cross product, when lambda is exact.
    pub poly: Option<IntPoly>,
    /// `log |a_i|` of the coefficients, up to a common shift; `-inf` for zeros.
    pub log_coeffs: Vec<f64>,
}

impl PcfEquation {
    pub fn degree(&self) -> usize {
        self.log_coeffs.len().saturating_sub(1)
    }

    /// Number of vanishing low-order coefficients (the root `t = 0`).
    pub fn zero_root_multiplicity(&self) -> usize {
        self.log_coeffs.iter().take_while(|c| **c == f64::NEG_INFINITY).count()
    }

    pub fn coefficient_strings(&self) -> Option<Vec<String>> {
        self.poly.as_ref().map(|p| p.coeffs().iter().map(|c| c.to_string()).collect())
    }
}

pub fn build_pcf_equation(lambda: &Lambda, n: u32, m: u32, sign: Sign) -> Result<PcfEquation> {
    build_pcf_equation_with(lambda, n, m, sign, DEFAULT_N_MAX)
}

pub fn build_pcf_equation_with(
    lambda: &Lambda,
    n: u32,
    m: u32,
    sign: Sign,
    n_max: u32,
) -> Result<PcfEquation> {
    let relation = OrbitRelation::new(n, m, sign)?;
    check_budget(n, n_max)?;
    if lambda.to_c64() == C64::new(0.0, 0.0) {
        return Err(invalid("lambda must be nonzero"));
    }
    match lambda {
        Lambda::Exact(q) => {
            let orbit = scaled_orbit(q, n, sign, n_max)?;
            let (pn, qn) = &orbit.polys[n as usize];
            let (pm, qm) = &orbit.polys[m as usize];
            let cross = pn.mul(qm).sub(&pm.mul(qn));
            if cross.is_zero() {
                return Err(Error::DegenerateRelation { n, m });
            }
            let poly = cross.primitive();
            let log_coeffs = poly.coeffs().iter().map(GaussInt::log_abs).collect();
            Ok(PcfEquation { lambda: lambda.clone(), relation, poly: Some(poly), log_coeffs })
        }
        Lambda::Float(z) => {
            let coeffs = float_cross_product(*z, &relation);
            let mut log_coeffs: Vec<f64> = coeffs.iter().map(|c| c.norm().ln()).collect();
            while log_coeffs.last() == Some(&f64::NEG_INFINITY) {
                log_coeffs.pop();
            }
            if log_coeffs.is_empty() {
                return Err(Error::DegenerateRelation { n, m });
            }
            Ok(PcfEquation { lambda: lambda.clone(), relation, poly: None, log_coeffs })
        }
    }
}

fn cmul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn cadd(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() + b.get(i).copied().unwrap_or_default())
        .collect()
}

/// Floating coefficients of the cross product, each iterate rescaled to unit
/// largest coefficient (a common factor per index, so the zero set is kept).
fn float_cross_product(lambda: C64, rel: &OrbitRelation) -> Vec<C64> {
    let mut p = vec![C64::new(rel.sign.value(), 0.0)];
    let mut q = vec![C64::new(1.0, 0.0)];
    let mut at_m = (p.clone(), q.clone());
    for k in 1..=rel.n {
        let pq = cmul(&p, &q);
        let mut shifted = vec![C64::new(0.0, 0.0)];
        shifted.extend_from_slice(&pq);
        let np: Vec<C64> = pq.iter().map(|c| c * lambda).collect();
        let nq = cadd(&cadd(&cmul(&p, &p), &shifted), &cmul(&q, &q));
        let s = np.iter().chain(&nq).map(|c| c.norm()).fold(0.0, f64::max);
        p = np.into_iter().map(|c| c / s).collect();
        q = nq.into_iter().map(|c| c / s).collect();
        if k == rel.m {
            at_m = (p.clone(), q.clone());
        }
    }
    let a = cmul(&p, &at_m.1);
    let b = cmul(&at_m.0, &q);
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or_default() - b.get(i).copied().unwrap_or_default())
        .collect()
}

/// Scalars the orbit relation can be evaluated in.
pub(crate) trait OrbitScalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> {
    fn from_c64(z: C64) -> Self;
    fn ldexp(self, e: i32) -> Self;
    fn max_abs(self) -> f64;
}

impl OrbitScalar for C64 {
    fn from_c64(z: C64) -> Self {
        z
    }
    fn ldexp(self, e: i32) -> Self {
        self * 2f64.powi(e)
    }
    fn max_abs(self) -> f64 {
        self.re.abs().max(self.im.abs())
    }
}

impl OrbitScalar for CDd {
    fn from_c64(z: C64) -> Self {
        CDd::from_c64(z)
    }
    fn ldexp(self, e: i32) -> Self {
        CDd::ldexp(self, e)
    }
    fn max_abs(self) -> f64 {
        self.max_abs_f64()
    }
}

/// Iterates at `n` and `m` with their `t`-derivatives. Every step is divided
/// by a power of two that does not depend on `t`'s variation, so the ratio
/// `wedge / d(wedge)` equals `p / p'` for the polynomial relation.
pub(crate) struct RelationTerms<T> {
    pub wn: [T; 2],
    pub dwn: [T; 2],
    pub wm: [T; 2],
    pub dwm: [T; 2],
}

fn wedge<T: OrbitScalar>(a: &[T; 2], b: &[T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn relation_terms<T: OrbitScalar>(lambda: T, t: T, rel: &OrbitRelation) -> RelationTerms<T> {
    let zero = T::from_c64(C64::new(0.0, 0.0));
    let one = T::from_c64(C64::new(1.0, 0.0));
    let two = T::from_c64(C64::new(2.0, 0.0));
    let mut z = [T::from_c64(C64::new(rel.sign.value(), 0.0)), one];
    let mut d = [zero, zero];
    let (mut wm, mut dwm) = (z, d);
    for k in 1..=rel.n {
        let z12 = z[0] * z[1];
        let cross = d[0] * z[1] + z[0] * d[1];
        let nz = [lambda * z12, z[0] * z[0] + t * z12 + z[1] * z[1]];
        let nd = [
            lambda * cross,
            two * z[0] * d[0] + z12 + t * cross + two * z[1] * d[1],
        ];
        let scale = nz[0].max_abs().max(nz[1].max_abs());
        let e = if scale > 0.0 && scale.is_finite() { -(scale.log2().floor() as i32) } else { 0 };
        z = [nz[0].ldexp(e), nz[1].ldexp(e)];
        d = [nd[0].ldexp(e), nd[1].ldexp(e)];
        if k == rel.m {
            wm = z;
            dwm = d;
        }
    }
    RelationTerms { wn: z, dwn: d, wm, dwm }
}

impl<T: OrbitScalar> RelationTerms<T> {
    pub fn value(&self) -> T {
        wedge(&self.wn, &self.wm)
    }

    pub fn derivative(&self) -> T {
        wedge(&self.dwn, &self.wm) + wedge(&self.wn, &self.dwm)
    }
}

/// `|V_n ^ V_m| / (||V_n|| ||V_m||)` at a floating parameter.
pub fn relation_residual(lambda: C64, t: C64, rel: &OrbitRelation) -> f64 {
    let r = relation_terms(lambda, t, rel);
    let norm = |v: &[C64; 2]| v[0].norm().max(v[1].norm());
    r.value().norm() / (norm(&r.wn) * norm(&r.wm))
}

/// `lambda` to about 106 bits, exactly rounded from the rational value when exact.
pub(crate) fn lambda_dd(lambda: &Lambda) -> CDd {
    match lambda {
        Lambda::Float(z) => CDd::from_c64(*z),
        Lambda::Exact(q) => {
            let split = |x: num_rational::BigRational| {
                let hi = crate::algebra::ratio_to_f64(x.numer(), x.denom());
                let rest = match num_rational::BigRational::from_float(hi) {
                    Some(h) if !x.is_zero() => x - h,
                    _ => num_rational::BigRational::zero(),
                };
                let lo = crate::algebra::ratio_to_f64(rest.numer(), rest.denom());
                Dd { hi, lo: if lo.is_finite() { lo } else { 0.0 } }
            };
            CDd { re: split(q.re()), im: split(q.im()) }
        }
    }
}
