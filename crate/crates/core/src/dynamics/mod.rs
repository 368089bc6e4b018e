//! Complex evaluation of the family `f(z) = lambda z / (z^2 + t z + 1)`,
//! its fixed points, and the escape-rate potentials of the two critical
//! points `+1` and `-1`.

mod escape;
mod gamma;

pub use escape::{escape_rate, green_homogeneous, EscapeRateResult, MAX_ESCAPE_ITERATIONS};
pub use gamma::{gamma_arch, gamma_arch_certified, log_sum_series, Certified, SeriesWeight};
pub(crate) use gamma::linear_tail;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub type C64 = Complex64;

/// Which critical point is being followed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn both() -> [Sign; 2] {
        [Sign::Plus, Sign::Minus]
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl std::str::FromStr for Sign {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Sign> {
        match s {
            "+" | "plus" | "+1" => Ok(Sign::Plus),
            "-" | "minus" | "-1" => Ok(Sign::Minus),
            _ => Err(invalid(format!("unknown sign {s:?}"))),
        }
    }
}

/// One member `f_{lambda,t}` of the family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub lambda: C64,
    pub t: C64,
}

impl MapParams {
    pub fn new(lambda: C64, t: C64) -> Result<MapParams> {
        if lambda == C64::new(0.0, 0.0) {
            return Err(invalid("lambda must be nonzero"));
        }
        if !(lambda.is_finite() && t.is_finite()) {
            return Err(invalid("lambda and t must be finite"));
        }
        Ok(MapParams { lambda, t })
    }

    pub fn real(lambda: f64, t: f64) -> Result<MapParams> {
        MapParams::new(C64::new(lambda, 0.0), C64::new(t, 0.0))
    }

    /// The parameter at which the critical point `+1` is fixed.
    pub fn fixed_critical_parameter(lambda: C64) -> C64 {
        lambda - 2.0
    }
}

/// A point of the Riemann sphere with an explicit point at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExtComplex {
    Finite(C64),
    Infinity,
}

impl ExtComplex {
    pub fn finite(self) -> Option<C64> {
        match self {
            ExtComplex::Finite(z) => Some(z),
            ExtComplex::Infinity => None,
        }
    }

    pub fn lift(self) -> ProjPair {
        match self {
            ExtComplex::Finite(z) => ProjPair { z1: z, z2: C64::new(1.0, 0.0) },
            ExtComplex::Infinity => ProjPair { z1: C64::new(1.0, 0.0), z2: C64::new(0.0, 0.0) },
        }
    }

    /// Chordal distance on the sphere, in `[0, 1]`.
    pub fn chordal(self, other: ExtComplex) -> f64 {
        let (a, b) = (self.lift(), other.lift());
        wedge(&a, &b).norm() / (a.euclid() * b.euclid())
    }
}

impl From<C64> for ExtComplex {
    fn from(z: C64) -> Self {
        ExtComplex::Finite(z)
    }
}

/// Homogeneous coordinates `(z1, z2)` of a point of the projective line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjPair {
    pub z1: C64,
    pub z2: C64,
}

impl ProjPair {
    pub fn new(z1: C64, z2: C64) -> Result<ProjPair> {
        let zero = C64::new(0.0, 0.0);
        if z1 == zero && z2 == zero {
            return Err(invalid("(0, 0) is not a point of the projective line"));
        }
        Ok(ProjPair { z1, z2 })
    }

    /// Max-norm `max(|z1|, |z2|)`.
    pub fn norm(&self) -> f64 {
        self.z1.norm().max(self.z2.norm())
    }

    fn euclid(&self) -> f64 {
        (self.z1.norm_sqr() + self.z2.norm_sqr()).sqrt()
    }

    pub fn scale(&self, alpha: C64) -> ProjPair {
        ProjPair { z1: self.z1 * alpha, z2: self.z2 * alpha }
    }

    /// Rescale to unit max-norm, returning the removed norm.
    pub fn normalized(&self) -> (ProjPair, f64) {
        let s = self.norm();
        (ProjPair { z1: self.z1 / s, z2: self.z2 / s }, s)
    }

    pub fn to_ext(&self) -> ExtComplex {
        if self.z2 == C64::new(0.0, 0.0) {
            ExtComplex::Infinity
        } else {
            ExtComplex::Finite(self.z1 / self.z2)
        }
    }
}

/// `a.z1 * b.z2 - a.z2 * b.z1`.
pub fn wedge(a: &ProjPair, b: &ProjPair) -> C64 {
    a.z1 * b.z2 - a.z2 * b.z1
}

/// `f_{lambda,t}(z)` on the Riemann sphere.
pub fn eval_map(p: &MapParams, z: ExtComplex) -> ExtComplex {
    let one = C64::new(1.0, 0.0);
    match z {
        ExtComplex::Infinity => ExtComplex::Finite(C64::new(0.0, 0.0)),
        ExtComplex::Finite(z) if z.norm() > 1.0 => {
            // chart at infinity: f = lambda w / (1 + t w + w^2), w = 1/z
            let w = one / z;
            let den = one + p.t * w + w * w;
            if den == C64::new(0.0, 0.0) {
                ExtComplex::Infinity
            } else {
                ExtComplex::Finite(p.lambda * w / den)
            }
        }
        ExtComplex::Finite(z) => {
            let den = z * z + p.t * z + one;
            if den == C64::new(0.0, 0.0) {
                ExtComplex::Infinity
            } else {
                ExtComplex::Finite(p.lambda * z / den)
            }
        }
    }
}

/// The homogeneous lift `F_t(z1, z2) = (lambda z1 z2, z1^2 + t z1 z2 + z2^2)`.
pub fn eval_homogeneous(p: &MapParams, v: &ProjPair) -> ProjPair {
    let prod = v.z1 * v.z2;
    ProjPair {
        z1: p.lambda * prod,
        z2: v.z1 * v.z1 + p.t * prod + v.z2 * v.z2,
    }
}

/// Derivative of `f_{lambda,t}` at a finite point.
pub fn derivative(p: &MapParams, z: C64) -> C64 {
    let den = z * z + p.t * z + 1.0;
    p.lambda * (C64::new(1.0, 0.0) - z * z) / (den * den)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointData {
    /// `[0, Z+, Z-]`
    pub points: [C64; 3],
    /// Multipliers in the same order; the first is `lambda`.
    pub multipliers: [C64; 3],
}

/// Fixed points `0, Z+, Z-` of `f_{lambda,t}` with their multipliers.
///
/// The nonzero fixed points are the roots of `z^2 + t z + (1 - lambda)`,
/// and the multiplier at such a point is `(1 - z^2) / lambda`.
pub fn fixed_point_data(p: &MapParams) -> FixedPointData {
    let one = C64::new(1.0, 0.0);
    let constant = one - p.lambda;
    let disc = p.t * p.t - 4.0 * constant;
    let root = disc.sqrt();
    let plus = (-p.t + root) / 2.0;
    let minus = (-p.t - root) / 2.0;
    // recover the smaller root from the product to avoid cancellation
    let (plus, minus) = if plus.norm() >= minus.norm() {
        let other = if plus == C64::new(0.0, 0.0) { minus } else { constant / plus };
        (plus, other)
    } else {
        (constant / minus, minus)
    };
    let mult = |z: C64| (one - z * z) / p.lambda;
    FixedPointData {
        points: [C64::new(0.0, 0.0), plus, minus],
        multipliers: [p.lambda, mult(plus), mult(minus)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn map_values() {
        let p = MapParams::real(2.0, 0.0).unwrap();
        assert_eq!(eval_map(&p, c(1.0, 0.0).into()), ExtComplex::Finite(c(1.0, 0.0)));
        assert_eq!(eval_map(&p, ExtComplex::Infinity), ExtComplex::Finite(c(0.0, 0.0)));
        let q = MapParams::new(c(0.3, -1.2), c(4.0, 2.5)).unwrap();
        assert_eq!(eval_map(&q, c(0.0, 0.0).into()), ExtComplex::Finite(c(0.0, 0.0)));
        // z^2 + 1 vanishes at i when t = 0
        assert_eq!(eval_map(&p, c(0.0, 1.0).into()), ExtComplex::Infinity);
    }

    #[test]
    fn map_odd_symmetry() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let lambda = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let t = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let z = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let p = MapParams::new(lambda, t).unwrap();
            let q = MapParams::new(lambda, -t).unwrap();
            let lhs = eval_map(&q, z.into()).finite().unwrap();
            let rhs = -eval_map(&p, (-z).into()).finite().unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn homogeneous_values() {
        let p = MapParams::real(2.0, 0.0).unwrap();
        let v = eval_homogeneous(&p, &ProjPair::new(c(1.0, 0.0), c(1.0, 0.0)).unwrap());
        assert_eq!((v.z1, v.z2), (c(2.0, 0.0), c(2.0, 0.0)));

        let q = MapParams::real(2.0, 1.0).unwrap();
        let w = eval_homogeneous(&q, &ProjPair::new(c(1.0, 0.0), c(0.0, 0.0)).unwrap());
        assert_eq!((w.z1, w.z2), (c(0.0, 0.0), c(1.0, 0.0)));

        let lambda = c(-1.7, 0.4);
        let r = MapParams::new(lambda, lambda - 2.0).unwrap();
        let inv = c(1.0, 0.0) / lambda;
        let u = eval_homogeneous(&r, &ProjPair::new(inv, inv).unwrap());
        assert!((u.z1 - inv).norm() < 1e-14 && (u.z2 - inv).norm() < 1e-14);
    }

    #[test]
    fn projpair_rejects_origin() {
        assert!(ProjPair::new(c(0.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(MapParams::real(0.0, 1.0).is_err());
    }

    #[test]
    fn fixed_points_at_zero_parameter() {
        let lambda = c(2.5, -0.5);
        let data = fixed_point_data(&MapParams::new(lambda, c(0.0, 0.0)).unwrap());
        assert_eq!(data.multipliers[0], lambda);
        let expect = c(-1.0, 0.0) + 2.0 / lambda;
        for m in &data.multipliers[1..] {
            assert!((m - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn fixed_points_collide_with_multiplier_one() {
        let lambda = c(2.0, 0.0);
        let t = 2.0 * (c(1.0, 0.0) - lambda).sqrt();
        let data = fixed_point_data(&MapParams::new(lambda, t).unwrap());
        assert!((data.points[1] - data.points[2]).norm() < 1e-7);
        assert!((data.points[1] + t / 2.0).norm() < 1e-7);
        for m in &data.multipliers[1..] {
            assert!((m - 1.0).norm() < 1e-7);
        }
    }

    #[test]
    fn fixed_points_are_fixed() {
        // roots of z (z^2 + 5 z + 1) = 2 z solved directly: z = (-5 +- sqrt(29)) / 2
        let p = MapParams::real(2.0, 5.0).unwrap();
        let data = fixed_point_data(&p);
        let direct = [(-5.0 + 29f64.sqrt()) / 2.0, (-5.0 - 29f64.sqrt()) / 2.0];
        for (z, d) in data.points[1..].iter().zip(direct) {
            assert!((z.re - d).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
        for z in data.points {
            let fz = eval_map(&p, z.into()).finite().unwrap();
            assert!((fz - z).norm() <= 1e-12 * (1.0 + z.norm()));
        }
    }
}
