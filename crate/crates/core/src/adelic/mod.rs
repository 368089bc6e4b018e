//! Places of the rationals and the local data of the family at each of them.

mod gamma;
mod height;
mod padic;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::algebra::log_abs_bigint;
use crate::error::{invalid, Error, Result};

pub use gamma::{
    classify_place, gamma_v, global_gamma_sum, global_log_capacity_sum, log_capacity_v, GammaV,
    GlobalSum, PlaceClass, PlaceTerm,
};
pub use height::{
    adelic_report, arakelov_green_arch, arakelov_green_arch_lifts, canonical_height, local_height,
    pairwise_energy_height, quasi_adelic_height, AdelicReport, CanonicalHeight, LocalHeight,
    PlaceReport, QuasiAdelicHeight,
};
pub use padic::Padic;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Archimedean,
    Prime(BigUint),
}

impl Place {
    pub fn prime(p: u64) -> Place {
        Place::Prime(BigUint::from(p))
    }

    /// Local degree; every place of the rationals has `N_v = 1`.
    pub fn n_v(&self) -> u32 {
        1
    }

    pub fn is_archimedean(&self) -> bool {
        matches!(self, Place::Archimedean)
    }
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Archimedean => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

impl std::str::FromStr for Place {
    type Err = Error;
    fn from_str(s: &str) -> Result<Place> {
        let s = s.trim();
        if s == "inf" || s == "archimedean" {
            return Ok(Place::Archimedean);
        }
        let p: BigUint = s.parse().map_err(|_| invalid(format!("bad place {s:?}")))?;
        if !is_prime(&p) {
            return Err(invalid(format!("{p} is not prime")));
        }
        Ok(Place::Prime(p))
    }
}

impl Serialize for Place {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Place {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Place, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub fn is_prime(p: &BigUint) -> bool {
    match p.to_u64() {
        Some(x) => num_prime::nt_funcs::is_prime64(x),
        None => num_prime::nt_funcs::is_prime(p, None).probably(),
    }
}

/// `ord_p(n)` for a nonzero integer.
pub fn ord_int(n: &BigInt, p: &BigUint) -> u64 {
    let p = BigInt::from_biguint(BigSign::Plus, p.clone());
    let mut n = n.abs();
    let mut k = 0;
    if n.is_zero() {
        return u64::MAX;
    }
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

/// `ord_p(x)` for a nonzero rational.
pub fn ord_p(x: &BigRational, p: &BigUint) -> i64 {
    ord_int(x.numer(), p) as i64 - ord_int(x.denom(), p) as i64
}

/// `ln |x|_v`, exact up to the final rounding.
pub fn log_abs_at(x: &BigRational, v: &Place) -> f64 {
    match v {
        Place::Archimedean => log_abs_bigint(x.numer()) - log_abs_bigint(x.denom()),
        Place::Prime(p) => -(ord_p(x, p) as f64) * log_biguint(p),
    }
}

pub(crate) fn log_biguint(p: &BigUint) -> f64 {
    log_abs_bigint(&BigInt::from_biguint(BigSign::Plus, p.clone()))
}

/// The normalised absolute value `|x|_v` as an exact rational.
pub fn abs_at_exact(x: &BigRational, v: &Place) -> BigRational {
    match v {
        Place::Archimedean => x.abs(),
        Place::Prime(p) => {
            if x.is_zero() {
                return BigRational::zero();
            }
            let e = ord_p(x, p);
            let pp = BigInt::from_biguint(BigSign::Plus, p.pow(e.unsigned_abs() as u32));
            if e >= 0 {
                BigRational::new(BigInt::one(), pp)
            } else {
                BigRational::from_integer(pp)
            }
        }
    }
}

pub fn abs_at(x: &BigRational, v: &Place) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    log_abs_at(x, v).exp()
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| num_prime::nt_funcs::primes(1 << 16))
}

/// Prime factorisation of `|n|`: trial division below `2^16`, then Pollard rho
/// from `num-prime` once the cofactor fits 64 bits. Larger composite
/// cofactors are returned separately; callers treat them as bundles of places
/// with a common valuation pattern.
pub(crate) fn factor(n: &BigUint) -> (BTreeMap<BigUint, usize>, Vec<BigUint>) {
    let mut found: BTreeMap<BigUint, usize> = BTreeMap::new();
    let mut rest = n.clone();
    if rest.is_zero() {
        return (found, Vec::new());
    }
    for &p in small_primes() {
        if rest.to_u64().is_some() {
            break;
        }
        let bp = BigUint::from(p);
        while (&rest % &bp).is_zero() {
            rest /= &bp;
            *found.entry(bp.clone()).or_insert(0) += 1;
        }
    }
    let mut composite = Vec::new();
    if let Some(x) = rest.to_u64() {
        split64(x, &mut found);
    } else if is_prime(&rest) {
        found.insert(rest, 1);
    } else {
        composite.push(rest);
    }
    (found, composite)
}

/// `num-prime`'s own `factorize64` overflows on some inputs near `2^64`
/// (its one-line method squares in `u64`), so the splitting is done here with
/// its primality test and Pollard rho in `u128`.
fn split64(x: u64, found: &mut BTreeMap<BigUint, usize>) {
    if x <= 1 {
        return;
    }
    if num_prime::nt_funcs::is_prime64(x) {
        *found.entry(BigUint::from(x)).or_insert(0) += 1;
        return;
    }
    let r = x.isqrt();
    if r * r == x {
        split64(r, found);
        split64(r, found);
        return;
    }
    let target = x as u128;
    for offset in 1u128.. {
        if let (Some(d), _) = num_prime::factor::pollard_rho(&target, 2, offset, 1 << 22) {
            if d > 1 && d < target {
                split64(d as u64, found);
                split64((target / d) as u64, found);
                return;
            }
        }
    }
}

/// Primes dividing a nonzero rational, plus any unfactored composite pieces.
pub(crate) fn rational_primes(x: &BigRational) -> Vec<BigUint> {
    let mut out: Vec<BigUint> = Vec::new();
    for n in [x.numer(), x.denom()] {
        let (f, rest) = factor(n.magnitude());
        out.extend(f.into_keys());
        // inputs are small enough that a full factorisation is affordable
        for c in rest {
            out.extend(num_prime::nt_funcs::factorize(c).into_keys());
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Places where a list of rationals can fail to be units, always including
/// the archimedean one first.
pub(crate) fn support(xs: &[&BigRational]) -> Vec<Place> {
    let mut primes: Vec<BigUint> = xs.iter().filter(|x| !x.is_zero()).flat_map(|x| rational_primes(x)).collect();
    primes.sort();
    primes.dedup();
    std::iter::once(Place::Archimedean).chain(primes.into_iter().map(Place::Prime)).collect()
}

/// `lambda` must be a nonzero rational other than `-1`.
pub(crate) fn check_lambda(lambda: &BigRational) -> Result<()> {
    if lambda.is_zero() {
        return Err(invalid("lambda must be nonzero"));
    }
    if *lambda == -BigRational::one() {
        return Err(Error::RootOfUnity("-1".into()));
    }
    Ok(())
}
