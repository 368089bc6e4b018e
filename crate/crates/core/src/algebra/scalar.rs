use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::gauss::GaussRat;
use crate::dynamics::C64;
use crate::error::{invalid, Error, Result};

/// A multiplier value: exact when given as integers or `p/q`, floating otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Lambda {
    Exact(GaussRat),
    Float(C64),
}

impl Lambda {
    pub fn to_c64(&self) -> C64 {
        match self {
            Lambda::Exact(q) => q.to_c64(),
            Lambda::Float(z) => *z,
        }
    }

    pub fn exact(&self) -> Option<&GaussRat> {
        match self {
            Lambda::Exact(q) => Some(q),
            Lambda::Float(_) => None,
        }
    }
}

impl From<GaussRat> for Lambda {
    fn from(q: GaussRat) -> Self {
        Lambda::Exact(q)
    }
}

impl From<C64> for Lambda {
    fn from(z: C64) -> Self {
        Lambda::Float(z)
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Exact(q) => write!(f, "{q}"),
            Lambda::Float(z) => f.write_str(&format_complex(*z)),
        }
    }
}

pub fn format_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{:?}", z.re)
    } else if z.re == 0.0 {
        format!("{:?}i", z.im)
    } else if z.im < 0.0 {
        format!("{:?}-{:?}i", z.re, -z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi` with decimal parts.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || invalid(format!("not a complex number: {s:?}"));
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i') else {
        return Ok(C64::new(num(&s)?, 0.0));
    };
    let bytes = body.as_bytes();
    let cut = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match cut {
        Some(k) => (num(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        other => num(other)?,
    };
    let z = C64::new(re, im);
    if !z.is_finite() {
        return Err(bad());
    }
    Ok(z)
}

impl FromStr for Lambda {
    type Err = Error;

    fn from_str(s: &str) -> Result<Lambda> {
        match s.parse::<GaussRat>() {
            Ok(q) => Ok(Lambda::Exact(q)),
            Err(_) => parse_complex(s).map(Lambda::Float),
        }
    }
}

impl Serialize for Lambda {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Lambda {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
