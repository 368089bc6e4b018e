//! Escape rates, bifurcation measures, exact parameter polynomials, p-adic
//! data and canonical heights for the family `f(z) = lambda z / (z^2 + t z + 1)`.

pub mod adelic;
pub mod algebra;
pub mod dynamics;
pub mod error;
pub mod measure;
pub mod pcf;

pub use error::{Error, Result};
