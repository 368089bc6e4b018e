//! Exact arithmetic over the Gaussian rationals: the parameter polynomials
//! `P_n`, `Q_n`, their expansion coefficients, Sylvester resultants, and the
//! homogeneous capacity.

mod gauss;
mod poly;
mod resultant;
mod scalar;

pub(crate) use gauss::gcd_int;
pub use gauss::{log_abs_bigint, GaussInt, GaussRat};
pub(crate) use gauss::ratio_to_f64;
pub use scalar::{format_complex, parse_complex, Lambda};
pub use poly::{
    check_budget, coeff_sequences, iterate_param_poly, iterate_param_poly_signed, scaled_orbit,
    CoeffSeq, Coeff, IntPoly, Poly, RatPoly, ScaledOrbit, DEFAULT_N_MAX,
};
pub use resultant::{
    bareiss_det, capacity_closed_form, capacity_resultant_limit, capacity_resultant_limit_float,
    log_abs_resultant, resultant_recursive, sylvester_resultant, sylvester_resultant_deg,
    CapacityMode, CapacityValue,
};
