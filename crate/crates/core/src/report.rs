//! Text forms shared by report writers.

use num_rational::BigRational;

/// Exact rational as `"num/den"` (denominator always printed).
pub fn rat(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Float with 17 significant digits in scientific notation.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}
