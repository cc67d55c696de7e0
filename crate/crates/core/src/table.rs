//! CSV rendering of exact values.

use serde::Serializer;

use crate::exact::{format_rational, DyadicRational, QuadValue, Rational, DECIMAL_DIGITS};

/// Columns describing one exact value `a + b sqrt 2`.
pub const VALUE_HEADER: &str = "value_a_num,value_a_den,value_b_num,value_b_den,value_decimal";

/// `a_num,a_den,b_num,b_den,decimal` for `v`.
pub fn value_columns(v: &QuadValue) -> String {
    let (a, b) = (v.rational_part(), v.sqrt2_part());
    format!(
        "{},{},{},{},{}",
        a.numer(),
        a.denom(),
        b.numer(),
        b.denom(),
        v.to_decimal(DECIMAL_DIGITS)
    )
}

/// `t_num,t_den` for a grid point.
pub fn time_columns(t: &DyadicRational) -> String {
    format!("{},{}", t.numer(), t.denom())
}

/// `num,den` for any rational.
pub fn rational_columns(r: &Rational) -> String {
    format!("{},{}", r.numer(), r.denom())
}

/// Serializes a rational as `"p/q"`.
pub fn serialize_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}
