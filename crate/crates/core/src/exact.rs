//! Exact rational, dyadic and `Q(sqrt 2)` arithmetic.
//!
//! Every number the library reports lives in the quadratic field `Q(sqrt 2)`:
//! wedge heights `2^(-m/2)`, maxima such as `(2 + sqrt 2) / 3`, moduli of
//! continuity at rational steps. [`QuadValue`] stores such a number as
//! `a + b sqrt 2` with arbitrary-precision rational parts, so equality is
//! componentwise and ordering is decided without floating point.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Result, TakagiError};

/// Arbitrary-precision rational, always in lowest terms with positive denominator.
pub type Rational = BigRational;

/// Number of fractional digits used when a decimal rendering is attached to
/// serialized output.
pub const DECIMAL_DIGITS: usize = 12;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn rational_int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^e` as a rational, for any sign of `e`.
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::one() << e.unsigned_abs();
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Parses `p/q` or `p` into a rational. Decimal notation is rejected so no
/// precision is lost at input.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || TakagiError::Parse(format!("expected an exact fraction p/q, got {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| bad())?;
    let den = BigInt::from_str(den).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(TakagiError::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Rational::new(num, den))
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Rounds `numer / denom` to the nearest integer, ties to even. `denom > 0`.
fn round_half_even(numer: &BigInt, denom: &BigInt) -> BigInt {
    let (q, r) = numer.div_mod_floor(denom);
    let twice: BigInt = &r * 2u32;
    match twice.cmp(denom) {
        Ordering::Less => q,
        Ordering::Greater => q + 1,
        Ordering::Equal => {
            if q.is_even() {
                q
            } else {
                q + 1
            }
        }
    }
}

fn render_fixed(n: &BigInt, digits: usize) -> String {
    let neg = n.is_negative();
    let mut s = n.abs().to_string();
    if digits == 0 {
        return if neg { format!("-{s}") } else { s };
    }
    if s.len() <= digits {
        s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
    }
    let split = s.len() - digits;
    format!("{}{}.{}", if neg { "-" } else { "" }, &s[..split], &s[split..])
}

/// Correctly rounded (half-even) fixed-point rendering of a rational.
pub fn rational_to_decimal(r: &Rational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let n = round_half_even(&(r.numer() * scale), r.denom());
    render_fixed(&n, digits)
}

// ---------------------------------------------------------------------------

/// A dyadic rational `numer / 2^exponent`, kept normalized: the numerator is
/// odd unless the value is zero (then the exponent is zero).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numer: BigInt,
    exponent: u32,
}

impl DyadicRational {
    pub fn new(numer: impl Into<BigInt>, exponent: u32) -> Self {
        let mut numer = numer.into();
        let mut exponent = exponent;
        if numer.is_zero() {
            return DyadicRational { numer, exponent: 0 };
        }
        let tz = numer.trailing_zeros().unwrap_or(0).min(exponent as u64) as u32;
        if tz > 0 {
            numer >>= tz;
            exponent -= tz;
        }
        DyadicRational { numer, exponent }
    }

    /// The grid point `j / 2^level`.
    pub fn grid(j: u64, level: u32) -> Self {
        Self::new(BigInt::from(j), level)
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }

    pub fn one() -> Self {
        Self::new(1, 0)
    }

    pub fn numer(&self) -> &BigInt {
        &self.numer
    }

    /// Smallest `N` with `self * 2^N` an integer.
    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn denom(&self) -> BigInt {
        BigInt::one() << self.exponent
    }

    pub fn to_rational(&self) -> Rational {
        Rational::new(self.numer.clone(), self.denom())
    }

    /// `Some` when the rational's denominator is a power of two.
    pub fn from_rational(r: &Rational) -> Option<Self> {
        let d = r.denom();
        let tz = d.trailing_zeros().unwrap_or(0);
        if (d >> tz).is_one() {
            Some(Self::new(r.numer().clone(), tz as u32))
        } else {
            None
        }
    }

    /// The index `j` with `self = j / 2^level`, if `self` lies on that grid.
    pub fn grid_index(&self, level: u32) -> Option<BigInt> {
        if self.exponent > level {
            None
        } else {
            Some(&self.numer << (level - self.exponent))
        }
    }

    /// Like [`grid_index`](Self::grid_index) but also requires `0 <= self <= 1`
    /// and returns a machine index.
    pub fn unit_grid_index(&self, level: u32) -> Result<u64> {
        if !self.in_unit_interval() {
            return Err(TakagiError::OutsideUnitInterval(self.to_string()));
        }
        let j = self.grid_index(level).ok_or_else(|| TakagiError::NotOnGrid {
            t: self.to_string(),
            level,
        })?;
        j.to_u64().ok_or(TakagiError::LevelTooLarge {
            level,
            max: crate::MAX_LEVEL,
        })
    }

    pub fn in_unit_interval(&self) -> bool {
        !self.numer.is_negative() && self.numer <= self.denom()
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64().unwrap_or(f64::NAN)
    }
}

impl Ord for DyadicRational {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exponent.max(other.exponent);
        let l = &self.numer << (e - self.exponent);
        let r = &other.numer << (e - other.exponent);
        l.cmp(&r)
    }
}

impl PartialOrd for DyadicRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, self.denom())
        }
    }
}

impl FromStr for DyadicRational {
    type Err = TakagiError;

    fn from_str(s: &str) -> Result<Self> {
        let r = parse_rational(s)?;
        Self::from_rational(&r)
            .ok_or_else(|| TakagiError::Parse(format!("{s} is not a dyadic rational")))
    }
}

impl Serialize for DyadicRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

// ---------------------------------------------------------------------------

/// An element `a + b sqrt 2` of `Q(sqrt 2)`.
///
/// Since `sqrt 2` is irrational the pair `(a, b)` is unique, so derived
/// equality is value equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct QuadValue {
    a: Rational,
    b: Rational,
}

impl QuadValue {
    pub fn new(a: Rational, b: Rational) -> Self {
        QuadValue { a, b }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn sqrt2() -> Self {
        QuadValue {
            a: Rational::zero(),
            b: Rational::one(),
        }
    }

    pub fn from_rational(a: Rational) -> Self {
        QuadValue {
            a,
            b: Rational::zero(),
        }
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(rational(numer, denom))
    }

    /// `2^(e/2)`, which is rational for even `e` and a rational multiple of
    /// `sqrt 2` for odd `e`.
    pub fn pow2_half(e: i64) -> Self {
        if e.rem_euclid(2) == 0 {
            Self::from_rational(pow2(e.div_euclid(2)))
        } else {
            // 2^(e/2) = 2^((e-1)/2) * sqrt 2
            QuadValue {
                a: Rational::zero(),
                b: pow2((e - 1).div_euclid(2)),
            }
        }
    }

    /// Rational part `a`.
    pub fn rational_part(&self) -> &Rational {
        &self.a
    }

    /// Coefficient `b` of `sqrt 2`.
    pub fn sqrt2_part(&self) -> &Rational {
        &self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn conjugate(&self) -> Self {
        QuadValue {
            a: self.a.clone(),
            b: -&self.b,
        }
    }

    /// Field norm `a^2 - 2 b^2`; zero only for the zero element.
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - (&self.b * &self.b) * rational_int(2)
    }

    /// Exact sign, without floating point.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.numer().sign();
        let sb = self.b.numer().sign();
        use Sign::*;
        match (sa, sb) {
            (NoSign, NoSign) => Ordering::Equal,
            (Plus | NoSign, Plus | NoSign) => Ordering::Greater,
            (Minus | NoSign, Minus | NoSign) => Ordering::Less,
            // opposite signs: compare a^2 with 2 b^2
            (Plus, Minus) => (&self.a * &self.a).cmp(&(&self.b * &self.b * rational_int(2))),
            (Minus, Plus) => (&self.b * &self.b * rational_int(2)).cmp(&(&self.a * &self.a)),
        }
    }

    pub fn abs(&self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn recip(&self) -> Option<Self> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(QuadValue {
            a: &self.a / &n,
            b: -(&self.b / &n),
        })
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.recip().map(|r| self * &r)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        QuadValue {
            a: &self.a * r,
            b: &self.b * r,
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    /// Floating-point approximation, for diagnostics and oracle cross-checks.
    pub fn to_f64(&self) -> f64 {
        self.a.to_f64().unwrap_or(f64::NAN)
            + self.b.to_f64().unwrap_or(f64::NAN) * std::f64::consts::SQRT_2
    }

    /// Correctly rounded (half-even) decimal expansion with `digits`
    /// fractional digits.
    ///
    /// Works entirely in integers: with `X = 10^digits * self = (P + R sqrt 2)/Q`,
    /// `floor(2X)` follows from `isqrt(8 R^2)` because `sqrt(8 R^2)` is never an
    /// integer when `R != 0`, and an irrational `X` is never a rounding tie.
    pub fn to_decimal(&self, digits: usize) -> String {
        if self.b.is_zero() {
            return rational_to_decimal(&self.a, digits);
        }
        let scale = BigInt::from(10u32).pow(digits as u32);
        let q = self.a.denom().lcm(self.b.denom());
        let p = self.a.numer() * (&q / self.a.denom()) * &scale;
        let r = self.b.numer() * (&q / self.b.denom()) * &scale;
        let s = (&r * &r * 8u32).sqrt();
        let p: BigInt = p * 2u32;
        let floor_twice = if r.is_positive() {
            (p + s).div_floor(&q)
        } else {
            (p - s - 1u32).div_floor(&q)
        };
        let rounded = (floor_twice + 1u32).div_floor(&BigInt::from(2));
        render_fixed(&rounded, digits)
    }
}

impl Ord for QuadValue {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        (self - other).signum()
    }
}

impl PartialOrd for QuadValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<Rational> for QuadValue {
    fn from(a: Rational) -> Self {
        Self::from_rational(a)
    }
}

impl From<i64> for QuadValue {
    fn from(n: i64) -> Self {
        Self::from_rational(rational_int(n))
    }
}

impl fmt::Display for QuadValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.a.is_zero(), self.b.is_zero()) {
            (_, true) => write!(f, "{}", format_rational(&self.a)),
            (true, false) => write!(f, "{}*sqrt2", format_rational(&self.b)),
            (false, false) => {
                if self.b.is_negative() {
                    write!(
                        f,
                        "{} - {}*sqrt2",
                        format_rational(&self.a),
                        format_rational(&-&self.b)
                    )
                } else {
                    write!(f, "{} + {}*sqrt2", format_rational(&self.a), format_rational(&self.b))
                }
            }
        }
    }
}

impl Serialize for QuadValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = serializer.serialize_struct("QuadValue", 3)?;
        st.serialize_field("a", &format_rational(&self.a))?;
        st.serialize_field("b", &format_rational(&self.b))?;
        st.serialize_field("decimal", &self.to_decimal(DECIMAL_DIGITS))?;
        st.end()
    }
}

// Operator plumbing: every combination of owned and borrowed operands.

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl<'a, 'b> $tr<&'b QuadValue> for &'a QuadValue {
            type Output = QuadValue;
            fn $method(self, rhs: &'b QuadValue) -> QuadValue {
                let f: fn(&QuadValue, &QuadValue) -> QuadValue = $body;
                f(self, rhs)
            }
        }
        impl $tr<QuadValue> for QuadValue {
            type Output = QuadValue;
            fn $method(self, rhs: QuadValue) -> QuadValue {
                (&self).$method(&rhs)
            }
        }
        impl<'b> $tr<&'b QuadValue> for QuadValue {
            type Output = QuadValue;
            fn $method(self, rhs: &'b QuadValue) -> QuadValue {
                (&self).$method(rhs)
            }
        }
        impl<'a> $tr<QuadValue> for &'a QuadValue {
            type Output = QuadValue;
            fn $method(self, rhs: QuadValue) -> QuadValue {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |u, v| QuadValue {
    a: &u.a + &v.a,
    b: &u.b + &v.b,
});

forward_binop!(Sub, sub, |u, v| QuadValue {
    a: &u.a - &v.a,
    b: &u.b - &v.b,
});

// (a1 + b1 r)(a2 + b2 r) = (a1 a2 + 2 b1 b2) + (a1 b2 + a2 b1) r,  r = sqrt 2
forward_binop!(Mul, mul, |u, v| QuadValue {
    a: &u.a * &v.a + (&u.b * &v.b) * rational_int(2),
    b: &u.a * &v.b + &u.b * &v.a,
});

forward_binop!(Div, div, |u, v| u
    .checked_div(v)
    .expect("division by zero in Q(sqrt 2)"));

impl Neg for QuadValue {
    type Output = QuadValue;
    fn neg(self) -> QuadValue {
        QuadValue {
            a: -self.a,
            b: -self.b,
        }
    }
}

impl Neg for &QuadValue {
    type Output = QuadValue;
    fn neg(self) -> QuadValue {
        QuadValue {
            a: -&self.a,
            b: -&self.b,
        }
    }
}

impl AddAssign<&QuadValue> for QuadValue {
    fn add_assign(&mut self, rhs: &QuadValue) {
        self.a += &rhs.a;
        self.b += &rhs.b;
    }
}

impl AddAssign for QuadValue {
    fn add_assign(&mut self, rhs: QuadValue) {
        self.a += rhs.a;
        self.b += rhs.b;
    }
}

impl SubAssign<&QuadValue> for QuadValue {
    fn sub_assign(&mut self, rhs: &QuadValue) {
        self.a -= &rhs.a;
        self.b -= &rhs.b;
    }
}

impl MulAssign<&QuadValue> for QuadValue {
    fn mul_assign(&mut self, rhs: &QuadValue) {
        *self = &*self * rhs;
    }
}

impl Sum for QuadValue {
    fn sum<I: Iterator<Item = QuadValue>>(iter: I) -> Self {
        iter.fold(QuadValue::zero(), |acc, v| acc + v)
    }
}

impl<'a> Sum<&'a QuadValue> for QuadValue {
    fn sum<I: Iterator<Item = &'a QuadValue>>(iter: I) -> Self {
        iter.fold(QuadValue::zero(), |acc, v| acc + v)
    }
}

/// Frequently used constants of the theory.
pub mod consts {
    use super::*;

    /// `(2 + sqrt 2) / 3`, the value of the all-plus function at 1/3 and 2/3.
    pub fn hat_max() -> QuadValue {
        QuadValue::new(rational(2, 3), rational(1, 3))
    }

    /// `(5 + 4 sqrt 2) / 6`, the largest oscillation in the class.
    pub fn max_oscillation() -> QuadValue {
        QuadValue::new(rational(5, 6), rational(4, 6))
    }

    /// `2 + sqrt 2 = 1 / (1 - 2^(-1/2))`, the sum of all wedge-height ratios.
    pub fn tail_factor() -> QuadValue {
        QuadValue::new(rational_int(2), rational_int(1))
    }
}
