//! Exact evaluation on dyadic grids with machine integers.
//!
//! At a point `j / 2^N` only generations `m < N` contribute, and each
//! contribution `θ e_{m,k}(j / 2^N)` is an integer multiple of `2^-N` or of
//! `sqrt 2 * 2^-N`. So `x(j / 2^N) = (A + B sqrt 2) / 2^N` with integers
//! `A, B` bounded by `2^(N+1)`; [`ScaledQuad`] holds such a pair. This is the
//! fast path behind every scan, quadratic-variation sum and modulus scan.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Neg, Sub};

use num_bigint::BigInt;

use crate::error::{Result, TakagiError};
use crate::exact::{pow2, DyadicRational, QuadValue, Rational};
use crate::par::{self, Execution};
use crate::scheme::CoefficientScheme;

/// Largest grid level accepted by scans (`2^30 + 1` points).
pub const MAX_GRID_LEVEL: u32 = 30;

/// `A + B sqrt 2` with integer parts; the power-of-two scale is implied by
/// context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct ScaledQuad {
    pub a: i128,
    pub b: i128,
}

impl ScaledQuad {
    pub const ZERO: ScaledQuad = ScaledQuad { a: 0, b: 0 };

    pub fn new(a: i128, b: i128) -> Self {
        ScaledQuad { a, b }
    }

    /// Exact sign of `a + b sqrt 2`.
    pub fn signum(self) -> Ordering {
        let (a, b) = (self.a, self.b);
        match (a.signum(), b.signum()) {
            (0, 0) => Ordering::Equal,
            (sa, sb) if sa >= 0 && sb >= 0 => Ordering::Greater,
            (sa, sb) if sa <= 0 && sb <= 0 => Ordering::Less,
            (sa, _) => {
                // opposite signs: compare a^2 with 2 b^2
                let ord = match (a.checked_mul(a), b.checked_mul(b).and_then(|v| v.checked_mul(2))) {
                    (Some(a2), Some(b2)) => a2.cmp(&b2),
                    _ => {
                        let (a, b) = (BigInt::from(a), BigInt::from(b));
                        (&a * &a).cmp(&(&b * &b * 2))
                    }
                };
                if sa > 0 {
                    ord
                } else {
                    ord.reverse()
                }
            }
        }
    }

    pub fn cmp_value(self, other: ScaledQuad) -> Ordering {
        if self == other {
            Ordering::Equal
        } else {
            (self - other).signum()
        }
    }

    pub fn abs(self) -> Self {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self
        }
    }

    /// Product, scales multiply; `None` on overflow.
    pub fn checked_mul(self, rhs: ScaledQuad) -> Option<ScaledQuad> {
        let a = self
            .a
            .checked_mul(rhs.a)?
            .checked_add(self.b.checked_mul(rhs.b)?.checked_mul(2)?)?;
        let b = self.a.checked_mul(rhs.b)?.checked_add(self.b.checked_mul(rhs.a)?)?;
        Some(ScaledQuad { a, b })
    }

    pub fn checked_add(self, rhs: ScaledQuad) -> Option<ScaledQuad> {
        Some(ScaledQuad {
            a: self.a.checked_add(rhs.a)?,
            b: self.b.checked_add(rhs.b)?,
        })
    }

    /// The value `(a + b sqrt 2) / 2^scale_exp`.
    pub fn to_quad(self, scale_exp: u32) -> QuadValue {
        let s = pow2(-(scale_exp as i64));
        QuadValue::new(
            Rational::from_integer(BigInt::from(self.a)) * &s,
            Rational::from_integer(BigInt::from(self.b)) * s,
        )
    }

    pub fn to_f64(self, scale_exp: u32) -> f64 {
        (self.a as f64 + self.b as f64 * std::f64::consts::SQRT_2) * (-(scale_exp as f64)).exp2()
    }
}

impl Add for ScaledQuad {
    type Output = ScaledQuad;
    fn add(self, rhs: ScaledQuad) -> ScaledQuad {
        ScaledQuad::new(self.a + rhs.a, self.b + rhs.b)
    }
}

impl AddAssign for ScaledQuad {
    fn add_assign(&mut self, rhs: ScaledQuad) {
        self.a += rhs.a;
        self.b += rhs.b;
    }
}

impl Sub for ScaledQuad {
    type Output = ScaledQuad;
    fn sub(self, rhs: ScaledQuad) -> ScaledQuad {
        ScaledQuad::new(self.a - rhs.a, self.b - rhs.b)
    }
}

impl Neg for ScaledQuad {
    type Output = ScaledQuad;
    fn neg(self) -> ScaledQuad {
        ScaledQuad::new(-self.a, -self.b)
    }
}

/// `2^level * x(j / 2^level)` for the function with coefficients `scheme`.
///
/// The caller guarantees `j <= 2^level` and that the scheme covers `level`
/// generations.
#[inline]
pub(crate) fn scaled_value(scheme: &CoefficientScheme, level: u32, j: u64) -> ScaledQuad {
    let mut acc = ScaledQuad::ZERO;
    if j == 0 || j >> level != 0 {
        return acc;
    }
    // generations m >= level - tz(j) vanish at j / 2^level
    let first_zero = level - j.trailing_zeros().min(level);
    for m in 0..first_zero {
        let shift = level - m;
        let r = j & ((1u64 << shift) - 1);
        if r == 0 {
            continue;
        }
        let k = j >> shift;
        let w = r.min((1u64 << shift) - r) as i128;
        let theta = scheme.sign_unchecked(m, k) as i128;
        // 2^level e_{m,k}(j / 2^level) = w 2^(m/2)
        if m % 2 == 0 {
            acc.a += theta * (w << (m / 2));
        } else {
            acc.b += theta * (w << (m / 2));
        }
    }
    acc
}

/// Checks that scans at `level` are supported for `scheme`.
pub fn check_grid_level(scheme: &CoefficientScheme, level: u32) -> Result<()> {
    if level == 0 {
        return Err(TakagiError::ZeroLevel);
    }
    if level > MAX_GRID_LEVEL {
        return Err(TakagiError::LevelTooLarge {
            level,
            max: MAX_GRID_LEVEL,
        });
    }
    scheme.check_level(level)
}

/// The value of the function at `t` on the grid of `level`, exactly.
pub fn eval_grid_point(scheme: &CoefficientScheme, level: u32, t: &DyadicRational) -> Result<QuadValue> {
    scheme.check_level(level)?;
    let j = t.unit_grid_index(level)?;
    Ok(scaled_value(scheme, level, j).to_quad(level))
}

/// All values `x(j / 2^level)`, `j = 0..=2^level`, scaled by `2^level`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPath {
    level: u32,
    values: Vec<ScaledQuad>,
}

impl GridPath {
    pub fn build(scheme: &CoefficientScheme, level: u32, exec: Execution) -> Result<Self> {
        check_grid_level(scheme, level)?;
        let values = par::collect(exec, 0..(1u64 << level) + 1, |j| scaled_value(scheme, level, j));
        Ok(GridPath { level, values })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn scaled(&self) -> &[ScaledQuad] {
        &self.values
    }

    pub fn value(&self, j: usize) -> QuadValue {
        self.values[j].to_quad(self.level)
    }

    pub fn point(&self, j: usize) -> DyadicRational {
        DyadicRational::grid(j as u64, self.level)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub(crate) fn big_from(v: ScaledQuad) -> (BigInt, BigInt) {
    (BigInt::from(v.a), BigInt::from(v.b))
}

/// Accumulates [`ScaledQuad`] terms, spilling into big integers on overflow.
#[derive(Clone, Debug, Default)]
pub(crate) struct WideSum {
    fast: ScaledQuad,
    big_a: BigInt,
    big_b: BigInt,
}

impl WideSum {
    pub fn add(&mut self, v: ScaledQuad) {
        match self.fast.checked_add(v) {
            Some(s) => self.fast = s,
            None => {
                let (a, b) = big_from(self.fast);
                self.big_a += a;
                self.big_b += b;
                self.fast = v;
            }
        }
    }

    pub fn add_big(&mut self, a: BigInt, b: BigInt) {
        self.big_a += a;
        self.big_b += b;
    }

    pub fn merge(mut self, other: WideSum) -> WideSum {
        self.add_big(other.big_a, other.big_b);
        self.add(other.fast);
        self
    }

    pub fn to_quad(&self, scale_exp: u32) -> QuadValue {
        let (a, b) = big_from(self.fast);
        let s = pow2(-(scale_exp as i64));
        QuadValue::new(
            Rational::from_integer(a + &self.big_a) * &s,
            Rational::from_integer(b + &self.big_b) * s,
        )
    }
}
