//! Members of the class of ±1 Faber–Schauder series and their evaluation.
//!
//! A [`TakagiFunction`] is `x = Σ_m Σ_k θ_{m,k} e_{m,k}` for a
//! [`CoefficientScheme`]. Three evaluation routes exist:
//!
//! * [`eval_partial`](TakagiFunction::eval_partial) sums the first `n`
//!   generations at any rational point with exact rational arithmetic;
//! * [`eval_dyadic`](TakagiFunction::eval_dyadic) is exact at `j / 2^N`
//!   because generations `m >= N` vanish there;
//! * [`eval_thirds`](TakagiFunction::eval_thirds) is exact at points with
//!   denominator `3 * 2^n` for the all-plus function and the half-split pair,
//!   via self-similarity.
//!
//! Everything else goes through [`eval_approx`](TakagiFunction::eval_approx)
//! with a certified tail bound.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Result, TakagiError};
use crate::exact::{consts, format_rational, pow2, rational, DyadicRational, QuadValue, Rational};
use crate::grid::scaled_value;
use crate::schauder::{eval_e, BasisIndex};
use crate::scheme::{CoefficientScheme, Sign};
use crate::MAX_LEVEL;

/// One function of the class, given by its coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct TakagiFunction {
    scheme: CoefficientScheme,
}

/// Result of [`TakagiFunction::eval_approx`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Approximation {
    /// Partial sum over generations `0..level`.
    pub value: QuadValue,
    /// `(2 + sqrt 2) 2^(-(level+2)/2)`, an upper bound on the truncation error.
    pub bound: QuadValue,
    pub level: u32,
}

impl TakagiFunction {
    pub fn new(scheme: CoefficientScheme) -> Self {
        TakagiFunction { scheme }
    }

    /// All coefficients `+1`.
    pub fn hat() -> Self {
        Self::new(CoefficientScheme::AllPlus)
    }

    /// `θ_{m,k} = (-1)^m`.
    pub fn alternating() -> Self {
        Self::new(CoefficientScheme::AltM)
    }

    /// The oscillation-extremal half-split function.
    pub fn star() -> Self {
        Self::new(CoefficientScheme::HalfSplit)
    }

    /// Negation of [`star`](Self::star).
    pub fn lower_star() -> Self {
        Self::new(CoefficientScheme::NegHalfSplit)
    }

    pub fn negated(&self) -> Self {
        Self::new(self.scheme.clone().negated())
    }

    pub fn scheme(&self) -> &CoefficientScheme {
        &self.scheme
    }

    pub fn coefficient(&self, m: u32, k: u64) -> Result<Sign> {
        self.scheme.coefficient(m, k)
    }

    /// `x^n(t) = Σ_{m<n} Σ_k θ_{m,k} e_{m,k}(t)` at any rational `t ∈ [0, 1]`.
    pub fn eval_partial(&self, n: u32, t: &Rational) -> Result<QuadValue> {
        check_unit(t)?;
        self.scheme.check_level(n)?;
        let mut acc = QuadValue::zero();
        for m in 0..n {
            // only the wedge whose support contains t contributes
            let k = (t * pow2(m as i64)).floor().to_integer();
            let Some(k) = k.to_u64().filter(|&k| k < 1u64 << m) else {
                continue;
            };
            let v = eval_e(BasisIndex::new(m, k as i64), t);
            if v.is_zero() {
                continue;
            }
            match self.scheme.sign_unchecked(m, k) {
                1 => acc += v,
                _ => acc -= &v,
            }
        }
        Ok(acc)
    }

    /// Exact `x(t)` for dyadic `t = j / 2^N`; equal to `eval_partial(N, t)`.
    pub fn eval_dyadic(&self, t: &DyadicRational) -> Result<QuadValue> {
        if !t.in_unit_interval() {
            return Err(TakagiError::OutsideUnitInterval(t.to_string()));
        }
        let level = t.exponent();
        if level == 0 {
            return Ok(QuadValue::zero());
        }
        self.scheme.check_level(level)?;
        let j = t.unit_grid_index(level)?;
        Ok(scaled_value(&self.scheme, level, j).to_quad(level))
    }

    /// Smallest level `M >= 1` whose tail bound `(2 + sqrt 2) 2^(-(M+2)/2)`
    /// is at most `tol`.
    pub fn approx_level(tol: &Rational) -> Result<u32> {
        if !tol.is_positive() {
            return Err(TakagiError::InvalidTolerance(format_rational(tol)));
        }
        let tol_q = QuadValue::from_rational(tol.clone());
        (1..=MAX_LEVEL)
            .find(|&m| tail_bound(m) <= tol_q)
            .ok_or_else(|| TakagiError::ToleranceTooSmall(format_rational(tol)))
    }

    /// Truncated evaluation with a certified error bound:
    /// `|x(t) - value| <= bound <= tol`.
    pub fn eval_approx(&self, t: &Rational, tol: &Rational) -> Result<Approximation> {
        let level = Self::approx_level(tol)?;
        let value = self.eval_partial(level, t)?;
        Ok(Approximation {
            value,
            bound: tail_bound(level),
            level,
        })
    }

    /// Exact value at `t = p / (3 * 2^n)` with `3 ∤ p`, for the all-plus,
    /// half-split and negated half-split functions.
    pub fn eval_thirds(&self, t: &Rational) -> Result<QuadValue> {
        check_unit(t)?;
        let n = thirds_exponent(t)?;
        if n >= MAX_LEVEL {
            return Err(TakagiError::LevelTooLarge {
                level: n,
                max: MAX_LEVEL - 1,
            });
        }
        let star = |t: &Rational| {
            // x*(1/2 + s) = 1/2 - x̂(s) on the right half
            let half = rational(1, 2);
            if *t <= half {
                hat_at_thirds(t)
            } else {
                QuadValue::from_rational(half.clone()) - hat_at_thirds(&(t - &half))
            }
        };
        match &self.scheme {
            CoefficientScheme::AllPlus => Ok(hat_at_thirds(t)),
            CoefficientScheme::HalfSplit => Ok(star(t)),
            CoefficientScheme::NegHalfSplit => Ok(-star(t)),
            CoefficientScheme::Negated(inner) => Ok(-TakagiFunction::new((**inner).clone()).eval_thirds(t)?),
            other => Err(TakagiError::UnsupportedFunction(other.to_string())),
        }
    }

    /// Recovers `θ_{m,k}` from three exact point values.
    pub fn recover_coefficient(&self, m: u32, k: u64) -> Result<QuadValue> {
        recover_coefficient(|t| self.eval_dyadic(t), m, k)
    }
}

/// `(2 + sqrt 2) 2^(-(level+2)/2)`: sum of the wedge heights of all
/// generations `>= level`.
pub fn tail_bound(level: u32) -> QuadValue {
    consts::tail_factor() * QuadValue::pow2_half(-(level as i64 + 2))
}

fn check_unit(t: &Rational) -> Result<()> {
    if t.is_negative() || *t > Rational::one() {
        Err(TakagiError::OutsideUnitInterval(format_rational(t)))
    } else {
        Ok(())
    }
}

/// `n` such that the reduced denominator of `t` is `3 * 2^n`.
fn thirds_exponent(t: &Rational) -> Result<u32> {
    let not_thirds = || TakagiError::NotThirdsPoint(format_rational(t));
    let (q, r) = t.denom().div_rem(&BigInt::from(3));
    if !r.is_zero() {
        return Err(not_thirds());
    }
    let tz = q.trailing_zeros().unwrap_or(0);
    if !(&q >> tz).is_one() {
        return Err(not_thirds());
    }
    Ok(tz as u32)
}

/// `x̂(t)` for `t` with denominator `3 * 2^n`.
///
/// On `[j 2^-n, (j+1) 2^-n]` the first `n` generations are linear and the
/// remaining ones form a copy of `x̂` scaled by `2^(-n/2)`:
/// `x̂(t) = x̂^n(t) + 2^(-n/2) x̂(2^n t - j)`, where `2^n t - j ∈ {1/3, 2/3}`
/// and `x̂(1/3) = x̂(2/3) = (2 + sqrt 2) / 3`.
fn hat_at_thirds(t: &Rational) -> QuadValue {
    let n = thirds_exponent(t).expect("validated by caller");
    let scaled = t * pow2(n as i64);
    let j = scaled.floor().to_integer().to_u64().expect("t <= 1");
    let frac = &scaled - Rational::from_integer(BigInt::from(j));
    let left = scaled_value(&CoefficientScheme::AllPlus, n, j).to_quad(n);
    let right = scaled_value(&CoefficientScheme::AllPlus, n, j + 1).to_quad(n);
    let linear = left.scale(&(Rational::one() - &frac)) + right.scale(&frac);
    linear + QuadValue::pow2_half(-(n as i64)) * consts::hat_max()
}

/// Faber–Schauder coefficient of a continuous function vanishing at 0 and 1:
/// `a_{m,k} = 2^(m/2) (2 x((2k+1)/2^(m+1)) - x(k/2^m) - x((k+1)/2^m))`.
pub fn recover_coefficient<F>(x: F, m: u32, k: u64) -> Result<QuadValue>
where
    F: Fn(&DyadicRational) -> Result<QuadValue>,
{
    if k >= 1u64 << m {
        return Err(TakagiError::IndexOutOfRange { m, k: k as i128 });
    }
    let left = x(&DyadicRational::new(k, m))?;
    let right = x(&DyadicRational::new(k + 1, m))?;
    let mid = x(&DyadicRational::new(2 * k + 1, m + 1))?;
    let second_diff = mid.scale(&Rational::from_integer(BigInt::from(2))) - left - right;
    Ok(QuadValue::pow2_half(m as i64) * second_diff)
}
