//! Left-point Riemann sums `Σ g(x(s)) (x(s') - x(s))` along dyadic partitions
//! and the residual of the pathwise Itô formula with `d<x>_s = ds`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Result, TakagiError};
use crate::exact::{format_rational, parse_rational, pow2, DyadicRational, QuadValue, Rational};
use crate::grid::{big_from, check_grid_level, scaled_value, ScaledQuad, WideSum};
use crate::par::{self, Execution, CHUNK};
use crate::table::serialize_rational;
use crate::takagi::TakagiFunction;

/// A polynomial with rational coefficients in ascending degree order; trailing
/// zero coefficients are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct RationalPolynomial {
    #[serde(serialize_with = "serialize_coefficients")]
    coefficients: Vec<Rational>,
}

fn serialize_coefficients<S: serde::Serializer>(c: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(c.len()))?;
    for r in c {
        seq.serialize_element(&format_rational(r))?;
    }
    seq.end()
}

impl RationalPolynomial {
    pub fn new(mut coefficients: Vec<Rational>) -> Self {
        while coefficients.last().is_some_and(Zero::is_zero) {
            coefficients.pop();
        }
        RationalPolynomial { coefficients }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| Rational::from_integer(v.into())).collect())
    }

    /// `u^k`.
    pub fn monomial(k: usize) -> Self {
        let mut c = vec![Rational::zero(); k + 1];
        c[k] = Rational::one();
        Self::new(c)
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coefficients.len().checked_sub(1)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coefficients
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_integer(k.into()))
                .collect(),
        )
    }

    pub fn eval(&self, u: &QuadValue) -> QuadValue {
        self.coefficients
            .iter()
            .rev()
            .fold(QuadValue::zero(), |acc, c| acc * u + QuadValue::from_rational(c.clone()))
    }
}

impl FromStr for RationalPolynomial {
    type Err = TakagiError;

    /// Comma-separated coefficients, constant term first: `0,0,1` is `u^2`.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim().is_empty() {
            return Err(TakagiError::Parse("empty polynomial".into()));
        }
        let c = s.split(',').map(parse_rational).collect::<Result<Vec<_>>>()?;
        Ok(Self::new(c))
    }
}

impl fmt::Display for RationalPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.coefficients.iter().map(format_rational).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Power sums of a grid path, from which every Riemann sum of a polynomial
/// integrand follows exactly.
///
/// With `v_i = 2^n x(i / 2^n)`: `increments[k] = Σ v_i^k (v_{i+1} - v_i)` and
/// `plain[k] = Σ v_i^k`, over `i < 2^n t`.
#[derive(Clone, Debug)]
pub struct PathPowerSums {
    level: u32,
    degree: usize,
    start: QuadValue,
    end: QuadValue,
    increments: Vec<QuadValue>,
    plain: Vec<QuadValue>,
}

#[derive(Clone)]
struct Sums {
    inc: Vec<WideSum>,
    plain: Vec<WideSum>,
}

impl Sums {
    fn new(degree: usize) -> Sums {
        Sums {
            inc: vec![WideSum::default(); degree + 1],
            plain: vec![WideSum::default(); degree + 1],
        }
    }

    fn merge(self, o: Sums) -> Sums {
        let zip = |a: Vec<WideSum>, b: Vec<WideSum>| a.into_iter().zip(b).map(|(a, b)| a.merge(b)).collect();
        Sums {
            inc: zip(self.inc, o.inc),
            plain: zip(self.plain, o.plain),
        }
    }

    fn add_point(&mut self, v: ScaledQuad, dv: ScaledQuad) {
        if !self.add_point_fast(v, dv) {
            self.add_point_big(v, dv);
        }
    }

    /// All terms in `i128`, or nothing on overflow.
    fn add_point_fast(&mut self, v: ScaledQuad, dv: ScaledQuad) -> bool {
        let d = self.inc.len();
        let mut terms = [(ScaledQuad::ZERO, ScaledQuad::ZERO); 8];
        if d > terms.len() {
            return false;
        }
        let mut p = ScaledQuad::new(1, 0);
        for k in 0..d {
            let Some(inc) = p.checked_mul(dv) else {
                return false;
            };
            terms[k] = (p, inc);
            if k + 1 < d {
                let Some(next) = p.checked_mul(v) else {
                    return false;
                };
                p = next;
            }
        }
        for (k, (p, inc)) in terms.iter().take(d).enumerate() {
            self.plain[k].add(*p);
            self.inc[k].add(*inc);
        }
        true
    }

    fn add_point_big(&mut self, v: ScaledQuad, dv: ScaledQuad) {
        let mul = |(a, b): &(BigInt, BigInt), (c, d): &(BigInt, BigInt)| (a * c + b * d * 2, a * d + b * c);
        let (v, dv) = (big_from(v), big_from(dv));
        let mut p = (BigInt::one(), BigInt::zero());
        for k in 0..self.inc.len() {
            let inc = mul(&p, &dv);
            self.plain[k].add_big(p.0.clone(), p.1.clone());
            self.inc[k].add_big(inc.0, inc.1);
            p = mul(&p, &v);
        }
    }
}

impl PathPowerSums {
    /// Sums up to degree `degree` for `x` on `T_n`, over grid points `s < t`.
    pub fn compute(x: &TakagiFunction, n: u32, t: &DyadicRational, degree: usize, exec: Execution) -> Result<Self> {
        let scheme = x.scheme();
        check_grid_level(scheme, n)?;
        let end = t.unit_grid_index(n)?;
        let sums = par::map_reduce(
            exec,
            0..end,
            CHUNK,
            Sums::new(degree),
            |range| {
                let mut s = Sums::new(degree);
                let mut prev = scaled_value(scheme, n, range.start);
                for i in range {
                    let next = scaled_value(scheme, n, i + 1);
                    s.add_point(prev, next - prev);
                    prev = next;
                }
                s
            },
            Sums::merge,
        );
        // v^k dv carries the scale 2^(n(k+1)); v^k carries 2^(nk)
        let increments = sums
            .inc
            .iter()
            .enumerate()
            .map(|(k, s)| s.to_quad(n * (k as u32 + 1)))
            .collect();
        let plain = sums.plain.iter().enumerate().map(|(k, s)| s.to_quad(n * k as u32)).collect();
        Ok(PathPowerSums {
            level: n,
            degree,
            start: QuadValue::zero(),
            end: scaled_value(scheme, n, end).to_quad(n),
            increments,
            plain,
        })
    }

    fn check_degree(&self, p: &RationalPolynomial) -> Result<()> {
        match p.degree() {
            Some(d) if d > self.degree => Err(TakagiError::InvalidArgument(format!(
                "polynomial degree {d} exceeds the precomputed degree {}",
                self.degree
            ))),
            _ => Ok(()),
        }
    }

    /// `Σ g(x(s)) (x(s') - x(s))`.
    pub fn follmer(&self, g: &RationalPolynomial) -> Result<QuadValue> {
        self.check_degree(g)?;
        Ok(g.coefficients()
            .iter()
            .zip(&self.increments)
            .map(|(c, s)| s.scale(c))
            .sum())
    }

    /// `Σ g(x(s)) (s' - s)`.
    pub fn time_sum(&self, g: &RationalPolynomial) -> Result<QuadValue> {
        self.check_degree(g)?;
        let mesh = pow2(-(self.level as i64));
        Ok(g.coefficients()
            .iter()
            .zip(&self.plain)
            .map(|(c, s)| s.scale(&(c * &mesh)))
            .sum())
    }

    /// `f(x(t)) - f(x(0)) - Σ f'(x(s)) Δx - (1/2) Σ f''(x(s)) (s' - s)`.
    pub fn residual(&self, f: &RationalPolynomial) -> Result<QuadValue> {
        let d1 = f.derivative();
        let d2 = d1.derivative();
        let half = Rational::new(1.into(), 2.into());
        Ok(f.eval(&self.end) - f.eval(&self.start) - self.follmer(&d1)? - self.time_sum(&d2)?.scale(&half))
    }
}

/// `Σ_{s ∈ T_n, s < t} g(x(s)) (x(s') - x(s))`.
pub fn follmer_sum(g: &RationalPolynomial, x: &TakagiFunction, n: u32, t: &DyadicRational) -> Result<QuadValue> {
    let degree = g.degree().unwrap_or(0);
    PathPowerSums::compute(x, n, t, degree, Execution::default())?.follmer(g)
}

/// Residual of the Itô formula for `f` along `x` on `T_n` up to `t`.
pub fn ito_residual(f: &RationalPolynomial, x: &TakagiFunction, n: u32, t: &DyadicRational) -> Result<QuadValue> {
    let degree = f.degree().unwrap_or(0);
    PathPowerSums::compute(x, n, t, degree, Execution::default())?.residual(f)
}

/// One line of an Itô-residual convergence table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualRow {
    pub level: u32,
    pub t: DyadicRational,
    #[serde(serialize_with = "serialize_rational")]
    pub mesh: Rational,
    pub residual: QuadValue,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadvar::{level_identity, qv_approx};
    use crate::scheme::{builtin_schemes, CoefficientScheme};

    fn poly(c: &[i64]) -> RationalPolynomial {
        RationalPolynomial::from_ints(c)
    }

    /// Term-by-term summation with `eval_dyadic`.
    fn naive_follmer(g: &RationalPolynomial, x: &TakagiFunction, n: u32, end: u64) -> QuadValue {
        let at = |i: u64| x.eval_dyadic(&DyadicRational::grid(i, n)).unwrap();
        (0..end).map(|i| g.eval(&at(i)) * (at(i + 1) - at(i))).sum()
    }

    #[test]
    fn polynomial_basics() {
        let p: RationalPolynomial = "1/2, 0, -3, 0".parse().unwrap();
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.to_string(), "1/2,0,-3");
        assert_eq!(p.derivative(), poly(&[0, -6]));
        assert_eq!(p.eval(&QuadValue::sqrt2()), QuadValue::from_ratio(-11, 2));
        assert_eq!(poly(&[0]).degree(), None);
        assert!("0.5".parse::<RationalPolynomial>().is_err());
        assert!("".parse::<RationalPolynomial>().is_err());
        assert_eq!(RationalPolynomial::monomial(3), poly(&[0, 0, 0, 1]));
    }

    #[test]
    fn follmer_examples() {
        let hat = TakagiFunction::hat();
        for k in [0u64, 3, 7, 16] {
            let t = DyadicRational::grid(k, 4);
            assert_eq!(
                follmer_sum(&poly(&[1]), &hat, 4, &t).unwrap(),
                hat.eval_dyadic(&t).unwrap()
            );
        }
        let one = DyadicRational::one();
        assert_eq!(follmer_sum(&poly(&[0, 2]), &hat, 2, &one).unwrap(), QuadValue::from_ratio(-3, 4));
        for s in builtin_schemes() {
            let x = TakagiFunction::new(s);
            for n in [1, 6, 13] {
                let expect = -QuadValue::from_rational(level_identity(n));
                assert_eq!(follmer_sum(&poly(&[0, 2]), &x, n, &one).unwrap(), expect);
            }
        }
    }

    #[test]
    fn matches_naive_summation() {
        let g: RationalPolynomial = "1/3,-2,0,5/7,1".parse().unwrap();
        for s in builtin_schemes() {
            let x = TakagiFunction::new(s);
            for (n, k) in [(3u32, 8u64), (6, 41), (8, 256)] {
                let t = DyadicRational::grid(k, n);
                let fast = follmer_sum(&g, &x, n, &t).unwrap();
                assert_eq!(fast, naive_follmer(&g, &x, n, k));
            }
        }
    }

    #[test]
    fn big_integer_fallback_agrees() {
        // degree 9 overflows the fast path at level 14
        let g = RationalPolynomial::monomial(9);
        let x = TakagiFunction::new(CoefficientScheme::AltMk);
        let t = DyadicRational::grid(37, 14);
        let fast = follmer_sum(&g, &x, 14, &t).unwrap();
        assert_eq!(fast, naive_follmer(&g, &x, 14, 37));
        let mut s = Sums::new(3);
        let big = ScaledQuad::new(1 << 100, 1 << 90);
        assert!(!s.add_point_fast(big, big));
    }

    #[test]
    fn residual_examples() {
        let square = poly(&[0, 0, 1]);
        let linear = poly(&[3, -2]);
        for s in builtin_schemes() {
            let x = TakagiFunction::new(s);
            for n in [2u32, 9] {
                for k in [0u64, 1, 3, 1 << n] {
                    let t = DyadicRational::grid(k, n);
                    let sums = PathPowerSums::compute(&x, n, &t, 2, Execution::Sequential).unwrap();
                    assert!(sums.residual(&linear).unwrap().is_zero());
                    // R = <x>^n_t - t for u^2
                    let qv = qv_approx(&x, n, &t).unwrap();
                    let expect = qv - QuadValue::from_rational(t.to_rational());
                    assert_eq!(sums.residual(&square).unwrap(), expect);
                }
            }
            let r = ito_residual(&square, &x, 10, &DyadicRational::one()).unwrap();
            assert_eq!(r, QuadValue::from_rational(-pow2(-10)));
        }
    }

    #[test]
    fn cubic_residual_decays() {
        // floating-point reference values of the residual for u^3 along x̂
        let reference = [(12u32, -0.055083625925), (16, -0.014051605683), (17, -0.009955467990)];
        let cube = poly(&[0, 0, 0, 1]);
        for (n, expect) in reference {
            let r = ito_residual(&cube, &TakagiFunction::hat(), n, &DyadicRational::one()).unwrap();
            assert!((r.to_f64() - expect).abs() < 1e-9, "n={n} {}", r.to_decimal(12));
        }
    }

    #[test]
    fn degree_is_checked() {
        let sums =
            PathPowerSums::compute(&TakagiFunction::hat(), 3, &DyadicRational::one(), 2, Execution::Sequential).unwrap();
        assert!(sums.residual(&poly(&[0, 0, 0, 1])).is_ok());
        assert!(sums.residual(&poly(&[0, 0, 0, 0, 1])).is_err());
        assert!(sums.follmer(&poly(&[0, 0, 1])).is_ok());
        assert!(follmer_sum(&poly(&[1]), &TakagiFunction::hat(), 3, &DyadicRational::new(1, 5)).is_err());
    }
}
