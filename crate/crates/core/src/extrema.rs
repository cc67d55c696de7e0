//! Maxima of the all-plus partial sums in closed form, and exact grid scans
//! for the extrema of any member of the class.

use std::cmp::Ordering;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::Result;
use crate::exact::{consts, rational, DyadicRational, QuadValue};
use crate::grid::{check_grid_level, scaled_value, ScaledQuad};
use crate::par::{self, Execution, CHUNK};
use crate::takagi::TakagiFunction;

/// `J_n = (2^n - (-1)^n) / 3`.
pub fn jacobsthal(n: u32) -> BigInt {
    let p = BigInt::from(1) << n;
    let s = if n.is_multiple_of(2) { p - 1 } else { p + 1 };
    s / 3
}

/// The two maximizers `(J_n / 2^n, 1 - J_n / 2^n)` of the level-`n` partial
/// sum of the all-plus function.
pub fn maximizers(n: u32) -> (DyadicRational, DyadicRational) {
    let j = jacobsthal(n);
    let other = (BigInt::from(1) << n) - &j;
    (DyadicRational::new(j, n), DyadicRational::new(other, n))
}

/// `M_n = (2 + sqrt 2 + (-1)^(n+1) 2^-n (sqrt 2 - 1)) / 3 - 2^(-n/2)`.
pub fn max_value(n: u32) -> QuadValue {
    let sign = if n.is_multiple_of(2) { -1 } else { 1 };
    let correction = QuadValue::new(rational(-sign, 1), rational(sign, 1)) * QuadValue::pow2_half(-2 * n as i64);
    let third = QuadValue::from_ratio(1, 3);
    (consts::tail_factor() + correction) * third - QuadValue::pow2_half(-(n as i64))
}

/// Exact extrema of a function over `{j / 2^N}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremaReport {
    pub level: u32,
    pub max: QuadValue,
    pub argmax: Vec<DyadicRational>,
    pub min: QuadValue,
    pub argmin: Vec<DyadicRational>,
    pub oscillation: QuadValue,
}

#[derive(Clone)]
struct Extremum {
    value: ScaledQuad,
    at: Vec<u64>,
}

impl Extremum {
    fn merge(self, other: Extremum, want: Ordering) -> Extremum {
        if self.at.is_empty() {
            return other;
        }
        if other.at.is_empty() {
            return self;
        }
        match other.value.cmp_value(self.value) {
            Ordering::Equal => {
                let mut at = self.at;
                at.extend(other.at);
                Extremum { value: self.value, at }
            }
            ord if ord == want => other,
            _ => self,
        }
    }

    fn offer(&mut self, v: ScaledQuad, j: u64, want: Ordering) {
        if self.at.is_empty() {
            self.value = v;
            self.at.push(j);
            return;
        }
        match v.cmp_value(self.value) {
            Ordering::Equal => self.at.push(j),
            ord if ord == want => {
                self.value = v;
                self.at.clear();
                self.at.push(j);
            }
            _ => {}
        }
    }
}

#[derive(Clone)]
struct Scan {
    max: Extremum,
    min: Extremum,
}

impl Scan {
    fn empty() -> Scan {
        let e = Extremum {
            value: ScaledQuad::ZERO,
            at: Vec::new(),
        };
        Scan { max: e.clone(), min: e }
    }
}

/// Exact scan of `x(j / 2^N)` for `j = 0..=2^N`. Ties are kept in increasing
/// order of `j`.
pub fn grid_extrema(x: &TakagiFunction, level: u32) -> Result<ExtremaReport> {
    grid_extrema_with(x, level, Execution::default())
}

pub fn grid_extrema_with(x: &TakagiFunction, level: u32, exec: Execution) -> Result<ExtremaReport> {
    let scheme = x.scheme();
    check_grid_level(scheme, level)?;
    let scan = par::map_reduce(
        exec,
        0..(1u64 << level) + 1,
        CHUNK,
        Scan::empty(),
        |range| {
            let mut s = Scan::empty();
            for j in range {
                let v = scaled_value(scheme, level, j);
                s.max.offer(v, j, Ordering::Greater);
                s.min.offer(v, j, Ordering::Less);
            }
            s
        },
        |a, b| Scan {
            max: a.max.merge(b.max, Ordering::Greater),
            min: a.min.merge(b.min, Ordering::Less),
        },
    );
    let points = |e: &Extremum| e.at.iter().map(|&j| DyadicRational::grid(j, level)).collect();
    let max = scan.max.value.to_quad(level);
    let min = scan.min.value.to_quad(level);
    Ok(ExtremaReport {
        level,
        argmax: points(&scan.max),
        argmin: points(&scan.min),
        oscillation: &max - &min,
        max,
        min,
    })
}

/// `max - min` over the grid of `level`.
pub fn grid_oscillation(x: &TakagiFunction, level: u32) -> Result<QuadValue> {
    Ok(grid_extrema(x, level)?.oscillation)
}
