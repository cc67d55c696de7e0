//! The modulus of continuity
//! `ω(h) = (1 + 1/sqrt 2) h 2^(ν/2) + (sqrt 8 + 2)/3 * 2^(-ν/2)`, `ν = ⌊-log2 h⌋`,
//! exact increment scans, and the witness sequences attaining it.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::Serialize;

use crate::error::{Result, TakagiError};
use crate::exact::{format_rational, pow2, rational, DyadicRational, QuadValue, Rational};
use crate::grid::{check_grid_level, scaled_value, GridPath, ScaledQuad};
use crate::par::{self, Execution, CHUNK};
use crate::table::{rational_columns, serialize_rational, time_columns, value_columns, VALUE_HEADER};
use crate::takagi::TakagiFunction;
use crate::MAX_LEVEL;

/// Digits of the ratio columns.
pub const RATIO_DIGITS: usize = 8;

fn check_step(h: &Rational) -> Result<()> {
    if !h.is_positive() || *h > Rational::one() {
        Err(TakagiError::InvalidStep(format_rational(h)))
    } else {
        Ok(())
    }
}

/// `ν(h)`: the `n` with `2^-(n+1) < h <= 2^-n`, found by exact comparison.
pub fn nu(h: &Rational) -> Result<u32> {
    check_step(h)?;
    // bit lengths give the answer up to one
    let guess = h.denom().bits() as i64 - h.numer().bits() as i64;
    let mut n = guess.max(0);
    while pow2(-n) < *h {
        n -= 1;
    }
    while pow2(-(n + 1)) >= *h {
        n += 1;
    }
    Ok(n as u32)
}

/// `ω(h)` exactly in `Q(sqrt 2)`.
pub fn omega(h: &Rational) -> Result<QuadValue> {
    let v = nu(h)? as i64;
    let linear = QuadValue::new(Rational::one(), rational(1, 2)) * QuadValue::pow2_half(v);
    let constant = QuadValue::new(rational(2, 3), rational(2, 3)) * QuadValue::pow2_half(-v);
    Ok(linear.scale(h) + constant)
}

/// `|increment| <= 5 sqrt h`, decided by comparing squares.
pub fn within_holder_cap(increment: &QuadValue, h: &Rational) -> bool {
    increment.square() <= QuadValue::from_rational(h * rational(25, 1))
}

/// Largest increment of a function over grid pairs `(t, t + h)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusReport {
    pub level: u32,
    pub h: DyadicRational,
    pub nu: u32,
    pub omega: QuadValue,
    pub scan_max: QuadValue,
    /// `scan_max / ω(h)`.
    pub ratio_decimal: String,
    /// Smallest `t` attaining `scan_max`.
    pub witness_t: DyadicRational,
}

fn report(level: u32, d: u64, best: ScaledQuad, at: u64) -> Result<ModulusReport> {
    let h = DyadicRational::grid(d, level);
    let hr = h.to_rational();
    let om = omega(&hr)?;
    let scan_max = best.to_quad(level);
    let ratio = scan_max.checked_div(&om).expect("omega is positive");
    Ok(ModulusReport {
        level,
        nu: nu(&hr)?,
        h,
        omega: om,
        ratio_decimal: ratio.to_decimal(RATIO_DIGITS),
        scan_max,
        witness_t: DyadicRational::grid(at, level),
    })
}

fn better(candidate: (ScaledQuad, u64), current: (ScaledQuad, u64)) -> (ScaledQuad, u64) {
    match candidate.0.cmp_value(current.0) {
        Ordering::Greater => candidate,
        Ordering::Equal if candidate.1 < current.1 => candidate,
        _ => current,
    }
}

fn step_index(level: u32, h: &DyadicRational) -> Result<u64> {
    let d = h.unit_grid_index(level)?;
    if d == 0 {
        return Err(TakagiError::InvalidStep(h.to_string()));
    }
    Ok(d)
}

/// Exact `max_t |x(t + h) - x(t)|` over `t ∈ {i / 2^N}` with `t + h <= 1`.
pub fn modulus_scan(x: &TakagiFunction, level: u32, h: &DyadicRational) -> Result<ModulusReport> {
    modulus_scan_with(x, level, h, Execution::default())
}

pub fn modulus_scan_with(x: &TakagiFunction, level: u32, h: &DyadicRational, exec: Execution) -> Result<ModulusReport> {
    let scheme = x.scheme();
    check_grid_level(scheme, level)?;
    let d = step_index(level, h)?;
    let last = (1u64 << level) - d;
    let (best, at) = par::map_reduce(
        exec,
        0..last + 1,
        CHUNK,
        (ScaledQuad::ZERO, u64::MAX),
        |range| {
            let mut best = (ScaledQuad::ZERO, u64::MAX);
            for i in range {
                let inc = (scaled_value(scheme, level, i + d) - scaled_value(scheme, level, i)).abs();
                best = better((inc, i), best);
            }
            best
        },
        better,
    );
    report(level, d, best, at)
}

/// [`modulus_scan`] for every grid step `h = d / 2^N`, `d = 1..=2^N`.
pub fn modulus_scan_all(x: &TakagiFunction, level: u32, exec: Execution) -> Result<Vec<ModulusReport>> {
    let path = GridPath::build(x.scheme(), level, exec)?;
    let v = path.scaled();
    let best = par::collect(exec, 1..(1u64 << level) + 1, |d| {
        let d = d as usize;
        let mut best = (ScaledQuad::ZERO, u64::MAX);
        for i in 0..v.len() - d {
            best = better(((v[i + d] - v[i]).abs(), i as u64), best);
        }
        best
    });
    best.into_iter()
        .enumerate()
        .map(|(i, (b, at))| report(level, i as u64 + 1, b, at))
        .collect()
}

pub fn modulus_csv(kind: &str, reports: &[ModulusReport]) -> String {
    let mut out = format!("kind,level,t_num,t_den,{VALUE_HEADER},omega_decimal,ratio_decimal,witness_t_num,witness_t_den\n");
    for r in reports {
        let _ = writeln!(
            out,
            "{kind},{},{},{},{},{},{}",
            r.level,
            time_columns(&r.h),
            value_columns(&r.scan_max),
            r.omega.to_decimal(crate::exact::DECIMAL_DIGITS),
            r.ratio_decimal,
            time_columns(&r.witness_t)
        );
    }
    out
}

/// Which witness sequence to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessKind {
    /// All-plus function at `t = 0`; the increment is `ω(h_n) - (1 + sqrt 2) h_n`.
    PartA,
    /// Negated half-split function at `t_n = 1/2 - 2^-n / 3`; the increment is
    /// `sqrt 2 ω(h_n) - (sqrt 2 + 2) h_n`.
    PartB,
}

impl WitnessKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WitnessKind::PartA => "part_a",
            WitnessKind::PartB => "part_b",
        }
    }
}

impl FromStr for WitnessKind {
    type Err = TakagiError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "part_a" | "a" => Ok(WitnessKind::PartA),
            "part_b" | "b" => Ok(WitnessKind::PartB),
            _ => Err(TakagiError::Parse(format!("unknown witness kind {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessRow {
    pub kind: WitnessKind,
    pub n: u32,
    #[serde(serialize_with = "serialize_rational")]
    pub t: Rational,
    /// `h_n = (2/3) 2^-n`.
    #[serde(serialize_with = "serialize_rational")]
    pub h: Rational,
    pub increment: QuadValue,
    pub closed_form: QuadValue,
    pub omega: QuadValue,
    /// `increment / ω(h_n)`.
    pub ratio_decimal: String,
}

impl WitnessRow {
    /// The exact increment equals the closed form.
    pub fn identity_holds(&self) -> bool {
        self.increment == self.closed_form
    }
}

/// Exact increments along the witness sequence for `n` in `range`.
pub fn witness_ratios(kind: WitnessKind, range: RangeInclusive<u32>) -> Result<Vec<WitnessRow>> {
    if *range.start() == 0 || *range.end() >= MAX_LEVEL - 1 {
        return Err(TakagiError::InvalidArgument(format!(
            "witness levels must lie in 1..={}",
            MAX_LEVEL - 2
        )));
    }
    range.map(|n| witness_row(kind, n)).collect()
}

fn witness_row(kind: WitnessKind, n: u32) -> Result<WitnessRow> {
    let third = Rational::new(BigInt::one(), BigInt::from(3) << n);
    let h = &third * rational(2, 1);
    let om = omega(&h)?;
    let sqrt2 = QuadValue::sqrt2();
    let (t, increment, closed_form) = match kind {
        WitnessKind::PartA => {
            let hat = TakagiFunction::hat();
            let t = Rational::from_integer(BigInt::from(0));
            let inc = hat.eval_thirds(&h)? - hat.eval_dyadic(&DyadicRational::zero())?;
            let closed = &om - (QuadValue::one() + &sqrt2).scale(&h);
            (t, inc, closed)
        }
        WitnessKind::PartB => {
            let low = TakagiFunction::lower_star();
            let t = rational(1, 2) - &third;
            let inc = low.eval_thirds(&(&t + &h))? - low.eval_thirds(&t)?;
            let closed = &sqrt2 * &om - (&sqrt2 + QuadValue::from(2)).scale(&h);
            (t, inc, closed)
        }
    };
    let ratio = increment.checked_div(&om).expect("omega is positive");
    Ok(WitnessRow {
        kind,
        n,
        t,
        h,
        ratio_decimal: ratio.to_decimal(RATIO_DIGITS),
        increment,
        closed_form,
        omega: om,
    })
}

pub fn witness_csv(rows: &[WitnessRow]) -> String {
    let mut out = format!("kind,level,t_num,t_den,{VALUE_HEADER},h_num,h_den,ratio_decimal\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.kind.as_str(),
            r.n,
            rational_columns(&r.t),
            value_columns(&r.increment),
            rational_columns(&r.h),
            r.ratio_decimal
        );
    }
    out
}
