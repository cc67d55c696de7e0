//! Quadratic variation and covariation along the dyadic partitions
//! `T_n = {k 2^-n : k = 0..=2^n}`.
//!
//! For `t ∈ T_n`, `<x>^n_t` is the sum of `(x(s') - x(s))^2` over grid points
//! `s < t`, `s'` being the successor of `s`. With this convention `<x>^n_0 = 0`
//! and increments telescope to `x(t)`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Result, TakagiError};
use crate::exact::{rational, DyadicRational, QuadValue, Rational};
use crate::grid::{big_from, check_grid_level, scaled_value, ScaledQuad, WideSum, MAX_GRID_LEVEL};
use crate::par::{self, Execution, CHUNK};
use crate::scheme::CoefficientScheme;
use crate::table::{time_columns, value_columns, VALUE_HEADER};
use crate::takagi::TakagiFunction;

/// The dyadic partition of level `n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PartitionLevel {
    n: u32,
}

impl PartitionLevel {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(TakagiError::ZeroLevel);
        }
        if n > MAX_GRID_LEVEL {
            return Err(TakagiError::LevelTooLarge {
                level: n,
                max: MAX_GRID_LEVEL,
            });
        }
        Ok(PartitionLevel { n })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn mesh(self) -> DyadicRational {
        DyadicRational::grid(1, self.n)
    }

    /// Number of grid points, `2^n + 1`.
    pub fn len(self) -> u64 {
        (1u64 << self.n) + 1
    }

    pub fn is_empty(self) -> bool {
        false
    }

    pub fn point(self, k: u64) -> DyadicRational {
        DyadicRational::grid(k, self.n)
    }

    pub fn index_of(self, t: &DyadicRational) -> Result<u64> {
        t.unit_grid_index(self.n)
    }

    pub fn contains(self, t: &DyadicRational) -> bool {
        self.index_of(t).is_ok()
    }

    /// `T_self ⊂ T_finer`.
    pub fn is_refined_by(self, finer: PartitionLevel) -> bool {
        self.n <= finer.n
    }
}

/// The four increment sums of a pair of functions up to a grid point, all
/// exact.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSums {
    pub qv_x: QuadValue,
    pub qv_y: QuadValue,
    pub cov: QuadValue,
    /// `<x+y>^n_t` from the increments of `x + y`.
    pub qv_sum: QuadValue,
}

#[derive(Clone, Default)]
struct Accum {
    xx: WideSum,
    xy: WideSum,
    yy: WideSum,
    ss: WideSum,
}

impl Accum {
    fn merge(self, o: Accum) -> Accum {
        Accum {
            xx: self.xx.merge(o.xx),
            xy: self.xy.merge(o.xy),
            yy: self.yy.merge(o.yy),
            ss: self.ss.merge(o.ss),
        }
    }
}

fn add_product(sum: &mut WideSum, u: ScaledQuad, v: ScaledQuad) {
    match u.checked_mul(v) {
        Some(p) => sum.add(p),
        None => {
            let ((ua, ub), (va, vb)) = (big_from(u), big_from(v));
            sum.add_big(&ua * &va + &ub * &vb * 2, &ua * &vb + &ub * &va);
        }
    }
}

/// Increment sums over `[from, to)` of grid indices. With `y = None` only the
/// `xx` sum is formed.
fn increment_sums(
    x: &CoefficientScheme,
    y: Option<&CoefficientScheme>,
    level: u32,
    from: u64,
    to: u64,
    exec: Execution,
) -> Accum {
    par::map_reduce(
        exec,
        from..to,
        CHUNK,
        Accum::default(),
        |range| {
            let mut acc = Accum::default();
            let mut px = scaled_value(x, level, range.start);
            let mut py = y.map(|y| scaled_value(y, level, range.start));
            for i in range {
                let nx = scaled_value(x, level, i + 1);
                let dx = nx - px;
                add_product(&mut acc.xx, dx, dx);
                px = nx;
                if let (Some(y), Some(p)) = (y, py.as_mut()) {
                    let ny = scaled_value(y, level, i + 1);
                    let dy = ny - *p;
                    *p = ny;
                    add_product(&mut acc.xy, dx, dy);
                    add_product(&mut acc.yy, dy, dy);
                    add_product(&mut acc.ss, dx + dy, dx + dy);
                }
            }
            acc
        },
        Accum::merge,
    )
}

fn grid_end(x: &TakagiFunction, n: u32, t: &DyadicRational) -> Result<u64> {
    check_grid_level(x.scheme(), n)?;
    t.unit_grid_index(n)
}

/// `<x>^n_t`.
pub fn qv_approx(x: &TakagiFunction, n: u32, t: &DyadicRational) -> Result<QuadValue> {
    qv_approx_with(x, n, t, Execution::default())
}

pub fn qv_approx_with(x: &TakagiFunction, n: u32, t: &DyadicRational, exec: Execution) -> Result<QuadValue> {
    let end = grid_end(x, n, t)?;
    Ok(increment_sums(x.scheme(), None, n, 0, end, exec).xx.to_quad(2 * n))
}

/// All four sums `<x>`, `<y>`, `<x,y>` and `<x+y>` at level `n` up to `t`.
pub fn level_sums(
    x: &TakagiFunction,
    y: &TakagiFunction,
    n: u32,
    t: &DyadicRational,
    exec: Execution,
) -> Result<LevelSums> {
    let end = grid_end(x, n, t)?;
    check_grid_level(y.scheme(), n)?;
    let acc = increment_sums(x.scheme(), Some(y.scheme()), n, 0, end, exec);
    let e = 2 * n;
    Ok(LevelSums {
        qv_x: acc.xx.to_quad(e),
        qv_y: acc.yy.to_quad(e),
        cov: acc.xy.to_quad(e),
        qv_sum: acc.ss.to_quad(e),
    })
}

/// `<x,y>^n_t`.
pub fn cov_approx(x: &TakagiFunction, y: &TakagiFunction, n: u32, t: &DyadicRational) -> Result<QuadValue> {
    Ok(level_sums(x, y, n, t, Execution::default())?.cov)
}

/// `<x+y>^n_t`, summing squared increments of `x + y`.
pub fn qv_of_sum(x: &TakagiFunction, y: &TakagiFunction, n: u32, t: &DyadicRational) -> Result<QuadValue> {
    Ok(level_sums(x, y, n, t, Execution::default())?.qv_sum)
}

/// `Σ_{i < upto} (f(i+1) - f(i)) (g(i+1) - g(i))` for arbitrary exact paths
/// given by their values at grid indices.
pub fn cov_of_paths<F, G>(upto: u64, f: F, g: G) -> QuadValue
where
    F: Fn(u64) -> QuadValue,
    G: Fn(u64) -> QuadValue,
{
    let mut acc = QuadValue::zero();
    let (mut pf, mut pg) = (f(0), g(0));
    for i in 0..upto {
        let (nf, ng) = (f(i + 1), g(i + 1));
        acc += (&nf - &pf) * (&ng - &pg);
        pf = nf;
        pg = ng;
    }
    acc
}

/// What a [`QVSeries`] tabulates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    Qv,
    Covariation,
    QvOfSum,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QVRow {
    pub level: u32,
    pub t: DyadicRational,
    pub value: QuadValue,
    /// `|value - limit|` when a limit is known.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<QuadValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QVSeries {
    pub kind: SeriesKind,
    pub rows: Vec<QVRow>,
}

pub const SERIES_HEADER: &str = "level,t_num,t_den";

impl QVRow {
    fn csv_fields(&self) -> String {
        format!("{},{},{}", self.level, time_columns(&self.t), value_columns(&self.value))
    }
}

impl QVSeries {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SERIES_HEADER},{VALUE_HEADER}\n");
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.csv_fields());
        }
        out
    }
}

/// `<x>^n_t` at every `t = k * stride / 2^n`.
pub fn qv_profile(x: &TakagiFunction, n: u32, stride: u64) -> Result<QVSeries> {
    qv_profile_with(x, n, stride, Execution::default())
}

pub fn qv_profile_with(x: &TakagiFunction, n: u32, stride: u64, exec: Execution) -> Result<QVSeries> {
    check_grid_level(x.scheme(), n)?;
    let total = 1u64 << n;
    if stride == 0 || !stride.is_power_of_two() || stride > total {
        return Err(TakagiError::InvalidArgument(format!(
            "stride {stride} must be a power of two dividing 2^{n}"
        )));
    }
    let scheme = x.scheme();
    let blocks = par::collect(exec, 0..total / stride, |b| {
        increment_sums(scheme, None, n, b * stride, (b + 1) * stride, Execution::Sequential).xx
    });
    let mut rows = Vec::with_capacity(blocks.len() + 1);
    let mut running = WideSum::default();
    rows.push(QVRow {
        level: n,
        t: DyadicRational::zero(),
        value: QuadValue::zero(),
        distance: None,
    });
    for (b, block) in blocks.into_iter().enumerate() {
        running = running.merge(block);
        rows.push(QVRow {
            level: n,
            t: DyadicRational::grid((b as u64 + 1) * stride, n),
            value: running.to_quad(2 * n),
            distance: None,
        });
    }
    Ok(QVSeries { kind: SeriesKind::Qv, rows })
}

/// The four subsequences of the covariation counterexample for the all-plus
/// function and `y = Σ (-1)^m e_{m,k}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleSeries {
    pub even_qv: QVSeries,
    pub odd_qv: QVSeries,
    pub even_cov: QVSeries,
    pub odd_cov: QVSeries,
}

impl CounterexampleSeries {
    /// Limits `(4/3) t`, `(8/3) t`, `-(1/3) t`, `(1/3) t` of the four series.
    pub fn limits(t: &DyadicRational) -> [QuadValue; 4] {
        let t = t.to_rational();
        [rational(4, 3), rational(8, 3), rational(-1, 3), rational(1, 3)].map(|c| QuadValue::from_rational(c * &t))
    }

    pub fn labelled(&self) -> [(&'static str, &QVSeries); 4] {
        [
            ("even_qv_of_sum", &self.even_qv),
            ("odd_qv_of_sum", &self.odd_qv),
            ("even_cov", &self.even_cov),
            ("odd_cov", &self.odd_cov),
        ]
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("kind,{SERIES_HEADER},{VALUE_HEADER},distance_decimal\n");
        for (label, series) in self.labelled() {
            for row in &series.rows {
                let dist = row
                    .distance
                    .as_ref()
                    .map(|d| d.to_decimal(crate::exact::DECIMAL_DIGITS))
                    .unwrap_or_default();
                let _ = writeln!(out, "{label},{},{dist}", row.csv_fields());
            }
        }
        out
    }
}

/// Levels `n0..=n_max` of `<x̂+y>^n_t` and `<x̂,y>^n_t`, split by parity, where
/// `n0` is the coarsest level whose grid contains `t`.
pub fn counterexample_series(n_max: u32, t: &DyadicRational) -> Result<CounterexampleSeries> {
    counterexample_series_with(n_max, t, Execution::default())
}

pub fn counterexample_series_with(n_max: u32, t: &DyadicRational, exec: Execution) -> Result<CounterexampleSeries> {
    let hat = TakagiFunction::hat();
    let y = TakagiFunction::alternating();
    let n0 = t.exponent().max(1);
    if n_max < n0 {
        return Err(TakagiError::NotOnGrid {
            t: t.to_string(),
            level: n_max,
        });
    }
    let [lim_even_qv, lim_odd_qv, lim_even_cov, lim_odd_cov] = CounterexampleSeries::limits(t);
    let empty = |kind| QVSeries { kind, rows: Vec::new() };
    let mut out = CounterexampleSeries {
        even_qv: empty(SeriesKind::QvOfSum),
        odd_qv: empty(SeriesKind::QvOfSum),
        even_cov: empty(SeriesKind::Covariation),
        odd_cov: empty(SeriesKind::Covariation),
    };
    for n in n0..=n_max {
        let sums = level_sums(&hat, &y, n, t, exec)?;
        let row = |value: QuadValue, limit: &QuadValue| QVRow {
            level: n,
            t: t.clone(),
            distance: Some((&value - limit).abs()),
            value,
        };
        if n % 2 == 0 {
            out.even_qv.rows.push(row(sums.qv_sum, &lim_even_qv));
            out.even_cov.rows.push(row(sums.cov, &lim_even_cov));
        } else {
            out.odd_qv.rows.push(row(sums.qv_sum, &lim_odd_qv));
            out.odd_cov.rows.push(row(sums.cov, &lim_odd_cov));
        }
    }
    Ok(out)
}

/// `1 - 2^-n`, the value of `<x>^n_1` for every member of the class.
pub fn level_identity(n: u32) -> Rational {
    Rational::from_integer(1.into()) - crate::exact::pow2(-(n as i64))
}
