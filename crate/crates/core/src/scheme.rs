//! Coefficient schemes `(m, k) -> ±1`.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, TakagiError};
use crate::exact::{format_rational, parse_rational, QuadValue, Rational};
use crate::MAX_LEVEL;

/// A coefficient `θ_{m,k} ∈ {-1, +1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_i8(v: i8) -> Self {
        if v < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn to_quad(self) -> QuadValue {
        QuadValue::from(self.as_i8() as i64)
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// Generations whose Bernoulli coefficients are cached as packed bits.
const CACHED_GENERATIONS: usize = 24;

/// I.i.d. coefficients with `P(θ = +1) = p_plus`, drawn from a counter-based
/// ChaCha8 stream: generation `m` is stream `m`, translate `k` is the `k`-th
/// 64-bit word. Any `(m, k)` is reachable in O(1) and the result depends only
/// on `(seed, m, k)`.
#[derive(Clone)]
pub struct BernoulliScheme {
    p_plus: Rational,
    seed: u64,
    /// `θ = +1` iff the drawn word is below `ceil(p_plus * 2^64)`.
    threshold: u128,
    base: ChaCha8Rng,
    cache: Arc<[OnceLock<Vec<u64>>; CACHED_GENERATIONS]>,
}

impl BernoulliScheme {
    pub fn new(p_plus: Rational, seed: u64) -> Result<Self> {
        if p_plus.is_negative() || p_plus > Rational::one() {
            return Err(TakagiError::InvalidArgument(format!(
                "bernoulli probability {} must lie in [0, 1]",
                format_rational(&p_plus)
            )));
        }
        let scaled = &p_plus * Rational::from_integer(BigInt::one() << 64u32);
        let threshold = scaled.ceil().to_integer().to_u128().expect("p <= 1");
        Ok(BernoulliScheme {
            p_plus,
            seed,
            threshold,
            base: ChaCha8Rng::seed_from_u64(seed),
            cache: Arc::new(std::array::from_fn(|_| OnceLock::new())),
        })
    }

    pub fn p_plus(&self) -> &Rational {
        &self.p_plus
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn word_to_sign(&self, w: u64) -> i8 {
        if (w as u128) < self.threshold {
            1
        } else {
            -1
        }
    }

    /// Direct random access into the keystream.
    pub(crate) fn draw(&self, m: u32, k: u64) -> i8 {
        let mut rng = self.base.clone();
        rng.set_stream(m as u64);
        rng.set_word_pos(2 * k as u128);
        self.word_to_sign(rng.next_u64())
    }

    fn generation_bits(&self, m: usize) -> &[u64] {
        self.cache[m].get_or_init(|| {
            let len = 1usize << m;
            let mut bits = vec![0u64; len.div_ceil(64)];
            let mut rng = self.base.clone();
            rng.set_stream(m as u64);
            rng.set_word_pos(0);
            for k in 0..len {
                if self.word_to_sign(rng.next_u64()) > 0 {
                    bits[k / 64] |= 1 << (k % 64);
                }
            }
            bits
        })
    }

    fn sign(&self, m: u32, k: u64) -> i8 {
        if (m as usize) < CACHED_GENERATIONS {
            let bits = self.generation_bits(m as usize);
            if bits[(k / 64) as usize] >> (k % 64) & 1 == 1 {
                1
            } else {
                -1
            }
        } else {
            self.draw(m, k)
        }
    }
}

impl fmt::Debug for BernoulliScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BernoulliScheme")
            .field("p_plus", &format_rational(&self.p_plus))
            .field("seed", &self.seed)
            .finish()
    }
}

impl PartialEq for BernoulliScheme {
    fn eq(&self, other: &Self) -> bool {
        self.p_plus == other.p_plus && self.seed == other.seed
    }
}

/// A finite coefficient table covering generations `0..depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitScheme {
    depth: u32,
    rows: Vec<Vec<i8>>,
    source: Option<String>,
}

impl ExplicitScheme {
    /// Builds a table from `rows[m][k]`; row `m` must have `2^m` entries of ±1.
    pub fn from_rows(rows: Vec<Vec<i8>>) -> Result<Self> {
        if rows.len() > MAX_LEVEL as usize {
            return Err(TakagiError::LevelTooLarge {
                level: rows.len() as u32,
                max: MAX_LEVEL,
            });
        }
        for (m, row) in rows.iter().enumerate() {
            if row.len() != 1 << m {
                return Err(TakagiError::Parse(format!(
                    "generation {m} has {} coefficients, expected {}",
                    row.len(),
                    1u64 << m
                )));
            }
            if row.iter().any(|&s| s != 1 && s != -1) {
                return Err(TakagiError::Parse(format!(
                    "generation {m} contains a coefficient other than +1/-1"
                )));
            }
        }
        Ok(ExplicitScheme {
            depth: rows.len() as u32,
            rows,
            source: None,
        })
    }

    /// Tabulates another scheme's first `depth` generations.
    pub fn tabulate(scheme: &CoefficientScheme, depth: u32) -> Result<Self> {
        let rows = (0..depth)
            .map(|m| {
                (0..1u64 << m)
                    .map(|k| scheme.coefficient(m, k).map(Sign::as_i8))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    /// Parses the text format: a header `depth D` followed by lines `m k s`
    /// with `s` in `{+1, -1}`. Blank lines and `#` comments are ignored. Every
    /// `(m, k)` with `m < D` must appear exactly once.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| TakagiError::Parse("empty scheme file".into()))?;
        let depth: u32 = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
            ["depth", d] => d
                .parse()
                .map_err(|_| TakagiError::Parse(format!("bad depth {d:?}")))?,
            _ => {
                return Err(TakagiError::Parse(format!(
                    "expected header `depth D`, got {header:?}"
                )))
            }
        };
        if depth > MAX_LEVEL {
            return Err(TakagiError::LevelTooLarge {
                level: depth,
                max: MAX_LEVEL,
            });
        }
        let mut rows: Vec<Vec<i8>> = (0..depth).map(|m| vec![0; 1 << m]).collect();
        for (lineno, line) in lines {
            let bad = |what: &str| TakagiError::Parse(format!("line {lineno}: {what}: {line:?}"));
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [m, k, s] = fields.as_slice() else {
                return Err(bad("expected `m k s`"));
            };
            let m: u32 = m.parse().map_err(|_| bad("bad generation"))?;
            let k: u64 = k.parse().map_err(|_| bad("bad translate"))?;
            let s: i8 = match *s {
                "+1" | "1" => 1,
                "-1" => -1,
                _ => return Err(bad("coefficient must be +1 or -1")),
            };
            if m >= depth {
                return Err(bad("generation beyond declared depth"));
            }
            if k >= 1 << m {
                return Err(bad("translate out of range"));
            }
            let slot = &mut rows[m as usize][k as usize];
            if *slot != 0 {
                return Err(bad("duplicate entry"));
            }
            *slot = s;
        }
        for (m, row) in rows.iter().enumerate() {
            if let Some(k) = row.iter().position(|&s| s == 0) {
                return Err(TakagiError::Parse(format!(
                    "missing coefficient for m = {m}, k = {k}"
                )));
            }
        }
        Self::from_rows(rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TakagiError::Io(format!("{}: {e}", path.display())))?;
        let mut scheme = Self::parse_text(&text)?;
        scheme.source = Some(path.display().to_string());
        Ok(scheme)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("depth {}\n", self.depth);
        for (m, row) in self.rows.iter().enumerate() {
            for (k, s) in row.iter().enumerate() {
                out.push_str(&format!("{m} {k} {}\n", if *s > 0 { "+1" } else { "-1" }));
            }
        }
        out
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }
}

/// A rule assigning `θ_{m,k} ∈ {-1, +1}` to every basis index.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientScheme {
    /// `θ = +1` everywhere.
    AllPlus,
    /// `θ = (-1)^m`.
    AltM,
    /// `θ = (-1)^(m+k)`.
    AltMk,
    /// `θ = (-1)^floor(m / period)`.
    Block { period: u32 },
    /// `+1` on the left half of each generation, `-1` on the right half
    /// (and `+1` for `m = 0`).
    HalfSplit,
    /// Negation of [`HalfSplit`](Self::HalfSplit).
    NegHalfSplit,
    Bernoulli(BernoulliScheme),
    Explicit(ExplicitScheme),
    /// Every coefficient of the inner scheme flipped.
    Negated(Box<CoefficientScheme>),
}

impl CoefficientScheme {
    pub fn bernoulli(p_plus: Rational, seed: u64) -> Result<Self> {
        BernoulliScheme::new(p_plus, seed).map(CoefficientScheme::Bernoulli)
    }

    pub fn negated(self) -> Self {
        match self {
            CoefficientScheme::Negated(inner) => *inner,
            other => CoefficientScheme::Negated(Box::new(other)),
        }
    }

    /// Number of generations available, `None` when unbounded.
    pub fn depth(&self) -> Option<u32> {
        match self {
            CoefficientScheme::Explicit(e) => Some(e.depth),
            CoefficientScheme::Negated(inner) => inner.depth(),
            _ => None,
        }
    }

    /// Checks that generations `0..level` can be queried.
    pub fn check_level(&self, level: u32) -> Result<()> {
        if level > MAX_LEVEL {
            return Err(TakagiError::LevelTooLarge {
                level,
                max: MAX_LEVEL,
            });
        }
        match self.depth() {
            Some(depth) if level > depth => Err(TakagiError::DepthExceeded {
                requested: level,
                depth,
            }),
            _ => Ok(()),
        }
    }

    /// `θ_{m,k}` for `0 <= k < 2^m`.
    pub fn coefficient(&self, m: u32, k: u64) -> Result<Sign> {
        self.check_level(m + 1)?;
        if k >= 1u64 << m {
            return Err(TakagiError::IndexOutOfRange { m, k: k as i128 });
        }
        Ok(Sign::from_i8(self.sign_unchecked(m, k)))
    }

    /// `θ_{m,k}` as ±1 without range checks; callers validate with
    /// [`check_level`](Self::check_level) first.
    #[inline]
    pub(crate) fn sign_unchecked(&self, m: u32, k: u64) -> i8 {
        match self {
            CoefficientScheme::AllPlus => 1,
            CoefficientScheme::AltM => parity_sign(m as u64),
            CoefficientScheme::AltMk => parity_sign(m as u64 + k),
            CoefficientScheme::Block { period } => parity_sign((m / period) as u64),
            CoefficientScheme::HalfSplit => half_split(m, k),
            CoefficientScheme::NegHalfSplit => -half_split(m, k),
            CoefficientScheme::Bernoulli(b) => b.sign(m, k),
            CoefficientScheme::Explicit(e) => e.rows[m as usize][k as usize],
            CoefficientScheme::Negated(inner) => -inner.sign_unchecked(m, k),
        }
    }

    /// Parses `name[:param[:param]]`: `all_plus`, `alt_m`, `alt_mk`,
    /// `block:P`, `half_split`, `neg_half_split`, `bernoulli:P[:SEED]`,
    /// `file:PATH` and `neg:SPEC`. A Bernoulli spec without a seed uses
    /// `default_seed`.
    pub fn parse_spec(spec: &str, default_seed: u64) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n, Some(r)),
            None => (spec, None),
        };
        let no_params = |s: Self| match rest {
            None => Ok(s),
            Some(_) => Err(TakagiError::Parse(format!("scheme {name} takes no parameters"))),
        };
        match name {
            "all_plus" => no_params(CoefficientScheme::AllPlus),
            "alt_m" => no_params(CoefficientScheme::AltM),
            "alt_mk" => no_params(CoefficientScheme::AltMk),
            "half_split" => no_params(CoefficientScheme::HalfSplit),
            "neg_half_split" => no_params(CoefficientScheme::NegHalfSplit),
            "block" => {
                let p: u32 = rest
                    .and_then(|r| r.parse().ok())
                    .filter(|&p| p > 0)
                    .ok_or_else(|| TakagiError::Parse("block needs a positive period, e.g. block:5".into()))?;
                Ok(CoefficientScheme::Block { period: p })
            }
            "bernoulli" => {
                let rest = rest.ok_or_else(|| {
                    TakagiError::Parse("bernoulli needs a probability, e.g. bernoulli:1/2:7".into())
                })?;
                let (p, seed) = match rest.split_once(':') {
                    Some((p, s)) => (
                        p,
                        s.parse::<u64>()
                            .map_err(|_| TakagiError::Parse(format!("bad seed {s:?}")))?,
                    ),
                    None => (rest, default_seed),
                };
                Self::bernoulli(parse_rational(p)?, seed)
            }
            "file" => {
                let path = rest.ok_or_else(|| TakagiError::Parse("file needs a path".into()))?;
                ExplicitScheme::load(Path::new(path)).map(CoefficientScheme::Explicit)
            }
            "neg" => {
                let inner = rest.ok_or_else(|| TakagiError::Parse("neg needs a scheme".into()))?;
                Ok(Self::parse_spec(inner, default_seed)?.negated())
            }
            other => Err(TakagiError::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

#[inline]
fn parity_sign(n: u64) -> i8 {
    if n.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

#[inline]
fn half_split(m: u32, k: u64) -> i8 {
    if m == 0 || k < 1u64 << (m - 1) {
        1
    } else {
        -1
    }
}

impl FromStr for CoefficientScheme {
    type Err = TakagiError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_spec(s, 0)
    }
}

impl fmt::Display for CoefficientScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientScheme::AllPlus => write!(f, "all_plus"),
            CoefficientScheme::AltM => write!(f, "alt_m"),
            CoefficientScheme::AltMk => write!(f, "alt_mk"),
            CoefficientScheme::Block { period } => write!(f, "block:{period}"),
            CoefficientScheme::HalfSplit => write!(f, "half_split"),
            CoefficientScheme::NegHalfSplit => write!(f, "neg_half_split"),
            CoefficientScheme::Bernoulli(b) => {
                write!(f, "bernoulli:{}:{}", format_rational(&b.p_plus), b.seed)
            }
            CoefficientScheme::Explicit(e) => match &e.source {
                Some(path) => write!(f, "file:{path}"),
                None => write!(f, "explicit(depth {})", e.depth),
            },
            CoefficientScheme::Negated(inner) => write!(f, "neg:{inner}"),
        }
    }
}

/// The named schemes used throughout the test suites and the CLI.
pub fn builtin_schemes() -> Vec<CoefficientScheme> {
    use crate::exact::rational;
    vec![
        CoefficientScheme::AllPlus,
        CoefficientScheme::AltM,
        CoefficientScheme::AltMk,
        CoefficientScheme::Block { period: 5 },
        CoefficientScheme::HalfSplit,
        CoefficientScheme::NegHalfSplit,
        CoefficientScheme::bernoulli(rational(1, 2), 1).expect("valid p"),
        CoefficientScheme::bernoulli(rational(1, 4), 42).expect("valid p"),
    ]
}

/// Fraction of `+1` coefficients among generations `0..depth`; diagnostic for
/// Bernoulli schemes.
pub fn plus_fraction(scheme: &CoefficientScheme, depth: u32) -> Result<Rational> {
    scheme.check_level(depth)?;
    let mut plus = 0u64;
    let mut total = 0u64;
    for m in 0..depth {
        for k in 0..1u64 << m {
            total += 1;
            if scheme.sign_unchecked(m, k) > 0 {
                plus += 1;
            }
        }
    }
    if total == 0 {
        return Ok(Rational::zero());
    }
    Ok(Rational::new(plus.into(), total.into()))
}
