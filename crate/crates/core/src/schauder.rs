//! The Faber–Schauder wedge basis.
//!
//! `e_{0,0}(t) = min(t, 1 - t)^+` and `e_{m,k}(t) = 2^(-m/2) e_{0,0}(2^m t - k)`:
//! a wedge of width `2^-m` centred at `(k + 1/2) 2^-m` with height
//! `2^(-(m+2)/2)`. Wedges of one generation have disjoint supports.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::exact::{pow2, DyadicRational, QuadValue, Rational};

/// Generation `m` and translate `k` of a basis function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BasisIndex {
    pub m: u32,
    pub k: i64,
}

impl BasisIndex {
    pub fn new(m: u32, k: i64) -> Self {
        BasisIndex { m, k }
    }

    /// Left and right children in the next generation.
    pub fn children(self) -> (BasisIndex, BasisIndex) {
        (
            BasisIndex::new(self.m + 1, 2 * self.k),
            BasisIndex::new(self.m + 1, 2 * self.k + 1),
        )
    }

    /// Support `[k 2^-m, (k+1) 2^-m]`.
    pub fn support(self) -> (DyadicRational, DyadicRational) {
        (
            DyadicRational::new(self.k, self.m),
            DyadicRational::new(self.k + 1, self.m),
        )
    }
}

/// `e_∅(t) = t`, the linear element completing the basis of `C[0,1]`.
pub fn eval_linear(t: &Rational) -> Rational {
    t.clone()
}

/// `e_{0,0}(u) = min(u, 1 - u)^+`.
pub fn unit_wedge(u: &Rational) -> Rational {
    let w = std::cmp::min(u.clone(), Rational::one() - u);
    if w.is_positive() {
        w
    } else {
        Rational::zero()
    }
}

/// `e_{m,k}(t)`, defined for every real `t` and every integer `k`.
pub fn eval_e(idx: BasisIndex, t: &Rational) -> QuadValue {
    let u = t * pow2(idx.m as i64) - Rational::from_integer(BigInt::from(idx.k));
    let w = unit_wedge(&u);
    if w.is_zero() {
        return QuadValue::zero();
    }
    QuadValue::pow2_half(-(idx.m as i64)).scale(&w)
}

/// Peak location `(2k + 1) / 2^(m+1)` and height `2^(-(m+2)/2)`.
pub fn wedge_peak(idx: BasisIndex) -> (DyadicRational, QuadValue) {
    (
        DyadicRational::new(2 * idx.k + 1, idx.m + 1),
        QuadValue::pow2_half(-(idx.m as i64 + 2)),
    )
}

/// `f_{m,k} = e_{m,k} + e_{m+1,2k} + e_{m+1,2k+1}`: a wedge with both children
/// added, used when refining the all-plus partial sums.
pub fn eval_f(idx: BasisIndex, t: &Rational) -> QuadValue {
    let (left, right) = idx.children();
    eval_e(idx, t) + eval_e(left, t) + eval_e(right, t)
}
