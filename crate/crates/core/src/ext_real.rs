//! Non-negative extended reals `[0, +∞]`.
//!
//! Arithmetic follows the usual measure-theoretic conventions rather than
//! IEEE 754: `0·∞ = 0`, `∞/∞ = 0` and `0/0 = 0`. Every product, quotient and
//! power taken while assembling a condition constant goes through this type so
//! those identities hold on every code path.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, Mul, MulAssign};

/// A value in `[0, +∞]`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct ExtReal(f64);

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal(0.0);
    pub const ONE: ExtReal = ExtReal(1.0);
    pub const INFINITY: ExtReal = ExtReal(f64::INFINITY);

    /// Wraps a float. Negative inputs and NaN are rejected with `None`.
    pub fn new(value: f64) -> Option<Self> {
        if value.is_nan() || value < 0.0 {
            None
        } else {
            Some(ExtReal(value))
        }
    }

    /// Wraps a float, clamping negative round-off to zero.
    ///
    /// Panics on NaN, which always indicates a bug upstream.
    pub fn from_f64(value: f64) -> Self {
        assert!(!value.is_nan(), "ExtReal from NaN");
        ExtReal(value.max(0.0))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    pub fn is_infinite(self) -> bool {
        self.0.is_infinite()
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0.0
    }

    /// `self^e` with `0^e = 0` and `∞^e = ∞` for `e > 0`, the reciprocals for
    /// `e < 0`, and `x^0 = 1` for every `x` (including `0` and `∞`).
    pub fn powf(self, e: f64) -> Self {
        if e == 0.0 {
            return ExtReal::ONE;
        }
        match (self.0 == 0.0, self.0.is_infinite(), e > 0.0) {
            (true, _, true) => ExtReal::ZERO,
            (true, _, false) => ExtReal::INFINITY,
            (_, true, true) => ExtReal::INFINITY,
            (_, true, false) => ExtReal::ZERO,
            _ => ExtReal(self.0.powf(e)),
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: Self) -> Self {
        if self.0 <= other.0 {
            self
        } else {
            other
        }
    }

    /// Relative distance `|a - b| / max(|a|, |b|)`; zero when both are equal
    /// (including both infinite), infinite when exactly one is infinite.
    pub fn rel_diff(self, other: Self) -> f64 {
        if self == other {
            return 0.0;
        }
        if self.is_infinite() || other.is_infinite() {
            return f64::INFINITY;
        }
        (self.0 - other.0).abs() / self.0.max(other.0)
    }
}

/// `a·b` on `[0, ∞]` with `0·∞ = 0`.
pub fn mul0(a: f64, b: f64) -> f64 {
    (ExtReal::from_f64(a) * ExtReal::from_f64(b)).get()
}

/// `a^e` on `[0, ∞]` with the [`ExtReal::powf`] conventions.
pub fn pow0(a: f64, e: f64) -> f64 {
    ExtReal::from_f64(a).powf(e).get()
}

/// `a/b` on `[0, ∞]` with `0/0 = ∞/∞ = 0`.
pub fn div0(a: f64, b: f64) -> f64 {
    (ExtReal::from_f64(a) / ExtReal::from_f64(b)).get()
}

impl Eq for ExtReal {}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: Self) -> Self {
        ExtReal(self.0 + rhs.0)
    }
}

impl AddAssign for ExtReal {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Mul for ExtReal {
    type Output = ExtReal;
    fn mul(self, rhs: Self) -> Self {
        if self.0 == 0.0 || rhs.0 == 0.0 {
            ExtReal::ZERO
        } else {
            ExtReal(self.0 * rhs.0)
        }
    }
}

impl MulAssign for ExtReal {
    fn mul_assign(&mut self, rhs: Self) {
        *self = *self * rhs;
    }
}

impl Div for ExtReal {
    type Output = ExtReal;
    fn div(self, rhs: Self) -> Self {
        match (self.0 == 0.0, self.0.is_infinite(), rhs.0 == 0.0, rhs.0.is_infinite()) {
            (true, _, _, _) => ExtReal::ZERO,
            (_, true, _, true) => ExtReal::ZERO,
            (_, _, true, _) => ExtReal::INFINITY,
            _ => ExtReal(self.0 / rhs.0),
        }
    }
}

impl Sum for ExtReal {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExtReal::ZERO, Add::add)
    }
}

impl Product for ExtReal {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(ExtReal::ONE, Mul::mul)
    }
}

impl From<ExtReal> for f64 {
    fn from(x: ExtReal) -> f64 {
        x.0
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{:.3e}", self.0)
        }
    }
}
