//! Symbolic tail behaviour `f(t) ~ t^exp |ln t|^log` near `0` and `∞`.
//!
//! Every divergence decision in the crate is made from these exponents, never
//! from truncated quadrature. An exponent of `+∞` at zero (or `-∞` at
//! infinity) encodes a function that vanishes identically near that end.

/// Tolerance for exponent comparisons.
pub const TAIL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tail {
    pub exp: f64,
    pub log: f64,
}

impl Tail {
    pub const CONST: Tail = Tail { exp: 0.0, log: 0.0 };

    pub fn power(exp: f64) -> Self {
        Tail { exp, log: 0.0 }
    }

    /// Identically zero near `0`.
    pub fn vanishing_at_zero() -> Self {
        Tail::power(f64::INFINITY)
    }

    /// Identically zero near `∞`.
    pub fn vanishing_at_inf() -> Self {
        Tail::power(f64::NEG_INFINITY)
    }

    /// Tail of a product near the end where `vanish` (`+∞` at zero, `-∞` at
    /// infinity) encodes identical vanishing; `0·∞ = 0` lets it win.
    fn mul_with(self, other: Tail, vanish: f64) -> Tail {
        let exp = self.exp + other.exp;
        Tail { exp: if exp.is_nan() { vanish } else { exp }, log: self.log + other.log }
    }

    /// Tail of a product near zero.
    pub fn mul_zero(self, other: Tail) -> Tail {
        self.mul_with(other, f64::INFINITY)
    }

    /// Tail of a product near infinity.
    pub fn mul_inf(self, other: Tail) -> Tail {
        self.mul_with(other, f64::NEG_INFINITY)
    }

    /// Tail of `f^k`.
    pub fn powf(self, k: f64) -> Tail {
        if k == 0.0 {
            return Tail::CONST;
        }
        Tail { exp: self.exp * k, log: self.log * k }
    }

    /// Dominant tail of a sum near zero (the faster-growing term).
    pub fn sum_at_zero(self, other: Tail) -> Tail {
        if Self::near(self.exp, other.exp) {
            if self.log >= other.log {
                self
            } else {
                other
            }
        } else if self.exp < other.exp {
            self
        } else {
            other
        }
    }

    /// Dominant tail of a sum near infinity.
    pub fn sum_at_inf(self, other: Tail) -> Tail {
        if Self::near(self.exp, other.exp) {
            if self.log >= other.log {
                self
            } else {
                other
            }
        } else if self.exp > other.exp {
            self
        } else {
            other
        }
    }

    fn near(x: f64, target: f64) -> bool {
        (x - target).abs() <= TAIL_TOL
    }

    /// `f → ∞` as `t → 0`.
    pub fn blows_up_at_zero(self) -> bool {
        self.exp < -TAIL_TOL || (Self::near(self.exp, 0.0) && self.log > TAIL_TOL)
    }

    /// `f → ∞` as `t → ∞`.
    pub fn blows_up_at_inf(self) -> bool {
        self.exp > TAIL_TOL || (Self::near(self.exp, 0.0) && self.log > TAIL_TOL)
    }

    /// `f → 0` as `t → 0`.
    pub fn vanishes_at_zero(self) -> bool {
        self.exp > TAIL_TOL || (Self::near(self.exp, 0.0) && self.log < -TAIL_TOL)
    }

    /// `f → 0` as `t → ∞`.
    pub fn vanishes_at_inf(self) -> bool {
        self.exp < -TAIL_TOL || (Self::near(self.exp, 0.0) && self.log < -TAIL_TOL)
    }

    /// `∫_0 f < ∞`.
    pub fn integrable_at_zero(self) -> bool {
        self.exp > -1.0 + TAIL_TOL || (Self::near(self.exp, -1.0) && self.log < -1.0 - TAIL_TOL)
    }

    /// `∫^∞ f < ∞`.
    pub fn integrable_at_inf(self) -> bool {
        self.exp < -1.0 - TAIL_TOL || (Self::near(self.exp, -1.0) && self.log < -1.0 - TAIL_TOL)
    }

    /// `∫_0^{t0} f` for the tail pinned by `f(t0) = y`, with `t0 < 1`.
    pub fn integral_to(self, t0: f64, y: f64) -> f64 {
        if y == 0.0 || self.exp == f64::INFINITY {
            return 0.0;
        }
        if !self.integrable_at_zero() || y.is_infinite() {
            return f64::INFINITY;
        }
        if Self::near(self.exp, -1.0) {
            y * t0 * t0.ln().abs() / (-self.log - 1.0)
        } else {
            y * t0 / (self.exp + 1.0)
        }
    }

    /// `∫_{t1}^∞ f` for the tail pinned by `f(t1) = y`, with `t1 > 1`.
    pub fn integral_from(self, t1: f64, y: f64) -> f64 {
        if y == 0.0 || self.exp == f64::NEG_INFINITY {
            return 0.0;
        }
        if !self.integrable_at_inf() || y.is_infinite() {
            return f64::INFINITY;
        }
        if Self::near(self.exp, -1.0) {
            y * t1 * t1.ln().abs() / (-self.log - 1.0)
        } else {
            y * t1 / (-self.exp - 1.0)
        }
    }
}

/// Tail behaviour at both ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tails {
    pub zero: Tail,
    pub inf: Tail,
}

impl Tails {
    pub const CONST: Tails = Tails { zero: Tail::CONST, inf: Tail::CONST };

    pub fn new(zero: Tail, inf: Tail) -> Self {
        Tails { zero, inf }
    }

    pub fn power(e0: f64, einf: f64) -> Self {
        Tails { zero: Tail::power(e0), inf: Tail::power(einf) }
    }

    pub fn mul(self, other: Tails) -> Tails {
        Tails {
            zero: self.zero.mul_with(other.zero, f64::INFINITY),
            inf: self.inf.mul_with(other.inf, f64::NEG_INFINITY),
        }
    }

    pub fn powf(self, k: f64) -> Tails {
        Tails { zero: self.zero.powf(k), inf: self.inf.powf(k) }
    }

    pub fn sum(self, other: Tails) -> Tails {
        Tails { zero: self.zero.sum_at_zero(other.zero), inf: self.inf.sum_at_inf(other.inf) }
    }

    /// Tails of `t ↦ ∫_0^t f` given tails of `f` (assumed integrable at 0).
    pub fn primitive_from_zero(self) -> Tails {
        let zero = Tail { exp: self.zero.exp + 1.0, log: self.zero.log };
        let inf = if self.inf.integrable_at_inf() {
            Tail::CONST
        } else if Tail::near(self.inf.exp, -1.0) {
            Tail { exp: 0.0, log: self.inf.log + 1.0 }
        } else {
            Tail { exp: self.inf.exp + 1.0, log: self.inf.log }
        };
        Tails { zero, inf }
    }

    /// Tails of `t ↦ ∫_t^∞ f` given tails of `f` (assumed integrable at ∞).
    pub fn primitive_to_inf(self) -> Tails {
        let inf = Tail { exp: self.inf.exp + 1.0, log: self.inf.log };
        let zero = if self.zero.integrable_at_zero() {
            Tail::CONST
        } else if Tail::near(self.zero.exp, -1.0) {
            Tail { exp: 0.0, log: self.zero.log + 1.0 }
        } else {
            Tail { exp: self.zero.exp + 1.0, log: self.zero.log }
        };
        Tails { zero, inf }
    }
}
