//! Exact algebra of power laws `c t^e` on `(0, ∞)` with `c ∈ [0, ∞]`.
//!
//! When every weight of a scenario is a single power, every condition
//! constant is a product of power laws and Beta integrals; this module
//! evaluates those symbolically.

use crate::ext_real::{mul0, pow0};
use crate::weights::{Profile, RadialWeight, VEnvelope};

/// Two exponents closer than this are treated as equal ("balanced").
pub const BALANCE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub c: f64,
    pub e: f64,
}

impl PowerLaw {
    pub const ZERO: PowerLaw = PowerLaw { c: 0.0, e: 0.0 };
    pub const INFINITE: PowerLaw = PowerLaw { c: f64::INFINITY, e: 0.0 };

    pub fn new(c: f64, e: f64) -> Self {
        PowerLaw { c, e }
    }

    pub fn is_zero(self) -> bool {
        self.c == 0.0
    }

    pub fn value(self, t: f64) -> f64 {
        mul0(self.c, t.powf(self.e))
    }

    pub fn mul(self, o: PowerLaw) -> PowerLaw {
        PowerLaw { c: mul0(self.c, o.c), e: self.e + o.e }
    }

    pub fn scale(self, k: f64) -> PowerLaw {
        PowerLaw { c: mul0(self.c, k), e: self.e }
    }

    pub fn powf(self, k: f64) -> PowerLaw {
        PowerLaw { c: pow0(self.c, k), e: self.e * k }
    }

    /// `sup_{t>0} c t^e`.
    pub fn sup(self) -> f64 {
        if self.c == 0.0 {
            0.0
        } else if self.e.abs() <= BALANCE_TOL {
            self.c
        } else {
            f64::INFINITY
        }
    }

    /// `∫_0^∞ c t^e dt`, never finite unless zero.
    pub fn integral(self) -> f64 {
        if self.c == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// `t ↦ ∫_0^t c y^e dy`.
    pub fn primitive(self) -> PowerLaw {
        if self.c == 0.0 {
            PowerLaw::ZERO
        } else if self.e > -1.0 + BALANCE_TOL {
            PowerLaw { c: self.c / (self.e + 1.0), e: self.e + 1.0 }
        } else {
            PowerLaw::INFINITE
        }
    }
}

/// `U = ∫_0^t u` for a power weight.
pub fn primitive_power(u: &RadialWeight) -> Option<PowerLaw> {
    let (c, alpha) = u.as_power()?;
    Some(PowerLaw::new(c, alpha).primitive())
}

/// `V_θ` of a power weight (or of `v ≡ ∞`) as a power law.
pub fn tail_norm_power(v: &RadialWeight, n: usize, theta: f64) -> Option<PowerLaw> {
    if matches!(v, RadialWeight::Infinite) {
        return Some(PowerLaw::ZERO);
    }
    v.as_power()?;
    let env = VEnvelope::new(v, n, theta);
    let at_one = env.value(1.0);
    if at_one == 0.0 {
        return Some(PowerLaw::ZERO);
    }
    if at_one.is_infinite() {
        return Some(PowerLaw::INFINITE);
    }
    let e = env.tails().inf.exp;
    if e.is_infinite() {
        return Some(PowerLaw::INFINITE);
    }
    Some(PowerLaw::new(at_one, e))
}

/// The weight itself as a power law.
pub fn weight_power(w: &RadialWeight) -> Option<PowerLaw> {
    match w {
        RadialWeight::Infinite => Some(PowerLaw::INFINITE),
        _ => w.as_power().map(|(c, a)| PowerLaw::new(c, a)),
    }
}

/// `sup_{z>0} z^{α} (1+z)^{-β}` with `β ≥ 0`.
pub fn sup_ratio(alpha: f64, beta: f64) -> f64 {
    if alpha < -BALANCE_TOL || alpha > beta + BALANCE_TOL {
        return f64::INFINITY;
    }
    if alpha.abs() <= BALANCE_TOL || (alpha - beta).abs() <= BALANCE_TOL {
        return 1.0;
    }
    let z = alpha / (beta - alpha);
    z.powf(alpha) * (1.0 + z).powf(-beta)
}
