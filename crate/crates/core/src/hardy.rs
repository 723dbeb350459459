//! Norm formulas for the linear dual-Hardy operator
//! `f ↦ ∫_{|x|>t} f(x) dx` from `L^p(v)` on `ℝⁿ` to `L^q(u)` on `(0, ∞)`.

use crate::envelope::{MonotoneEnvelope, Sampled};
use crate::error::Result;
use crate::exponents::recip;
use crate::ext_real::ExtReal;
use crate::grid::{Grid, GridSpec};
use crate::power::{primitive_power, tail_norm_power, weight_power, PowerLaw};
use crate::tail::Tails;
use crate::weights::{RadialWeight, UEnvelope, VEnvelope};

#[derive(Clone, Debug, PartialEq)]
pub struct LinearHardyProblem {
    pub u: RadialWeight,
    pub v: RadialWeight,
    pub n: usize,
    pub p: f64,
    pub q: f64,
}

/// `1/r = 1/q - 1/p`.
fn gap_exponent(q: f64, p: f64) -> f64 {
    1.0 / (recip(q) - recip(p))
}

/// Case-dispatched norm value from sampled data: `u` the outer density,
/// `big_u` its primitive and `v` the tail norm `V_p`.
pub fn dual_hardy_norm_sampled(grid: &Grid, u: &Sampled, big_u: &Sampled, v: &Sampled, p: f64, q: f64) -> ExtReal {
    if u.is_zero() || v.is_zero() {
        return ExtReal::ZERO;
    }
    let value = if q.is_infinite() {
        u.mul(v).sup(grid)
    } else if p.is_infinite() {
        u.mul(&v.powf(q)).integrate(grid).powf(1.0 / q)
    } else if p <= q {
        big_u.powf(1.0 / q).mul(v).sup(grid)
    } else {
        let r = gap_exponent(q, p);
        big_u.powf(r / p).mul(u).mul(&v.powf(r)).integrate(grid).powf(1.0 / r)
    };
    ExtReal::from_f64(value)
}

/// The same dispatch on power laws.
pub fn dual_hardy_norm_power(u: PowerLaw, big_u: PowerLaw, v: PowerLaw, p: f64, q: f64) -> ExtReal {
    if u.is_zero() || v.is_zero() {
        return ExtReal::ZERO;
    }
    let value = if q.is_infinite() {
        u.mul(v).sup()
    } else if p.is_infinite() {
        ExtReal::from_f64(u.mul(v.powf(q)).integral()).powf(1.0 / q).get()
    } else if p <= q {
        big_u.powf(1.0 / q).mul(v).sup()
    } else {
        let r = gap_exponent(q, p);
        ExtReal::from_f64(big_u.powf(r / p).mul(u).mul(v.powf(r)).integral()).powf(1.0 / r).get()
    };
    ExtReal::from_f64(value)
}

/// Primitive `∫_0^t u` of a sampled density.
pub fn primitive_sampled(grid: &Grid, u: &Sampled) -> Sampled {
    primitive_sampled_left(grid, u, None)
}

/// [`primitive_sampled`] for a density with jumps at nodes, given its left
/// limits.
pub fn primitive_sampled_left(grid: &Grid, u: &Sampled, left: Option<&Sampled>) -> Sampled {
    if !u.tails.zero.integrable_at_zero() && u.vals.iter().any(|x| *x > 0.0) {
        return Sampled::new(vec![f64::INFINITY; u.vals.len()], 0.0, Tails::CONST);
    }
    Sampled::new(grid.cumulative_left(&u.vals, left.map(|l| l.vals.as_slice()), u.tails), 0.0, u.tails.primitive_from_zero())
}

impl LinearHardyProblem {
    pub fn new(u: RadialWeight, v: RadialWeight, n: usize, p: f64, q: f64) -> Self {
        LinearHardyProblem { u, v, n, p, q }
    }

    fn closed_form(&self) -> Option<ExtReal> {
        let u = weight_power(&self.u)?;
        let big_u = primitive_power(&self.u)?;
        let v = tail_norm_power(&self.v, self.n, self.p)?;
        Some(dual_hardy_norm_power(u, big_u, v, self.p, self.q))
    }

    /// Norm value on an explicit grid.
    pub fn on_grid(&self, grid: &Grid) -> ExtReal {
        let u = Sampled::from_fn(grid, |t| self.u.value(t), 0.0, self.u.tails());
        let big_u = MonotoneEnvelope::sample(&UEnvelope::new(&self.u), grid).f;
        let v = MonotoneEnvelope::sample(&VEnvelope::new(&self.v, self.n, self.p), grid).f;
        dual_hardy_norm_sampled(grid, &u, &big_u, &v, self.p, self.q)
    }

    /// Grid containing every breakpoint of both weights.
    pub fn grid(&self, spec: GridSpec) -> Result<Grid> {
        let mut extra = self.u.breakpoints();
        extra.extend(self.v.breakpoints());
        Grid::new(spec, &extra)
    }
}

/// Value of the linear dual-Hardy condition: closed form for power weights,
/// grid evaluation otherwise.
pub fn dual_hardy_norm(prob: &LinearHardyProblem) -> Result<ExtReal> {
    if let Some(v) = prob.closed_form() {
        return Ok(v);
    }
    Ok(prob.on_grid(&prob.grid(GridSpec::default())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_examples() {
        let prob = LinearHardyProblem::new(RadialWeight::power(1.0, 1.0), RadialWeight::power(1.0, 3.0), 1, 2.0, 2.0);
        let v = dual_hardy_norm(&prob).unwrap().get();
        assert!((v - 0.5f64.sqrt()).abs() < 1e-14);
        let g = prob.grid(GridSpec::default()).unwrap();
        assert!((prob.on_grid(&g).get() - 0.5f64.sqrt()).abs() < 1e-12);

        let bad = LinearHardyProblem::new(RadialWeight::power(1.0, 1.0), RadialWeight::power(1.0, 0.0), 1, 2.0, 2.0);
        assert!(dual_hardy_norm(&bad).unwrap().is_infinite());
        let zero = LinearHardyProblem::new(RadialWeight::zero(), RadialWeight::power(1.0, 3.0), 1, 2.0, 2.0);
        assert_eq!(dual_hardy_norm(&zero).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn homogeneity() {
        // U^{1/3} V_2 = 3^{-1/3} t · t^{-1} is balanced.
        let base = LinearHardyProblem::new(RadialWeight::power(1.0, 2.0), RadialWeight::power(1.0, 3.0), 1, 2.0, 3.0);
        let v0 = dual_hardy_norm(&base).unwrap().get();
        assert!(v0.is_finite() && v0 > 0.0);
        let su = LinearHardyProblem { u: RadialWeight::power(5.0, 2.0), ..base.clone() };
        assert!((dual_hardy_norm(&su).unwrap().get() / v0 - 5f64.powf(1.0 / 3.0)).abs() < 1e-12);
        let sv = LinearHardyProblem { v: RadialWeight::power(7.0, 3.0), ..base };
        assert!((dual_hardy_norm(&sv).unwrap().get() / v0 - 7f64.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn piecewise_on_grid_matches_restricted_closed_form() {
        // u = t on (0,1), 0 beyond; v = t^3, p = 3 > q = 1: (∫ U^{r/p} u V^r)^{1/r}, r = 3/2.
        let u = RadialWeight::power(1.0, 1.0).restricted(0.0, 1.0, 0.0);
        let prob = LinearHardyProblem::new(u, RadialWeight::power(1.0, 3.0), 1, 3.0, 1.0);
        let got = dual_hardy_norm(&prob).unwrap().get();
        // V_3(t) = (2 ∫_t^∞ s^{-3/2})^{2/3} = (4 t^{-1/2})^{2/3}; integrand
        // (t²/2)^{1/2} t (4^{2/3} t^{-1/3})^{3/2} = 2^{-1/2} · 4 · t^{3/2}.
        let exact = (2f64.powf(-0.5) * 4.0 / 2.5).powf(2.0 / 3.0);
        assert!((got / exact - 1.0).abs() < 1e-8, "{got} vs {exact}");
    }
}
