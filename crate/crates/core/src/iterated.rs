//! Conditions `I₁ … I₅` for the iterated inequality
//!
//! `(∫ (1/U(t) ∫_0^t (∫_{|x|>y} h)^p u(y) dy)^{q/p} dμ(t))^{1/q} ≤ c ‖h‖_{θ,v}`,
//!
//! assembled from the fundamental function `φ`, the sup layer
//! `S(x) = sup_t 𝒰(t,x)^{1/p} V_θ(t)`, the Stieltjes layer
//! `J(x) = (∫ 𝒰(t,x)^{r/p} d(-V_θ(t-)^r))^{1/r}` and, for `θ = ∞`,
//! `K(x) = ∫ 𝒰(t,x) d(-V_∞(t)^p)`.

use std::fmt;

use rayon::prelude::*;

use crate::envelope::{MonotoneEnvelope, Sampled};
use crate::error::{Error, Result};
use crate::exponents::recip;
use crate::ext_real::{mul0, pow0, ExtReal};
use crate::grid::Grid;
use crate::power::{sup_ratio, PowerLaw, BALANCE_TOL};
use crate::special::beta;
use crate::stieltjes::{
    check_nondegenerate, fundamental_function, integrate_against, kernel_sampled, BorelMeasure, CompiledMeasure,
    NondegVerdict, Orientation,
};
use crate::tail::Tails;
use crate::weights::cal_u;

/// Exponents `(p, q, θ)` of the iterated inequality with `ρ` and `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IteratedExponents {
    pub p: f64,
    pub q: f64,
    pub theta: f64,
    /// `1/ρ = (1/q - 1/θ)₊`; `∞` when `θ ≤ q`.
    pub rho: f64,
    /// `1/r = 1/p - 1/θ` when `p < θ`.
    pub r: Option<f64>,
}

impl IteratedExponents {
    pub fn new(p: f64, q: f64, theta: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Domain(format!("p = {p} must lie in (0, inf)")));
        }
        if !(q > 0.0 && q.is_finite()) {
            return Err(Error::Domain(format!("q = {q} must lie in (0, inf)")));
        }
        if theta.is_nan() || theta < 1.0 {
            return Err(Error::Domain(format!("theta = {theta} must lie in [1, inf]")));
        }
        let g = (recip(q) - recip(theta)).max(0.0);
        let rho = if g == 0.0 { f64::INFINITY } else { 1.0 / g };
        let r = (p < theta).then(|| 1.0 / (recip(p) - recip(theta)));
        Ok(IteratedExponents { p, q, theta, rho, r })
    }

    pub fn case(&self) -> IteratedCase {
        let (p, q, t) = (self.p, self.q, self.theta);
        if t.is_infinite() {
            IteratedCase::I5
        } else if t <= p.min(q) {
            IteratedCase::I1
        } else if q < t && t <= p {
            // θ = p > q is covered by neither half-open range as printed; it
            // is assigned to the sup-layer case with the ρ-integral.
            IteratedCase::I2
        } else if p < t && t <= q {
            IteratedCase::I3
        } else {
            IteratedCase::I4
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IteratedCase {
    I1,
    I2,
    I3,
    I4,
    I5,
}

impl IteratedCase {
    pub const ALL: [IteratedCase; 5] = [IteratedCase::I1, IteratedCase::I2, IteratedCase::I3, IteratedCase::I4, IteratedCase::I5];

    pub fn as_str(self) -> &'static str {
        match self {
            IteratedCase::I1 => "I1",
            IteratedCase::I2 => "I2",
            IteratedCase::I3 => "I3",
            IteratedCase::I4 => "I4",
            IteratedCase::I5 => "I5",
        }
    }

    pub fn index(self) -> usize {
        self as usize + 1
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i.wrapping_sub(1)).copied()
    }
}

impl fmt::Display for IteratedCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Hypotheses checked before a condition value is trusted.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Preconditions {
    /// `V(t) < ∞` for `t > 0`.
    pub v_finite: Option<bool>,
    /// `lim_{t→∞} V(t) = 0`.
    pub lim_v_zero: Option<bool>,
    pub nondegenerate: Option<NondegVerdict>,
    pub admissible: Option<bool>,
}

impl Preconditions {
    pub fn ok(&self) -> bool {
        self.v_finite != Some(false)
            && self.lim_v_zero != Some(false)
            && self.admissible != Some(false)
            && self.nondegenerate.is_none_or(|v| v == NondegVerdict::Ok)
    }

    pub fn describe(&self) -> String {
        let mut out = Vec::new();
        if self.v_finite == Some(false) {
            out.push("tail norm V is infinite".to_string());
        }
        if self.lim_v_zero == Some(false) {
            out.push("tail norm V does not vanish at infinity".to_string());
        }
        if self.admissible == Some(false) {
            out.push("U is not admissible".to_string());
        }
        if let Some(v) = self.nondegenerate {
            if v != NondegVerdict::Ok {
                out.push(format!("measure is degenerate ({})", v.as_str()));
            }
        }
        out.join("; ")
    }
}

/// A condition value with its named factors.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub value: ExtReal,
    pub factors: Vec<(String, ExtReal)>,
    pub preconditions: Preconditions,
}

/// `b(0+) = 0`, `b(∞) = ∞` and strictly increasing on the samples.
pub fn is_admissible(b: &Sampled) -> bool {
    b.tails.zero.vanishes_at_zero()
        && b.tails.inf.blows_up_at_inf()
        && b.vals.iter().all(|v| v.is_finite())
        && b.vals.windows(2).all(|w| w[1] > w[0])
}

/// `S(x) = sup_t 𝒰(t,x)^a V(t)` (including left limits of `V`) at every
/// fine point.
///
/// `log 𝒰(t,x)` is supermodular in `(log U(x), log U(t))`, so the smallest
/// maximizing candidate is nondecreasing in `x` and a divide-and-conquer
/// over rows needs `O(F log F)` evaluations.
pub fn sup_layer(big_u: &Sampled, a: f64, v: &MonotoneEnvelope) -> Sampled {
    let vt = &v.f;
    let blow = big_u.tails.powf(a).mul(vt.tails).zero.blows_up_at_zero() && vt.vals[0] > 0.0;
    let tails = Tails::new(
        if vt.tails.zero.blows_up_at_zero() { vt.tails.zero } else { Tails::CONST.zero },
        vt.tails.inf.sum_at_inf(big_u.tails.inf.powf(-a)),
    );
    if blow || vt.vals.iter().any(|x| x.is_infinite()) {
        return Sampled::new(vec![f64::INFINITY; vt.vals.len()], f64::INFINITY, tails);
    }
    let mut cands: Vec<(f64, f64)> = Vec::with_capacity(vt.vals.len() + v.jumps.len());
    let mut jumps = v.jumps.iter().peekable();
    for (i, (&ut, &val)) in big_u.vals.iter().zip(&vt.vals).enumerate() {
        if let Some(&&(j, left)) = jumps.peek() {
            if j == i {
                cands.push((ut, left));
                jumps.next();
            }
        }
        cands.push((ut, val));
    }
    let eval = |ux: f64, c: (f64, f64)| mul0(pow0(cal_u(c.0, ux), a), c.1);
    let xs = &big_u.vals;
    let mut out = vec![0.0; xs.len()];
    fn solve(
        xs: &[f64],
        out: &mut [f64],
        cands: &[(f64, f64)],
        lo: usize,
        hi: usize,
        eval: &(dyn Fn(f64, (f64, f64)) -> f64 + Sync),
    ) {
        if xs.is_empty() {
            return;
        }
        let mid = xs.len() / 2;
        let (mut best, mut arg) = (-1.0, lo);
        for (k, c) in cands.iter().enumerate().take(hi + 1).skip(lo) {
            let val = eval(xs[mid], *c);
            if val > best {
                best = val;
                arg = k;
            }
        }
        out[mid] = best;
        let (ol, or) = out.split_at_mut(mid);
        let (xl, xr) = xs.split_at(mid);
        if xs.len() > 256 {
            rayon::join(
                || solve(xl, ol, cands, lo, arg, eval),
                || solve(&xr[1..], &mut or[1..], cands, arg, hi, eval),
            );
        } else {
            solve(xl, ol, cands, lo, arg, eval);
            solve(&xr[1..], &mut or[1..], cands, arg, hi, eval);
        }
    }
    solve(xs, &mut out, &cands, 0, cands.len() - 1, &eval);
    Sampled::new(out, vt.zero, tails)
}

/// Brute-force version of [`sup_layer`] used to cross-check it.
pub fn sup_layer_naive(big_u: &Sampled, a: f64, v: &MonotoneEnvelope) -> Vec<f64> {
    big_u
        .vals
        .par_iter()
        .map(|&ux| {
            let mut best: f64 = 0.0;
            for (i, (&ut, &val)) in big_u.vals.iter().zip(&v.f.vals).enumerate() {
                let k = pow0(cal_u(ut, ux), a);
                best = best.max(mul0(k, val)).max(mul0(k, v.left_value(i)));
            }
            best
        })
        .collect()
}

/// `J(x)^r = ∫ 𝒰(t,x)^{r/p} d(-V(t-)^r)`, returned as `J`.
pub fn stieltjes_layer(grid: &Grid, big_u: &Sampled, p: f64, r: f64, v: &MonotoneEnvelope) -> Result<Sampled> {
    let m = BorelMeasure::from_stieltjes(v.clone(), r, None).compile(grid)?;
    Ok(kernel_sampled(grid, big_u, r / p, &m, Orientation::Reverse).powf(1.0 / r))
}

/// Inputs of the grid evaluation.
pub struct IteratedData<'a> {
    pub grid: &'a Grid,
    pub big_u: &'a Sampled,
    pub v: &'a MonotoneEnvelope,
    pub mu: &'a CompiledMeasure,
}

/// Preconditions of the iterated characterization on grid data.
pub fn preconditions_grid(ex: &IteratedExponents, d: &IteratedData) -> Preconditions {
    let vt = &d.v.f;
    let v_finite = vt.vals.iter().all(|x| x.is_finite()) && !vt.tails.inf.blows_up_at_inf();
    let lim_v_zero = vt.is_zero() || vt.tails.inf.vanishes_at_inf();
    Preconditions {
        v_finite: Some(v_finite),
        lim_v_zero: Some(lim_v_zero),
        nondegenerate: Some(check_nondegenerate(d.grid, d.mu, d.big_u, ex.q / ex.p)),
        admissible: Some(is_admissible(d.big_u)),
    }
}

fn rho_root(x: f64, rho: f64) -> ExtReal {
    ExtReal::from_f64(x).powf(1.0 / rho)
}

/// `I_variant` on grid data. Preconditions are reported, not enforced.
pub fn condition_i_grid(ex: &IteratedExponents, variant: IteratedCase, d: &IteratedData) -> Result<Outcome> {
    let pre = preconditions_grid(ex, d);
    let (p, q, theta, rho) = (ex.p, ex.q, ex.theta, ex.rho);
    let g = d.grid;
    if d.v.f.is_zero() {
        return Ok(Outcome { value: ExtReal::ZERO, factors: vec![], preconditions: pre });
    }
    let need_r = || ex.r.ok_or_else(|| Error::Domain(format!("variant {variant} needs p < theta")));
    let phi = || fundamental_function(g, d.mu, d.big_u, q / p);
    let (value, factors) = match variant {
        IteratedCase::I1 | IteratedCase::I2 => {
            let s = sup_layer(d.big_u, 1.0 / p, d.v);
            let phi = phi();
            if variant == IteratedCase::I1 {
                let v = phi.powf(1.0 / q).mul(&s).sup(g);
                (ExtReal::from_f64(v), vec![("sup_phi_S".into(), ExtReal::from_f64(v))])
            } else {
                let f = phi.powf(rho / theta).mul(&s.powf(rho));
                let v = rho_root(integrate_against(g, &f, d.mu), rho);
                (v, vec![])
            }
        }
        IteratedCase::I3 | IteratedCase::I4 => {
            let r = need_r()?;
            let j = stieltjes_layer(g, d.big_u, p, r, d.v)?;
            let phi = phi();
            if variant == IteratedCase::I3 {
                (ExtReal::from_f64(phi.powf(1.0 / q).mul(&j).sup(g)), vec![])
            } else {
                let f = phi.powf(rho / theta).mul(&j.powf(rho));
                (rho_root(integrate_against(g, &f, d.mu), rho), vec![])
            }
        }
        IteratedCase::I5 => {
            let m = BorelMeasure::from_stieltjes(d.v.clone(), p, None).compile(g)?;
            let k = kernel_sampled(g, d.big_u, 1.0, &m, Orientation::Reverse);
            let inner = integrate_against(g, &k.powf(q / p), d.mu);
            (ExtReal::from_f64(inner).powf(1.0 / q), vec![])
        }
    };
    Ok(Outcome { value, factors, preconditions: pre })
}

/// Power data: `U = A t^a`, `dμ = m t^{κ-1} dt`, `V = K t^{-b}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IteratedPower {
    pub big_u: PowerLaw,
    pub mu: PowerLaw,
    pub v: PowerLaw,
}

/// `I_variant` in closed form.
pub fn condition_i_power(ex: &IteratedExponents, variant: IteratedCase, d: IteratedPower) -> Result<Outcome> {
    let (p, q, theta, rho) = (ex.p, ex.q, ex.theta, ex.rho);
    let a = d.big_u.e;
    let (k, b) = (d.v.c, -d.v.e);
    let (m, kappa) = (d.mu.c, d.mu.e + 1.0);
    let s = q / p;
    let admissible = d.big_u.c > 0.0 && d.big_u.c.is_finite() && a > BALANCE_TOL;
    let nondeg = if m > 0.0 && kappa > BALANCE_TOL && kappa < a * s - BALANCE_TOL {
        NondegVerdict::Ok
    } else if m == 0.0 {
        NondegVerdict::FailsZeroTail
    } else {
        NondegVerdict::FailsFiniteness
    };
    let pre = Preconditions {
        v_finite: Some(k.is_finite()),
        lim_v_zero: Some(k == 0.0 || b > BALANCE_TOL),
        nondegenerate: Some(nondeg),
        admissible: Some(admissible),
    };
    if k == 0.0 {
        return Ok(Outcome { value: ExtReal::ZERO, factors: vec![], preconditions: pre });
    }
    if !pre.ok() {
        return Ok(Outcome { value: ExtReal::INFINITY, factors: vec![], preconditions: pre });
    }
    let phi = PowerLaw::new(m / a * beta(kappa / a, s - kappa / a), kappa);
    let sup_s = || PowerLaw::new(k * sup_ratio(1.0 / p - b / a, 1.0 / p), -b);
    let need_r = || ex.r.ok_or_else(|| Error::Domain(format!("variant {variant} needs p < theta")));
    let j = |r: f64| {
        let jr = k.powf(r) * r * b * beta(r * (1.0 / p - b / a), r * b / a) / a;
        PowerLaw::new(pow0(jr, 1.0 / r), -b)
    };
    let outer = |f: PowerLaw| rho_root(f.mul(d.mu).integral(), rho);
    let value = match variant {
        IteratedCase::I1 => ExtReal::from_f64(phi.powf(1.0 / q).mul(sup_s()).sup()),
        IteratedCase::I2 => outer(phi.powf(rho / theta).mul(sup_s().powf(rho))),
        IteratedCase::I3 => ExtReal::from_f64(phi.powf(1.0 / q).mul(j(need_r()?)).sup()),
        IteratedCase::I4 => outer(phi.powf(rho / theta).mul(j(need_r()?).powf(rho))),
        IteratedCase::I5 => {
            let kk = PowerLaw::new(k.powf(p) * p * b * beta(1.0 - p * b / a, p * b / a) / a, -b * p);
            ExtReal::from_f64(kk.powf(q / p).mul(d.mu).integral()).powf(1.0 / q)
        }
    };
    let factors = vec![("phi_coef".into(), ExtReal::from_f64(phi.c))];
    Ok(Outcome { value, factors, preconditions: pre })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use crate::weights::{RadialWeight, UEnvelope, VEnvelope};

    fn setup_u(points: usize, u: &RadialWeight, v: &RadialWeight, theta: f64) -> (Grid, Sampled, MonotoneEnvelope) {
        let mut extra = vec![1.0];
        extra.extend(v.breakpoints());
        let g = Grid::new(GridSpec::with_points(points), &extra).unwrap();
        let u = MonotoneEnvelope::sample(&UEnvelope::new(u), &g).f;
        let venv = MonotoneEnvelope::sample(&VEnvelope::new(v, 1, theta), &g);
        (g, u, venv)
    }

    fn setup(points: usize, v: &RadialWeight, theta: f64) -> (Grid, Sampled, MonotoneEnvelope) {
        setup_u(points, &RadialWeight::power(1.0, 0.0), v, theta)
    }

    #[test]
    fn case_dispatch() {
        let c = |p, q, t| IteratedExponents::new(p, q, t).unwrap().case();
        assert_eq!(c(2.0, 2.0, 2.0), IteratedCase::I1);
        assert_eq!(c(3.0, 1.0, 2.0), IteratedCase::I2);
        assert_eq!(c(3.0, 1.0, 3.0), IteratedCase::I2);
        assert_eq!(c(1.0, 3.0, 2.0), IteratedCase::I3);
        assert_eq!(c(1.0, 1.0, 2.0), IteratedCase::I4);
        assert_eq!(c(1.0, 1.0, f64::INFINITY), IteratedCase::I5);
        let e = IteratedExponents::new(1.0, 2.0, 4.0).unwrap();
        assert_eq!(e.rho, 4.0);
        assert_eq!(e.r, Some(4.0 / 3.0));
        assert!(IteratedExponents::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn sup_layer_matches_brute_force() {
        let v = RadialWeight::PiecewisePower { breaks: vec![0.5, 3.0], pieces: vec![(1.0, 0.5), (2.0, 0.0), (0.5, 2.0)] };
        let (_, u, venv) = setup(256, &v, 1.0);
        assert!(!venv.jumps.is_empty());
        let fast = sup_layer(&u, 0.5, &venv);
        let slow = sup_layer_naive(&u, 0.5, &venv);
        for (a, b) in fast.vals.iter().zip(&slow) {
            assert!((a - b).abs() <= 1e-14 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn anti_discretized_examples() {
        // sup_t (t/(t+1))^{1/2} min(1, 1/t) = 2^{-1/2}, attained at t = 1.
        let v = RadialWeight::PiecewisePower { breaks: vec![1.0], pieces: vec![(1.0, 0.0), (1.0, 1.0)] };
        let (g, u, venv) = setup(1024, &v, 1.0);
        let s = sup_layer(&u, 0.5, &venv);
        let i = 4 * g.node_index(1.0).unwrap();
        assert!((s.vals[i] - 0.5f64.sqrt()).abs() < 1e-14);
        // V = 1/t: (t/(t+1))^{1/2} t^{-1} blows up at 0.
        let (_, u, venv) = setup(256, &RadialWeight::power(1.0, 1.0), 1.0);
        assert!(sup_layer(&u, 0.5, &venv).vals.iter().all(|x| x.is_infinite()));
    }

    #[test]
    fn e3_grid_matches_closed_reasoning() {
        // p = q = θ = 1, U = t, dμ = t^{-1/2} dt, V₁ = min(1, 1/t).
        let v = RadialWeight::PiecewisePower { breaks: vec![1.0], pieces: vec![(1.0, 0.0), (1.0, 1.0)] };
        let (g, u, venv) = setup(2048, &v, 1.0);
        let mu = BorelMeasure::with_density(RadialWeight::power(1.0, -0.5)).compile(&g).unwrap();
        let ex = IteratedExponents::new(1.0, 1.0, 1.0).unwrap();
        let d = IteratedData { grid: &g, big_u: &u, v: &venv, mu: &mu };
        let out = condition_i_grid(&ex, IteratedCase::I1, &d).unwrap();
        assert!(out.preconditions.ok(), "{:?}", out.preconditions);
        // Dense two-layer oracle: sup_x π√x · sup_t t/(t+x) min(1, 1/t).
        let mut best: f64 = 0.0;
        for i in 0..4000 {
            let x = 10f64.powf(-4.0 + 8.0 * i as f64 / 4000.0);
            let mut s: f64 = 0.0;
            for j in 0..4000 {
                let t = 10f64.powf(-6.0 + 12.0 * j as f64 / 4000.0);
                s = s.max(t / (t + x) * (1.0f64).min(1.0 / t));
            }
            best = best.max(std::f64::consts::PI * x.sqrt() * s);
        }
        assert!((out.value.get() / best - 1.0).abs() < 1e-3, "{} vs {best}", out.value);
    }

    #[test]
    fn power_closed_form_matches_grid() {
        // U = t², dμ = dt, V₂ = t^{-1/2}: φ^{1/q} and the layers balance for q = 2.
        let v = RadialWeight::power(1.0, 2.0);
        for (p, q, theta, variant) in [(2.0, 2.0, 2.0, IteratedCase::I1), (1.0, 2.0, 2.0, IteratedCase::I3)] {
            let (g, u, venv) = setup_u(2048, &RadialWeight::power(2.0, 1.0), &v, theta);
            let mu_w = RadialWeight::power(1.0, 0.0);
            let mu = BorelMeasure::with_density(mu_w.clone()).compile(&g).unwrap();
            let ex = IteratedExponents::new(p, q, theta).unwrap();
            let d = IteratedData { grid: &g, big_u: &u, v: &venv, mu: &mu };
            let grid_val = condition_i_grid(&ex, variant, &d).unwrap();
            let vp = crate::power::tail_norm_power(&v, 1, theta).unwrap();
            let (c, e) = mu_w.as_power().unwrap();
            let pw = IteratedPower { big_u: PowerLaw::new(1.0, 2.0), mu: PowerLaw::new(c, e), v: vp };
            let closed = condition_i_power(&ex, variant, pw).unwrap();
            assert!(closed.preconditions.ok() && grid_val.preconditions.ok(), "{closed:?} {grid_val:?}");
            let (a, b) = (grid_val.value.get(), closed.value.get());
            assert!(b.is_finite() && (a / b - 1.0).abs() < 1e-4, "{variant}: {a} vs {b}");
        }
    }
}
