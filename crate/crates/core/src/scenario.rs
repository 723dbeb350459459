//! Scenarios: exponents, weights, optional measure, form and evaluation
//! path, plus the ball/dual-ball change of variables and the envelope
//! sampling shared by the condition evaluators and the oracle.

use std::fmt;
use std::str::FromStr;

use crate::envelope::{MonotoneEnvelope, Sampled};
use crate::error::{Error, Result};
use crate::exponents::{conjugate, Exponents};
use crate::grid::{Grid, GridSpec};
use crate::ext_real::pow0;
use crate::hardy::primitive_sampled_left;
use crate::tail::Tails;
use crate::iterated::IteratedExponents;
use crate::special::sphere_area;
use crate::stieltjes::BorelMeasure;
use crate::weights::{Profile, RadialWeight, UEnvelope, VEnvelope};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Form {
    /// Integrals over balls `B(0, t)`.
    Ball,
    /// Integrals over dual balls `ℝⁿ ∖ B(0, t)`.
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathMode {
    /// Symbolic power algebra; fails unless every weight is a power.
    Closed,
    /// Symbolic when possible, grid with exact envelopes otherwise.
    Auto,
    /// Grid with envelopes built from numerical cumulative integrals.
    Quadrature,
}

impl FromStr for Form {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ball" => Ok(Form::Ball),
            "dual" | "dual-ball" => Ok(Form::Dual),
            _ => Err(Error::Domain(format!("unknown form `{s}` (expected ball or dual)"))),
        }
    }
}

impl FromStr for PathMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" => Ok(PathMode::Closed),
            "auto" => Ok(PathMode::Auto),
            "quadrature" => Ok(PathMode::Quadrature),
            _ => Err(Error::Domain(format!("unknown path `{s}` (expected closed, auto or quadrature)"))),
        }
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Ball => "ball",
            Form::Dual => "dual",
        })
    }
}

#[derive(Clone, Debug)]
pub enum Problem {
    Bilinear { exponents: Exponents, u: RadialWeight, v1: RadialWeight, v2: RadialWeight },
    Iterated { exponents: IteratedExponents, u: RadialWeight, v: RadialWeight, mu: BorelMeasure },
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: String,
    pub n: usize,
    pub form: Form,
    pub problem: Problem,
    pub grid: GridSpec,
    pub path: PathMode,
}

impl Scenario {
    pub fn bilinear(n: usize, p1: f64, p2: f64, q: f64, u: RadialWeight, v1: RadialWeight, v2: RadialWeight) -> Result<Self> {
        let exponents = Exponents::bilinear(n, p1, p2, q)?;
        let s = Scenario {
            id: String::new(),
            n,
            form: Form::Dual,
            problem: Problem::Bilinear { exponents, u, v1, v2 },
            grid: GridSpec::default(),
            path: PathMode::Auto,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn iterated(
        n: usize,
        p: f64,
        q: f64,
        theta: f64,
        u: RadialWeight,
        v: RadialWeight,
        mu: BorelMeasure,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension n must be at least 1".into()));
        }
        let exponents = IteratedExponents::new(p, q, theta)?;
        let s = Scenario {
            id: String::new(),
            n,
            form: Form::Dual,
            problem: Problem::Iterated { exponents, u, v, mu },
            grid: GridSpec::default(),
            path: PathMode::Auto,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_form(mut self, form: Form) -> Self {
        self.form = form;
        self
    }

    pub fn with_path(mut self, path: PathMode) -> Self {
        self.path = path;
        self
    }

    pub fn with_grid(mut self, grid: GridSpec) -> Self {
        self.grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.problem {
            Problem::Bilinear { u, v1, v2, .. } => {
                u.validate()?;
                v1.validate()?;
                v2.validate()
            }
            Problem::Iterated { u, v, mu, .. } => {
                u.validate()?;
                v.validate()?;
                mu.validate()?;
                if self.form == Form::Ball {
                    return Err(Error::Domain("ball form is only defined for bilinear scenarios".into()));
                }
                Ok(())
            }
        }
    }

    pub fn is_iterated(&self) -> bool {
        matches!(self.problem, Problem::Iterated { .. })
    }

    /// Every weight a single power (or `≡ ∞` for the inner weights) and the
    /// measure, if any, a pure power density.
    pub fn is_power(&self) -> bool {
        let inner = |v: &RadialWeight| v.as_power().is_some() || matches!(v, RadialWeight::Infinite);
        match &self.problem {
            Problem::Bilinear { u, v1, v2, .. } => u.as_power().is_some() && inner(v1) && inner(v2),
            Problem::Iterated { u, v, mu, .. } => {
                u.as_power().is_some()
                    && inner(v)
                    && mu.atoms.is_empty()
                    && mu.stieltjes.is_none()
                    && mu.density.as_ref().is_some_and(|d| d.as_power().is_some())
            }
        }
    }

    /// Radii that must be grid nodes.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = vec![1.0];
        match &self.problem {
            Problem::Bilinear { u, v1, v2, .. } => {
                out.extend(u.breakpoints());
                out.extend(v1.breakpoints());
                out.extend(v2.breakpoints());
            }
            Problem::Iterated { u, v, mu, .. } => {
                out.extend(u.breakpoints());
                out.extend(v.breakpoints());
                out.extend(mu.grid_points());
            }
        }
        out
    }

    pub fn build_grid(&self) -> Result<Grid> {
        Grid::new(self.grid, &self.breakpoints())
    }

    pub fn build_grid_with(&self, spec: GridSpec) -> Result<Grid> {
        Grid::new(spec, &self.breakpoints())
    }
}

/// Rewrites a ball-form scenario in dual-ball form by `x ↦ x/|x|²`:
/// `ũ(t) = u(1/t) t^{-2}` (`u(1/t)` for `q = ∞`) and
/// `ṽᵢ(x) = vᵢ(x/|x|²) |x|^{2n(pᵢ-1)}` (`|x|^{2n}` for `pᵢ = ∞`).
/// Dual-form scenarios are returned unchanged.
pub fn dual_transform(s: &Scenario) -> Result<Scenario> {
    if s.form == Form::Dual {
        return Ok(s.clone());
    }
    let Problem::Bilinear { exponents, u, v1, v2 } = &s.problem else {
        return Err(Error::Domain("ball form is only defined for bilinear scenarios".into()));
    };
    let n = s.n as f64;
    let inner = |v: &RadialWeight, p: f64| {
        let k = if p.is_infinite() { 2.0 * n } else { 2.0 * n * (p - 1.0) };
        v.inverted(k)
    };
    let uk = if exponents.q.is_infinite() { 0.0 } else { -2.0 };
    let mut out = s.clone();
    out.form = Form::Dual;
    out.problem = Problem::Bilinear {
        exponents: *exponents,
        u: u.inverted(uk),
        v1: inner(v1, exponents.p1),
        v2: inner(v2, exponents.p2),
    };
    Ok(out)
}

/// `u` sampled at the fine points together with its left limits.
pub fn sample_weight(grid: &Grid, w: &RadialWeight) -> (Sampled, Sampled) {
    let pieces = w.pieces();
    let tails = w.tails();
    let right = Sampled::from_fn(grid, |t| pieces.value(t), 0.0, tails);
    let left = Sampled::from_fn(grid, |t| pieces.left_value(t), 0.0, tails);
    (right, left)
}

/// `U = ∫_0^t u`, exact or by quadrature.
pub fn sample_big_u(grid: &Grid, u: &RadialWeight, quadrature: bool) -> Sampled {
    if quadrature {
        let (w, left) = sample_weight(grid, u);
        primitive_sampled_left(grid, &w, Some(&left))
    } else {
        MonotoneEnvelope::sample(&UEnvelope::new(u), grid).f
    }
}

/// `V_θ` of `v` on `ℝⁿ` as a monotone envelope, exact or by quadrature.
///
/// The quadrature variant integrates `σ s^{n-1} v^m` from the right (or
/// takes a running maximum of `v^{-1}` for `θ = 1`); the symbolic tails,
/// slope formulas and jump positions are shared with the exact envelope.
pub fn sample_v(grid: &Grid, v: &RadialWeight, n: usize, theta: f64, quadrature: bool) -> MonotoneEnvelope {
    let exact = VEnvelope::new(v, n, theta);
    let mut env = MonotoneEnvelope::sample(&exact, grid);
    if !quadrature || matches!(v, RadialWeight::Infinite) {
        return env;
    }
    let pieces = v.pieces();
    let fine = grid.fine();
    if theta == 1.0 {
        let last = grid.last_fine();
        let mut acc = exact.value(fine[last]);
        for i in (0..=last).rev() {
            let inv = pow0(pieces.value(fine[i]), -1.0);
            acc = acc.max(inv);
            env.f.vals[i] = acc;
        }
        return env;
    }
    let (m, power) = if theta.is_infinite() { (-1.0, 1.0) } else { (-1.0 / (theta - 1.0), 1.0 / conjugate(theta)) };
    let sigma = sphere_area(n);
    let nf = n as f64;
    let dens = |w: f64, t: f64| sigma * t.powf(nf - 1.0) * pow0(w, m);
    let integrand: Vec<f64> = fine.iter().map(|&t| dens(pieces.value(t), t)).collect();
    let left: Vec<f64> = fine.iter().map(|&t| dens(pieces.left_value(t), t)).collect();
    let tails = v.tails().powf(m).mul(Tails::power(nf - 1.0, nf - 1.0));
    let tail_int = grid.cumulative_tail_left(&integrand, Some(&left), tails);
    for (i, &ti) in tail_int.iter().enumerate() {
        env.f.vals[i] = pow0(ti, power);
        env.slope[i] = if ti > 0.0 && ti.is_finite() { power * fine[i] * integrand[i] / ti } else { 0.0 };
    }
    env
}

/// The envelope with left limits substituted at its jumps.
pub fn left_sampled(env: &MonotoneEnvelope) -> Sampled {
    let mut s = env.f.clone();
    for &(i, left) in &env.jumps {
        s.vals[i] = left;
    }
    s
}
