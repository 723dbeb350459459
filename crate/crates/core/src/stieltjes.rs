//! Borel measures on `[0, ∞)`, Lebesgue–Stieltjes integrals, the fundamental
//! function `φ` and the non-degeneracy test.

use crate::envelope::{MonotoneEnvelope, Sampled, ZERO_TAILS};
use crate::error::{Error, Result};
use crate::ext_real::{mul0, pow0, ExtReal};
use crate::grid::Grid;
use crate::tail::{Tail, Tails, TAIL_TOL};
use crate::weights::{cal_u, RadialWeight};

/// `d(-G^r)` for a nonincreasing envelope `G`, optionally multiplied by a
/// sampled factor (e.g. `U^{r₁/q} d(-V^{r₁})`).
#[derive(Clone, Debug)]
pub struct StieltjesPart {
    pub g: MonotoneEnvelope,
    pub r: f64,
    pub factor: Option<Sampled>,
}

/// Atoms, an absolutely continuous part and a Stieltjes part.
#[derive(Clone, Debug, Default)]
pub struct BorelMeasure {
    pub atoms: Vec<(f64, f64)>,
    pub density: Option<RadialWeight>,
    pub stieltjes: Option<StieltjesPart>,
}

impl BorelMeasure {
    pub fn zero() -> Self {
        BorelMeasure::default()
    }

    pub fn atom(x: f64, mass: f64) -> Self {
        BorelMeasure { atoms: vec![(x, mass)], ..Default::default() }
    }

    pub fn with_density(w: RadialWeight) -> Self {
        BorelMeasure { density: Some(w), ..Default::default() }
    }

    pub fn from_stieltjes(g: MonotoneEnvelope, r: f64, factor: Option<Sampled>) -> Self {
        BorelMeasure { stieltjes: Some(StieltjesPart { g, r, factor }), ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for &(x, m) in &self.atoms {
            if !(x >= 0.0 && x.is_finite() && m > 0.0 && m.is_finite()) {
                return Err(Error::Domain(format!("atom ({x}, {m}) needs a finite location >= 0 and finite mass > 0")));
            }
        }
        if let Some(d) = &self.density {
            d.validate()?;
        }
        if let Some(s) = &self.stieltjes {
            if !(s.r > 0.0 && s.r.is_finite()) {
                return Err(Error::Domain(format!("Stieltjes exponent must be positive, got {}", s.r)));
            }
        }
        Ok(())
    }

    /// Points the evaluation grid must contain as nodes.
    pub fn grid_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.atoms.iter().map(|a| a.0).filter(|x| *x > 0.0).collect();
        if let Some(d) = &self.density {
            pts.extend(d.breakpoints());
        }
        pts
    }

    /// Densities at the fine points and atoms located on nodes.
    pub fn compile(&self, grid: &Grid) -> Result<CompiledMeasure> {
        let len = grid.fine().len();
        let mut dens = Sampled::new(vec![0.0; len], 0.0, ZERO_TAILS);
        let mut atoms = Vec::new();
        for &(x, mass) in &self.atoms {
            let fine = if x == 0.0 {
                None
            } else {
                let k = grid.node_index(x).ok_or_else(|| Error::Domain(format!("atom at {x} is not a grid node")))?;
                Some(4 * k)
            };
            atoms.push(Atom { x, mass, fine });
        }
        if let Some(w) = &self.density {
            let d = Sampled::from_fn(grid, |t| w.value(t), 0.0, w.tails());
            dens = add(&dens, &d);
        }
        if let Some(s) = &self.stieltjes {
            if s.g.values().len() != len {
                return Err(Error::Domain("Stieltjes envelope sampled on a different grid".into()));
            }
            let gr = s.g.f.powf(s.r);
            let vals: Vec<f64> = grid
                .fine()
                .iter()
                .enumerate()
                .map(|(i, t)| mul0(gr.vals[i], s.r * s.g.slope[i]) / t)
                .collect();
            let tails = gr.tails.mul(s.g.slope_tails).mul(Tails::power(-1.0, -1.0));
            let mut d = Sampled::new(vals, 0.0, tails);
            if let Some(f) = &s.factor {
                d = d.mul(f);
            }
            dens = add(&dens, &d);
            for &(i, left) in &s.g.jumps {
                let jump = pow0(left, s.r) - gr.vals[i];
                if jump > 0.0 {
                    let mass = match &s.factor {
                        Some(f) => mul0(jump, f.vals[i]),
                        None => jump,
                    };
                    if mass > 0.0 {
                        atoms.push(Atom { x: grid.fine()[i], mass, fine: Some(i) });
                    }
                }
            }
        }
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x));
        Ok(CompiledMeasure { dens, atoms })
    }
}

fn add(a: &Sampled, b: &Sampled) -> Sampled {
    Sampled {
        vals: a.vals.iter().zip(&b.vals).map(|(x, y)| x + y).collect(),
        zero: a.zero + b.zero,
        tails: a.tails.sum(b.tails),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Atom {
    pub x: f64,
    pub mass: f64,
    /// Fine index of the node carrying the atom; `None` for `x = 0`.
    pub fine: Option<usize>,
}

/// A measure resolved on a grid: density at the fine points plus atoms.
#[derive(Clone, Debug)]
pub struct CompiledMeasure {
    pub dens: Sampled,
    pub atoms: Vec<Atom>,
}

impl CompiledMeasure {
    pub fn is_zero(&self) -> bool {
        self.atoms.is_empty() && self.dens.vals.iter().all(|v| *v == 0.0)
    }

    /// Growth exponents of `μ([0,x])` as `x → 0` and of the density mass
    /// near `∞` (`density tail + 1`).
    pub fn kappa(&self) -> Tails {
        let d = self.dens.tails;
        let mut zero = Tail { exp: d.zero.exp + 1.0, log: d.zero.log };
        if self.atoms.iter().any(|a| a.x == 0.0) && zero.exp > 0.0 {
            zero = Tail::CONST;
        }
        Tails::new(zero, Tail { exp: d.inf.exp + 1.0, log: d.inf.log })
    }

    fn value_at(f: &Sampled, a: &Atom) -> f64 {
        match a.fine {
            Some(i) => f.vals[i],
            None => f.zero,
        }
    }
}

/// `∫_{[a,b)} F dμ` with `a, b` nodes of the grid, `0` or `∞`.
pub fn stieltjes_integral(grid: &Grid, f: &Sampled, m: &CompiledMeasure, a: f64, b: f64) -> Result<ExtReal> {
    if b <= a {
        return Ok(ExtReal::ZERO);
    }
    let node = |t: f64, default: usize| -> Result<usize> {
        if t == 0.0 || t.is_infinite() {
            Ok(default)
        } else {
            grid.node_index(t).ok_or_else(|| Error::Domain(format!("{t} is not a grid node")))
        }
    };
    let last = grid.nodes().len() - 1;
    let (ia, ib) = (node(a, 0)?, node(b, last)?);
    let prod = f.mul(&m.dens);
    let mut total = grid.integrate_nodes(&prod.vals, ia, ib);
    if a == 0.0 {
        total += prod.tails.zero.integral_to(grid.t_first(), prod.vals[0]);
    }
    if b.is_infinite() {
        total += prod.tails.inf.integral_from(grid.t_last(), prod.vals[grid.last_fine()]);
    }
    for at in &m.atoms {
        if at.x >= a && at.x < b {
            total += mul0(at.mass, CompiledMeasure::value_at(f, at));
        }
    }
    Ok(ExtReal::from_f64(total))
}

/// `∫_{[0,∞)} F dμ`.
pub fn integrate_against(grid: &Grid, f: &Sampled, m: &CompiledMeasure) -> f64 {
    let prod = f.mul(&m.dens);
    let mut total = prod.integrate(grid);
    for at in &m.atoms {
        total += mul0(at.mass, CompiledMeasure::value_at(f, at));
    }
    total
}

/// Orientation of the kernel `𝒰` inside a measure integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// `x ↦ ∫ 𝒰(x,t)^a dμ(t)`, the fundamental-function shape.
    Forward,
    /// `x ↦ ∫ 𝒰(t,x)^a dμ(t)`, the Stieltjes-layer shape.
    Reverse,
}

/// Kernel integral at a point `x` known only through `U(x) = ux`.
pub fn kernel_at(grid: &Grid, big_u: &Sampled, a: f64, m: &CompiledMeasure, orient: Orientation, ux: f64) -> f64 {
    let kern = |ut: f64| {
        let c = match orient {
            Orientation::Forward => cal_u(ux, ut),
            Orientation::Reverse => cal_u(ut, ux),
        };
        if a == 1.0 {
            c
        } else {
            pow0(c, a)
        }
    };
    let d = &m.dens;
    let mut total = 0.0;
    for (i, w) in grid.quad() {
        if d.vals[i] != 0.0 {
            total += w * mul0(d.vals[i], kern(big_u.vals[i]));
        }
    }
    let (first, last) = (0, grid.last_fine());
    let ends = |i: usize| mul0(d.vals[i], kern(big_u.vals[i]));
    let ut = big_u.tails;
    let (tz, ti) = match orient {
        Orientation::Forward if ux > 0.0 => (d.tails.zero, d.tails.inf.mul_inf(ut.inf.powf(-a))),
        Orientation::Forward => (ZERO_TAILS.zero, ZERO_TAILS.inf),
        Orientation::Reverse => (d.tails.zero.mul_zero(ut.zero.powf(a)), d.tails.inf),
    };
    total += tz.integral_to(grid.t_first(), ends(first)) + ti.integral_from(grid.t_last(), ends(last));
    for at in &m.atoms {
        let utv = CompiledMeasure::value_at(big_u, at);
        total += mul0(at.mass, kern(utv));
    }
    total
}

/// Tails in `x` of the kernel integral (see [`kernel_at`]).
pub fn kernel_tails(big_u: Tails, a: f64, m: &CompiledMeasure, orient: Orientation) -> Tails {
    if m.is_zero() {
        return ZERO_TAILS;
    }
    let k = m.kappa();
    let (a0, ainf) = (big_u.zero.exp * a, big_u.inf.exp * a);
    match orient {
        Orientation::Forward => {
            let zero = if (k.zero.exp - a0).abs() <= TAIL_TOL {
                Tail { exp: a0, log: k.zero.log + 1.0 }
            } else if k.zero.exp < a0 {
                k.zero
            } else {
                Tail { exp: a0, log: big_u.zero.log * a }
            };
            let inf = if k.inf.exp >= ainf - TAIL_TOL {
                Tail::power(f64::INFINITY)
            } else if k.inf.exp > TAIL_TOL {
                k.inf
            } else if k.inf.exp >= -TAIL_TOL {
                Tail { exp: 0.0, log: k.inf.log + 1.0 }
            } else {
                Tail::CONST
            };
            Tails::new(zero, inf)
        }
        Orientation::Reverse => {
            let zero = if k.zero.exp + a0 <= TAIL_TOL {
                Tail::power(f64::NEG_INFINITY)
            } else if k.zero.exp < -TAIL_TOL {
                k.zero
            } else {
                Tail::CONST
            };
            let inf = if k.inf.exp >= -TAIL_TOL {
                Tail::power(f64::INFINITY)
            } else if k.inf.exp > -ainf {
                k.inf
            } else {
                Tail { exp: -ainf, log: -big_u.inf.log * a }
            };
            Tails::new(zero, inf)
        }
    }
}

/// The kernel integral at every fine point, with its tails.
pub fn kernel_sampled(grid: &Grid, big_u: &Sampled, a: f64, m: &CompiledMeasure, orient: Orientation) -> Sampled {
    use rayon::prelude::*;
    let vals: Vec<f64> = big_u.vals.par_iter().map(|&ux| kernel_at(grid, big_u, a, m, orient, ux)).collect();
    let zero = kernel_at(grid, big_u, a, m, orient, big_u.zero);
    Sampled::new(vals, zero, kernel_tails(big_u.tails, a, m, orient))
}

/// `φ(x) = ∫_{[0,∞)} 𝒰(x,t)^s dμ(t)` on the fine points.
pub fn fundamental_function(grid: &Grid, m: &CompiledMeasure, big_u: &Sampled, s: f64) -> Sampled {
    kernel_sampled(grid, big_u, s, m, Orientation::Forward)
}

/// `φ(x)` at a single point, given `U(x)`.
pub fn fundamental_at(grid: &Grid, m: &CompiledMeasure, big_u: &Sampled, s: f64, ux: f64) -> ExtReal {
    ExtReal::from_f64(kernel_at(grid, big_u, s, m, Orientation::Forward, ux))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NondegVerdict {
    Ok,
    FailsFiniteness,
    FailsZeroTail,
    FailsInfinityTail,
}

impl NondegVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            NondegVerdict::Ok => "ok",
            NondegVerdict::FailsFiniteness => "fails_finiteness",
            NondegVerdict::FailsZeroTail => "fails_zero_tail",
            NondegVerdict::FailsInfinityTail => "fails_infinity_tail",
        }
    }
}

/// The three clauses of non-degeneracy of `μ` with respect to `U^s`, decided
/// from tail exponents.
pub fn check_nondegenerate(grid: &Grid, m: &CompiledMeasure, big_u: &Sampled, s: f64) -> NondegVerdict {
    let d = m.dens.tails;
    let us = big_u.tails.powf(s);
    // ∫ dμ/(U^s + U(x)^s) near 0 behaves like ∫ dμ, near ∞ like ∫ U^{-s} dμ.
    let interior = kernel_at(grid, big_u, s, m, Orientation::Forward, 1.0);
    let at_zero = !m.dens.vals.iter().any(|v| *v > 0.0) || d.zero.integrable_at_zero();
    let at_inf = d.inf.mul_inf(us.inf.powf(-1.0)).integrable_at_inf();
    if !(interior.is_finite() && at_zero && at_inf) {
        return NondegVerdict::FailsFiniteness;
    }
    let atom_at_zero = m.atoms.iter().any(|a| a.x == 0.0);
    let zero_tail = atom_at_zero || !d.zero.mul_zero(us.zero.powf(-1.0)).integrable_at_zero();
    if !zero_tail {
        return NondegVerdict::FailsZeroTail;
    }
    if d.inf.integrable_at_inf() {
        return NondegVerdict::FailsInfinityTail;
    }
    NondegVerdict::Ok
}
