//! Radial weights, the primitives `U` and `V_θ`, the kernel `𝒰` and the
//! inversion used by the ball/dual-ball change of variables.
//!
//! Every weight is reduced to a piecewise power function
//! `w(t) = c_k t^{α_k}` on `(b_{k-1}, b_k)` with `b_0 = 0`, `b_m = ∞` and
//! `c_k ∈ [0, ∞]`. A tabulated weight becomes the log-log interpolant of its
//! samples extended by its declared tail exponents, so every integral of a
//! weight is available in closed form.

use crate::error::{Error, Result};
use crate::exponents::conjugate;
use crate::ext_real::ExtReal;
use crate::grid::Grid;
use crate::special::sphere_area;
use crate::tail::{Tail, Tails};

/// Domain of a weight: an interval weight on `(0, ∞)` or a radial weight on
/// `ℝⁿ` given through its radial profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Interval,
    Radial(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub enum RadialWeight {
    Power { c: f64, alpha: f64 },
    /// `pieces.len() == breaks.len() + 1`; piece `k` lives on
    /// `(breaks[k-1], breaks[k])`.
    PiecewisePower { breaks: Vec<f64>, pieces: Vec<(f64, f64)> },
    Tabulated { radii: Vec<f64>, values: Vec<f64>, tail0: f64, tailinf: f64 },
    /// `w ≡ ∞`; as an inner weight it admits only `f = 0`.
    Infinite,
}

/// One segment `c t^α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seg {
    pub c: f64,
    pub alpha: f64,
}

impl Seg {
    fn value(self, t: f64) -> f64 {
        if self.c == 0.0 || self.c.is_infinite() {
            self.c
        } else {
            self.c * t.powf(self.alpha)
        }
    }

    /// Segment of `s^k w(s)^m`.
    fn transformed(self, k: f64, m: f64) -> Seg {
        let c = ExtReal::from_f64(self.c).powf(m).get();
        Seg { c, alpha: k + self.alpha * m }
    }
}

/// Piecewise power representation shared by all weight variants.
#[derive(Clone, Debug, PartialEq)]
pub struct Pieces {
    pub breaks: Vec<f64>,
    pub segs: Vec<Seg>,
}

/// `∫_lo^hi c s^e ds` with `0 ≤ lo ≤ hi ≤ ∞` and `c ∈ [0, ∞]`.
pub fn power_integral(c: f64, e: f64, lo: f64, hi: f64) -> f64 {
    if c == 0.0 || hi <= lo {
        return 0.0;
    }
    if c.is_infinite() {
        return f64::INFINITY;
    }
    let k = e + 1.0;
    if lo == 0.0 {
        return if k > 0.0 && hi.is_finite() { c * hi.powf(k) / k } else { f64::INFINITY };
    }
    if hi.is_infinite() {
        return if k < 0.0 { c * lo.powf(k) / -k } else { f64::INFINITY };
    }
    if k.abs() < 1e-14 {
        return c * (hi / lo).ln();
    }
    if k > 0.0 {
        c * hi.powf(k) * -(k * (lo / hi).ln()).exp_m1() / k
    } else {
        c * lo.powf(k) * (k * (hi / lo).ln()).exp_m1() / k
    }
}

/// `sup_{s ∈ (lo, hi)} c s^e`.
fn power_sup(c: f64, e: f64, lo: f64, hi: f64) -> f64 {
    if c == 0.0 || hi <= lo {
        return 0.0;
    }
    if c.is_infinite() {
        return f64::INFINITY;
    }
    if e > 0.0 {
        if hi.is_infinite() {
            f64::INFINITY
        } else {
            c * hi.powf(e)
        }
    } else if e < 0.0 {
        if lo == 0.0 {
            f64::INFINITY
        } else {
            c * lo.powf(e)
        }
    } else {
        c
    }
}

impl Pieces {
    fn seg_bounds(&self, k: usize) -> (f64, f64) {
        let lo = if k == 0 { 0.0 } else { self.breaks[k - 1] };
        let hi = self.breaks.get(k).copied().unwrap_or(f64::INFINITY);
        (lo, hi)
    }

    fn seg_at(&self, t: f64) -> usize {
        self.breaks.partition_point(|b| *b <= t)
    }

    /// Right value `w(t)`.
    pub fn value(&self, t: f64) -> f64 {
        self.segs[self.seg_at(t)].value(t)
    }

    /// Left limit `w(t-)`.
    pub fn left_value(&self, t: f64) -> f64 {
        let k = self.breaks.partition_point(|b| *b < t);
        self.segs[k].value(t)
    }

    /// `∫_lo^hi s^k w(s)^m ds`.
    pub fn integral(&self, k: f64, m: f64, lo: f64, hi: f64) -> f64 {
        let mut total = 0.0;
        for (j, seg) in self.segs.iter().enumerate() {
            let (a, b) = self.seg_bounds(j);
            let (a, b) = (a.max(lo), b.min(hi));
            if a < b {
                let s = seg.transformed(k, m);
                total += power_integral(s.c, s.alpha, a, b);
                if total.is_infinite() {
                    return total;
                }
            }
        }
        total
    }

    /// `ess sup_{s ∈ (lo, hi)} s^k w(s)^m`.
    pub fn ess_sup(&self, k: f64, m: f64, lo: f64, hi: f64) -> f64 {
        let mut best: f64 = 0.0;
        for (j, seg) in self.segs.iter().enumerate() {
            let (a, b) = self.seg_bounds(j);
            let (a, b) = (a.max(lo), b.min(hi));
            if a < b {
                let s = seg.transformed(k, m);
                best = best.max(power_sup(s.c, s.alpha, a, b));
            }
        }
        best
    }

    pub fn first(&self) -> Seg {
        self.segs[0]
    }

    pub fn last(&self) -> Seg {
        *self.segs.last().unwrap()
    }

    /// Tails of `w` itself.
    pub fn tails(&self) -> Tails {
        let end = |s: Seg, vanish: f64, blow: f64| {
            if s.c == 0.0 {
                Tail::power(vanish)
            } else if s.c.is_infinite() {
                Tail::power(blow)
            } else {
                Tail::power(s.alpha)
            }
        };
        Tails::new(
            end(self.first(), f64::INFINITY, f64::NEG_INFINITY),
            end(self.last(), f64::NEG_INFINITY, f64::INFINITY),
        )
    }

    /// `c` applied to every segment.
    fn scaled(&self, c: f64) -> Pieces {
        Pieces {
            breaks: self.breaks.clone(),
            segs: self.segs.iter().map(|s| Seg { c: (ExtReal::from_f64(s.c) * ExtReal::from_f64(c)).get(), alpha: s.alpha }).collect(),
        }
    }
}

impl RadialWeight {
    pub fn power(c: f64, alpha: f64) -> Self {
        RadialWeight::Power { c, alpha }
    }

    pub fn zero() -> Self {
        RadialWeight::Power { c: 0.0, alpha: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(m));
        match self {
            RadialWeight::Power { c, alpha } => {
                if !(c.is_finite() && *c >= 0.0 && alpha.is_finite()) {
                    return bad(format!("power weight needs finite c >= 0 and finite alpha, got ({c}, {alpha})"));
                }
            }
            RadialWeight::PiecewisePower { breaks, pieces } => {
                if pieces.len() != breaks.len() + 1 {
                    return bad("piecewise weight needs one more piece than breakpoints".into());
                }
                if breaks.iter().any(|b| !(*b > 0.0 && b.is_finite())) || breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("piecewise breakpoints must be positive and strictly increasing".into());
                }
                if pieces.iter().any(|(c, a)| c.is_nan() || *c < 0.0 || !a.is_finite()) {
                    return bad("piecewise pieces need c in [0, inf] and finite alpha".into());
                }
            }
            RadialWeight::Tabulated { radii, values, tail0, tailinf } => {
                if radii.len() < 2 || radii.len() != values.len() {
                    return bad("table needs at least two (radius, value) rows".into());
                }
                if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) || radii.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("table radii must be positive and strictly increasing".into());
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return bad("table values must be finite and non-negative".into());
                }
                if !(tail0.is_finite() && tailinf.is_finite()) {
                    return bad("table tail exponents must be finite".into());
                }
            }
            RadialWeight::Infinite => {}
        }
        Ok(())
    }

    /// Closed-form piecewise power representation.
    pub fn pieces(&self) -> Pieces {
        match self {
            RadialWeight::Power { c, alpha } => Pieces { breaks: vec![], segs: vec![Seg { c: *c, alpha: *alpha }] },
            RadialWeight::PiecewisePower { breaks, pieces } => Pieces {
                breaks: breaks.clone(),
                segs: pieces.iter().map(|&(c, alpha)| Seg { c, alpha }).collect(),
            },
            RadialWeight::Tabulated { radii, values, tail0, tailinf } => {
                let anchored = |r: f64, v: f64, a: f64| Seg { c: if v == 0.0 { 0.0 } else { v / r.powf(a) }, alpha: a };
                let mut segs = vec![anchored(radii[0], values[0], *tail0)];
                for i in 0..radii.len() - 1 {
                    let (r0, r1, v0, v1) = (radii[i], radii[i + 1], values[i], values[i + 1]);
                    if v0 == 0.0 || v1 == 0.0 {
                        segs.push(Seg { c: 0.0, alpha: 0.0 });
                    } else {
                        let a = (v1 / v0).ln() / (r1 / r0).ln();
                        segs.push(anchored(r0, v0, a));
                    }
                }
                let n = radii.len() - 1;
                segs.push(anchored(radii[n], values[n], *tailinf));
                Pieces { breaks: radii.clone(), segs }
            }
            RadialWeight::Infinite => Pieces { breaks: vec![], segs: vec![Seg { c: f64::INFINITY, alpha: 0.0 }] },
        }
    }

    /// `Some((c, α))` for a single power law.
    pub fn as_power(&self) -> Option<(f64, f64)> {
        match self {
            RadialWeight::Power { c, alpha } => Some((*c, *alpha)),
            _ => None,
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            RadialWeight::PiecewisePower { breaks, .. } => breaks.clone(),
            RadialWeight::Tabulated { radii, .. } => radii.clone(),
            _ => vec![],
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.pieces().value(t)
    }

    pub fn tails(&self) -> Tails {
        self.pieces().tails()
    }

    /// `c · w`.
    pub fn scaled(&self, c: f64) -> RadialWeight {
        match self {
            RadialWeight::Power { c: c0, alpha } => RadialWeight::Power { c: c0 * c, alpha: *alpha },
            RadialWeight::Tabulated { radii, values, tail0, tailinf } => RadialWeight::Tabulated {
                radii: radii.clone(),
                values: values.iter().map(|v| v * c).collect(),
                tail0: *tail0,
                tailinf: *tailinf,
            },
            RadialWeight::Infinite => RadialWeight::Infinite,
            RadialWeight::PiecewisePower { .. } => Self::from_pieces(self.pieces().scaled(c)),
        }
    }

    fn from_pieces(p: Pieces) -> RadialWeight {
        RadialWeight::PiecewisePower { breaks: p.breaks, pieces: p.segs.iter().map(|s| (s.c, s.alpha)).collect() }
    }

    /// `w` on `[lo, hi)` and `outside` (`0` or `∞`) elsewhere.
    pub fn restricted(&self, lo: f64, hi: f64, outside: f64) -> RadialWeight {
        let p = self.pieces();
        let mut breaks = Vec::new();
        let mut segs = Vec::new();
        let out = Seg { c: outside, alpha: 0.0 };
        if lo > 0.0 {
            segs.push(out);
            breaks.push(lo);
        }
        for (k, s) in p.segs.iter().enumerate() {
            let (a, b) = p.seg_bounds(k);
            if b <= lo || a >= hi {
                continue;
            }
            if a > lo {
                breaks.push(a);
            }
            segs.push(*s);
        }
        if hi.is_finite() {
            breaks.push(hi);
            segs.push(out);
        }
        Self::from_pieces(Pieces { breaks, segs })
    }

    /// `t ↦ w(1/t) t^k`, the radial part of the inversion `x ↦ x/|x|²`.
    pub fn inverted(&self, k: f64) -> RadialWeight {
        match self {
            RadialWeight::Power { c, alpha } => RadialWeight::Power { c: *c, alpha: k - alpha },
            RadialWeight::Infinite => RadialWeight::Infinite,
            RadialWeight::Tabulated { radii, values, tail0, tailinf } => {
                let n = radii.len();
                RadialWeight::Tabulated {
                    radii: (0..n).map(|i| 1.0 / radii[n - 1 - i]).collect(),
                    values: (0..n).map(|i| values[n - 1 - i] * radii[n - 1 - i].powf(-k)).collect(),
                    tail0: k - tailinf,
                    tailinf: k - tail0,
                }
            }
            RadialWeight::PiecewisePower { breaks, pieces } => RadialWeight::PiecewisePower {
                breaks: breaks.iter().rev().map(|b| 1.0 / b).collect(),
                pieces: pieces.iter().rev().map(|&(c, a)| (c, k - a)).collect(),
            },
        }
    }
}

/// `U(t) = ∫_0^t u`.
pub fn primitive_u(u: &RadialWeight, t: f64) -> ExtReal {
    ExtReal::from_f64(u.pieces().integral(0.0, 1.0, 0.0, t))
}

/// Exponent data of `V_θ` for a radial weight on `ℝⁿ`.
#[derive(Clone, Copy, Debug, PartialEq)]
enum VKind {
    /// `V = (σ ∫_t^∞ s^{n-1} v^m)^P`.
    Integral { m: f64, power: f64 },
    /// `V = ess sup_{s>t} v^{-1}`.
    Sup,
}

fn v_kind(theta: f64) -> VKind {
    if theta == 1.0 {
        VKind::Sup
    } else if theta.is_infinite() {
        VKind::Integral { m: -1.0, power: 1.0 }
    } else {
        VKind::Integral { m: -1.0 / (theta - 1.0), power: 1.0 / conjugate(theta) }
    }
}

/// `V_θ(t) = ‖v^{-1/θ}‖_{θ', ℝⁿ∖B(0,t)}` (and `‖v^{-1}‖_1` for `θ = ∞`).
pub fn tail_norm_v(v: &RadialWeight, n: usize, theta: f64, t: f64) -> ExtReal {
    VEnvelope::new(v, n, theta).value_ext(t)
}

/// `𝒰(x, t) = U(x) / (U(t) + U(x))` from the two primitive values.
pub fn cal_u(ux: f64, ut: f64) -> f64 {
    if ux == 0.0 {
        0.0
    } else if ux.is_infinite() {
        if ut.is_infinite() {
            0.0
        } else {
            1.0
        }
    } else if ux <= ut {
        ux / (ut + ux)
    } else {
        // Complement of the smaller share, so 𝒰(x,t) + 𝒰(t,x) = 1 exactly.
        1.0 - ut / (ux + ut)
    }
}

/// Direction of a monotone envelope.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
}

/// A monotone function of the radius with closed-form tails.
pub trait Profile: Sync {
    fn value(&self, t: f64) -> f64;
    fn left_value(&self, t: f64) -> f64 {
        self.value(t)
    }
    fn at_zero(&self) -> f64;
    fn tails(&self) -> Tails;
    fn direction(&self) -> Direction;
    /// `|t f'(t) / f(t)|`.
    fn log_slope(&self, t: f64) -> f64 {
        let h: f64 = 1e-5;
        let (a, b) = (self.value(t * (-h).exp()), self.value(t * h.exp()));
        if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            ((b / a).ln() / (2.0 * h)).abs()
        } else {
            0.0
        }
    }
    /// Tails of [`Profile::log_slope`].
    fn slope_tails(&self) -> Tails;
    /// Points where `left_value` differs from `value`.
    fn jump_points(&self) -> Vec<f64> {
        vec![]
    }
}

/// `U(t) = ∫_0^t u` as a profile.
#[derive(Clone, Debug)]
pub struct UEnvelope {
    pieces: Pieces,
}

impl UEnvelope {
    pub fn new(u: &RadialWeight) -> Self {
        UEnvelope { pieces: u.pieces() }
    }

    pub fn from_pieces(pieces: Pieces) -> Self {
        UEnvelope { pieces }
    }

    pub fn weight(&self, t: f64) -> f64 {
        self.pieces.value(t)
    }

    pub fn weight_tails(&self) -> Tails {
        self.pieces.tails()
    }

    pub fn pieces(&self) -> &Pieces {
        &self.pieces
    }
}

impl Profile for UEnvelope {
    fn value(&self, t: f64) -> f64 {
        self.pieces.integral(0.0, 1.0, 0.0, t)
    }

    fn at_zero(&self) -> f64 {
        0.0
    }

    fn tails(&self) -> Tails {
        let first = self.pieces.first();
        let zero = if first.c == 0.0 {
            Tail::vanishing_at_zero()
        } else if first.c.is_infinite() || first.alpha <= -1.0 {
            Tail::power(f64::NEG_INFINITY)
        } else {
            Tail::power(first.alpha + 1.0)
        };
        let last = self.pieces.last();
        let inf = if last.c == 0.0 {
            Tail::CONST
        } else if last.c.is_infinite() {
            Tail::power(f64::INFINITY)
        } else {
            Tails::power(0.0, last.alpha).primitive_from_zero().inf
        };
        Tails::new(zero, inf)
    }

    fn direction(&self) -> Direction {
        Direction::Nondecreasing
    }

    fn log_slope(&self, t: f64) -> f64 {
        let big_u = self.value(t);
        if big_u == 0.0 || big_u.is_infinite() {
            return 0.0;
        }
        t * self.pieces.value(t) / big_u
    }

    fn slope_tails(&self) -> Tails {
        let first = self.pieces.first();
        let zero = if first.c == 0.0 { Tail::vanishing_at_zero() } else { Tail::CONST };
        let last = self.pieces.last();
        let inf = if last.c == 0.0 {
            Tail::vanishing_at_inf()
        } else if last.alpha > -1.0 {
            Tail::CONST
        } else if last.alpha == -1.0 {
            Tail { exp: 0.0, log: -1.0 }
        } else {
            Tail::power(last.alpha + 1.0)
        };
        Tails::new(zero, inf)
    }
}

/// `V_θ` of a radial weight on `ℝⁿ` as a profile.
#[derive(Clone, Debug)]
pub struct VEnvelope {
    pieces: Pieces,
    n: usize,
    theta: f64,
    sigma: f64,
    kind: VKind,
}

impl VEnvelope {
    pub fn new(v: &RadialWeight, n: usize, theta: f64) -> Self {
        VEnvelope { pieces: v.pieces(), n, theta, sigma: sphere_area(n), kind: v_kind(theta) }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn value_ext(&self, t: f64) -> ExtReal {
        ExtReal::from_f64(self.value(t))
    }

    /// `σ ∫_t^∞ s^{n-1} v^m` for the integral kinds.
    fn inner(&self, m: f64, t: f64) -> f64 {
        self.sigma * self.pieces.integral(self.n as f64 - 1.0, m, t, f64::INFINITY)
    }

    /// Restriction of `V_θ` to the shell `S[lo, hi)`, i.e. the local
    /// constant `‖v^{-1/θ}‖_{θ', S[lo,hi)}`.
    pub fn shell_norm(&self, lo: f64, hi: f64) -> f64 {
        match self.kind {
            VKind::Sup => self.pieces.ess_sup(0.0, -1.0, lo, hi),
            VKind::Integral { m, power } => {
                let i = self.sigma * self.pieces.integral(self.n as f64 - 1.0, m, lo, hi);
                ExtReal::from_f64(i).powf(power).get()
            }
        }
    }

    fn seg_exponent(&self, s: Seg, m: f64) -> (f64, f64) {
        let t = s.transformed(self.n as f64 - 1.0, m);
        (t.c, t.alpha)
    }
}

impl Profile for VEnvelope {
    fn value(&self, t: f64) -> f64 {
        match self.kind {
            VKind::Sup => self.pieces.ess_sup(0.0, -1.0, t, f64::INFINITY),
            VKind::Integral { m, power } => ExtReal::from_f64(self.inner(m, t)).powf(power).get(),
        }
    }

    fn left_value(&self, t: f64) -> f64 {
        match self.kind {
            VKind::Sup => {
                let left = ExtReal::from_f64(self.pieces.left_value(t)).powf(-1.0).get();
                self.value(t).max(left)
            }
            VKind::Integral { .. } => self.value(t),
        }
    }

    fn at_zero(&self) -> f64 {
        self.value(0.0)
    }

    fn direction(&self) -> Direction {
        Direction::Nonincreasing
    }

    fn tails(&self) -> Tails {
        let (first, last) = (self.pieces.first(), self.pieces.last());
        match self.kind {
            VKind::Sup => {
                let inv = |s: Seg| Seg { c: ExtReal::from_f64(s.c).powf(-1.0).get(), alpha: -s.alpha };
                let (f, l) = (inv(first), inv(last));
                let inf = if l.c == 0.0 {
                    Tail::vanishing_at_inf()
                } else if l.c.is_infinite() || l.alpha > 0.0 {
                    Tail::power(f64::INFINITY)
                } else {
                    Tail::power(l.alpha)
                };
                let zero = if f.c > 0.0 && f.alpha < 0.0 { Tail::power(f.alpha) } else { Tail::CONST };
                Tails::new(zero, inf)
            }
            VKind::Integral { m, power } => {
                let (cl, el) = self.seg_exponent(last, m);
                let inf = if cl == 0.0 {
                    Tail::vanishing_at_inf()
                } else if el < -1.0 {
                    Tail::power((el + 1.0) * power)
                } else {
                    Tail::power(f64::INFINITY)
                };
                let (cf, ef) = self.seg_exponent(first, m);
                let zero = if cf == 0.0 || ef > -1.0 {
                    Tail::CONST
                } else if ef == -1.0 {
                    Tail { exp: 0.0, log: power }
                } else {
                    Tail::power((ef + 1.0) * power)
                };
                Tails::new(zero, inf)
            }
        }
    }

    fn log_slope(&self, t: f64) -> f64 {
        match self.kind {
            VKind::Integral { m, power } => {
                let i = self.inner(m, t);
                if i == 0.0 || i.is_infinite() {
                    return 0.0;
                }
                let h = ExtReal::from_f64(self.pieces.value(t)).powf(m).get();
                power * self.sigma * t.powi(self.n as i32) * h / i
            }
            VKind::Sup => {
                let v = self.value(t);
                let here = ExtReal::from_f64(self.pieces.value(t)).powf(-1.0).get();
                if v > 0.0 && v.is_finite() && (here - v).abs() <= 1e-12 * v {
                    self.pieces.segs[self.pieces.seg_at(t)].alpha.abs()
                } else {
                    0.0
                }
            }
        }
    }

    fn slope_tails(&self) -> Tails {
        let (first, last) = (self.pieces.first(), self.pieces.last());
        match self.kind {
            VKind::Sup => {
                let zero = if first.c.is_finite() && first.c > 0.0 && first.alpha > 0.0 {
                    Tail::CONST
                } else {
                    Tail::vanishing_at_zero()
                };
                let inf = if last.c.is_finite() && last.c > 0.0 && last.alpha != 0.0 {
                    Tail::CONST
                } else {
                    Tail::vanishing_at_inf()
                };
                Tails::new(zero, inf)
            }
            VKind::Integral { m, power } => {
                let (cl, _) = self.seg_exponent(last, m);
                let inf = if cl == 0.0 { Tail::vanishing_at_inf() } else { Tail::CONST };
                let (cf, ef) = self.seg_exponent(first, m);
                let zero = if cf == 0.0 {
                    Tail::vanishing_at_zero()
                } else if ef > -1.0 {
                    Tail::power(ef + 1.0)
                } else if ef == -1.0 {
                    Tail { exp: 0.0, log: -1.0 }
                } else {
                    let _ = power;
                    Tail::CONST
                };
                Tails::new(zero, inf)
            }
        }
    }

    fn jump_points(&self) -> Vec<f64> {
        match self.kind {
            VKind::Sup => self
                .pieces
                .breaks
                .iter()
                .copied()
                .filter(|&b| self.left_value(b) > self.value(b) * (1.0 + 1e-12))
                .collect(),
            VKind::Integral { .. } => vec![],
        }
    }
}

/// `sup_t F(t) · sup_{τ<t} G(τ)` for a monotone `F`, both sampled on `grid`.
pub fn sup_product(grid: &Grid, f: &[f64], f_tails: Tails, g: &[f64], g_tails: Tails) -> ExtReal {
    if f.iter().all(|v| *v == 0.0) {
        return ExtReal::ZERO;
    }
    if g[0] > 0.0 && g_tails.zero.blows_up_at_zero() {
        return ExtReal::INFINITY;
    }
    let mut running = 0.0_f64;
    let prod: Vec<f64> = f
        .iter()
        .zip(g)
        .map(|(a, b)| {
            running = running.max(*b);
            crate::ext_real::mul0(*a, running)
        })
        .collect();
    let env_zero = if g_tails.zero.vanishes_at_zero() { g_tails.zero } else { Tail::CONST };
    let env_inf = if g_tails.inf.blows_up_at_inf() { g_tails.inf } else { Tail::CONST };
    let tails = f_tails.mul(Tails::new(env_zero, env_inf));
    ExtReal::from_f64(grid.sup(&prod, tails))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(primitive_u(&RadialWeight::power(1.0, 0.0), 5.0).get(), 5.0);
        assert!(close(primitive_u(&RadialWeight::power(1.0, 3.0), 2.0).get(), 4.0, 1e-14));
        assert!(primitive_u(&RadialWeight::power(1.0, -1.0), 1.0).is_infinite());
    }

    #[test]
    fn tail_norm_examples() {
        let v = RadialWeight::power(1.0, 3.0);
        assert!(close(tail_norm_v(&v, 1, 2.0, 2.0).get(), 0.5, 1e-14));
        assert!(tail_norm_v(&RadialWeight::power(1.0, 0.0), 1, 2.0, 3.0).is_infinite());
        // θ = 1: ess sup of 1/v over |x| > t.
        assert!(close(tail_norm_v(&v, 1, 1.0, 2.0).get(), 0.125, 1e-14));
        // θ = ∞: σ ∫_t^∞ s^{-3} = 2 · t^{-2}/2.
        assert!(close(tail_norm_v(&v, 1, f64::INFINITY, 2.0).get(), 0.25, 1e-14));
        assert_eq!(tail_norm_v(&RadialWeight::Infinite, 3, 2.0, 1.0).get(), 0.0);
    }

    #[test]
    fn cal_u_examples() {
        assert_eq!(cal_u(2.0, 2.0), 0.5);
        assert_eq!(cal_u(1.0, 0.0), 1.0);
        assert_eq!(cal_u(1.0, 3.0), 0.25);
        assert_eq!(cal_u(0.0, 0.0), 0.0);
        for (a, b) in [(0.1, 0.2), (1e-300, 3.0), (7.0, 7.0 + 1e-9), (1e10, 3.3)] {
            assert_eq!(cal_u(a, b) + cal_u(b, a), 1.0);
        }
    }

    #[test]
    fn tabulated_matches_power() {
        let radii: Vec<f64> = (0..=20).map(|i| 10f64.powf(-2.0 + 0.2 * i as f64)).collect();
        let values: Vec<f64> = radii.iter().map(|r| 3.0 * r.powf(1.5)).collect();
        let tab = RadialWeight::Tabulated { radii, values, tail0: 1.5, tailinf: 1.5 };
        tab.validate().unwrap();
        let pow = RadialWeight::power(3.0, 1.5);
        for t in [1e-4, 0.3, 7.0, 1e5] {
            assert!(close(primitive_u(&tab, t).get(), primitive_u(&pow, t).get(), 1e-12));
            assert!(close(tab.value(t), pow.value(t), 1e-12));
        }
    }

    #[test]
    fn restriction_and_inversion() {
        let u = RadialWeight::power(1.0, 1.0);
        let r = u.restricted(1.0, 2.0, 0.0);
        assert!(close(primitive_u(&r, 10.0).get(), 1.5, 1e-14));
        assert_eq!(r.value(0.5), 0.0);
        let v = RadialWeight::power(1.0, 3.0).restricted(1.0, 2.0, f64::INFINITY);
        // (2 ∫_1^2 s^{-3} ds / 2)^{1/2} on the shell.
        let c = VEnvelope::new(&v, 1, 2.0).value(0.5);
        assert!(close(c, 0.75f64.sqrt(), 1e-14));
        let w = RadialWeight::PiecewisePower { breaks: vec![1.0, 2.0], pieces: vec![(1.0, 0.0), (2.0, 1.0), (3.0, -1.0)] };
        let back = w.inverted(-2.0).inverted(-2.0);
        for t in [0.3, 1.5, 4.0] {
            assert!(close(back.value(t), w.value(t), 1e-14));
        }
        assert_eq!(RadialWeight::power(1.0, 3.0).inverted(-2.0), RadialWeight::power(1.0, -5.0));
    }

    #[test]
    fn envelope_tails_and_slopes() {
        let v = VEnvelope::new(&RadialWeight::power(1.0, 3.0), 1, 2.0);
        assert_eq!(v.tails(), Tails::power(-1.0, -1.0));
        assert!(close(v.log_slope(3.0), 1.0, 1e-12));
        let u = UEnvelope::new(&RadialWeight::power(1.0, 3.0));
        assert_eq!(u.tails(), Tails::power(4.0, 4.0));
        assert!(close(u.log_slope(0.7), 4.0, 1e-12));
        // Numerical default agrees with the analytic slope.
        struct Num(VEnvelope);
        impl Profile for Num {
            fn value(&self, t: f64) -> f64 {
                self.0.value(t)
            }
            fn at_zero(&self) -> f64 {
                0.0
            }
            fn tails(&self) -> Tails {
                self.0.tails()
            }
            fn direction(&self) -> Direction {
                Direction::Nonincreasing
            }
            fn slope_tails(&self) -> Tails {
                self.0.slope_tails()
            }
        }
        let w = RadialWeight::PiecewisePower { breaks: vec![1.0], pieces: vec![(1.0, 0.5), (1.0, 4.0)] };
        let e = VEnvelope::new(&w, 2, 3.0);
        for t in [0.2, 0.9, 1.7, 30.0] {
            assert!(close(Num(e.clone()).log_slope(t), e.log_slope(t), 1e-8));
        }
    }

    #[test]
    fn sup_product_examples() {
        let grid = Grid::new(GridSpec::default(), &[1.0]).unwrap();
        let f = grid.sample(|t| 1.0 / t);
        let g = grid.sample(|t| t);
        let v = sup_product(&grid, &f, Tails::power(-1.0, -1.0), &g, Tails::power(1.0, 1.0));
        assert!(close(v.get(), 1.0, 1e-12));
        let f = grid.sample(|t| (1.0 / t).min(1.0));
        let v = sup_product(&grid, &f, Tails::power(0.0, -1.0), &g, Tails::power(1.0, 1.0));
        assert!(close(v.get(), 1.0, 1e-12));
        let zero = vec![0.0; grid.fine().len()];
        assert_eq!(sup_product(&grid, &zero, Tails::CONST, &g, Tails::power(1.0, 1.0)), ExtReal::ZERO);
    }
}
