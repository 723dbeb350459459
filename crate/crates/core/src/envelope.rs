//! Functions sampled on the fine points of a [`Grid`].

use crate::ext_real::{div0, mul0, pow0};
use crate::grid::Grid;
use crate::tail::{Tail, Tails};
use crate::weights::{Direction, Profile};

/// Non-negative function sampled on the fine points, with its value at `0`
/// and its symbolic tails.
#[derive(Clone, Debug, PartialEq)]
pub struct Sampled {
    pub vals: Vec<f64>,
    pub zero: f64,
    pub tails: Tails,
}

impl Sampled {
    pub fn new(vals: Vec<f64>, zero: f64, tails: Tails) -> Self {
        Sampled { vals, zero, tails }
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64, zero: f64, tails: Tails) -> Self {
        Sampled { vals: grid.sample(f), zero, tails }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        Sampled { vals: vec![c; grid.fine().len()], zero: c, tails: if c == 0.0 { ZERO_TAILS } else { Tails::CONST } }
    }

    /// `t ↦ t^e`.
    pub fn power(grid: &Grid, e: f64) -> Self {
        Self::from_fn(grid, |t| t.powf(e), pow0(0.0, e), Tails::power(e, e))
    }

    pub fn mul(&self, other: &Sampled) -> Sampled {
        Sampled {
            vals: self.vals.iter().zip(&other.vals).map(|(a, b)| mul0(*a, *b)).collect(),
            zero: mul0(self.zero, other.zero),
            tails: self.tails.mul(other.tails),
        }
    }

    pub fn div(&self, other: &Sampled) -> Sampled {
        Sampled {
            vals: self.vals.iter().zip(&other.vals).map(|(a, b)| div0(*a, *b)).collect(),
            zero: div0(self.zero, other.zero),
            tails: self.tails.mul(other.tails.powf(-1.0)),
        }
    }

    pub fn powf(&self, k: f64) -> Sampled {
        Sampled {
            vals: self.vals.iter().map(|v| pow0(*v, k)).collect(),
            zero: pow0(self.zero, k),
            tails: self.tails.powf(k),
        }
    }

    pub fn scaled(&self, c: f64) -> Sampled {
        Sampled {
            vals: self.vals.iter().map(|v| mul0(*v, c)).collect(),
            zero: mul0(self.zero, c),
            tails: if c == 0.0 { ZERO_TAILS } else { self.tails },
        }
    }

    pub fn is_zero(&self) -> bool {
        self.zero == 0.0 && self.vals.iter().all(|v| *v == 0.0)
    }

    /// `∫_0^∞ f dt`.
    pub fn integrate(&self, grid: &Grid) -> f64 {
        grid.integrate(&self.vals, self.tails)
    }

    /// `sup_{t>0} f`.
    pub fn sup(&self, grid: &Grid) -> f64 {
        grid.sup(&self.vals, self.tails)
    }
}

/// Tails of the zero function.
pub const ZERO_TAILS: Tails = Tails {
    zero: Tail { exp: f64::INFINITY, log: 0.0 },
    inf: Tail { exp: f64::NEG_INFINITY, log: 0.0 },
};

/// A monotone function sampled on a grid: values, logarithmic slopes
/// `|t f'/f|` (for the Stieltjes densities built from it), and its jumps.
#[derive(Clone, Debug)]
pub struct MonotoneEnvelope {
    pub f: Sampled,
    pub direction: Direction,
    pub slope: Vec<f64>,
    pub slope_tails: Tails,
    /// `(fine index, left value)` at every jump; jumps sit on nodes.
    pub jumps: Vec<(usize, f64)>,
}

impl MonotoneEnvelope {
    pub fn sample(profile: &dyn Profile, grid: &Grid) -> Self {
        let f = Sampled::from_fn(grid, |t| profile.value(t), profile.at_zero(), profile.tails());
        let slope = grid.sample(|t| profile.log_slope(t));
        let mut jumps: Vec<(usize, f64)> = profile
            .jump_points()
            .into_iter()
            .filter_map(|t| grid.node_index(t).map(|k| (4 * k, profile.left_value(t))))
            .collect();
        jumps.sort_by_key(|j| j.0);
        MonotoneEnvelope { f, direction: profile.direction(), slope, slope_tails: profile.slope_tails(), jumps }
    }

    pub fn values(&self) -> &[f64] {
        &self.f.vals
    }

    pub fn tails(&self) -> Tails {
        self.f.tails
    }

    /// `f(t-)` at fine index `i`.
    pub fn left_value(&self, i: usize) -> f64 {
        match self.jumps.binary_search_by_key(&i, |j| j.0) {
            Ok(k) => self.jumps[k].1,
            Err(_) => self.f.vals[i],
        }
    }

    /// Monotone in the declared direction up to relative slack `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.f.vals.windows(2).all(|w| match self.direction {
            Direction::Nondecreasing => w[1] >= w[0] * (1.0 - tol),
            Direction::Nonincreasing => w[1] <= w[0] * (1.0 + tol),
        })
    }

    /// The function at the `k`-th power, keeping slopes and jumps consistent.
    pub fn powf(&self, k: f64) -> MonotoneEnvelope {
        let direction = match (self.direction, k >= 0.0) {
            (d, true) => d,
            (Direction::Nondecreasing, false) => Direction::Nonincreasing,
            (Direction::Nonincreasing, false) => Direction::Nondecreasing,
        };
        MonotoneEnvelope {
            f: self.f.powf(k),
            direction,
            slope: self.slope.iter().map(|s| s * k.abs()).collect(),
            slope_tails: self.slope_tails,
            jumps: self.jumps.iter().map(|&(i, v)| (i, pow0(v, k))).collect(),
        }
    }

    /// Pointwise value at an arbitrary radius by log-linear interpolation of
    /// the samples (used only for diagnostics and discretization listings).
    pub fn interpolate(&self, grid: &Grid, t: f64) -> f64 {
        let fine = grid.fine();
        if t <= fine[0] {
            let (t0, y0) = (fine[0], self.f.vals[0]);
            return if self.f.tails.zero.exp.is_finite() { y0 * (t / t0).powf(self.f.tails.zero.exp) } else { y0 };
        }
        let last = fine.len() - 1;
        if t >= fine[last] {
            let (t1, y1) = (fine[last], self.f.vals[last]);
            return if self.f.tails.inf.exp.is_finite() { y1 * (t / t1).powf(self.f.tails.inf.exp) } else { y1 };
        }
        let i = fine.partition_point(|x| *x <= t) - 1;
        let (a, b) = (self.f.vals[i], self.f.vals[i + 1]);
        if a <= 0.0 || b <= 0.0 || a.is_infinite() || b.is_infinite() {
            return a;
        }
        let w = (t / fine[i]).ln() / (fine[i + 1] / fine[i]).ln();
        (a.ln() * (1.0 - w) + b.ln() * w).exp()
    }
}
