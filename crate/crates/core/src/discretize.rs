//! Discretization of quasiconcave functions: discretizing sequences, discrete
//! `ℓ^q` norms, the local constants `B`, `C` of the discrete constant `A`,
//! and the anti-discretized quantities `A*`, `B*`.

use std::fmt;

use rayon::prelude::*;

use crate::envelope::Sampled;
use crate::error::{Error, Result};
use crate::ext_real::{mul0, pow0, ExtReal};
use crate::grid::{Grid, GridSpec};
use crate::hardy::LinearHardyProblem;
use crate::iterated::{sup_layer, IteratedExponents};
use crate::power::primitive_power;
use crate::scenario::{sample_big_u, sample_v, PathMode, Problem, Scenario};
use crate::special::beta;
use crate::stieltjes::{fundamental_function, kernel_at, BorelMeasure, Orientation};
use crate::tail::Tails;
use crate::weights::{primitive_u, RadialWeight, VEnvelope};

pub use crate::iterated::is_admissible;

/// Default ratio of consecutive values along a discretizing sequence.
pub const DEFAULT_LAMBDA: f64 = 2.0;

/// Cells of the auxiliary grid used for each local constant `B`.
const LOCAL_POINTS: usize = 512;

/// Relative rounding slack of the clause checks.
const CHECK_TOL: f64 = 1e-9;

/// `g` nondecreasing and `g/b` nonincreasing on the samples, both up to a
/// factor `d`.
pub fn check_quasiconcave(g: &Sampled, b: &Sampled, d: f64) -> bool {
    let slack = d * (1.0 + CHECK_TOL);
    let (mut gmax, mut hmin) = (0.0f64, f64::INFINITY);
    for (&gv, &bv) in g.vals.iter().zip(&b.vals) {
        let h = gv / bv;
        if gv * slack < gmax || h > hmin * slack {
            return false;
        }
        gmax = gmax.max(gv);
        hmin = hmin.min(h);
    }
    true
}

/// `g(0+) = 0`, `1/g(∞) = 0`, `g/b(∞) = 0` and `b/g(0+) = 0`, decided on
/// the tails.
pub fn check_nondegenerate_qc(g: &Sampled, b: &Sampled) -> bool {
    let ratio = g.tails.mul(b.tails.powf(-1.0));
    g.tails.zero.vanishes_at_zero()
        && g.tails.inf.blows_up_at_inf()
        && ratio.inf.vanishes_at_inf()
        && ratio.powf(-1.0).zero.vanishes_at_zero()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IndexClass {
    /// `g(t) ≈ g(x_k)` on the cell.
    Z1,
    /// `g(t)/b(t) ≈ g(x_k)/b(x_k)` on the cell.
    Z2,
}

impl fmt::Display for IndexClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IndexClass::Z1 => "Z1",
            IndexClass::Z2 => "Z2",
        })
    }
}

/// Finite window `k = k_min ..= k_max` of a discretizing sequence with
/// `x_0 = 1`, built on the nodes of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizingSequence {
    pub k_min: i64,
    pub points: Vec<f64>,
    /// Fine-point indices of the `x_k` in the grid they were built on.
    pub indices: Vec<usize>,
    pub g: Vec<f64>,
    pub b: Vec<f64>,
    /// Class of `k`; the last cell runs to the grid edge.
    pub classes: Vec<IndexClass>,
    pub lambda: f64,
    pub d: f64,
    /// The window hit the left (right) grid edge before `g` ran out.
    pub boundary_lo: bool,
    pub boundary_hi: bool,
}

/// Outcome of the three clause checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClauseReport {
    /// `b(x_{k+1}) ≥ λ b(x_k)`.
    pub growth: bool,
    /// `g(x_k)` nondecreasing and `g(x_k)/b(x_k)` nonincreasing up to `D`.
    pub monotone: bool,
    /// Every cell equivalent within `D` in its class.
    pub decomposition: bool,
}

impl ClauseReport {
    pub fn all(&self) -> bool {
        self.growth && self.monotone && self.decomposition
    }
}

impl DiscretizingSequence {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.points.len() as i64 - 1
    }

    pub fn ks(&self) -> impl Iterator<Item = i64> + '_ {
        self.k_min..=self.k_max()
    }

    pub fn x(&self, k: i64) -> f64 {
        self.points[(k - self.k_min) as usize]
    }

    pub fn class(&self, k: i64) -> IndexClass {
        self.classes[(k - self.k_min) as usize]
    }

    /// Clause checks against the sampled `g`, `b` the sequence was built from.
    pub fn check_clauses(&self, g: &Sampled, b: &Sampled) -> ClauseReport {
        let d = self.d * (1.0 + CHECK_TOL);
        let growth = self.b.windows(2).all(|w| w[1] >= self.lambda * w[0] * (1.0 - CHECK_TOL));
        let monotone = self.g.windows(2).zip(self.b.windows(2)).all(|(gw, bw)| {
            gw[1] * d >= gw[0] && gw[1] / bw[1] <= d * gw[0] / bw[0]
        });
        let decomposition = (0..self.len()).all(|i| {
            let (lo, hi) = self.cell(i, g.vals.len());
            cell_eligible(&g.vals[lo..=hi], &b.vals[lo..=hi], self.d, self.classes[i])
        });
        ClauseReport { growth, monotone, decomposition }
    }

    fn cell(&self, i: usize, n: usize) -> (usize, usize) {
        let lo = self.indices[i];
        let hi = self.indices.get(i + 1).copied().unwrap_or(n - 1);
        (lo, hi)
    }
}

/// Whether the samples of one cell (first sample at `x_k`) are equivalent
/// within `d` to `g(x_k)`, resp. `g(x_k)/b(x_k)`.
fn cell_eligible(g: &[f64], b: &[f64], d: f64, class: IndexClass) -> bool {
    let d = d * (1.0 + CHECK_TOL);
    let within = |v: f64, v0: f64| v <= d * v0 && v0 <= d * v;
    match class {
        IndexClass::Z1 => g.iter().all(|&v| within(v, g[0])),
        IndexClass::Z2 => {
            let h0 = g[0] / b[0];
            g.iter().zip(b).all(|(&gv, &bv)| within(gv / bv, h0))
        }
    }
}

/// Class of a cell, `Z1` on ties; `None` if neither option holds.
fn cell_class(g: &[f64], b: &[f64], d: f64) -> Option<IndexClass> {
    [IndexClass::Z1, IndexClass::Z2].into_iter().find(|&c| cell_eligible(g, b, d, c))
}

/// Greedy discretizing sequence of `g` with respect to `b` on the grid
/// nodes, starting from `x_0 = 1`; equivalences are checked with `D = λ²`.
pub fn discretizing_sequence(grid: &Grid, g: &Sampled, b: &Sampled, lambda: f64) -> Result<DiscretizingSequence> {
    if !(lambda > 1.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda = {lambda} must exceed 1")));
    }
    if !is_admissible(b) {
        return Err(Error::Precondition("b is not admissible".into()));
    }
    if !check_nondegenerate_qc(g, b) {
        return Err(Error::Degenerate("g is not a non-degenerate quasiconcave function of b".into()));
    }
    let start = grid.node_index(1.0).ok_or_else(|| Error::Domain("1 is not a grid node".into()))?;
    let nodes = grid.nodes().len();
    let gv = |k: usize| g.vals[4 * k];
    let hv = |k: usize| g.vals[4 * k] / b.vals[4 * k];
    if !(gv(start) > 0.0 && gv(start).is_finite()) {
        return Err(Error::Degenerate(format!("g(1) = {} admits no discretization", gv(start))));
    }
    let mut right = vec![start];
    let mut cur = start;
    let boundary_hi = loop {
        match (cur + 1..nodes).find(|&j| gv(j) >= lambda * gv(cur) * (1.0 - CHECK_TOL) || hv(j) <= hv(cur) / lambda * (1.0 + CHECK_TOL)) {
            Some(j) => {
                right.push(j);
                cur = j;
            }
            None => break true,
        }
    };
    let mut left = Vec::new();
    cur = start;
    let boundary_lo = loop {
        match (0..cur).rev().find(|&j| gv(j) <= gv(cur) / lambda * (1.0 + CHECK_TOL) || hv(j) >= lambda * hv(cur) * (1.0 - CHECK_TOL)) {
            Some(j) => {
                left.push(j);
                cur = j;
            }
            None => break true,
        }
    };
    if left.is_empty() && right.len() == 1 {
        return Err(Error::Degenerate("no progress from x_0 = 1".into()));
    }
    let k_min = -(left.len() as i64);
    left.reverse();
    left.extend(right);
    let indices: Vec<usize> = left.into_iter().map(|k| 4 * k).collect();
    let d = lambda * lambda;
    let mut seq = DiscretizingSequence {
        k_min,
        points: indices.iter().map(|&i| grid.fine()[i]).collect(),
        g: indices.iter().map(|&i| g.vals[i]).collect(),
        b: indices.iter().map(|&i| b.vals[i]).collect(),
        indices,
        classes: Vec::new(),
        lambda,
        d,
        boundary_lo,
        boundary_hi,
    };
    seq.classes = (0..seq.len())
        .map(|i| {
            let (lo, hi) = seq.cell(i, g.vals.len());
            cell_class(&g.vals[lo..=hi], &b.vals[lo..=hi], d).unwrap_or(IndexClass::Z2)
        })
        .collect();
    Ok(seq)
}

/// `(Σ |a_k w_k|^q)^{1/q}`, or `sup_k |a_k w_k|` for `q = ∞`.
pub fn discrete_norm(a: &[f64], w: &[f64], q: f64) -> ExtReal {
    let prods = a.iter().zip(w).map(|(x, y)| mul0(x.abs(), y.abs()));
    if q.is_infinite() {
        return ExtReal::from_f64(prods.fold(0.0, f64::max));
    }
    ExtReal::from_f64(prods.map(|v| pow0(v, q)).sum()).powf(1.0 / q)
}

/// `K` with `‖τ_k Σ_{m≤k} a_m‖_q ≤ K ‖τ_k a_k‖_q` whenever
/// `τ_{k+1} ≤ ratio · τ_k`, `ratio < 1`.
pub fn lemma_constant(ratio: f64, q: f64) -> f64 {
    if q >= 1.0 {
        1.0 / (1.0 - ratio)
    } else {
        (1.0 / (1.0 - ratio.powf(q))).powf(1.0 / q)
    }
}

/// Lower bound of the best `C` in `‖a w‖_q ≤ C ‖a v‖_θ`, maximized over
/// coordinate vectors and blocks of the resonant sequence
/// `a_k = (w_k/v_k)^{ρ/θ} / v_k`.
pub fn embedding_lower(w: &[f64], v: &[f64], q: f64, theta: f64) -> f64 {
    let g = (1.0 / q - 1.0 / theta).max(0.0);
    let n = w.len();
    let mut best: f64 = 0.0;
    for k in 0..n {
        best = best.max(w[k] / v[k]);
    }
    if g == 0.0 {
        return best;
    }
    let rho = 1.0 / g;
    // Resonant sequence normalized by its largest ratio to stay in range.
    let a: Vec<f64> = w.iter().zip(v).map(|(x, y)| (x / y / best).powf(rho / theta) / y).collect();
    for i in 0..n {
        for j in i..n {
            let num = discrete_norm(&a[i..=j], &w[i..=j], q).get();
            let den = discrete_norm(&a[i..=j], &v[i..=j], theta).get();
            if den > 0.0 {
                best = best.max(num / den);
            }
        }
    }
    best
}

fn iterated_parts(s: &Scenario) -> Result<(IteratedExponents, &RadialWeight, &RadialWeight, &BorelMeasure)> {
    match &s.problem {
        Problem::Iterated { exponents, u, v, mu } => Ok((*exponents, u, v, mu)),
        Problem::Bilinear { .. } => Err(Error::Domain("discretization needs an iterated scenario".into())),
    }
}

fn check_shell(lo: f64, hi: f64) -> Result<()> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!("invalid shell [{lo}, {hi})")));
    }
    Ok(())
}

/// `C(lo, hi) = ‖v^{-1/θ}‖_{θ', S[lo,hi)}` (`‖v^{-1}‖_1` for `θ = ∞`).
pub fn local_c(s: &Scenario, lo: f64, hi: f64) -> Result<ExtReal> {
    check_shell(lo, hi)?;
    let (ex, _, v, _) = iterated_parts(s)?;
    Ok(ExtReal::from_f64(VEnvelope::new(v, s.n, ex.theta).shell_norm(lo, hi)))
}

/// `B(lo, hi)`: norm of the dual Hardy operator from `L^θ(v)` on the shell
/// `S[lo,hi)` to `L^p(u)` on `[lo, hi)`.
pub fn local_b(s: &Scenario, lo: f64, hi: f64) -> Result<ExtReal> {
    check_shell(lo, hi)?;
    let (ex, u, v, _) = iterated_parts(s)?;
    let prob =
        LinearHardyProblem::new(u.restricted(lo, hi, 0.0), v.restricted(lo, hi, f64::INFINITY), s.n, ex.theta, ex.p);
    let grid = prob.grid(GridSpec { t_min: lo, t_max: hi, points: LOCAL_POINTS })?;
    Ok(prob.on_grid(&grid))
}

/// A scenario's grid with `U`, `φ`, `b = U^{q/p}` and the discretizing
/// sequence of `φ` with respect to `b`.
#[derive(Clone, Debug)]
pub struct Discretization {
    pub grid: Grid,
    pub big_u: Sampled,
    pub phi: Sampled,
    pub b: Sampled,
    pub seq: DiscretizingSequence,
}

/// `φ` in closed form for `U = A t^a`, `dμ = m t^{κ-1} dt`:
/// `(m/a) B(κ/a, s - κ/a) x^κ`.
fn phi_power(grid: &Grid, a: f64, m: f64, kappa: f64, s: f64) -> Option<Sampled> {
    if !(a > 0.0 && kappa > 0.0 && kappa < a * s && m > 0.0) {
        return None;
    }
    let c = m / a * beta(kappa / a, s - kappa / a);
    Some(Sampled::from_fn(grid, |t| c * t.powf(kappa), 0.0, Tails::power(kappa, kappa)))
}

/// Builds the [`Discretization`] of an iterated scenario on its grid.
pub fn discretize_scenario(s: &Scenario, lambda: f64) -> Result<Discretization> {
    let (ex, u, _, mu) = iterated_parts(s)?;
    let quad = s.path == PathMode::Quadrature;
    let grid = s.build_grid()?;
    let big_u = sample_big_u(&grid, u, quad);
    let sratio = ex.q / ex.p;
    let closed = (s.is_power() && !quad)
        .then(|| {
            let a = primitive_power(u)?;
            let (m, e) = mu.density.as_ref()?.as_power()?;
            phi_power(&grid, a.e, m, e + 1.0, sratio)
        })
        .flatten();
    let phi = match closed {
        Some(phi) => phi,
        None => fundamental_function(&grid, &mu.compile(&grid)?, &big_u, sratio),
    };
    let b = big_u.powf(sratio);
    let seq = discretizing_sequence(&grid, &phi, &b, lambda)?;
    Ok(Discretization { grid, big_u, phi, b, seq })
}

/// Local factors at one index of the discrete constant.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTerm {
    pub k: i64,
    pub x: f64,
    pub phi: f64,
    pub big_u: f64,
    /// `B(x_{k-1}, x_k)`; `None` at the left window edge.
    pub b: Option<ExtReal>,
    /// `C(x_k, x_{k+1})`; `None` at the right window edge.
    pub c: Option<ExtReal>,
}

/// `A = ‖φ(x_k)^{1/q} U(x_k)^{-1/p} B(x_{k-1},x_k)‖_ρ + ‖φ(x_k)^{1/q} C(x_k,x_{k+1})‖_ρ`
/// over the window.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteConstant {
    pub value: ExtReal,
    pub first: ExtReal,
    pub second: ExtReal,
    pub terms: Vec<LocalTerm>,
}

impl DiscreteConstant {
    /// Largest window-edge contribution of either sum; the truncated tails
    /// decay geometrically from it.
    pub fn edge_term(&self, ex: &IteratedExponents) -> ExtReal {
        let (t1, t2) = term_vectors(&self.terms, ex);
        let ends = |t: &[f64]| t.first().copied().unwrap_or(0.0).max(t.last().copied().unwrap_or(0.0));
        ExtReal::from_f64(ends(&t1).max(ends(&t2)))
    }
}

fn term_vectors(terms: &[LocalTerm], ex: &IteratedExponents) -> (Vec<f64>, Vec<f64>) {
    let w = |t: &LocalTerm| pow0(t.phi, 1.0 / ex.q);
    let first = terms
        .iter()
        .map(|t| t.b.map_or(0.0, |b| mul0(mul0(w(t), pow0(t.big_u, -1.0 / ex.p)), b.get())))
        .collect();
    let second = terms.iter().map(|t| t.c.map_or(0.0, |c| mul0(w(t), c.get()))).collect();
    (first, second)
}

pub fn discrete_a(s: &Scenario, seq: &DiscretizingSequence) -> Result<DiscreteConstant> {
    let (ex, u, _, _) = iterated_parts(s)?;
    let n = seq.len();
    let terms = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = seq.points[i];
            let b = if i > 0 { Some(local_b(s, seq.points[i - 1], x)?) } else { None };
            let c = if i + 1 < n { Some(local_c(s, x, seq.points[i + 1])?) } else { None };
            Ok(LocalTerm { k: seq.k_min + i as i64, x, phi: seq.g[i], big_u: primitive_u(u, x).get(), b, c })
        })
        .collect::<Result<Vec<_>>>()?;
    let (t1, t2) = term_vectors(&terms, &ex);
    let ones = vec![1.0; n];
    let first = discrete_norm(&t1, &ones, ex.rho);
    let second = discrete_norm(&t2, &ones, ex.rho);
    Ok(DiscreteConstant { value: first + second, first, second, terms })
}

/// `A* = ‖φ(x_k)^{1/q} sup_t 𝒰(t,x_k)^{1/p} V_θ(t)‖_ρ` and, when `p < θ`,
/// `B* = ‖φ(x_k)^{1/q} (∫ 𝒰(t,x_k)^{r/p} d(-V_θ(t-)^r))^{1/r}‖_ρ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AntiDiscretized {
    pub a_star: ExtReal,
    pub b_star: Option<ExtReal>,
}

pub fn anti_discretized(s: &Scenario, d: &Discretization) -> Result<AntiDiscretized> {
    let (ex, _, v, _) = iterated_parts(s)?;
    let quad = s.path == PathMode::Quadrature;
    let venv = sample_v(&d.grid, v, s.n, ex.theta, quad);
    let seq = &d.seq;
    let w: Vec<f64> = seq.g.iter().map(|g| pow0(*g, 1.0 / ex.q)).collect();
    let sl = sup_layer(&d.big_u, 1.0 / ex.p, &venv);
    let sv: Vec<f64> = seq.indices.iter().map(|&i| sl.vals[i]).collect();
    let a_star = discrete_norm(&sv, &w, ex.rho);
    let b_star = match ex.r {
        Some(r) => {
            let m = BorelMeasure::from_stieltjes(venv, r, None).compile(&d.grid)?;
            let jv: Vec<f64> = seq
                .indices
                .par_iter()
                .map(|&i| {
                    let ux = d.big_u.vals[i];
                    pow0(kernel_at(&d.grid, &d.big_u, r / ex.p, &m, Orientation::Reverse, ux), 1.0 / r)
                })
                .collect();
            Some(discrete_norm(&jv, &w, ex.rho))
        }
        None => None,
    };
    Ok(AntiDiscretized { a_star, b_star })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(GridSpec::default(), &[1.0]).unwrap()
    }

    fn power(g: &Grid, e: f64) -> Sampled {
        Sampled::power(g, e)
    }

    #[test]
    fn admissibility_examples() {
        let g = grid();
        assert!(is_admissible(&power(&g, 1.0)));
        let bounded = Sampled::from_fn(&g, |t| t.min(1.0), 0.0, Tails::power(1.0, 0.0));
        assert!(!is_admissible(&bounded));
        let quartic = Sampled::from_fn(&g, |t| t.powi(4) / 4.0, 0.0, Tails::power(4.0, 4.0));
        assert!(is_admissible(&quartic));
    }

    #[test]
    fn quasiconcavity_examples() {
        let g = grid();
        let b = power(&g, 1.0);
        let root = power(&g, 0.5);
        assert!(check_quasiconcave(&root, &b, 1.0));
        assert!(check_nondegenerate_qc(&root, &b));
        assert!(check_quasiconcave(&b, &b, 1.0));
        assert!(!check_nondegenerate_qc(&b, &b));
        let pi_root = root.scaled(PI);
        assert!(check_quasiconcave(&pi_root, &b, 1.0) && check_nondegenerate_qc(&pi_root, &b));
        // t² is not b-quasiconcave for b = t.
        assert!(!check_quasiconcave(&power(&g, 2.0), &b, 4.0));
    }

    #[test]
    fn sqrt_sequence_is_powers_of_four() {
        let g = grid();
        let (phi, b) = (power(&g, 0.5), power(&g, 1.0));
        let seq = discretizing_sequence(&g, &phi, &b, 2.0).unwrap();
        assert_eq!(seq.x(0), 1.0);
        assert!(seq.k_min < -5 && seq.k_max() > 5);
        let cell = (1e12f64).ln() / 2048.0;
        for k in seq.ks() {
            let dev = (seq.x(k).ln() - k as f64 * 4f64.ln()).abs();
            assert!(dev <= (k.unsigned_abs() as f64 + 1.0) * cell, "k={k} x={}", seq.x(k));
            assert_eq!(seq.class(k), IndexClass::Z1);
        }
        assert!(seq.check_clauses(&phi, &b).all());
        assert!(seq.boundary_lo && seq.boundary_hi);
    }

    #[test]
    fn degenerate_and_bad_lambda_rejected() {
        let g = grid();
        let b = power(&g, 1.0);
        assert!(matches!(discretizing_sequence(&g, &b, &b, 2.0), Err(Error::Degenerate(_))));
        assert!(discretizing_sequence(&g, &power(&g, 0.5), &b, 1.0).is_err());
    }

    #[test]
    fn clause_checker_rejects_broken_sequences() {
        let g = grid();
        let (phi, b) = (power(&g, 0.5), power(&g, 1.0));
        let seq = discretizing_sequence(&g, &phi, &b, 2.0).unwrap();
        let mut merged = seq.clone();
        merged.points.remove(3);
        merged.indices.remove(3);
        merged.g.remove(3);
        merged.b.remove(3);
        merged.classes.remove(3);
        let report = merged.check_clauses(&phi, &b);
        assert!(report.growth && report.monotone && !report.decomposition);
        let mut slow = seq.clone();
        slow.lambda = 8.0;
        assert!(!slow.check_clauses(&phi, &b).growth);
    }

    #[test]
    fn discrete_norm_examples() {
        assert_eq!(discrete_norm(&[1.0; 3], &[1.0; 3], 1.0).get(), 3.0);
        assert!((discrete_norm(&[3.0, 4.0], &[1.0, 1.0], 2.0).get() - 5.0).abs() < 1e-15);
        let a: Vec<f64> = (0..=10).map(|k| 2f64.powi(-k)).collect();
        assert_eq!(discrete_norm(&a, &[1.0; 11], f64::INFINITY).get(), 1.0);
    }

    fn e_scenario(theta: f64, v: RadialWeight) -> Scenario {
        Scenario::iterated(
            1,
            2.0,
            2.0,
            theta,
            RadialWeight::power(1.0, 0.0),
            v,
            BorelMeasure::with_density(RadialWeight::power(1.0, -0.5)),
        )
        .unwrap()
    }

    #[test]
    fn local_constants() {
        let s = e_scenario(2.0, RadialWeight::power(1.0, 3.0));
        let c = local_c(&s, 1.0, 2.0).unwrap().get();
        assert!((c - 0.75f64.sqrt()).abs() < 1e-12);
        let inf = e_scenario(2.0, RadialWeight::Infinite);
        assert_eq!(local_c(&inf, 1.0, 2.0).unwrap(), ExtReal::ZERO);
        let zero_u = Scenario::iterated(
            1,
            2.0,
            2.0,
            2.0,
            RadialWeight::power(1.0, 0.0).restricted(0.0, 0.5, 0.0),
            RadialWeight::power(1.0, 3.0),
            BorelMeasure::with_density(RadialWeight::power(1.0, -0.5)),
        )
        .unwrap();
        assert_eq!(local_b(&zero_u, 1.0, 2.0).unwrap(), ExtReal::ZERO);
    }

    #[test]
    fn local_b_matches_dense_scan() {
        // θ = p = 2, u ≡ 1, v = t³ on [1, 2): B = sup_t (t-1)^{1/2} (∫_t^2 2 s^{-3} ... )
        // with V(t)² = ∫_t^2 s^{-3} ds · 2 = t^{-2} - 1/4.
        let s = e_scenario(2.0, RadialWeight::power(1.0, 3.0));
        let got = local_b(&s, 1.0, 2.0).unwrap().get();
        let exact = (0..=200_000)
            .map(|i| 1.0 + i as f64 / 200_000.0)
            .map(|t: f64| ((t - 1.0) * (t.powi(-2) - 0.25)).sqrt())
            .fold(0.0, f64::max);
        assert!((got / exact - 1.0).abs() < 1e-3, "{got} vs {exact}");
    }

    #[test]
    fn sqrt_measure_sequence() {
        let s = e_scenario(2.0, RadialWeight::power(1.0, 3.0)).with_path(PathMode::Quadrature);
        let s = s.with_grid(GridSpec::with_points(512));
        let d = discretize_scenario(&s, 2.0).unwrap();
        // U = t, dμ = t^{-1/2} dt, s = 1: φ(x) = π √x.
        let i1 = 4 * d.grid.node_index(1.0).unwrap();
        assert!((d.phi.vals[i1] / PI - 1.0).abs() < 1e-6);
        assert!(d.seq.check_clauses(&d.phi, &d.b).all());
        for k in d.seq.ks() {
            let dev = (d.seq.x(k).ln() / 4f64.ln() - k as f64).abs();
            assert!(dev < 0.2 * (k.unsigned_abs() as f64 + 1.0));
        }
    }

    #[test]
    fn anti_discretized_zero_and_divergent() {
        let zero = e_scenario(2.0, RadialWeight::Infinite);
        let d = discretize_scenario(&zero, 2.0).unwrap();
        let ad = anti_discretized(&zero, &d).unwrap();
        assert_eq!(ad.a_star, ExtReal::ZERO);
        assert_eq!(ad.b_star, None);
        let a = discrete_a(&zero, &d.seq).unwrap();
        assert_eq!(a.second, ExtReal::ZERO);
    }

    #[test]
    fn discrete_a_tracks_a_star_on_power_data() {
        // p = θ = 2, q = 4, U = t, V = 2 t^{-1/4}, dμ = dt: φ ∝ x, balanced by κ/q = 1/4.
        let s = Scenario::iterated(
            1,
            2.0,
            4.0,
            2.0,
            RadialWeight::power(1.0, 0.0),
            RadialWeight::power(1.0, 1.5),
            BorelMeasure::with_density(RadialWeight::power(1.0, 0.0)),
        )
        .unwrap();
        let d = discretize_scenario(&s, 2.0).unwrap();
        assert!(d.seq.check_clauses(&d.phi, &d.b).all());
        let a = discrete_a(&s, &d.seq).unwrap().value.get();
        let ad = anti_discretized(&s, &d).unwrap().a_star.get();
        assert!(a.is_finite() && ad.is_finite() && ad > 0.0);
        let ratio = a / ad;
        assert!((1.0 / 50.0..=50.0).contains(&ratio), "A = {a}, A* = {ad}");
    }

    fn prefix_sums(a: &[f64]) -> Vec<f64> {
        a.iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    }

    fn prefix_max(a: &[f64]) -> Vec<f64> {
        a.iter()
            .scan(0.0f64, |acc, x| {
                *acc = acc.max(*x);
                Some(*acc)
            })
            .collect()
    }

    fn geometric(start: f64, ratios: &[f64]) -> Vec<f64> {
        let mut out = vec![start];
        for r in ratios {
            out.push(out.last().unwrap() * r);
        }
        out
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(256))]

        #[test]
        fn geometric_sum_equivalence(
            ratios in prop::collection::vec(0.05f64..0.5, 1..30),
            a in prop::collection::vec(0.0f64..10.0, 31),
            q in prop_oneof![0.3f64..1.0, 1.0f64..6.0, Just(f64::INFINITY)],
        ) {
            let tau = geometric(1.0, &ratios);
            let a = &a[..tau.len()];
            let r = ratios.iter().cloned().fold(0.0, f64::max);
            let k = lemma_constant(r, q);
            prop_assert!(k <= 2.0 / (1.0 - r) || q < 1.0);
            let rhs = discrete_norm(a, &tau, q).get();
            for lhs in [prefix_sums(a), prefix_max(a)] {
                let lhs = discrete_norm(&lhs, &tau, q).get();
                prop_assert!(lhs <= k * rhs * (1.0 + 1e-12) + 1e-300);
                prop_assert!(rhs <= lhs * (1.0 + 1e-12) + 1e-300);
            }
        }

        #[test]
        fn resonance_bound(
            w in prop::collection::vec(0.01f64..10.0, 1..12),
            v in prop::collection::vec(0.01f64..10.0, 12),
            q in 0.5f64..6.0,
            theta in 1.0f64..6.0,
        ) {
            let v = &v[..w.len()];
            let c = embedding_lower(&w, v, q, theta);
            let g = (1.0 / q - 1.0 / theta).max(0.0);
            let rho = if g == 0.0 { f64::INFINITY } else { 1.0 / g };
            let ratio: Vec<f64> = w.iter().zip(v).map(|(x, y)| x / y).collect();
            let top = ratio.iter().cloned().fold(0.0, f64::max);
            let scaled: Vec<f64> = ratio.iter().map(|x| x / top).collect();
            let target = top * discrete_norm(&scaled, &vec![1.0; w.len()], rho).get();
            prop_assert!(target <= c * (1.0 + 1e-9));
            prop_assert!(c <= target * (1.0 + 1e-9));
        }
    }
}
