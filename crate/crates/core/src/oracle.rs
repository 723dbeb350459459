//! Brute-force lower bounds on the best constants of the bilinear and the
//! iterated inequality.
//!
//! Test functions are radial steps `h = c_j ψ` on the log cells of an oracle
//! grid, with the profile `ψ = v^{1-p'}` (`v^{-1}` for `p = ∞`, `1` for
//! `p = 1`). With this profile both `‖h‖_{p,v}` and the partial integrals
//! `∫_{|x|>t} h` are exact on every cell, so each probe ratio is the true
//! ratio of an admissible pair up to the outer quadrature.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::envelope::ZERO_TAILS;
use crate::error::{Error, Result};
use crate::exponents::conjugate;
use crate::ext_real::{pow0, ExtReal};
use crate::grid::{Grid, GRID_ENV};
use crate::scenario::{dual_transform, Form, Problem, Scenario};
use crate::special::sphere_area;
use crate::stieltjes::BorelMeasure;
use crate::weights::{Pieces, RadialWeight};

/// Label, `f`, `g` and ratio of one evaluated probe.
type Probe = (String, Vec<f64>, Option<Vec<f64>>, f64);

/// Width in `ln t` of one oracle cell.
pub const CELL_LOG_WIDTH: f64 = LN_2 / 4.0;
pub const DEFAULT_CELLS: usize = 64;
pub const DEFAULT_STARTS: usize = 16;
pub const DEFAULT_SWEEPS: usize = 50;

/// Iterations of the inner fixed-point solve.
const INNER_ITERS: usize = 60;
/// Iterations of the warm-started solve used to screen shells.
const SHELL_ITERS: usize = 8;
/// Relative improvement below which an ascent stops.
const STOP_TOL: f64 = 1e-10;
/// Relative gain per sweep below which the coordinate polish stops.
const POLISH_TOL: f64 = 1e-6;
/// Largest lattice enumerated per function in lattice mode.
const LATTICE_LIMIT: usize = 200_000;

/// Search budget and grid of the oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    /// Test-function cells, centered on `t = 1`.
    pub cells: usize,
    pub starts: usize,
    pub sweeps: usize,
    pub seed: u64,
    /// Sub-cells per cell of the outer quadrature.
    pub refine: usize,
    /// Restrict cell values to `levels` equispaced values in `[0, 1]` and
    /// make every best response exhaustive over that lattice.
    pub lattice: Option<usize>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let cells = std::env::var(GRID_ENV).ok().and_then(|s| s.parse().ok()).filter(|n| *n >= 2).unwrap_or(DEFAULT_CELLS);
        OracleConfig { cells, starts: DEFAULT_STARTS, sweeps: DEFAULT_SWEEPS, seed: 0, refine: 1, lattice: None }
    }
}

impl OracleConfig {
    pub fn with_cells(mut self, cells: usize) -> Self {
        self.cells = cells;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Cell values of the best probe: `f` (or `h`) and, for bilinear problems, `g`.
#[derive(Clone, Debug, PartialEq)]
pub struct Argmax {
    pub f: Vec<f64>,
    pub g: Option<Vec<f64>>,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeTrace {
    pub label: String,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub value: ExtReal,
    pub argmax: Option<Argmax>,
    pub trace: Vec<ProbeTrace>,
    /// Oracle nodes the cell values refer to.
    pub nodes: Vec<f64>,
}

/// Oracle nodes `2^{(j - N/2)/4}` plus the weight breakpoints inside them.
fn oracle_nodes(cells: usize, extra: &[f64]) -> Result<Vec<f64>> {
    if cells < 2 {
        return Err(Error::Domain("the oracle needs at least two cells".into()));
    }
    let half = cells as f64 / 2.0;
    let mut nodes: Vec<f64> = (0..=cells).map(|j| ((j as f64 - half) * CELL_LOG_WIDTH).exp()).collect();
    nodes[cells / 2] = 1.0;
    let (lo, hi) = (nodes[0], nodes[cells]);
    nodes.extend(extra.iter().copied().filter(|x| *x > lo && *x < hi));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup_by(|a, b| (*a / *b - 1.0).abs() < 1e-12);
    Ok(nodes)
}

/// Oracle cells refined into quadrature sub-cells.
struct Geometry {
    grid: Grid,
    nodes: Vec<f64>,
    /// Oracle cell of each fine point (`ncell` for the last node).
    cell_of: Vec<usize>,
}

impl Geometry {
    fn new(nodes: Vec<f64>, refine: usize) -> Result<Self> {
        let refine = refine.max(1);
        let mut sub = Vec::with_capacity(nodes.len() * refine);
        for w in nodes.windows(2) {
            let step = (w[1] / w[0]).ln() / refine as f64;
            sub.extend((0..refine).map(|k| w[0] * (step * k as f64).exp()));
        }
        sub.push(*nodes.last().unwrap());
        let grid = Grid::from_nodes(sub)?;
        let cell_of = grid.fine().iter().map(|&t| nodes.partition_point(|x| *x <= t * (1.0 + 1e-13)) - 1).collect();
        Ok(Geometry { grid, nodes, cell_of })
    }

    fn ncell(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// Step functions `c_j ψ` in the norm `‖·‖_{p,v}` on `ℝⁿ`.
struct Family {
    p: f64,
    /// `σ ∫_cell ψ s^{n-1}`.
    alpha: Vec<f64>,
    /// Per-cell norm weight: `‖ψ χ_cell‖_{p,v}^p`.
    beta: Vec<f64>,
    /// `σ ∫_t^{end of cell} ψ s^{n-1}` at every fine point.
    partial: Vec<f64>,
    active: Vec<bool>,
    /// A cell where `ψ` is not integrable or carries no norm.
    singular: Vec<bool>,
}

impl Family {
    fn new(geom: &Geometry, v: &RadialWeight, n: usize, p: f64) -> Self {
        let pieces = v.pieces();
        let sigma = sphere_area(n);
        let k = n as f64 - 1.0;
        let m = if p == 1.0 {
            0.0
        } else if p.is_infinite() {
            -1.0
        } else {
            1.0 - conjugate(p)
        };
        let mass = |lo: f64, hi: f64| -> f64 {
            if p == 1.0 {
                sigma * (hi.powf(k + 1.0) - lo.powf(k + 1.0)) / (k + 1.0)
            } else {
                sigma * pieces.integral(k, m, lo, hi)
            }
        };
        let nodes = &geom.nodes;
        let nc = geom.ncell();
        let alpha: Vec<f64> = (0..nc).map(|j| mass(nodes[j], nodes[j + 1])).collect();
        let beta: Vec<f64> = (0..nc)
            .map(|j| {
                if p == 1.0 {
                    sigma * pieces.integral(k, 1.0, nodes[j], nodes[j + 1])
                } else if p.is_infinite() {
                    1.0
                } else {
                    alpha[j]
                }
            })
            .collect();
        let active = (0..nc).map(|j| alpha[j] > 0.0 && alpha[j].is_finite() && beta[j] > 0.0 && beta[j].is_finite()).collect();
        let singular = (0..nc).map(|j| alpha[j].is_infinite() || (alpha[j] > 0.0 && beta[j] == 0.0)).collect();
        let partial = geom
            .grid
            .fine()
            .iter()
            .zip(&geom.cell_of)
            .map(|(&t, &j)| if j < nc { mass(t, nodes[j + 1]) } else { 0.0 })
            .collect();
        Family { p, alpha, beta, partial, active, singular }
    }

    fn len(&self) -> usize {
        self.alpha.len()
    }

    fn clean(&self, c: &mut [f64]) {
        for (x, a) in c.iter_mut().zip(&self.active) {
            if !a || !x.is_finite() || *x < 0.0 {
                *x = 0.0;
            }
        }
    }

    /// `Φ(t) = ∫_{|x|>t} h` at the fine points and at `t → 0`.
    fn phi(&self, geom: &Geometry, c: &[f64]) -> (Vec<f64>, f64) {
        let nc = self.len();
        let mut suffix = vec![0.0; nc + 1];
        for j in (0..nc).rev() {
            let term = if c[j] > 0.0 { c[j] * self.alpha[j] } else { 0.0 };
            suffix[j] = suffix[j + 1] + term;
        }
        let vals = geom
            .cell_of
            .iter()
            .zip(&self.partial)
            .map(|(&j, &pt)| if j < nc { suffix[j + 1] + if c[j] > 0.0 { c[j] * pt } else { 0.0 } } else { 0.0 })
            .collect();
        (vals, suffix[0])
    }

    /// Gradient in `c` of `Σ_i y_i Φ(t_i) + y0 Φ(0)`.
    fn adjoint(&self, geom: &Geometry, y: &[f64], y0: f64) -> Vec<f64> {
        let nc = self.len();
        let mut below = vec![0.0; nc + 1];
        let mut own = vec![0.0; nc];
        for ((&j, &yi), &pt) in geom.cell_of.iter().zip(y).zip(&self.partial) {
            if j < nc && yi != 0.0 {
                below[j + 1] += yi;
                own[j] += yi * pt;
            }
        }
        let mut acc = y0;
        (0..nc)
            .map(|j| {
                acc += below[j];
                acc * self.alpha[j] + own[j]
            })
            .collect()
    }

    fn norm(&self, c: &[f64]) -> f64 {
        if self.p.is_infinite() {
            return c.iter().zip(&self.active).filter(|(_, a)| **a).map(|(x, _)| *x).fold(0.0, f64::max);
        }
        let s: f64 = c.iter().zip(&self.beta).zip(&self.active).filter(|(_, a)| **a).map(|((x, b), _)| b * x.powf(self.p)).sum();
        s.powf(1.0 / self.p)
    }

    fn shell(&self, a: usize, b: usize) -> Vec<f64> {
        (0..self.len()).map(|j| if j >= a && j <= b && self.active[j] { 1.0 } else { 0.0 }).collect()
    }

    fn random(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let mut c: Vec<f64> = (0..self.len())
            .map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { (8.0 * (rng.random::<f64>() - 0.5)).exp() })
            .collect();
        self.clean(&mut c);
        if c.iter().all(|x| *x == 0.0) {
            c = self.shell(0, self.len() - 1);
        }
        c
    }
}

/// `‖Φ‖` against fine-point weights `w` and a weight `w0` for `t → 0`.
fn weighted_norm(phi: &[f64], phi0: f64, w: &[f64], w0: f64, q: f64) -> f64 {
    if q.is_infinite() {
        let m = phi.iter().zip(w).map(|(x, y)| if *x > 0.0 { x * y } else { 0.0 }).fold(0.0, f64::max);
        return m.max(if phi0 > 0.0 { phi0 * w0 } else { 0.0 });
    }
    let mut s: f64 = phi.iter().zip(w).map(|(x, y)| if *x > 0.0 && *y > 0.0 { y * x.powf(q) } else { 0.0 }).sum();
    if phi0 > 0.0 && w0 > 0.0 {
        s += w0 * phi0.powf(q);
    }
    s.powf(1.0 / q)
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 || num.is_nan() {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

/// All nonzero vectors of `levels` equispaced values on the active cells.
fn lattice_points(fam: &Family, levels: usize) -> Result<Vec<Vec<f64>>> {
    let act: Vec<usize> = (0..fam.len()).filter(|&j| fam.active[j]).collect();
    let total = (levels as f64).powi(act.len() as i32);
    if levels < 2 || total > LATTICE_LIMIT as f64 {
        return Err(Error::Domain(format!("lattice of {levels}^{} points is too large", act.len())));
    }
    let step = 1.0 / (levels - 1) as f64;
    let mut out = Vec::new();
    let mut idx = vec![0usize; act.len()];
    loop {
        let mut k = 0;
        while k < idx.len() && idx[k] == levels - 1 {
            idx[k] = 0;
            k += 1;
        }
        if k == idx.len() {
            break;
        }
        idx[k] += 1;
        let mut c = vec![0.0; fam.len()];
        for (&j, &l) in act.iter().zip(&idx) {
            c[j] = l as f64 * step;
        }
        out.push(c);
    }
    Ok(out)
}

/// Max over `cands` by `score`, first index on ties.
fn argmax_by(cands: &[Vec<f64>], score: impl Fn(&[f64]) -> f64 + Sync) -> (usize, f64) {
    let scores: Vec<f64> = cands.par_iter().map(|c| score(c)).collect();
    let mut best = (0, f64::NEG_INFINITY);
    for (i, s) in scores.into_iter().enumerate() {
        if s > best.1 {
            best = (i, s);
        }
    }
    best
}

/// The best linear response: `sup_c ‖Φ_c‖_{q,w} / ‖c‖` for a family, solved
/// exactly for `p ∈ {1, ∞}` or `q = ∞` and by the nonlinear power iteration
/// otherwise. Returns the maximizing cell values.
fn best_linear(fam: &Family, geom: &Geometry, w: &[f64], w0: f64, q: f64, warm: Option<&[f64]>, iters: usize) -> Vec<f64> {
    let nc = fam.len();
    let eval = |c: &[f64]| {
        let (phi, phi0) = fam.phi(geom, c);
        ratio(weighted_norm(&phi, phi0, w, w0, q), fam.norm(c))
    };
    let all = fam.shell(0, nc - 1);
    if fam.p.is_infinite() {
        return all;
    }
    let p = fam.p;
    if q.is_infinite() {
        // Best single row, then its dual extremal vector.
        let row = |i: usize| -> Vec<f64> {
            let j0 = geom.cell_of[i];
            (0..nc)
                .map(|j| {
                    let a = if j > j0 {
                        fam.alpha[j]
                    } else if j == j0 {
                        fam.partial[i]
                    } else {
                        0.0
                    };
                    if !fam.active[j] || a == 0.0 {
                        0.0
                    } else if p == 1.0 {
                        a / fam.beta[j]
                    } else {
                        (a / fam.beta[j]).powf(1.0 / (p - 1.0))
                    }
                })
                .collect()
        };
        let row0 = || -> Vec<f64> {
            (0..nc)
                .map(|j| if !fam.active[j] { 0.0 } else if p == 1.0 { fam.alpha[j] / fam.beta[j] } else { (fam.alpha[j] / fam.beta[j]).powf(1.0 / (p - 1.0)) })
                .collect()
        };
        let to_vertex = |mut c: Vec<f64>| {
            if p == 1.0 {
                let (jm, _) = c.iter().enumerate().fold((0, -1.0), |acc, (j, x)| if *x > acc.1 { (j, *x) } else { acc });
                c = vec![0.0; nc];
                c[jm] = 1.0;
            }
            c
        };
        let mut cands: Vec<Vec<f64>> = (0..w.len()).filter(|&i| w[i] > 0.0).map(|i| to_vertex(row(i))).collect();
        if w0 > 0.0 {
            cands.push(to_vertex(row0()));
        }
        if cands.is_empty() {
            return all;
        }
        let (i, _) = argmax_by(&cands, eval);
        return cands.swap_remove(i);
    }
    if p == 1.0 {
        let mut best = (all.clone(), eval(&all));
        for j in (0..nc).filter(|&j| fam.active[j]) {
            let mut e = vec![0.0; nc];
            e[j] = 1.0;
            let r = eval(&e);
            if r > best.1 {
                best = (e, r);
            }
        }
        return best.0;
    }
    let mut c = warm.map(|c| c.to_vec()).unwrap_or_else(|| all.clone());
    fam.clean(&mut c);
    if c.iter().all(|x| *x == 0.0) {
        c = all;
    }
    let mut best = (c.clone(), eval(&c));
    for _ in 0..iters {
        let (phi, phi0) = fam.phi(geom, &c);
        let y: Vec<f64> = phi.iter().zip(w).map(|(x, wi)| if *x > 0.0 && *wi > 0.0 { wi * x.powf(q - 1.0) } else { 0.0 }).collect();
        let y0 = if phi0 > 0.0 && w0 > 0.0 { w0 * phi0.powf(q - 1.0) } else { 0.0 };
        let grad = fam.adjoint(geom, &y, y0);
        let mut next: Vec<f64> = grad.iter().zip(&fam.beta).map(|(g, b)| pow0(g / b, 1.0 / (p - 1.0))).collect();
        fam.clean(&mut next);
        let top = next.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 || !top.is_finite() {
            break;
        }
        next.iter_mut().for_each(|x| *x /= top);
        let r = eval(&next);
        let done = r <= best.1 * (1.0 + STOP_TOL);
        if r > best.1 {
            best = (next.clone(), r);
        }
        c = next;
        if done {
            break;
        }
    }
    best.0
}

/// Best response over a lattice: exhaustive.
fn best_lattice(points: &[Vec<f64>], eval: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
    let (i, _) = argmax_by(points, eval);
    points[i].clone()
}

fn finish(mut probes: Vec<Probe>, nodes: Vec<f64>) -> OracleResult {
    let trace = probes.iter().map(|(l, _, _, r)| ProbeTrace { label: l.clone(), ratio: *r }).collect();
    let mut best: Option<usize> = None;
    for (i, p) in probes.iter().enumerate() {
        if best.is_none_or(|b| p.3 > probes[b].3) {
            best = Some(i);
        }
    }
    match best {
        Some(i) if probes[i].3 > 0.0 => {
            let (label, f, g, r) = probes.swap_remove(i);
            OracleResult { value: ExtReal::from_f64(r), argmax: Some(Argmax { f, g, label }), trace, nodes }
        }
        _ => OracleResult { value: ExtReal::ZERO, argmax: None, trace, nodes },
    }
}

fn divergent(nodes: Vec<f64>, label: &str) -> OracleResult {
    OracleResult {
        value: ExtReal::INFINITY,
        argmax: None,
        trace: vec![ProbeTrace { label: label.into(), ratio: f64::INFINITY }],
        nodes,
    }
}

/// Evaluation data of the bilinear ratio
/// `‖Φ₁ Φ₂‖_{q,u} / (‖f‖_{p₁,v₁} ‖g‖_{p₂,v₂})`.
struct Bilinear {
    geom: Geometry,
    f1: Family,
    f2: Family,
    q: f64,
    w: Vec<f64>,
    w0: f64,
}

impl Bilinear {
    fn new(s: &Scenario, cfg: &OracleConfig, refine: usize) -> Result<Self> {
        let s = if s.form == Form::Ball { dual_transform(s)? } else { s.clone() };
        let Problem::Bilinear { exponents: e, u, v1, v2 } = &s.problem else {
            return Err(Error::Domain("bilinear oracle needs a bilinear scenario".into()));
        };
        let nodes = oracle_nodes(cfg.cells, &s.breakpoints())?;
        let geom = Geometry::new(nodes, refine)?;
        let pieces = u.pieces();
        let (w, w0) = outer_weights(&geom, &pieces, e.q);
        let f1 = Family::new(&geom, v1, e.n, e.p1);
        let f2 = Family::new(&geom, v2, e.n, e.p2);
        Ok(Bilinear { geom, f1, f2, q: e.q, w, w0 })
    }

    fn value(&self, c: &[f64], d: &[f64]) -> f64 {
        let (a, a0) = self.f1.phi(&self.geom, c);
        let (b, b0) = self.f2.phi(&self.geom, d);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        ratio(weighted_norm(&prod, a0 * b0, &self.w, self.w0, self.q), self.f1.norm(c) * self.f2.norm(d))
    }

    /// Outer weights seen by one factor when the other is fixed.
    fn effective(&self, other: &Family, d: &[f64]) -> (Vec<f64>, f64) {
        let (b, b0) = other.phi(&self.geom, d);
        let k = if self.q.is_infinite() { 1.0 } else { self.q };
        let w = self.w.iter().zip(&b).map(|(wi, x)| if *x > 0.0 { wi * x.powf(k) } else { 0.0 }).collect();
        let w0 = if b0 > 0.0 { self.w0 * b0.powf(k) } else { 0.0 };
        (w, w0)
    }

    fn respond_f(&self, d: &[f64], warm: Option<&[f64]>, iters: usize, lattice: Option<&[Vec<f64>]>) -> Vec<f64> {
        match lattice {
            Some(pts) => best_lattice(pts, |c| self.value(c, d)),
            None => {
                let (w, w0) = self.effective(&self.f2, d);
                best_linear(&self.f1, &self.geom, &w, w0, self.q, warm, iters)
            }
        }
    }

    fn respond_g(&self, c: &[f64], warm: Option<&[f64]>, iters: usize, lattice: Option<&[Vec<f64>]>) -> Vec<f64> {
        match lattice {
            Some(pts) => best_lattice(pts, |d| self.value(c, d)),
            None => {
                let (w, w0) = self.effective(&self.f1, c);
                best_linear(&self.f2, &self.geom, &w, w0, self.q, warm, iters)
            }
        }
    }

    /// Alternating ascent from `d`; returns `(f, g, ratio)`.
    fn ascend(&self, mut d: Vec<f64>, sweeps: usize, lat: Option<(&[Vec<f64>], &[Vec<f64>])>) -> (Vec<f64>, Vec<f64>, f64) {
        let mut c = self.respond_f(&d, None, INNER_ITERS, lat.map(|l| l.0));
        let mut best = self.value(&c, &d);
        for _ in 0..sweeps {
            let d2 = self.respond_g(&c, Some(&d), INNER_ITERS, lat.map(|l| l.1));
            let c2 = self.respond_f(&d2, Some(&c), INNER_ITERS, lat.map(|l| l.0));
            let r = self.value(&c2, &d2);
            if r > best {
                let gain = r > best * (1.0 + STOP_TOL);
                best = r;
                c = c2;
                d = d2;
                if !gain {
                    break;
                }
            } else {
                break;
            }
        }
        (c, d, best)
    }

    fn singular(&self) -> bool {
        // A singular cell of either family below positive outer mass.
        let mass_below = |j: usize| {
            let t = self.geom.nodes[j + 1];
            self.w0 > 0.0 || self.geom.grid.fine().iter().zip(&self.w).any(|(x, wi)| *x < t && *wi > 0.0)
        };
        let hit = |fam: &Family| (0..fam.len()).any(|j| fam.singular[j] && mass_below(j));
        (hit(&self.f1) && self.f2.active.iter().any(|a| *a)) || (hit(&self.f2) && self.f1.active.iter().any(|a| *a))
    }
}

/// Outer weights: quadrature weights times `u` (or `u` itself for `q = ∞`)
/// on the fine points, and the exact contribution of `(0, t₀)` where every
/// `Φ` is constant.
fn outer_weights(geom: &Geometry, u: &Pieces, q: f64) -> (Vec<f64>, f64) {
    let fine = geom.grid.fine();
    let t0 = fine[0];
    if q.is_infinite() {
        let w = fine.iter().map(|&t| u.value(t)).collect();
        return (w, u.ess_sup(0.0, 1.0, 0.0, t0));
    }
    let mut w = vec![0.0; fine.len()];
    for (i, wt) in geom.grid.quad() {
        w[i] = wt * u.value(fine[i]);
    }
    (w, u.integral(0.0, 1.0, 0.0, t0))
}

/// Lower bound on the best constant of the bilinear inequality.
pub fn bilinear_best_lower(s: &Scenario, cfg: &OracleConfig) -> Result<OracleResult> {
    let b = Bilinear::new(s, cfg, cfg.refine)?;
    let nodes = b.geom.nodes.clone();
    if b.w0.is_infinite() && b.f1.active.iter().any(|a| *a) && b.f2.active.iter().any(|a| *a) {
        return Ok(divergent(nodes, "outer weight not integrable at 0"));
    }
    if b.singular() {
        return Ok(divergent(nodes, "inner weight not locally integrable"));
    }
    let nc = b.f2.len();
    let lattice = match cfg.lattice {
        Some(l) => Some((lattice_points(&b.f1, l)?, lattice_points(&b.f2, l)?)),
        None => None,
    };
    let lat = lattice.as_ref().map(|(a, c)| (a.as_slice(), c.as_slice()));
    let mut probes: Vec<Probe> = Vec::new();

    // Shells g = ψ₂ χ_{S[a,b)}, screened by a warm-started best response.
    let shells: Vec<(usize, usize, Vec<f64>, f64)> = (0..nc)
        .into_par_iter()
        .flat_map_iter(|a| {
            let b = &b;
            let mut warm: Option<Vec<f64>> = None;
            (a..nc)
                .map(move |e| {
                    let d = b.f2.shell(a, e);
                    let c = b.respond_f(&d, warm.as_deref(), SHELL_ITERS, lat.map(|l| l.0));
                    let r = b.value(&c, &d);
                    warm = Some(c.clone());
                    (a, e, c, r)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut order: Vec<usize> = (0..shells.len()).collect();
    order.sort_by(|&i, &j| shells[j].3.total_cmp(&shells[i].3).then(i.cmp(&j)));
    for &i in order.iter().take(1) {
        let (a, e, c, r) = &shells[i];
        probes.push((format!("shell[{a},{e}]"), c.clone(), Some(b.f2.shell(*a, *e)), *r));
    }

    let mut starts: Vec<(String, Vec<f64>)> = order
        .iter()
        .take(cfg.starts)
        .map(|&i| (format!("ascent from shell[{},{}]", shells[i].0, shells[i].1), b.f2.shell(shells[i].0, shells[i].1)))
        .collect();
    for k in 0..cfg.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64));
        let d = match &lattice {
            Some((_, pts)) => pts[rng.random_range(0..pts.len())].clone(),
            None => b.f2.random(&mut rng),
        };
        starts.push((format!("ascent from random #{k}"), d));
    }
    let results: Vec<_> = starts
        .into_par_iter()
        .map(|(label, d)| {
            let (c, d, r) = b.ascend(d, cfg.sweeps, lat);
            (label, c, Some(d), r)
        })
        .collect();
    probes.extend(results);
    Ok(finish(probes, nodes))
}

/// Exhaustive search over the lattice of [`OracleConfig::lattice`].
pub fn bilinear_exhaustive(s: &Scenario, cfg: &OracleConfig) -> Result<ExtReal> {
    let b = Bilinear::new(s, cfg, cfg.refine)?;
    let levels = cfg.lattice.ok_or_else(|| Error::Domain("exhaustive search needs a lattice".into()))?;
    let (pf, pg) = (lattice_points(&b.f1, levels)?, lattice_points(&b.f2, levels)?);
    let best = pg.par_iter().map(|d| pf.iter().map(|c| b.value(c, d)).fold(0.0, f64::max)).reduce(|| 0.0, f64::max);
    Ok(ExtReal::from_f64(best))
}

/// Evaluation data of the iterated ratio
/// `(∫ (U(t)^{-1} ∫_0^t Φ^p u)^{q/p} dμ(t))^{1/q} / ‖h‖_{θ,v}`.
struct Iterated {
    geom: Geometry,
    fam: Family,
    p: f64,
    q: f64,
    u: Vec<f64>,
    u_left: Vec<f64>,
    big_u: Vec<f64>,
    u0: f64,
    /// Quadrature weight of every fine point (zero at nodes).
    qw: Vec<f64>,
    mu_w: Vec<f64>,
    atoms: Vec<(usize, f64)>,
    /// `μ((0, t₀))`, where the inner average equals `Φ(0)^p`.
    mu_below: f64,
}

impl Iterated {
    fn new(s: &Scenario, cfg: &OracleConfig, refine: usize) -> Result<Self> {
        let Problem::Iterated { exponents: e, u, v, mu } = &s.problem else {
            return Err(Error::Domain("iterated oracle needs an iterated scenario".into()));
        };
        if mu.stieltjes.is_some() {
            return Err(Error::Domain("the oracle takes measures with atoms and a density only".into()));
        }
        let nodes = oracle_nodes(cfg.cells, &s.breakpoints())?;
        let geom = Geometry::new(nodes, refine)?;
        let fine = geom.grid.fine();
        let t0 = fine[0];
        let pieces = u.pieces();
        let uv: Vec<f64> = fine.iter().map(|&t| pieces.value(t)).collect();
        let u_left = fine.iter().map(|&t| pieces.left_value(t)).collect();
        let u0 = pieces.integral(0.0, 1.0, 0.0, t0);
        let mut big_u = Vec::with_capacity(fine.len());
        let mut acc = u0;
        big_u.push(acc);
        for w in fine.windows(2) {
            acc += pieces.integral(0.0, 1.0, w[0], w[1]);
            big_u.push(acc);
        }
        let (mu_w, atoms, mu_below) = measure_weights(&geom, mu, t0)?;
        let mut qw = vec![0.0; fine.len()];
        for (i, w) in geom.grid.quad() {
            qw[i] = w;
        }
        Ok(Iterated {
            qw,
            fam: Family::new(&geom, v, s.n, e.theta),
            geom,
            p: e.p,
            q: e.q,
            u: uv,
            u_left,
            big_u,
            u0,
            mu_w,
            atoms,
            mu_below,
        })
    }

    fn value(&self, c: &[f64]) -> f64 {
        let (phi, phi0) = self.fam.phi(&self.geom, c);
        let p = self.p;
        let integrand: Vec<f64> = phi.iter().zip(&self.u).map(|(x, u)| if *x > 0.0 { x.powf(p) * u } else { 0.0 }).collect();
        let left: Vec<f64> = phi.iter().zip(&self.u_left).map(|(x, u)| if *x > 0.0 { x.powf(p) * u } else { 0.0 }).collect();
        let cum = self.geom.grid.cumulative_left(&integrand, Some(&left), ZERO_TAILS);
        let head = if phi0 > 0.0 { phi0.powf(p) * self.u0 } else { 0.0 };
        let s = self.q / p;
        let avg = |i: usize| {
            let num = cum[i] + head;
            if num > 0.0 && self.big_u[i] > 0.0 {
                (num / self.big_u[i]).powf(s)
            } else {
                0.0
            }
        };
        let mut total: f64 = self.mu_w.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, w)| w * avg(i)).sum();
        total += self.atoms.iter().map(|&(i, m)| m * avg(i)).sum::<f64>();
        if phi0 > 0.0 && self.mu_below > 0.0 {
            total += self.mu_below * phi0.powf(self.q);
        }
        ratio(total.powf(1.0 / self.q), self.fam.norm(c))
    }

    /// Gradient of `LHS^q` in the cell values, with the inner integrals
    /// approximated by their quadrature sums. Only steers the search.
    fn gradient(&self, c: &[f64]) -> Vec<f64> {
        let (phi, phi0) = self.fam.phi(&self.geom, c);
        let (p, s) = (self.p, self.q / self.p);
        let integrand: Vec<f64> = phi.iter().zip(&self.u).map(|(x, u)| if *x > 0.0 { x.powf(p) * u } else { 0.0 }).collect();
        let cum = self.geom.grid.cumulative(&integrand, ZERO_TAILS);
        let head = if phi0 > 0.0 { phi0.powf(p) * self.u0 } else { 0.0 };
        let mut omega = vec![0.0; phi.len()];
        let mut weigh = |i: usize, m: f64| {
            let num = cum[i] + head;
            if m > 0.0 && num > 0.0 && self.big_u[i] > 0.0 {
                omega[i] += m * s * (num / self.big_u[i]).powf(s - 1.0) / self.big_u[i];
            }
        };
        for (i, &m) in self.mu_w.iter().enumerate() {
            weigh(i, m);
        }
        for &(i, m) in &self.atoms {
            weigh(i, m);
        }
        // Suffix sums: point i feeds every measure point above it.
        let mut above = vec![0.0; phi.len() + 1];
        for i in (0..phi.len()).rev() {
            above[i] = above[i + 1] + omega[i];
        }
        let y: Vec<f64> = (0..phi.len())
            .map(|i| if phi[i] > 0.0 && self.qw[i] > 0.0 { p * phi[i].powf(p - 1.0) * self.u[i] * self.qw[i] * above[i + 1] } else { 0.0 })
            .collect();
        let mut y0 = if phi0 > 0.0 { p * phi0.powf(p - 1.0) * self.u0 * above[0] } else { 0.0 };
        if phi0 > 0.0 && self.mu_below > 0.0 {
            y0 += self.mu_below * self.q * phi0.powf(self.q - 1.0);
        }
        self.fam.adjoint(&self.geom, &y, y0)
    }

    /// Nonlinear power iteration `c ← (∇/β)^{1/(θ-1)}`, then coordinate
    /// ascent with multiplicative moves (or over lattice levels).
    fn ascend(&self, mut c: Vec<f64>, sweeps: usize, levels: Option<usize>) -> (Vec<f64>, f64) {
        let mut best = self.value(&c);
        let theta = self.fam.p;
        if levels.is_none() && theta > 1.0 {
            for _ in 0..INNER_ITERS {
                let g = self.gradient(&c);
                let mut next: Vec<f64> = g.iter().zip(&self.fam.beta).map(|(g, b)| pow0(g / b, 1.0 / (theta - 1.0))).collect();
                self.fam.clean(&mut next);
                let top = next.iter().cloned().fold(0.0, f64::max);
                if top == 0.0 || !top.is_finite() {
                    break;
                }
                next.iter_mut().for_each(|x| *x /= top);
                let r = self.value(&next);
                if r <= best * (1.0 + STOP_TOL) {
                    break;
                }
                best = r;
                c = next;
            }
        }
        for _ in 0..sweeps {
            let before = best;
            for j in (0..c.len()).filter(|&j| self.fam.active[j]) {
                let cur = c[j];
                let top = c.iter().cloned().fold(0.0, f64::max);
                let trials: Vec<f64> = match levels {
                    Some(l) => (0..l).map(|k| k as f64 / (l - 1) as f64).collect(),
                    None if cur > 0.0 => vec![0.0, cur * 2.0, cur * 0.5, cur * 1.25, cur * 0.8],
                    None => vec![top.max(1.0), top.max(1.0) * 0.1],
                };
                for x in trials {
                    if x == c[j] {
                        continue;
                    }
                    c[j] = x;
                    let r = self.value(&c);
                    if r > best {
                        best = r;
                        break;
                    }
                    c[j] = cur;
                }
            }
            if best <= before * (1.0 + POLISH_TOL) {
                break;
            }
        }
        (c, best)
    }
}

/// Quadrature weights of the density, atoms on fine points, and the mass
/// of `(0, t₀)`.
fn measure_weights(geom: &Geometry, mu: &BorelMeasure, t0: f64) -> Result<(Vec<f64>, Vec<(usize, f64)>, f64)> {
    let fine = geom.grid.fine();
    let mut w = vec![0.0; fine.len()];
    let mut below = 0.0;
    if let Some(d) = &mu.density {
        let pieces = d.pieces();
        for (i, wt) in geom.grid.quad() {
            w[i] = wt * pieces.value(fine[i]);
        }
        below += pieces.integral(0.0, 1.0, 0.0, t0);
    }
    let mut atoms = Vec::new();
    for &(x, m) in &mu.atoms {
        if x < t0 {
            below += m;
        } else if x <= *fine.last().unwrap() {
            let i = geom.grid.node_index(x).map(|k| 4 * k).ok_or_else(|| Error::Domain(format!("atom at {x} is not an oracle node")))?;
            atoms.push((i, m));
        }
    }
    Ok((w, atoms, below))
}

/// Lower bound on the best constant of the iterated inequality.
pub fn iterated_best_lower(s: &Scenario, cfg: &OracleConfig) -> Result<OracleResult> {
    let it = Iterated::new(s, cfg, cfg.refine)?;
    let nodes = it.geom.nodes.clone();
    let nc = it.fam.len();
    if it.fam.singular.iter().enumerate().any(|(j, s)| *s && it.big_u[4 * (j + 1) * cfg.refine.max(1)] > 0.0) {
        return Ok(divergent(nodes, "inner weight not locally integrable"));
    }
    if it.mu_below.is_infinite() && it.fam.active.iter().any(|a| *a) {
        return Ok(divergent(nodes, "measure not finite near 0"));
    }
    let mut probes: Vec<Probe> = Vec::new();
    if it.fam.p.is_infinite() {
        let c = it.fam.shell(0, nc - 1);
        let r = it.value(&c);
        probes.push(("h = v^{-1} on all cells".into(), c, None, r));
        return Ok(finish(probes, nodes));
    }
    let shells: Vec<(usize, usize, f64)> = (0..nc)
        .into_par_iter()
        .flat_map_iter(|a| {
            let it = &it;
            (a..nc).map(move |e| (a, e, it.value(&it.fam.shell(a, e))))
        })
        .collect();
    let mut order: Vec<usize> = (0..shells.len()).collect();
    order.sort_by(|&i, &j| shells[j].2.total_cmp(&shells[i].2).then(i.cmp(&j)));
    if let Some(&i) = order.first() {
        let (a, e, r) = shells[i];
        probes.push((format!("shell[{a},{e}]"), it.fam.shell(a, e), None, r));
    }
    let mut starts: Vec<(String, Vec<f64>)> = order
        .iter()
        .take(cfg.starts)
        .map(|&i| (format!("ascent from shell[{},{}]", shells[i].0, shells[i].1), it.fam.shell(shells[i].0, shells[i].1)))
        .collect();
    let lattice = match cfg.lattice {
        Some(l) => Some(lattice_points(&it.fam, l)?),
        None => None,
    };
    for k in 0..cfg.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64));
        let c = match &lattice {
            Some(pts) => pts[rng.random_range(0..pts.len())].clone(),
            None => it.fam.random(&mut rng),
        };
        starts.push((format!("ascent from random #{k}"), c));
    }
    let results: Vec<_> = starts
        .into_par_iter()
        .map(|(label, c)| {
            let (c, r) = it.ascend(c, cfg.sweeps, cfg.lattice);
            (label, c, None, r)
        })
        .collect();
    probes.extend(results);
    Ok(finish(probes, nodes))
}

/// Exhaustive search over the lattice of [`OracleConfig::lattice`].
pub fn iterated_exhaustive(s: &Scenario, cfg: &OracleConfig) -> Result<ExtReal> {
    let it = Iterated::new(s, cfg, cfg.refine)?;
    let levels = cfg.lattice.ok_or_else(|| Error::Domain("exhaustive search needs a lattice".into()))?;
    let pts = lattice_points(&it.fam, levels)?;
    let (_, best) = argmax_by(&pts, |c| it.value(c));
    Ok(ExtReal::from_f64(best.max(0.0)))
}

/// Dispatches on the scenario kind.
pub fn best_lower(s: &Scenario, cfg: &OracleConfig) -> Result<OracleResult> {
    if s.is_iterated() {
        iterated_best_lower(s, cfg)
    } else {
        bilinear_best_lower(s, cfg)
    }
}

/// Ratio of a probe re-evaluated with `factor` times the quadrature
/// sub-cells.
pub fn reevaluate(s: &Scenario, cfg: &OracleConfig, argmax: &Argmax, factor: usize) -> Result<ExtReal> {
    let refine = cfg.refine.max(1) * factor.max(1);
    let r = if s.is_iterated() {
        Iterated::new(s, cfg, refine)?.value(&argmax.f)
    } else {
        let g = argmax.g.as_ref().ok_or_else(|| Error::Domain("bilinear probe without g".into()))?;
        Bilinear::new(s, cfg, refine)?.value(&argmax.f, g)
    };
    Ok(ExtReal::from_f64(r))
}
