//! Logarithmic evaluation grids.
//!
//! A grid is a sorted list of nodes; each cell between consecutive nodes
//! carries three Gauss–Legendre points in `log t`. Functions are sampled on
//! the *fine* point set (nodes and quadrature points interleaved), so fine
//! index `4k` is node `k` and `4k + 1 ..= 4k + 3` are the quadrature points of
//! cell `k`. Mass below the first node and above the last is handled by the
//! symbolic tails of the integrand.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::special::{GL3_NODES, GL3_WEIGHTS};
use crate::tail::Tails;

/// Environment variable overriding the default oracle cell count.
pub const GRID_ENV: &str = "HARDYKIT_GRID_DEFAULT";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { t_min: 1e-6, t_max: 1e6, points: 2048 }
    }
}

impl GridSpec {
    pub fn with_points(points: usize) -> Self {
        GridSpec { points, ..GridSpec::default() }
    }
}

#[derive(Clone, Debug)]
pub struct Grid {
    nodes: Vec<f64>,
    fine: Vec<f64>,
    quad_w: Vec<f64>,
}

impl Grid {
    /// Log-spaced grid over `spec`, extended to contain every point of
    /// `extra` (breakpoints, atoms), which become nodes.
    pub fn new(spec: GridSpec, extra: &[f64]) -> Result<Grid> {
        if !(spec.t_min > 0.0 && spec.t_max > spec.t_min && spec.points >= 2) {
            return Err(Error::Domain(format!("invalid grid {spec:?}")));
        }
        let mut lo = spec.t_min.min(0.5);
        let mut hi = spec.t_max.max(2.0);
        for &x in extra {
            if !(x > 0.0 && x.is_finite()) {
                continue;
            }
            lo = lo.min(x / 2.0);
            hi = hi.max(x * 2.0);
        }
        let base_span = (spec.t_max / spec.t_min).ln();
        let span = (hi / lo).ln();
        let points = ((spec.points - 1) as f64 * span / base_span).ceil() as usize + 1;
        let step = span / (points - 1) as f64;
        let mut nodes: Vec<f64> = (0..points).map(|i| lo * (step * i as f64).exp()).collect();
        nodes[points - 1] = hi;
        let mut extras: Vec<f64> = extra.iter().copied().filter(|x| *x > 0.0 && x.is_finite()).collect();
        extras.sort_by(f64::total_cmp);
        nodes.retain(|t| {
            let i = extras.partition_point(|e| e < t);
            let close = |j: usize| extras.get(j).is_some_and(|e| (e / t).ln().abs() < step * 0.25);
            !(close(i) || (i > 0 && close(i - 1)))
        });
        nodes.extend(extras);
        Grid::from_nodes(nodes)
    }

    /// Grid with exactly the given nodes (sorted and deduplicated here).
    pub fn from_nodes(mut nodes: Vec<f64>) -> Result<Grid> {
        nodes.retain(|t| *t > 0.0 && t.is_finite());
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a / *b - 1.0).abs() < 1e-12);
        if nodes.len() < 2 {
            return Err(Error::Domain("grid needs at least two nodes".into()));
        }
        if nodes[0] >= 1.0 || *nodes.last().unwrap() <= 1.0 {
            return Err(Error::Domain("grid must straddle t = 1".into()));
        }
        let mut fine = Vec::with_capacity(4 * nodes.len());
        let mut quad_w = Vec::with_capacity(3 * nodes.len());
        for w in nodes.windows(2) {
            let (a, b) = ((w[0]).ln(), (w[1]).ln());
            let (mid, half) = ((a + b) / 2.0, (b - a) / 2.0);
            fine.push(w[0]);
            for (x, wt) in GL3_NODES.iter().zip(GL3_WEIGHTS) {
                let t = (mid + half * x).exp();
                fine.push(t);
                quad_w.push(wt * half * t);
            }
        }
        fine.push(*nodes.last().unwrap());
        Ok(Grid { nodes, fine, quad_w })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// All sample points: node `k` at `4k`, quadrature points in between.
    pub fn fine(&self) -> &[f64] {
        &self.fine
    }

    pub fn cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn t_first(&self) -> f64 {
        self.nodes[0]
    }

    pub fn t_last(&self) -> f64 {
        *self.nodes.last().unwrap()
    }

    pub fn last_fine(&self) -> usize {
        self.fine.len() - 1
    }

    /// Iterator over `(fine index, weight)` of all quadrature points.
    pub fn quad(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.quad_w.iter().enumerate().map(|(j, w)| (4 * (j / 3) + 1 + j % 3, *w))
    }

    pub fn is_node(fine_index: usize) -> bool {
        fine_index.is_multiple_of(4)
    }

    /// Node index of a point that must be (numerically) a node.
    pub fn node_index(&self, t: f64) -> Option<usize> {
        let i = self.nodes.partition_point(|x| *x < t * (1.0 - 1e-12));
        (i < self.nodes.len() && (self.nodes[i] / t - 1.0).abs() < 1e-9).then_some(i)
    }

    /// Samples `f` on the fine points.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.fine.iter().map(|&t| f(t)).collect()
    }

    /// `∫_0^∞ f` for `f` sampled on the fine points, with the given tails.
    pub fn integrate(&self, vals: &[f64], tails: Tails) -> f64 {
        let mut total = tails.zero.integral_to(self.t_first(), vals[0])
            + tails.inf.integral_from(self.t_last(), vals[self.last_fine()]);
        for (i, w) in self.quad() {
            if vals[i] != 0.0 {
                total += w * vals[i];
            }
        }
        total
    }

    /// `∫` over the node range `[nodes[a], nodes[b])` (no tails).
    pub fn integrate_nodes(&self, vals: &[f64], a: usize, b: usize) -> f64 {
        let mut total = 0.0;
        for (i, w) in self.quad().skip(3 * a).take(3 * b.saturating_sub(a)) {
            if vals[i] != 0.0 {
                total += w * vals[i];
            }
        }
        total
    }

    /// Supremum over the fine points together with the tail analysis.
    pub fn sup(&self, vals: &[f64], tails: Tails) -> f64 {
        let last = self.last_fine();
        if (vals[0] > 0.0 && tails.zero.blows_up_at_zero())
            || (vals[last] > 0.0 && tails.inf.blows_up_at_inf())
        {
            return f64::INFINITY;
        }
        vals.iter().copied().fold(0.0, f64::max)
    }

    /// `t ↦ ∫_0^t f` on the fine points.
    pub fn cumulative(&self, vals: &[f64], tails: Tails) -> Vec<f64> {
        self.cumulative_left(vals, None, tails)
    }

    /// [`Grid::cumulative`] for a function with jumps at nodes; `left`
    /// holds its left limits.
    pub fn cumulative_left(&self, vals: &[f64], left: Option<&[f64]>, tails: Tails) -> Vec<f64> {
        let mut out = vec![0.0; vals.len()];
        let mut acc = tails.zero.integral_to(self.t_first(), vals[0]);
        out[0] = acc;
        for k in 0..self.cells() {
            let base = 4 * k;
            let (partial, whole) = self.cell_partials(vals, left, k);
            for j in 0..3 {
                out[base + 1 + j] = acc + partial[j];
            }
            acc += whole;
            out[base + 4] = acc;
        }
        out
    }

    /// `t ↦ ∫_t^∞ f` on the fine points.
    pub fn cumulative_tail(&self, vals: &[f64], tails: Tails) -> Vec<f64> {
        self.cumulative_tail_left(vals, None, tails)
    }

    /// [`Grid::cumulative_tail`] with left limits, as in [`Grid::cumulative_left`].
    pub fn cumulative_tail_left(&self, vals: &[f64], left: Option<&[f64]>, tails: Tails) -> Vec<f64> {
        let last = self.last_fine();
        let mut out = vec![0.0; vals.len()];
        let mut acc = tails.inf.integral_from(self.t_last(), vals[last]);
        out[last] = acc;
        for k in (0..self.cells()).rev() {
            let base = 4 * k;
            let (partial, whole) = self.cell_partials(vals, left, k);
            for j in 0..3 {
                out[base + 1 + j] = acc + (whole - partial[j]).max(0.0);
            }
            acc += whole;
            out[base] = acc;
        }
        out
    }

    /// Integrals over `[node_k, gl_j]` for the three quadrature points of
    /// cell `k` and over the whole cell.
    fn cell_partials(&self, vals: &[f64], left: Option<&[f64]>, k: usize) -> ([f64; 3], f64) {
        let base = 4 * k;
        let g: [f64; 5] = std::array::from_fn(|j| {
            let v = match left {
                Some(l) if j == 4 => l[base + j],
                _ => vals[base + j],
            };
            if v == 0.0 {
                0.0
            } else {
                v * self.fine[base + j]
            }
        });
        let half = (self.nodes[k + 1] / self.nodes[k]).ln() / 2.0;
        if g.iter().any(|v| v.is_infinite()) {
            return ([f64::INFINITY; 3], f64::INFINITY);
        }
        let whole: f64 = (0..3).map(|j| GL3_WEIGHTS[j] * g[j + 1]).sum::<f64>() * half;
        let m = partial_matrix();
        let mut partial = [0.0; 3];
        for (j, row) in m.iter().enumerate() {
            let s: f64 = row.iter().zip(&g).map(|(a, b)| a * b).sum();
            partial[j] = (s * half).clamp(0.0, whole.max(0.0));
        }
        (partial, whole)
    }
}

/// `M[i][j] = ∫_{-1}^{x_i} L_j(x) dx` for the degree-4 Lagrange basis on the
/// points `-1, GL3, 1` and the three Gauss points `x_i`.
fn partial_matrix() -> &'static [[f64; 5]; 3] {
    static M: OnceLock<[[f64; 5]; 3]> = OnceLock::new();
    M.get_or_init(|| {
        let pts = [-1.0, GL3_NODES[0], GL3_NODES[1], GL3_NODES[2], 1.0];
        let mut m = [[0.0; 5]; 3];
        let (gx, gw) = crate::special::gauss_legendre(8);
        for i in 0..3 {
            let upper = GL3_NODES[i];
            for j in 0..5 {
                // Map the 8-point rule onto [-1, upper].
                let half = (upper + 1.0) / 2.0;
                let mut s = 0.0;
                for (x, w) in gx.iter().zip(&gw) {
                    let y = -1.0 + half * (x + 1.0);
                    let mut l = 1.0;
                    for (k, pk) in pts.iter().enumerate() {
                        if k != j {
                            l *= (y - pk) / (pts[j] - pk);
                        }
                    }
                    s += w * l;
                }
                m[i][j] = s * half;
            }
        }
        m
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tail::Tail;

    fn grid() -> Grid {
        Grid::new(GridSpec::default(), &[]).unwrap()
    }

    #[test]
    fn structure() {
        let g = grid();
        assert_eq!(g.fine().len(), 4 * g.nodes().len() - 3);
        assert_eq!(g.fine()[4], g.nodes()[1]);
        assert!(g.fine().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(g.quad().count(), 3 * g.cells());
    }

    #[test]
    fn extra_points_become_nodes() {
        let g = Grid::new(GridSpec::default(), &[3.0, 1e9]).unwrap();
        assert!(g.node_index(3.0).is_some());
        assert!(g.node_index(1e9).is_some());
        assert!(g.t_last() >= 1e9);
    }

    #[test]
    fn integrates_powers_with_tails() {
        let g = grid();
        // ∫_0^∞ t^{-1/2}/(1+t) dt = π; the pure-power tail closure is off by
        // O(t_min^{3/2}).
        let vals = g.sample(|t| t.powf(-0.5) / (1.0 + t));
        let v = g.integrate(&vals, Tails::power(-0.5, -1.5));
        assert!((v - std::f64::consts::PI).abs() < 1e-8, "{v}");
    }

    #[test]
    fn cumulative_matches_closed_form() {
        let g = grid();
        let vals = g.sample(|t| 3.0 * t * t / (1.0 + t * t * t).powi(2));
        let c = g.cumulative(&vals, Tails::power(2.0, -4.0));
        for (i, &t) in g.fine().iter().enumerate().step_by(7) {
            let exact = t.powi(3) / (1.0 + t.powi(3));
            assert!((c[i] - exact).abs() <= 1e-9 * exact.max(1e-300) + 1e-300, "{t}: {} vs {exact}", c[i]);
        }
        let c = g.cumulative_tail(&vals, Tails::power(2.0, -4.0));
        for (i, &t) in g.fine().iter().enumerate().step_by(7) {
            let exact = 1.0 / (1.0 + t.powi(3));
            assert!((c[i] - exact).abs() <= 1e-9 * exact, "{t}: {} vs {exact}", c[i]);
        }
    }

    #[test]
    fn sup_detects_tail_blowup() {
        let g = grid();
        let vals = g.sample(|t| t.powf(-0.1));
        assert!(g.sup(&vals, Tails::power(-0.1, -0.1)).is_infinite());
        let vals = g.sample(|t| t / (1.0 + t * t));
        assert!((g.sup(&vals, Tails::power(1.0, -1.0)) - 0.5).abs() < 1e-4);
        let zero = vec![0.0; g.fine().len()];
        assert_eq!(g.sup(&zero, Tails::new(Tail::power(-1.0), Tail::CONST)), 0.0);
    }
}
