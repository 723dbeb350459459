//! Special functions used by the radial reduction and the closed forms.

use statrs::function::beta::ln_beta;
use statrs::function::gamma::gamma;

/// Surface area `σ_{n-1} = 2 π^{n/2} / Γ(n/2)` of the unit sphere in `ℝⁿ`.
///
/// For `n = 1` the "sphere" is `{-1, 1}` and the value is 2.
pub fn sphere_area(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(half) / gamma(half)
}

/// Euler Beta function for positive arguments; `+∞` when either argument is
/// non-positive (the corresponding integral diverges).
pub fn beta(a: f64, b: f64) -> f64 {
    if a <= 0.0 || b <= 0.0 {
        return f64::INFINITY;
    }
    ln_beta(a, b).exp()
}

/// Three-point Gauss–Legendre rule on `[-1, 1]`.
pub const GL3_NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
pub const GL3_WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];

/// Gauss–Legendre nodes and weights of order `m` on `[-1, 1]` (Newton on the
/// Legendre recurrence).
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=m {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[m - 1 - i] = x;
        weights[m - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(1) - 2.0).abs() < 1e-14);
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-13);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn beta_values() {
        assert!((beta(0.5, 0.5) - PI).abs() < 1e-12);
        assert!((beta(2.0, 3.0) - 1.0 / 12.0).abs() < 1e-14);
        assert!(beta(0.0, 1.0).is_infinite());
    }

    #[test]
    fn gauss_legendre_matches_gl3_and_integrates_polynomials() {
        let (x, w) = gauss_legendre(3);
        for i in 0..3 {
            assert!((x[i] - GL3_NODES[i]).abs() < 1e-14);
            assert!((w[i] - GL3_WEIGHTS[i]).abs() < 1e-14);
        }
        let (x, w) = gauss_legendre(8);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-13);
    }
}
