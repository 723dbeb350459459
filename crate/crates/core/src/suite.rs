//! Randomized power-weight scenarios with dilation-balanced exponents, used
//! by the certification sweeps.
//!
//! For `u = t^a`, `v = |x|^b` and `dμ = t^{κ-1} dt` both inequalities are
//! invariant under `x ↦ λx` only if the exponents balance; otherwise the
//! best constant is `0` or `∞`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conditions::{evaluate_scenario, ReportKind, Verdict};
use crate::error::Result;
use crate::exponents::CaseTag;
use crate::iterated::IteratedCase;
use crate::scenario::Scenario;
use crate::stieltjes::BorelMeasure;
use crate::weights::RadialWeight;

/// Scaling exponent of `‖f(λ·)‖_{p,|x|^b}` on `ℝⁿ` (as a power of `1/λ`).
fn norm_scale(n: usize, p: f64, b: f64) -> f64 {
    if p.is_infinite() {
        b
    } else {
        (b + n as f64) / p
    }
}

/// `u = t^a` with `a` chosen so that the bilinear inequality is dilation
/// invariant; `shift` is added to `a` to break the balance.
pub fn balanced_bilinear(n: usize, p1: f64, p2: f64, q: f64, b1: f64, b2: f64, shift: f64) -> Result<Scenario> {
    let k = norm_scale(n, p1, b1) + norm_scale(n, p2, b2) - 2.0 * n as f64;
    let a = if q.is_infinite() { k } else { q * k - 1.0 } + shift;
    Scenario::bilinear(n, p1, p2, q, RadialWeight::power(1.0, a), RadialWeight::power(1.0, b1), RadialWeight::power(1.0, b2))
}

/// `dμ = t^{κ-1} dt` with `κ` chosen so that the iterated inequality is
/// dilation invariant.
pub fn balanced_iterated(n: usize, p: f64, q: f64, theta: f64, a: f64, b: f64) -> Result<Scenario> {
    let kappa = q * (norm_scale(n, theta, b) - n as f64);
    let mu = BorelMeasure::with_density(RadialWeight::power(1.0, kappa - 1.0));
    Scenario::iterated(n, p, q, theta, RadialWeight::power(1.0, a), RadialWeight::power(1.0, b), mu)
}

/// Target families of the sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    T52,
    T53i,
    T53ii,
    I1,
    I3,
    /// Bilinear `q ≥ p₁, p₂` scenarios with a broken balance.
    Diverging,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::T52, Family::T53i, Family::T53ii, Family::I1, Family::I3, Family::Diverging];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::T52 => "T52",
            Family::T53i => "T53i",
            Family::T53ii => "T53ii",
            Family::I1 => "I1",
            Family::I3 => "I3",
            Family::Diverging => "diverging",
        }
    }

    fn accepts(self, kind: ReportKind) -> bool {
        match self {
            Family::T52 | Family::Diverging => {
                matches!(kind, ReportKind::Bilinear(CaseTag::T52a | CaseTag::T52b | CaseTag::T52c))
            }
            Family::T53i => kind == ReportKind::Bilinear(CaseTag::T53i),
            Family::T53ii => kind == ReportKind::Bilinear(CaseTag::T53ii),
            Family::I1 => kind == ReportKind::Iterated(IteratedCase::I1),
            Family::I3 => kind == ReportKind::Iterated(IteratedCase::I3),
        }
    }

    fn draw(self, rng: &mut ChaCha8Rng) -> Result<Scenario> {
        let pick = |rng: &mut ChaCha8Rng, xs: &[f64]| xs[rng.random_range(0..xs.len())];
        let n = rng.random_range(1..=3usize);
        // v = |x|^b with V_p finite and vanishing at ∞ needs b > n(p-1).
        let weight = |rng: &mut ChaCha8Rng, p: f64| n as f64 * (p - 1.0) + rng.random_range(0.25..2.5);
        match self {
            Family::T52 | Family::Diverging => {
                let p1 = pick(rng, &[1.5, 2.0, 3.0]);
                let p2 = pick(rng, &[1.5, 2.0, 3.0]);
                let q = p1.max(p2) * pick(rng, &[1.0, 1.5, 2.0]);
                let (b1, b2) = (weight(rng, p1), weight(rng, p2));
                let shift = if self == Family::Diverging { pick(rng, &[-1.0, 1.0]) * rng.random_range(0.5..1.5) } else { 0.0 };
                balanced_bilinear(n, p1, p2, q, b1, b2, shift)
            }
            Family::T53i | Family::T53ii => {
                let p1 = pick(rng, &[2.0, 3.0, 4.0]);
                let q = p1 * pick(rng, &[0.5, 0.6, 0.75]);
                let r1 = 1.0 / (1.0 / q - 1.0 / p1);
                let p2 = if self == Family::T53i { q * rng.random_range(0.6..1.0) } else { q + (r1 - q) * rng.random_range(0.2..1.0) };
                let p2 = p2.max(1.05);
                let (b1, b2) = (weight(rng, p1), weight(rng, p2));
                balanced_bilinear(n, p1, p2, q, b1, b2, 0.0)
            }
            Family::I1 | Family::I3 => {
                let p = pick(rng, &[1.5, 2.0, 3.0]);
                let (q, theta) = if self == Family::I1 {
                    let q = pick(rng, &[1.5, 2.0, 3.0]);
                    (q, p.min(q) * rng.random_range(0.6..1.0))
                } else {
                    let q = p * pick(rng, &[1.5, 2.0, 3.0]);
                    (q, p + (q - p) * rng.random_range(0.2..1.0))
                };
                let theta = theta.max(1.05);
                let a = rng.random_range(-0.5..2.0);
                balanced_iterated(n, p, q, theta, a, weight(rng, theta))
            }
        }
    }
}

/// `count` scenarios of a family whose preconditions hold and whose
/// condition constant is finite (infinite for [`Family::Diverging`]).
pub fn suite(family: Family, count: usize, seed: u64) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ family as u64);
    let mut out = Vec::with_capacity(count);
    for attempt in 0..count * 200 {
        if out.len() == count {
            break;
        }
        let Ok(s) = family.draw(&mut rng) else { continue };
        let r = evaluate_scenario(&s);
        let want = if family == Family::Diverging { Verdict::Fails } else { Verdict::Holds };
        if r.verdict == want && r.preconditions.ok() && family.accepts(r.kind) {
            out.push(s.with_id(format!("{}-{attempt}", family.as_str())));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn e1_is_balanced() {
        let s = balanced_bilinear(1, 2.0, 2.0, 2.0, 3.0, 3.0, 0.0).unwrap();
        let r = evaluate_scenario(&s);
        assert!((r.constant.get() - 0.5).abs() < 1e-12);
        let off = evaluate_scenario(&balanced_bilinear(1, 2.0, 2.0, 2.0, 3.0, 3.0, 0.5).unwrap());
        assert!(off.constant.is_infinite());
    }

    #[test]
    fn suites_fill_up() {
        for f in Family::ALL {
            let s = suite(f, 5, 1);
            assert_eq!(s.len(), 5, "{}", f.as_str());
        }
    }
}
