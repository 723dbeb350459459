//! The two-resolution verification protocol: condition constant against
//! oracle lower bounds at `N` and `2N` cells (and `4N` when the constant is
//! infinite).

use std::fmt;

use crate::conditions::{evaluate_scenario, fmt_sci, ConditionReport, Verdict};
use crate::error::Result;
use crate::ext_real::ExtReal;
use crate::oracle::{best_lower, OracleConfig};
use crate::scenario::Scenario;

/// Accepted window for `constant / oracle_lb`.
pub const WINDOW: (f64, f64) = (1.0, 50.0);
/// Largest relative change of the ratio under one grid doubling.
pub const STABILITY: f64 = 0.2;
/// Least growth per doubling that counts as divergence.
pub const GROWTH: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// Ratio in the window and stable.
    Certified,
    /// Stable, but the ratio leaves the window.
    OutsideWindow,
    /// The ratio moves by more than [`STABILITY`].
    Unstable,
    /// Infinite constant and a bound growing by [`GROWTH`] per doubling.
    Diverging,
    /// Infinite constant without the growth signature.
    Inconclusive,
    PreconditionsViolated,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Certified => "certified",
            Outcome::OutsideWindow => "outside-window",
            Outcome::Unstable => "unstable",
            Outcome::Diverging => "diverging",
            Outcome::Inconclusive => "inconclusive",
            Outcome::PreconditionsViolated => "preconditions-violated",
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct Verification {
    pub report: ConditionReport,
    /// `(cells, oracle lower bound)` per resolution.
    pub lower: Vec<(usize, ExtReal)>,
    pub ratio: Option<f64>,
    pub ratio_refined: Option<f64>,
    pub stable: Option<bool>,
    pub outcome: Outcome,
}

fn ratio(c: ExtReal, l: ExtReal) -> f64 {
    if l.is_zero() {
        f64::INFINITY
    } else if l.is_infinite() {
        if c.is_infinite() {
            1.0
        } else {
            0.0
        }
    } else {
        c.get() / l.get()
    }
}

/// `N`, `2N` (and `4N` for an infinite constant) with a fixed seed.
pub fn verify(s: &Scenario, cells: usize, seed: u64) -> Result<Verification> {
    let report = evaluate_scenario(s);
    if report.verdict == Verdict::PreconditionsViolated {
        return Ok(Verification { report, lower: vec![], ratio: None, ratio_refined: None, stable: None, outcome: Outcome::PreconditionsViolated });
    }
    let levels = if report.constant.is_infinite() { 3 } else { 2 };
    let lower = (0..levels)
        .map(|k| {
            let n = cells << k;
            let cfg = OracleConfig { cells: n, seed, ..OracleConfig::default() };
            Ok((n, best_lower(s, &cfg)?.value))
        })
        .collect::<Result<Vec<_>>>()?;
    if report.constant.is_infinite() {
        let grows = lower.iter().all(|(_, l)| l.is_infinite())
            || lower.windows(2).all(|w| w[0].1.get() > 0.0 && w[1].1.get() >= GROWTH * w[0].1.get());
        let outcome = if grows { Outcome::Diverging } else { Outcome::Inconclusive };
        return Ok(Verification { report, lower, ratio: None, ratio_refined: None, stable: None, outcome });
    }
    let r = ratio(report.constant, lower[0].1);
    let rr = ratio(report.constant, lower[1].1);
    let stable = r.is_finite() && rr.is_finite() && r > 0.0 && (rr / r - 1.0).abs() < STABILITY;
    let inside = |x: f64| x >= WINDOW.0 && x <= WINDOW.1;
    let outcome = if !stable {
        Outcome::Unstable
    } else if inside(r) && inside(rr) {
        Outcome::Certified
    } else {
        Outcome::OutsideWindow
    };
    Ok(Verification { report, lower, ratio: Some(r), ratio_refined: Some(rr), stable: Some(stable), outcome })
}

impl Verification {
    /// One `key=value` line.
    pub fn line(&self) -> String {
        let opt = |x: Option<f64>| x.map_or("-".to_string(), |v| fmt_sci(ExtReal::from_f64(v)));
        let lbs: Vec<String> = self.lower.iter().map(|(_, l)| fmt_sci(*l)).collect();
        let cells: Vec<String> = self.lower.iter().map(|(n, _)| n.to_string()).collect();
        format!(
            "scenario={} case={} constant={} cells={} oracle_lb={} ratio={} ratio_refined={} stable={} verdict={}",
            self.report.scenario_id,
            self.report.kind.tag(),
            fmt_sci(self.report.constant),
            if cells.is_empty() { "-".into() } else { cells.join(",") },
            if lbs.is_empty() { "-".into() } else { lbs.join(",") },
            opt(self.ratio),
            opt(self.ratio_refined),
            match self.stable {
                Some(true) => "yes",
                Some(false) => "no",
                None => "-",
            },
            self.outcome
        )
    }
}
