//! Condition constants of the bilinear characterization (`B`, `A`, `D`,
//! `E` families) and of the iterated inequality (`I` family), with
//! precondition checks and a verdict.

use std::fmt;

use crate::envelope::{MonotoneEnvelope, Sampled};
use crate::error::{Error, Result};
use crate::exponents::{CaseTag, Exponents};
use crate::ext_real::ExtReal;
use crate::grid::Grid;
use crate::hardy::{dual_hardy_norm_power, dual_hardy_norm_sampled, primitive_sampled};
use crate::iterated::{
    condition_i_grid, condition_i_power, IteratedCase, IteratedData, IteratedExponents, IteratedPower, Outcome,
    Preconditions,
};
use crate::power::{primitive_power, tail_norm_power, weight_power, PowerLaw, BALANCE_TOL};
use crate::scenario::{dual_transform, left_sampled, sample_big_u, sample_v, sample_weight, PathMode, Problem, Scenario};
use crate::stieltjes::BorelMeasure;
use crate::weights::RadialWeight;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    PreconditionsViolated,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Fails => "fails",
            Verdict::PreconditionsViolated => "preconditions-violated",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportKind {
    Bilinear(CaseTag),
    Iterated(IteratedCase),
}

impl ReportKind {
    pub fn tag(self) -> &'static str {
        match self {
            ReportKind::Bilinear(c) => c.as_str(),
            ReportKind::Iterated(c) => c.as_str(),
        }
    }
}

/// How a constant was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalPath {
    Closed,
    Grid,
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub scenario_id: String,
    pub kind: ReportKind,
    pub constant: ExtReal,
    pub factors: Vec<(String, ExtReal)>,
    pub preconditions: Preconditions,
    pub verdict: Verdict,
    pub path: EvalPath,
    pub note: Option<String>,
}

impl ConditionReport {
    /// `case=… constant=… verdict=…`.
    pub fn summary_line(&self) -> String {
        format!("case={} constant={} verdict={}", self.kind.tag(), fmt_sci(self.constant), self.verdict)
    }
}

/// Scientific notation with three decimals, `inf` for `+∞`.
pub fn fmt_sci(x: ExtReal) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{:.3e}", x.get())
    }
}

fn verdict_of(value: ExtReal, pre: &Preconditions) -> Verdict {
    if !pre.ok() {
        Verdict::PreconditionsViolated
    } else if value.is_finite() {
        Verdict::Holds
    } else {
        Verdict::Fails
    }
}

/// Power-law data of a bilinear scenario.
struct PowerData {
    u: PowerLaw,
    big_u: PowerLaw,
    v1: PowerLaw,
    v2: PowerLaw,
}

/// Grid data of a bilinear scenario.
struct GridData {
    grid: Grid,
    u: Sampled,
    u_left: Sampled,
    big_u: Sampled,
    v1: MonotoneEnvelope,
    v2: MonotoneEnvelope,
}

enum Data {
    Power(PowerData),
    Grid(Box<GridData>),
}

fn bilinear_parts(s: &Scenario) -> Result<(Exponents, &RadialWeight, &RadialWeight, &RadialWeight)> {
    match &s.problem {
        Problem::Bilinear { exponents, u, v1, v2 } => Ok((*exponents, u, v1, v2)),
        Problem::Iterated { .. } => Err(Error::Domain("scenario is iterated, not bilinear".into())),
    }
}

fn power_data(s: &Scenario) -> Option<PowerData> {
    let (e, u, v1, v2) = bilinear_parts(s).ok()?;
    if !s.is_power() {
        return None;
    }
    Some(PowerData {
        u: weight_power(u)?,
        big_u: primitive_power(u)?,
        v1: tail_norm_power(v1, e.n, e.p1)?,
        v2: tail_norm_power(v2, e.n, e.p2)?,
    })
}

fn load(s: &Scenario) -> Result<Data> {
    let (e, u, v1, v2) = bilinear_parts(s)?;
    match s.path {
        PathMode::Closed => power_data(s)
            .map(Data::Power)
            .ok_or_else(|| Error::Domain("closed-form path needs power weights".into())),
        PathMode::Auto if s.is_power() => Ok(Data::Power(power_data(s).expect("power scenario"))),
        _ => {
            let quad = s.path == PathMode::Quadrature;
            let grid = s.build_grid()?;
            let (uw, u_left) = sample_weight(&grid, u);
            let big_u = sample_big_u(&grid, u, quad);
            let v1 = sample_v(&grid, v1, e.n, e.p1, quad);
            let v2 = sample_v(&grid, v2, e.n, e.p2, quad);
            Ok(Data::Grid(Box::new(GridData { grid, u: uw, u_left, big_u, v1, v2 })))
        }
    }
}

/// `sup` of a product of sampled factors, including left limits at jumps.
fn sup_both(g: &Grid, right: Sampled, left: Sampled) -> ExtReal {
    ExtReal::from_f64(right.sup(g).max(left.sup(g)))
}

fn v_pre(v: &PowerLaw) -> (bool, bool) {
    (v.c.is_finite(), v.c == 0.0 || v.e < -BALANCE_TOL)
}

fn v_pre_grid(v: &MonotoneEnvelope) -> (bool, bool) {
    let f = &v.f;
    (
        f.vals.iter().all(|x| x.is_finite()) && !f.tails.inf.blows_up_at_inf(),
        f.is_zero() || f.tails.inf.vanishes_at_inf(),
    )
}

fn outcome(value: ExtReal, factors: Vec<(String, ExtReal)>) -> Outcome {
    Outcome { value, factors, preconditions: Preconditions::default() }
}

/// `B₁`, `B₂`, `B₃` for `p₁ ≤ q < ∞`.
pub fn condition_t52(s: &Scenario) -> Result<Outcome> {
    let (e, ..) = bilinear_parts(s)?;
    let tag = e.classify();
    let q = e.q;
    Ok(match (load(s)?, tag) {
        (Data::Power(d), CaseTag::T52a) => {
            outcome(ExtReal::from_f64(d.big_u.powf(1.0 / q).mul(d.v1).mul(d.v2).sup()), vec![])
        }
        (Data::Power(d), CaseTag::T52b | CaseTag::T52c) => {
            let inner = if tag == CaseTag::T52b {
                let r2 = e.r2.expect("q < p2");
                d.big_u.powf(r2 / e.p2).mul(d.u).mul(d.v2.powf(r2)).primitive().powf(1.0 / r2)
            } else {
                d.u.mul(d.v2.powf(q)).primitive().powf(1.0 / q)
            };
            outcome(ExtReal::from_f64(d.v1.mul(inner).sup()), vec![])
        }
        (Data::Grid(d), CaseTag::T52a) => {
            let f = |a: Sampled, b: Sampled| d.big_u.powf(1.0 / q).mul(&a).mul(&b);
            let v = sup_both(&d.grid, f(d.v1.f.clone(), d.v2.f.clone()), f(left_sampled(&d.v1), left_sampled(&d.v2)));
            outcome(v, vec![])
        }
        (Data::Grid(d), CaseTag::T52b | CaseTag::T52c) => {
            let inner = if tag == CaseTag::T52b {
                let r2 = e.r2.expect("q < p2");
                primitive_sampled(&d.grid, &d.big_u.powf(r2 / e.p2).mul(&d.u).mul(&d.v2.f.powf(r2))).powf(1.0 / r2)
            } else {
                primitive_sampled(&d.grid, &d.u.mul(&d.v2.f.powf(q))).powf(1.0 / q)
            };
            let v = sup_both(&d.grid, d.v1.f.mul(&inner), left_sampled(&d.v1).mul(&inner));
            outcome(v, vec![("inner_at_grid_end".into(), ExtReal::from_f64(*inner.vals.last().unwrap()))])
        }
        _ => return Err(Error::Domain(format!("case {tag} is not a T52 case"))),
    })
}

/// Iterated exponents and inputs that `A₁ … A₄` reduce to: `p ← q`,
/// `q ← r₁`, `θ ← p₂`, `V ← V_{p₂}` and `μ ← ν = U^{r₁/q} d(-V_{p₁}^{r₁})`.
fn t53_exponents(e: &Exponents) -> Result<IteratedExponents> {
    let r1 = e.r1.ok_or_else(|| Error::Domain("T53 needs q < p1".into()))?;
    IteratedExponents::new(e.q, r1, e.p2)
}

fn t53_variant(tag: CaseTag) -> Result<IteratedCase> {
    Ok(match tag {
        CaseTag::T53i => IteratedCase::I1,
        CaseTag::T53ii => IteratedCase::I3,
        CaseTag::T53iii => IteratedCase::I4,
        CaseTag::T53iv => IteratedCase::I5,
        _ => return Err(Error::Domain(format!("case {tag} is not a T53 case"))),
    })
}

/// `A₁ … A₄` for `q < p₁ < ∞`.
pub fn condition_t53(s: &Scenario) -> Result<Outcome> {
    let (e, ..) = bilinear_parts(s)?;
    let tag = e.classify();
    let variant = t53_variant(tag)?;
    let ie = t53_exponents(&e)?;
    let r1 = ie.q;
    let q = e.q;
    match load(s)? {
        Data::Power(d) => {
            let (f1, l1) = v_pre(&d.v1);
            let (a, b1, k1) = (d.big_u.e, -d.v1.e, d.v1.c);
            let kappa = a * r1 / q - b1 * r1;
            let m = d.big_u.c.powf(r1 / q) * k1.powf(r1) * r1 * b1;
            let nu = if k1 == 0.0 || !(b1 > BALANCE_TOL) { PowerLaw::ZERO } else { PowerLaw::new(m, kappa - 1.0) };
            let mut out = condition_i_power(&ie, variant, IteratedPower { big_u: d.big_u, mu: nu, v: d.v2 })?;
            out.preconditions.v_finite = out.preconditions.v_finite.map(|x| x && f1);
            out.preconditions.lim_v_zero = out.preconditions.lim_v_zero.map(|x| x && l1);
            Ok(out)
        }
        Data::Grid(d) => {
            let (f1, l1) = v_pre_grid(&d.v1);
            let factor = d.big_u.powf(r1 / q);
            let nu = BorelMeasure::from_stieltjes(d.v1.clone(), r1, Some(factor)).compile(&d.grid)?;
            let data = IteratedData { grid: &d.grid, big_u: &d.big_u, v: &d.v2, mu: &nu };
            let mut out = condition_i_grid(&ie, variant, &data)?;
            out.preconditions.v_finite = out.preconditions.v_finite.map(|x| x && f1);
            out.preconditions.lim_v_zero = out.preconditions.lim_v_zero.map(|x| x && l1);
            Ok(out)
        }
    }
}

/// `D₁`, `D₂`, `D₃` for `p₁ = ∞`: the linear dual-Hardy condition with
/// outer density `w = u V_∞[v₁]^q` and inner tail norm `V_{p₂}`.
pub fn condition_t54(s: &Scenario) -> Result<Outcome> {
    let (e, ..) = bilinear_parts(s)?;
    let tag = e.classify();
    if !matches!(tag, CaseTag::T54i | CaseTag::T54ii | CaseTag::T54iii) {
        return Err(Error::Domain(format!("case {tag} is not a T54 case")));
    }
    let q = e.q;
    Ok(match load(s)? {
        Data::Power(d) => {
            let w = d.u.mul(d.v1.powf(q));
            outcome(dual_hardy_norm_power(w, w.primitive(), d.v2, e.p2, q), vec![])
        }
        Data::Grid(d) => {
            let w = d.u.mul(&d.v1.f.powf(q));
            let big_w = primitive_sampled(&d.grid, &w);
            let right = dual_hardy_norm_sampled(&d.grid, &w, &big_w, &d.v2.f, e.p2, q);
            let left = dual_hardy_norm_sampled(&d.grid, &w, &big_w, &left_sampled(&d.v2), e.p2, q);
            outcome(right.max(left), vec![])
        }
    })
}

/// `E₁`, `E₂`, `E₃` for `q = ∞`: `sup_t u(t) V_{p₁}(t) V_{p₂}(t)`.
pub fn condition_t55(s: &Scenario) -> Result<Outcome> {
    let (e, ..) = bilinear_parts(s)?;
    if !e.q.is_infinite() {
        return Err(Error::Domain(format!("case {} is not a T55 case", e.classify())));
    }
    Ok(match load(s)? {
        Data::Power(d) => outcome(ExtReal::from_f64(d.u.mul(d.v1).mul(d.v2).sup()), vec![]),
        Data::Grid(d) => {
            let right = d.u.mul(&d.v1.f).mul(&d.v2.f);
            let left = d.u_left.mul(&left_sampled(&d.v1)).mul(&left_sampled(&d.v2));
            outcome(sup_both(&d.grid, right, left), vec![])
        }
    })
}

/// `I_variant` of an iterated scenario.
pub fn condition_i(s: &Scenario, variant: IteratedCase) -> Result<Outcome> {
    let Problem::Iterated { exponents, u, v, mu } = &s.problem else {
        return Err(Error::Domain("scenario is bilinear, not iterated".into()));
    };
    let power = s.is_power() && s.path != PathMode::Quadrature;
    if s.path == PathMode::Closed && !power {
        return Err(Error::Domain("closed-form path needs power weights and a power density".into()));
    }
    if power {
        let pw = IteratedPower {
            big_u: primitive_power(u).expect("power weight"),
            mu: {
                let (c, a) = mu.density.as_ref().and_then(|d| d.as_power()).expect("power density");
                PowerLaw::new(c, a)
            },
            v: tail_norm_power(v, s.n, exponents.theta).expect("power weight"),
        };
        return condition_i_power(exponents, variant, pw);
    }
    let quad = s.path == PathMode::Quadrature;
    let grid = s.build_grid()?;
    let big_u = sample_big_u(&grid, u, quad);
    let venv = sample_v(&grid, v, s.n, exponents.theta, quad);
    let m = mu.compile(&grid)?;
    condition_i_grid(exponents, variant, &IteratedData { grid: &grid, big_u: &big_u, v: &venv, mu: &m })
}

fn used_path(s: &Scenario) -> EvalPath {
    if s.path != PathMode::Quadrature && s.is_power() {
        EvalPath::Closed
    } else {
        EvalPath::Grid
    }
}

/// Classifies, checks preconditions, evaluates the matching constant and
/// assembles a report. Errors are reported, never returned.
pub fn evaluate_scenario(s: &Scenario) -> ConditionReport {
    let fallback_kind = match &s.problem {
        Problem::Bilinear { exponents, .. } => ReportKind::Bilinear(exponents.classify()),
        Problem::Iterated { exponents, .. } => ReportKind::Iterated(exponents.case()),
    };
    let failed = |msg: String| ConditionReport {
        scenario_id: s.id.clone(),
        kind: fallback_kind,
        constant: ExtReal::INFINITY,
        factors: vec![],
        preconditions: Preconditions::default(),
        verdict: Verdict::PreconditionsViolated,
        path: used_path(s),
        note: Some(msg),
    };
    let d = match dual_transform(s) {
        Ok(d) => d,
        Err(e) => return failed(e.to_string()),
    };
    let result = match &d.problem {
        Problem::Bilinear { exponents, .. } => {
            let tag = exponents.classify();
            let r = match tag {
                CaseTag::T52a | CaseTag::T52b | CaseTag::T52c => condition_t52(&d),
                CaseTag::T53i | CaseTag::T53ii | CaseTag::T53iii | CaseTag::T53iv => condition_t53(&d),
                CaseTag::T54i | CaseTag::T54ii | CaseTag::T54iii => condition_t54(&d),
                CaseTag::T55a | CaseTag::T55b | CaseTag::T55c => condition_t55(&d),
            };
            r.map(|o| (ReportKind::Bilinear(tag), o))
        }
        Problem::Iterated { exponents, .. } => {
            let c = exponents.case();
            condition_i(&d, c).map(|o| (ReportKind::Iterated(c), o))
        }
    };
    match result {
        Ok((kind, o)) => {
            let verdict = verdict_of(o.value, &o.preconditions);
            let note = (!o.preconditions.ok()).then(|| o.preconditions.describe());
            ConditionReport {
                scenario_id: s.id.clone(),
                kind,
                constant: o.value,
                factors: o.factors,
                preconditions: o.preconditions,
                verdict,
                path: used_path(&d),
                note,
            }
        }
        Err(e) => failed(e.to_string()),
    }
}
