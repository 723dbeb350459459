//! Exponent tuples and classification into the characterization cases.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Tolerance used when comparing exponents for equality.
pub const EXP_TOL: f64 = 1e-12;

/// `1/p` with `1/∞ = 0`.
pub fn recip(p: f64) -> f64 {
    if p.is_infinite() {
        0.0
    } else {
        1.0 / p
    }
}

/// Inverse of [`recip`]: `1/0 = ∞`.
fn from_recip(x: f64) -> f64 {
    if x <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / x
    }
}

/// Hölder conjugate `p'` with `1/p + 1/p' = 1` (`1' = ∞`, `∞' = 1`).
pub fn conjugate(p: f64) -> f64 {
    from_recip(1.0 - recip(p))
}

/// Exponent `r` with `1/r = 1/a - 1/b`, defined only when `a < b`.
fn gap(a: f64, b: f64) -> Option<f64> {
    let d = recip(a) - recip(b);
    (d > EXP_TOL).then(|| 1.0 / d)
}

/// The exponent data of a bilinear or iterated problem together with the
/// derived quantities that appear in the condition constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exponents {
    pub n: usize,
    pub p1: f64,
    pub p2: f64,
    pub q: f64,
    pub theta: f64,
    /// `1/r1 = 1/q - 1/p1` when `q < p1`.
    pub r1: Option<f64>,
    /// `1/r2 = 1/q - 1/p2` when `q < p2`.
    pub r2: Option<f64>,
    /// `1/rho = (1/q - 1/theta)_+`; infinite when `theta <= q`.
    pub rho: f64,
    /// `1/r = 1/p - 1/theta` when `p < theta`, with `p = p1`.
    pub r: Option<f64>,
    /// `1/l = 1/r1 - 1/p2` when `p2 > r1`.
    pub l: Option<f64>,
    pub p1_conj: f64,
    pub p2_conj: f64,
    pub theta_conj: f64,
}

impl Exponents {
    /// Builds and validates the exponent tuple.
    ///
    /// `p1`, `p2` and `theta` must lie in `[1, ∞]`, `q` in `(0, ∞]`.
    pub fn derive(n: usize, p1: f64, p2: f64, q: f64, theta: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension n must be at least 1".into()));
        }
        for (name, value) in [("p1", p1), ("p2", p2), ("theta", theta)] {
            if value.is_nan() || value < 1.0 {
                return Err(Error::Domain(format!("{name} = {value} must lie in [1, inf]")));
            }
        }
        if q.is_nan() || q <= 0.0 {
            return Err(Error::Domain(format!("q = {q} must lie in (0, inf]")));
        }
        let r1 = gap(q, p1);
        let r2 = gap(q, p2);
        let rho = from_recip((recip(q) - recip(theta)).max(0.0));
        let r = gap(p1, theta);
        let l = r1.and_then(|r1| gap(r1, p2));
        Ok(Exponents {
            n,
            p1,
            p2,
            q,
            theta,
            r1,
            r2,
            rho,
            r,
            l,
            p1_conj: conjugate(p1),
            p2_conj: conjugate(p2),
            theta_conj: conjugate(theta),
        })
    }

    /// Exponents of a bilinear problem; `theta` defaults to `p2`.
    pub fn bilinear(n: usize, p1: f64, p2: f64, q: f64) -> Result<Self> {
        Self::derive(n, p1, p2, q, p2)
    }

    /// Swaps the roles of `p1` and `p2`.
    pub fn swapped(&self) -> Result<Self> {
        Self::derive(self.n, self.p2, self.p1, self.q, self.theta)
    }

    /// Theorem case of the bilinear problem.
    pub fn classify(&self) -> CaseTag {
        classify_case(self)
    }
}

/// One of the thirteen cases of the bilinear characterization.
///
/// `T52*` covers `p1 <= q < ∞`, `T53*` covers `q < p1 < ∞`, `T54*` the
/// limiting case `p1 = ∞` and `T55*` the case `q = ∞`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CaseTag {
    T52a,
    T52b,
    T52c,
    T53i,
    T53ii,
    T53iii,
    T53iv,
    T54i,
    T54ii,
    T54iii,
    T55a,
    T55b,
    T55c,
}

impl CaseTag {
    pub const ALL: [CaseTag; 13] = [
        CaseTag::T52a,
        CaseTag::T52b,
        CaseTag::T52c,
        CaseTag::T53i,
        CaseTag::T53ii,
        CaseTag::T53iii,
        CaseTag::T53iv,
        CaseTag::T54i,
        CaseTag::T54ii,
        CaseTag::T54iii,
        CaseTag::T55a,
        CaseTag::T55b,
        CaseTag::T55c,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::T52a => "T52a",
            CaseTag::T52b => "T52b",
            CaseTag::T52c => "T52c",
            CaseTag::T53i => "T53i",
            CaseTag::T53ii => "T53ii",
            CaseTag::T53iii => "T53iii",
            CaseTag::T53iv => "T53iv",
            CaseTag::T54i => "T54i",
            CaseTag::T54ii => "T54ii",
            CaseTag::T54iii => "T54iii",
            CaseTag::T55a => "T55a",
            CaseTag::T55b => "T55b",
            CaseTag::T55c => "T55c",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseTag::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse { line: 0, message: format!("unknown case tag `{s}`") })
    }
}

/// Dispatch: `q = ∞` first, then `p1 = ∞`, then `p1 <= q`, else `q < p1`.
/// Sub-cases use the half-open ranges of the theorem hypotheses verbatim.
pub fn classify_case(e: &Exponents) -> CaseTag {
    let (p1, p2, q) = (e.p1, e.p2, e.q);
    if q.is_infinite() {
        return match (p1.is_infinite(), p2.is_infinite()) {
            (false, false) => CaseTag::T55a,
            (false, true) => CaseTag::T55b,
            // p1 = ∞ with p2 < ∞ is case (b) with the roles of v1 and v2 swapped.
            (true, false) => CaseTag::T55b,
            (true, true) => CaseTag::T55c,
        };
    }
    if p1.is_infinite() {
        return if p2 <= q {
            CaseTag::T54i
        } else if p2.is_finite() {
            CaseTag::T54ii
        } else {
            CaseTag::T54iii
        };
    }
    if p1 <= q {
        return if p2 <= q {
            CaseTag::T52a
        } else if p2.is_finite() {
            CaseTag::T52b
        } else {
            CaseTag::T52c
        };
    }
    let r1 = e.r1.expect("q < p1 implies r1 is defined");
    if p2 <= q {
        CaseTag::T53i
    } else if p2 <= r1 {
        CaseTag::T53ii
    } else if p2.is_finite() {
        CaseTag::T53iii
    } else {
        CaseTag::T53iv
    }
}
