//! Condition constants, discretization machinery and brute-force oracles for
//! weighted bilinear and iterated Hardy inequalities on dual balls of `ℝⁿ`.

pub mod cli;
pub mod conditions;
pub mod discretize;
pub mod envelope;
pub mod error;
pub mod exponents;
pub mod ext_real;
pub mod grid;
pub mod hardy;
pub mod iterated;
pub mod oracle;
pub mod power;
pub mod scenario;
pub mod special;
pub mod stieltjes;
pub mod suite;
pub mod tail;
pub mod weights;

pub use error::{Error, Result};
pub use exponents::{classify_case, CaseTag, Exponents};
pub use ext_real::ExtReal;
