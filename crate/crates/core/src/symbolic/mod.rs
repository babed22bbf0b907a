//! Exact arithmetic on rational functions in `p` and `p^{L(s)}`.

mod form;
mod json;
mod laurent;
mod modular;
mod poly;
mod precise;
mod rational;
mod sum;
mod svar;

pub use form::{Assignment, LinearForm};
pub use json::{form_from_json, form_to_json};
pub use laurent::PrimeLaurent;
pub use poly::{PolyExpr, Term};
pub use rational::{DenFactor, DenKey, RationalFn, EPS_POLE};
pub use sum::LazySum;
pub use svar::SVar;
