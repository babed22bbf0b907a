//! Exact symbolic engine and numerical oracle for p-adic Koba-Nielsen zeta
//! functions `Z^(N)(s) = ∫_{Q_p^{N-3}} ∏ |x_i|^{s_1i} |1 - x_i|^{s_(N-1)i}
//! ∏ |x_i - x_j|^{s_ij} dx`.
//!
//! * [`symbolic`]: rational functions in `p` and `p^{L(s)}` with factored
//!   denominators.
//! * [`combinatorics`]: residue classes of `(F_p^×)^n` as set partitions.
//! * [`recursion`]: memoized recursions for the auxiliary integrals and `Z^(N)`.
//! * [`domain`]: convergence conditions, witness points, pole hyperplanes.
//! * [`oracle`]: truncated cell sums and stratified Monte Carlo over `Z_p^n`.
//! * [`verify`]: the cross-check suite driving the oracle.

pub mod combinatorics;
pub mod domain;
pub mod error;
mod numeric;
pub mod oracle;
pub mod recursion;
pub mod symbolic;
pub mod verify;

pub use combinatorics::{CoincidencePattern, IndexSet, MarkedPattern};
pub use error::{Error, Result};
pub use recursion::{base_z_f, AmplitudeContext, Endpoint, Engine, MemoKey, ZN_EXPAND_BUDGET};
pub use symbolic::{
    Assignment, DenFactor, LazySum, LinearForm, PolyExpr, PrimeLaurent, RationalFn, SVar, Term,
};
