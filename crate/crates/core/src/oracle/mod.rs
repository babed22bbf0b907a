//! Independent numerical evaluation of the integrals: exact summation over
//! residue cells for small dimension, stratified Monte Carlo otherwise, and
//! a divergence probe over growing balls of `Q_p^n`.

mod exact;
pub mod lemmas;
mod mc;
mod probe;
mod spec;

use num_complex::Complex64;
use serde::Serialize;

pub use exact::{exact_adaptive, exact_truncated, Truncated, MAX_CELLS};
pub use mc::{mc_integral, stratification, CoordStratum, PadicSample, Stratum};
pub use probe::{divergence_probe, ProbeStep};
pub use spec::{Domain, Exponent, FactorKind, IntegralSpec};

use crate::error::Result;
use crate::symbolic::{Assignment, RationalFn};

/// A numerical value with its statistical and systematic error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Estimate {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub stderr: f64,
    /// Covers truncation at the resolution level and unresolved samples.
    pub bias_bound: f64,
    pub samples: u64,
    /// Samples whose difference vanished at the resolution level.
    pub bias_events: u64,
}

pub(crate) fn ser_complex<S: serde::Serializer>(
    z: &Complex64,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("complex", 2)?;
    st.serialize_field("re", &z.re)?;
    st.serialize_field("im", &z.im)?;
    st.end()
}

impl Estimate {
    pub fn from_truncated(t: &Truncated) -> Self {
        Estimate {
            value: t.value,
            stderr: 0.0,
            bias_bound: t.tail_bound,
            samples: t.cells,
            bias_events: 0,
        }
    }

    fn merge(&mut self, o: &Estimate) {
        self.value += o.value;
        self.stderr = self.stderr.hypot(o.stderr);
        self.bias_bound += o.bias_bound;
        self.samples += o.samples;
        self.bias_events += o.bias_events;
    }
}

/// Resources for one comparison.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub samples: u64,
    /// Monte Carlo resolution; chosen from `p` when `None`.
    pub level: Option<u32>,
    pub seed: u64,
    pub max_cells: u64,
    pub target_tail: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            samples: 200_000,
            level: None,
            seed: 0x5eed,
            max_cells: 4_000_000,
            target_tail: 1e-7,
        }
    }
}

/// Smallest `m` with `p^{-m} ≤ 1e-7`.
pub fn default_level(p: u64) -> u32 {
    (7.0 * 10f64.ln() / (p as f64).ln()).ceil() as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
    /// An alternative closed form the oracle rules out, as expected.
    Refuted,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Refuted => "REFUTED",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    #[serde(serialize_with = "ser_complex")]
    pub symbolic: Complex64,
    pub estimate: Option<Estimate>,
    pub method: Method,
    pub verdict: Verdict,
    pub note: Option<String>,
}

impl Comparison {
    /// `|symbolic - estimate|`, or infinity without an estimate.
    pub fn deviation(&self) -> f64 {
        self.estimate
            .as_ref()
            .map(|e| (self.symbolic - e.value).norm())
            .unwrap_or(f64::INFINITY)
    }

    pub fn tolerance(&self) -> f64 {
        self.estimate
            .as_ref()
            .map(|e| tolerance(self.symbolic, e))
            .unwrap_or(0.0)
    }
}

/// `4·stderr + bias`, plus a relative `1e-10` for floating-point summation.
pub fn tolerance(symbolic: Complex64, e: &Estimate) -> f64 {
    4.0 * e.stderr + e.bias_bound + 1e-10 * (1.0 + symbolic.norm())
}

/// Largest dimension summed exactly; Monte Carlo above.
pub const EXACT_MAX_DIM: usize = 3;

/// Estimate a sum of integrals: exact summation up to [`EXACT_MAX_DIM`]
/// coordinates, with the cell budget shared between the specs, and Monte
/// Carlo above.
pub fn estimate(
    specs: &[IntegralSpec],
    p: u64,
    assign: &Assignment,
    budget: &Budget,
) -> Result<(Estimate, Method)> {
    let mut total: Option<Estimate> = None;
    let mut method = Method::Exact;
    for spec in specs {
        let e = if spec.n() <= EXACT_MAX_DIM {
            let share = specs.len() as f64;
            let t = exact_adaptive(
                spec,
                p,
                assign,
                budget.target_tail / share,
                budget.max_cells / specs.len() as u64,
            )?;
            Estimate::from_truncated(&t)
        } else {
            method = Method::MonteCarlo;
            let level = budget.level.unwrap_or_else(|| default_level(p));
            mc_integral(spec, p, assign, budget.samples, level, budget.seed)?
        };
        match total.as_mut() {
            Some(t) => t.merge(&e),
            None => total = Some(e),
        }
    }
    Ok((
        total.unwrap_or(Estimate {
            value: Complex64::new(0.0, 0.0),
            stderr: 0.0,
            bias_bound: 0.0,
            samples: 0,
            bias_events: 0,
        }),
        method,
    ))
}

/// Compare a symbolic value against the oracle for `Σ specs`. An oracle that
/// cannot bound its error (non-integrable point, infinite bias) yields FAIL.
pub fn compare_value(
    symbolic: Complex64,
    specs: &[IntegralSpec],
    p: u64,
    assign: &Assignment,
    budget: &Budget,
) -> Comparison {
    let method = if specs.iter().all(|s| s.n() <= EXACT_MAX_DIM) {
        Method::Exact
    } else {
        Method::MonteCarlo
    };
    match estimate(specs, p, assign, budget) {
        Err(e) => Comparison {
            symbolic,
            estimate: None,
            method,
            verdict: Verdict::Fail,
            note: Some(format!("oracle: {e}")),
        },
        Ok((est, method)) => {
            let tol = tolerance(symbolic, &est);
            let dev = (symbolic - est.value).norm();
            let (verdict, note) = if !est.bias_bound.is_finite() {
                (
                    Verdict::Fail,
                    Some("oracle error bound is infinite".to_string()),
                )
            } else if dev <= tol {
                (Verdict::Pass, None)
            } else {
                (
                    Verdict::Fail,
                    Some(format!("deviation {dev:.3e} > tolerance {tol:.3e}")),
                )
            };
            Comparison {
                symbolic,
                estimate: Some(est),
                method,
                verdict,
                note,
            }
        }
    }
}

/// [`compare_value`] for a rational function evaluated at `assign`.
pub fn compare(
    symbolic: &RationalFn,
    specs: &[IntegralSpec],
    p: u64,
    assign: &Assignment,
    budget: &Budget,
) -> Result<Comparison> {
    let v = symbolic.eval(p as f64, assign)?;
    Ok(compare_value(v, specs, p, assign, budget))
}
