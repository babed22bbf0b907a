use num_complex::Complex64;

use super::exact::{exact_compiled, MAX_CELLS};
use super::spec::{Atom, AtomKind, Base, Compiled, Domain, FactorKind, IntegralSpec};
use crate::error::{Error, Result};
use crate::symbolic::Assignment;

/// Partial integral over the ball `B_m = (p^{-m} Z_p)^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeStep {
    pub level: u32,
    pub value: Complex64,
    /// Bound on the unresolved part of this partial integral.
    pub tail_bound: f64,
    /// `value` minus the previous step's value.
    pub increment: Complex64,
}

/// Substituting `x = p^{-m} y` maps `B_m` onto `Z_p^n`:
/// `|x_i| = p^m |y_i|`, `|1 - x_i| = p^m |y_i - p^m|`,
/// `|x_i - x_j| = p^m |y_i - y_j|`, `dx = p^{mn} dy`.
fn scaled(
    spec: &IntegralSpec,
    assign: &Assignment,
    p: u64,
    m: u32,
) -> Result<(Compiled, Complex64)> {
    let n = spec.n();
    let pm = p
        .checked_pow(m)
        .ok_or_else(|| Error::UnsupportedSpec(format!("p^{m} overflows")))?;
    let mut atoms: Vec<Atom> = Vec::new();
    let mut total = Complex64::new(n as f64, 0.0);
    for (kind, exp) in &spec.factors {
        let e = exp.eval(assign)?;
        total += e;
        let kind = match *kind {
            FactorKind::AbsX(i) => AtomKind::Lin { i, c: 0 },
            FactorKind::AbsOneMinusX(i) => AtomKind::Lin { i, c: pm },
            FactorKind::AbsDiff(i, j) => AtomKind::Diff {
                i: i.min(j),
                j: i.max(j),
            },
        };
        match atoms.iter_mut().find(|a| a.kind == kind) {
            Some(a) => a.e += e,
            None => atoms.push(Atom { kind, e, int: None }),
        }
    }
    atoms.retain(|a| a.e != Complex64::new(0.0, 0.0));
    for a in &mut atoms {
        a.int = (a.e.im == 0.0 && a.e.re.fract() == 0.0).then_some(a.e.re as i64);
    }
    let factor = (total * (m as f64) * (p as f64).ln()).exp();
    Ok((
        Compiled {
            bases: vec![Base::Zp; n],
            atoms,
        },
        factor,
    ))
}

/// Partial integrals over `B_1, ..., B_levels`, each resolved `extra` levels
/// below the ball's own scale.
///
/// All coordinates must be [`Domain::Qp`]; a compact spec (no `Q_p`
/// coordinate) is its own truncation at every level.
pub fn divergence_probe(
    spec: &IntegralSpec,
    p: u64,
    assign: &Assignment,
    levels: u32,
    extra: u32,
) -> Result<Vec<ProbeStep>> {
    spec.validate()?;
    let all_qp = spec.domains.iter().all(|d| *d == Domain::Qp);
    let compact = spec.domains.iter().all(|d| *d != Domain::Qp);
    if !all_qp && !compact {
        return Err(Error::UnsupportedSpec(
            "divergence probe needs all coordinates in Q_p or none".into(),
        ));
    }
    let mut out: Vec<ProbeStep> = Vec::new();
    for m in 1..=levels {
        let (value, tail) = if all_qp {
            let (c, factor) = scaled(spec, assign, p, m)?;
            let r = exact_compiled(&c, p, m + extra, MAX_CELLS)?;
            (r.value * factor, r.tail_bound * factor.norm())
        } else {
            let c = Compiled::new(spec, assign)?;
            let r = exact_compiled(&c, p, m + extra, MAX_CELLS)?;
            (r.value, r.tail_bound)
        };
        let prev = out.last().map(|s| s.value).unwrap_or_default();
        out.push(ProbeStep {
            level: m,
            value,
            tail_bound: tail,
            increment: value - prev,
        });
    }
    Ok(out)
}
