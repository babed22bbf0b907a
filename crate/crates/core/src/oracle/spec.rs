use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbolic::{Assignment, LinearForm};

/// Where one coordinate ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    Zp,
    PZp,
    Units,
    /// `Q_p ∖ Z_p`, integrated through `x = 1/y` with `y ∈ pZ_p`.
    Inverted,
    /// All of `Q_p`; only [`crate::oracle::divergence_probe`] accepts it.
    Qp,
}

impl Domain {
    pub fn name(self) -> &'static str {
        match self {
            Domain::Zp => "Zp",
            Domain::PZp => "pZp",
            Domain::Units => "Zp^x",
            Domain::Inverted => "Qp\\Zp",
            Domain::Qp => "Qp",
        }
    }
}

/// Coordinates are numbered from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorKind {
    /// `|x_i|`
    AbsX(usize),
    /// `|1 - x_i|`
    AbsOneMinusX(usize),
    /// `|x_i - x_j|`
    AbsDiff(usize, usize),
}

/// `constant + form(s)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exponent {
    pub constant: i64,
    pub form: LinearForm,
}

impl Exponent {
    pub fn new(constant: i64, form: LinearForm) -> Self {
        Exponent { constant, form }
    }

    pub fn form(form: LinearForm) -> Self {
        Exponent { constant: 0, form }
    }

    pub fn constant(c: i64) -> Self {
        Exponent {
            constant: c,
            form: LinearForm::zero(),
        }
    }

    pub fn eval(&self, assign: &Assignment) -> Result<Complex64> {
        Ok(self.form.eval(assign)? + self.constant as f64)
    }
}

/// `∫_{D_1 × ... × D_n} ∏ |factor|^{exponent} dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegralSpec {
    pub label: String,
    pub domains: Vec<Domain>,
    pub factors: Vec<(FactorKind, Exponent)>,
}

impl IntegralSpec {
    pub fn new(label: impl Into<String>, domains: Vec<Domain>) -> Self {
        IntegralSpec {
            label: label.into(),
            domains,
            factors: Vec::new(),
        }
    }

    pub fn with(mut self, kind: FactorKind, e: Exponent) -> Self {
        self.factors.push((kind, e));
        self
    }

    pub fn n(&self) -> usize {
        self.domains.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        for (k, _) in &self.factors {
            let ok = match *k {
                FactorKind::AbsX(i) | FactorKind::AbsOneMinusX(i) => i < n,
                FactorKind::AbsDiff(i, j) => i < n && j < n && i != j,
            };
            if !ok {
                return Err(Error::UnsupportedSpec(format!(
                    "{}: bad factor {k:?}",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

/// Domain of a coordinate after inversion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub(crate) enum Base {
    Zp,
    PZp,
    Units,
}

impl Base {
    pub(crate) fn measure(self, p: f64) -> f64 {
        match self {
            Base::Zp => 1.0,
            Base::PZp => 1.0 / p,
            Base::Units => 1.0 - 1.0 / p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) enum AtomKind {
    /// `|z_i - c|`
    Lin { i: usize, c: u64 },
    /// `|z_i - z_j|`
    Diff { i: usize, j: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Atom {
    pub kind: AtomKind,
    pub e: Complex64,
    /// The exponent when it is an integer.
    pub int: Option<i64>,
}

/// An integrand over a product of `Z_p`, `pZ_p` and `Z_p^×`, as a product of
/// powers of `|z_i - c|` and `|z_i - z_j|`.
#[derive(Debug, Clone)]
pub(crate) struct Compiled {
    pub bases: Vec<Base>,
    pub atoms: Vec<Atom>,
}

fn as_int(z: Complex64) -> Option<i64> {
    (z.im == 0.0 && z.re.fract() == 0.0 && z.re.abs() < 1e15).then_some(z.re as i64)
}

impl Compiled {
    /// On `pZ_p` we have `|1 - y| = 1`, and for `x ∈ Z_p`, `y ∈ pZ_p` also
    /// `|1 - x y| = 1`; so every factor on an inverted coordinate becomes a
    /// power of `|y|`, plus `|y_i - y_j|` when both are inverted.
    pub(crate) fn new(spec: &IntegralSpec, assign: &Assignment) -> Result<Compiled> {
        spec.validate()?;
        let mut bases = Vec::with_capacity(spec.n());
        let mut inverted = Vec::with_capacity(spec.n());
        let mut acc: BTreeMap<AtomKind, Complex64> = BTreeMap::new();
        let mut add = |k: AtomKind, e: Complex64| *acc.entry(k).or_default() += e;
        for (i, d) in spec.domains.iter().enumerate() {
            let (b, inv) = match d {
                Domain::Zp => (Base::Zp, false),
                Domain::PZp => (Base::PZp, false),
                Domain::Units => (Base::Units, false),
                Domain::Inverted => (Base::PZp, true),
                Domain::Qp => {
                    return Err(Error::UnsupportedSpec(format!(
                        "{}: Q_p coordinates need divergence_probe",
                        spec.label
                    )))
                }
            };
            bases.push(b);
            inverted.push(inv);
            if inv {
                add(AtomKind::Lin { i, c: 0 }, Complex64::new(-2.0, 0.0));
            }
        }
        for (kind, exp) in &spec.factors {
            let e = exp.eval(assign)?;
            match *kind {
                FactorKind::AbsX(i) => {
                    add(AtomKind::Lin { i, c: 0 }, if inverted[i] { -e } else { e })
                }
                FactorKind::AbsOneMinusX(i) => {
                    if inverted[i] {
                        add(AtomKind::Lin { i, c: 0 }, -e)
                    } else {
                        add(AtomKind::Lin { i, c: 1 }, e)
                    }
                }
                FactorKind::AbsDiff(i, j) => {
                    let (i, j) = (i.min(j), i.max(j));
                    match (inverted[i], inverted[j]) {
                        (false, false) => add(AtomKind::Diff { i, j }, e),
                        (true, false) => add(AtomKind::Lin { i, c: 0 }, -e),
                        (false, true) => add(AtomKind::Lin { i: j, c: 0 }, -e),
                        (true, true) => {
                            add(AtomKind::Diff { i, j }, e);
                            add(AtomKind::Lin { i, c: 0 }, -e);
                            add(AtomKind::Lin { i: j, c: 0 }, -e);
                        }
                    }
                }
            }
        }
        let atoms = acc
            .into_iter()
            .filter(|(_, e)| *e != Complex64::new(0.0, 0.0))
            .map(|(kind, e)| Atom {
                kind,
                e,
                int: as_int(e),
            })
            .collect();
        Ok(Compiled { bases, atoms })
    }

    pub(crate) fn n(&self) -> usize {
        self.bases.len()
    }

    pub(crate) fn integer_exponents(&self) -> bool {
        self.atoms.iter().all(|a| a.int.is_some())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::SVar;

    #[test]
    fn inversion_rewrites_factors() {
        let s = SVar::raw(1, 2);
        let spec = IntegralSpec::new("t", vec![Domain::Inverted, Domain::Zp])
            .with(FactorKind::AbsX(0), Exponent::form(LinearForm::var(s)))
            .with(FactorKind::AbsOneMinusX(0), Exponent::constant(1))
            .with(FactorKind::AbsDiff(0, 1), Exponent::constant(3));
        let a: Assignment = [(s, Complex64::new(0.5, 0.0))].into_iter().collect();
        let c = Compiled::new(&spec, &a).unwrap();
        assert_eq!(c.bases, vec![Base::PZp, Base::Zp]);
        assert_eq!(c.atoms.len(), 1);
        // -2 (Jacobian) - 0.5 - 1 - 3
        assert_eq!(c.atoms[0].e, Complex64::new(-6.5, 0.0));
    }

    #[test]
    fn zero_exponents_dropped() {
        let spec = IntegralSpec::new("t", vec![Domain::Zp])
            .with(FactorKind::AbsX(0), Exponent::constant(0));
        let c = Compiled::new(&spec, &Assignment::new()).unwrap();
        assert!(c.atoms.is_empty());
    }

    #[test]
    fn bad_index_rejected() {
        let spec = IntegralSpec::new("t", vec![Domain::Zp])
            .with(FactorKind::AbsDiff(0, 1), Exponent::constant(1));
        assert!(matches!(spec.validate(), Err(Error::UnsupportedSpec(_))));
    }
}
