use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::Zero;

use super::precise::Evaluator;
use super::{Assignment, LinearForm, PrimeLaurent};
use crate::error::Result;

/// `coeff(p) * p^{form(s)}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Term {
    pub coeff: PrimeLaurent,
    pub form: LinearForm,
}

impl Term {
    pub fn new(coeff: PrimeLaurent, form: LinearForm) -> Self {
        Term { coeff, form }
    }

    /// `p^{a + form}`.
    pub fn p_pow(a: i64, form: LinearForm) -> Self {
        Term::new(PrimeLaurent::p_pow(a), form)
    }

    pub fn eval(&self, p: f64, assign: &Assignment) -> Result<Complex64> {
        let z = self.form.eval(assign)?;
        Ok(self.coeff.eval(p) * (z * p.ln()).exp())
    }
}

/// Sum of terms, merged by linear form. The empty sum is zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PolyExpr {
    terms: BTreeMap<LinearForm, PrimeLaurent>,
}

impl PolyExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_laurent(PrimeLaurent::one())
    }

    pub fn from_laurent(c: PrimeLaurent) -> Self {
        Self::from_term(Term::new(c, LinearForm::zero()))
    }

    pub fn from_term(t: Term) -> Self {
        let mut out = Self::zero();
        out.add_term(t.coeff, t.form);
        out
    }

    /// `1 - p^a p^form`.
    pub fn one_minus(a: i64, form: &LinearForm) -> Self {
        let mut out = Self::one();
        out.add_term(-PrimeLaurent::p_pow(a), form.clone());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = Term> + '_ {
        self.terms
            .iter()
            .map(|(f, c)| Term::new(c.clone(), f.clone()))
    }

    pub(crate) fn raw_terms(&self) -> impl Iterator<Item = (&LinearForm, &PrimeLaurent)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, coeff: PrimeLaurent, form: LinearForm) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(form) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let merged = std::mem::take(e.get_mut()) + coeff;
                if merged.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = merged;
                }
            }
        }
    }

    pub fn mul_term(&self, t: &Term) -> Self {
        let mut out = Self::zero();
        for (f, c) in &self.terms {
            out.add_term(c * &t.coeff, f + &t.form);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| &acc * self)
    }

    pub fn eval(&self, p: f64, assign: &Assignment) -> Result<Complex64> {
        Ok(Evaluator::new(p, assign).poly(self)?.to_c64())
    }

    /// Exact division by `1 - p^a p^L`, if it divides.
    ///
    /// Monomials `p^e p^F` are grouped into cosets of the cyclic group
    /// generated by `X = p^a p^L`; on each coset the polynomial is a Laurent
    /// polynomial in `X`, divisible by `1 - X` iff its coefficients sum to 0.
    pub fn div_one_minus(&self, a: i64, l: &LinearForm) -> Option<PolyExpr> {
        if a == 0 && l.is_zero() {
            return None;
        }
        let pivot = l.first();
        let step = |e: i64, f: &LinearForm| -> i64 {
            match pivot {
                Some((v, c)) => f.coeff(v).div_euclid(c),
                None => e.div_euclid(a),
            }
        };
        type Line = BTreeMap<i64, BigRational>;
        let mut lines: HashMap<(LinearForm, i64), Line> = HashMap::new();
        for (f, coeff) in &self.terms {
            for (e, c) in coeff.terms() {
                let k = step(e, f);
                let rep_f = if k == 0 { f.clone() } else { f + &l.scale(-k) };
                let rep_e = e - k * a;
                let line = lines.entry((rep_f, rep_e)).or_default();
                *line.entry(k).or_insert_with(BigRational::zero) += c;
            }
        }
        let mut out = PolyExpr::zero();
        for ((rep_f, rep_e), line) in lines {
            let mut run = BigRational::zero();
            let last = *line.keys().next_back().expect("nonempty line");
            let first = *line.keys().next().expect("nonempty line");
            for k in first..=last {
                if let Some(c) = line.get(&k) {
                    run += c;
                }
                if k == last {
                    if !run.is_zero() {
                        return None;
                    }
                } else if !run.is_zero() {
                    let f = if k == 0 {
                        rep_f.clone()
                    } else {
                        &rep_f + &l.scale(k)
                    };
                    out.add_term(PrimeLaurent::monomial(run.clone(), rep_e + k * a), f);
                }
            }
        }
        Some(out)
    }

    /// Substitute integer values for some variables.
    pub fn substitute_int(&self, assign: &HashMap<super::SVar, i64>) -> PolyExpr {
        let mut out = PolyExpr::zero();
        for (f, c) in &self.terms {
            let (k, rest) = f.substitute(assign);
            out.add_term(c.shift(k), rest);
        }
        out
    }
}

impl Add for PolyExpr {
    type Output = PolyExpr;
    fn add(mut self, rhs: PolyExpr) -> PolyExpr {
        for (f, c) in rhs.terms {
            self.add_term(c, f);
        }
        self
    }
}

impl Neg for PolyExpr {
    type Output = PolyExpr;
    fn neg(self) -> PolyExpr {
        PolyExpr {
            terms: self.terms.into_iter().map(|(f, c)| (f, -c)).collect(),
        }
    }
}

impl Sub for PolyExpr {
    type Output = PolyExpr;
    fn sub(self, rhs: PolyExpr) -> PolyExpr {
        self + (-rhs)
    }
}

impl Mul for &PolyExpr {
    type Output = PolyExpr;
    fn mul(self, rhs: &PolyExpr) -> PolyExpr {
        let mut out = PolyExpr::zero();
        for (f, c) in &self.terms {
            for (g, d) in &rhs.terms {
                out.add_term(c * d, f + g);
            }
        }
        out
    }
}
