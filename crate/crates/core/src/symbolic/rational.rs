use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_complex::Complex64;

use super::form::render_affine;
use super::precise::{Cdd, Evaluator};
use super::{Assignment, LinearForm, PolyExpr, PrimeLaurent, SVar, Term};
use crate::error::{Error, Result};

/// Numeric pole tolerance for [`RationalFn::eval`].
pub const EPS_POLE: f64 = 1e-12;

/// Sort key of a denominator factor `1 - p^a p^form`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DenKey {
    pub form: LinearForm,
    pub a: i64,
}

/// `(1 - p^a p^{form})^multiplicity`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DenFactor {
    pub a: i64,
    pub form: LinearForm,
    pub multiplicity: u32,
}

impl DenFactor {
    pub fn eval(&self, p: f64, assign: &Assignment) -> Result<Complex64> {
        Ok(Evaluator::new(p, assign)
            .one_minus(self.a, &self.form)?
            .to_c64())
    }

    pub fn expanded(&self) -> PolyExpr {
        PolyExpr::one_minus(self.a, &self.form).pow(self.multiplicity)
    }
}

impl fmt::Display for DenFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = format!("1 - p^({})", render_affine(self.a, &self.form));
        if self.multiplicity == 1 {
            write!(f, "{base}")
        } else {
            write!(f, "({base})^{}", self.multiplicity)
        }
    }
}

/// Numerator over a factored denominator.
///
/// Values are immutable once built; every operation returns a reduced result.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct RationalFn {
    num: PolyExpr,
    den: BTreeMap<DenKey, u32>,
}

impl RationalFn {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_poly(PolyExpr::one())
    }

    pub fn from_poly(num: PolyExpr) -> Self {
        RationalFn {
            num,
            den: BTreeMap::new(),
        }
    }

    pub fn from_laurent(c: PrimeLaurent) -> Self {
        Self::from_poly(PolyExpr::from_laurent(c))
    }

    pub fn from_term(t: Term) -> Self {
        Self::from_poly(PolyExpr::from_term(t))
    }

    /// Build from parts and reduce.
    pub fn new(num: PolyExpr, den: impl IntoIterator<Item = DenFactor>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for d in den {
            if d.a == 0 && d.form.is_zero() {
                return Err(Error::Parse("zero denominator factor 1 - p^0".into()));
            }
            if d.multiplicity > 0 {
                *map.entry(DenKey {
                    form: d.form,
                    a: d.a,
                })
                .or_insert(0) += d.multiplicity;
            }
        }
        Ok(RationalFn { num, den: map }.reduced())
    }

    pub fn num(&self) -> &PolyExpr {
        &self.num
    }

    pub fn den(&self) -> impl Iterator<Item = DenFactor> + '_ {
        self.den.iter().map(|(k, m)| DenFactor {
            a: k.a,
            form: k.form.clone(),
            multiplicity: *m,
        })
    }

    pub fn den_len(&self) -> usize {
        self.den.len()
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_empty() && self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn add(&self, rhs: &RationalFn) -> RationalFn {
        RationalFn::sum([self.clone(), rhs.clone()])
    }

    /// Sum of many values. Terms with the same denominator are added first,
    /// then each group is lifted to the common denominator once and the
    /// result reduced once.
    pub fn sum<I: IntoIterator<Item = RationalFn>>(items: I) -> RationalFn {
        let mut groups: BTreeMap<Vec<(DenKey, u32)>, PolyExpr> = BTreeMap::new();
        for x in items {
            if x.is_zero() {
                continue;
            }
            let key: Vec<(DenKey, u32)> = x.den.into_iter().collect();
            let slot = groups.entry(key).or_default();
            *slot = std::mem::take(slot) + x.num;
        }
        groups.retain(|_, n| !n.is_zero());
        match groups.len() {
            0 => return RationalFn::zero(),
            1 => {
                let (k, num) = groups.into_iter().next().expect("one group");
                return RationalFn {
                    num,
                    den: k.into_iter().collect(),
                }
                .reduced();
            }
            _ => {}
        }
        let mut lub: BTreeMap<DenKey, u32> = BTreeMap::new();
        for k in groups.keys() {
            for (d, m) in k {
                let e = lub.entry(d.clone()).or_insert(0);
                *e = (*e).max(*m);
            }
        }
        let mut num = PolyExpr::zero();
        for (k, mut n) in groups {
            let own: BTreeMap<&DenKey, u32> = k.iter().map(|(d, m)| (d, *m)).collect();
            for (d, m) in &lub {
                let have = own.get(d).copied().unwrap_or(0);
                for _ in have..*m {
                    n = &n * &PolyExpr::one_minus(d.a, &d.form);
                }
            }
            num = num + n;
        }
        RationalFn { num, den: lub }.reduced()
    }

    pub fn neg(&self) -> RationalFn {
        RationalFn {
            num: -self.num.clone(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, rhs: &RationalFn) -> RationalFn {
        self.add(&rhs.neg())
    }

    /// Product with cross-cancellation.
    ///
    /// Both operands are reduced. A factor `1 - X` with primitive exponent
    /// vector is irreducible, so it divides the product numerator only if it
    /// divides one of the operand numerators; those are tested one operand at
    /// a time. Non-primitive factors get a full test on the product.
    pub fn mul(&self, rhs: &RationalFn) -> RationalFn {
        if self.is_zero() || rhs.is_zero() {
            return RationalFn::zero();
        }
        if rhs.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return rhs.clone();
        }
        let mut den = self.den.clone();
        for (k, m) in &rhs.den {
            *den.entry(k.clone()).or_insert(0) += m;
        }
        let mut na = self.num.clone();
        let mut nb = rhs.num.clone();
        let mut rest = Vec::new();
        for k in den.keys().cloned().collect::<Vec<_>>() {
            if !k.is_primitive() {
                rest.push(k);
                continue;
            }
            for (n, own) in [(&mut na, &self.den), (&mut nb, &rhs.den)] {
                if own.contains_key(&k) {
                    continue;
                }
                while den.contains_key(&k) {
                    match try_divide(n, &k) {
                        Some(q) => {
                            *n = q;
                            dec(&mut den, &k);
                        }
                        None => break,
                    }
                }
            }
        }
        let mut out = RationalFn {
            num: &na * &nb,
            den,
        };
        out.reduce_keys(&rest);
        out
    }

    /// Multiply by a single term.
    pub fn mul_term(&self, t: &Term) -> RationalFn {
        if t.coeff.as_monomial().is_some() {
            // A monomial is a unit: no factor can newly divide the numerator.
            return RationalFn {
                num: self.num.mul_term(t),
                den: self.den.clone(),
            };
        }
        self.mul(&RationalFn::from_term(t.clone()))
    }

    /// Divide by `1 - p^a p^form`.
    pub fn div_one_minus(&self, a: i64, form: &LinearForm) -> RationalFn {
        assert!(a != 0 || !form.is_zero(), "division by zero factor");
        if self.is_zero() {
            return RationalFn::zero();
        }
        let mut den = self.den.clone();
        *den.entry(DenKey {
            form: form.clone(),
            a,
        })
        .or_insert(0) += 1;
        RationalFn {
            num: self.num.clone(),
            den,
        }
        .reduced()
    }

    /// Cancel every denominator factor that divides the numerator exactly.
    /// Repeats until no factor divides, so the result is a fixed point.
    pub fn reduced(mut self) -> RationalFn {
        let keys: Vec<DenKey> = self.den.keys().cloned().collect();
        self.reduce_keys(&keys);
        self
    }

    fn reduce_keys(&mut self, keys: &[DenKey]) {
        if self.num.is_zero() {
            *self = RationalFn::zero();
            return;
        }
        loop {
            let mut changed = false;
            for k in keys {
                while self.den.contains_key(k) {
                    match try_divide(&self.num, k) {
                        Some(q) => {
                            self.num = q;
                            changed = true;
                            dec(&mut self.den, k);
                        }
                        None => break,
                    }
                }
            }
            if !changed {
                return;
            }
        }
    }

    pub fn eval(&self, p: f64, assign: &Assignment) -> Result<Complex64> {
        Ok(self.eval_with(&mut Evaluator::new(p, assign))?.to_c64())
    }

    pub(crate) fn eval_with(&self, ev: &mut Evaluator) -> Result<Cdd> {
        let mut den: Option<Cdd> = None;
        for f in self.den() {
            let d = ev.one_minus(f.a, &f.form)?;
            if d.to_c64().norm() < EPS_POLE {
                return Err(Error::PoleProximity(f.to_string()));
            }
            let d = Evaluator::pow(d, f.multiplicity);
            den = Some(match den {
                Some(x) => Evaluator::mul(x, d),
                None => d,
            });
        }
        let num = ev.poly(&self.num)?;
        Ok(match den {
            Some(d) => Evaluator::div(num, d),
            None => num,
        })
    }

    /// Substitute integer values; the result keeps `p` symbolic.
    pub fn substitute_int(&self, assign: &HashMap<SVar, i64>) -> Result<RationalFn> {
        let num = self.num.substitute_int(assign);
        let mut den = Vec::new();
        for f in self.den() {
            let (k, rest) = f.form.substitute(assign);
            let a = f.a + k;
            if a == 0 && rest.is_zero() {
                return Err(Error::PoleProximity(f.to_string()));
            }
            den.push(DenFactor {
                a,
                form: rest,
                multiplicity: f.multiplicity,
            });
        }
        RationalFn::new(num, den)
    }

    /// Variables occurring anywhere in the expression.
    pub fn vars(&self) -> std::collections::BTreeSet<SVar> {
        let mut out = std::collections::BTreeSet::new();
        for (f, _) in self.num.raw_terms() {
            out.extend(f.vars());
        }
        for k in self.den.keys() {
            out.extend(k.form.vars());
        }
        out
    }

    /// If free of variables, the numerator as a Laurent polynomial.
    pub fn as_constant(&self) -> Option<PrimeLaurent> {
        if !self.den.is_empty() {
            return None;
        }
        match self.num.len() {
            0 => Some(PrimeLaurent::zero()),
            1 => {
                let (f, c) = self.num.raw_terms().next()?;
                f.is_zero().then(|| c.clone())
            }
            _ => None,
        }
    }
}

fn try_divide(num: &PolyExpr, k: &DenKey) -> Option<PolyExpr> {
    if super::modular::may_divide(num, k.a, &k.form) == Some(false) {
        return None;
    }
    num.div_one_minus(k.a, &k.form)
}

fn dec(den: &mut BTreeMap<DenKey, u32>, k: &DenKey) {
    if let Some(m) = den.get_mut(k) {
        *m -= 1;
        if *m == 0 {
            den.remove(k);
        }
    }
}

impl DenKey {
    /// Whether `gcd(a, coefficients) = 1`.
    pub fn is_primitive(&self) -> bool {
        let mut g = self.a.unsigned_abs();
        for (_, c) in self.form.iter() {
            g = gcd(g, c.unsigned_abs());
        }
        g == 1
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for RationalFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (form, c) in self.num.raw_terms() {
            if form.is_zero() {
                parts.push(format!("({c})"));
            } else {
                parts.push(format!("({c})*p^({form})"));
            }
        }
        let num = if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        };
        if self.den.is_empty() {
            return write!(f, "{num}");
        }
        let den: Vec<String> = self
            .den()
            .map(|d| {
                if d.multiplicity == 1 {
                    format!("({d})")
                } else {
                    d.to_string()
                }
            })
            .collect();
        write!(f, "[{num}] / [{}]", den.join(" * "))
    }
}
