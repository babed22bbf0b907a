use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact Laurent polynomial in the symbolic prime `p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PrimeLaurent {
    terms: BTreeMap<i64, BigRational>,
}

impl PrimeLaurent {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(BigRational::one(), 0)
    }

    /// `c * p^k`.
    pub fn monomial(c: BigRational, k: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(k, c);
        }
        PrimeLaurent { terms }
    }

    /// `p^k`.
    pub fn p_pow(k: i64) -> Self {
        Self::monomial(BigRational::one(), k)
    }

    pub fn int(c: i64) -> Self {
        Self::monomial(BigRational::from_integer(BigInt::from(c)), 0)
    }

    /// `p - c`.
    pub fn p_minus(c: i64) -> Self {
        Self::p_pow(1) - Self::int(c)
    }

    /// `1 - p^k`.
    pub fn one_minus_p_pow(k: i64) -> Self {
        Self::one() - Self::p_pow(k)
    }

    /// `(p - lo)(p - lo - 1)...(p - hi)`, or `1` when `hi < lo`.
    pub fn falling(lo: i64, hi: i64) -> Self {
        (lo..=hi).fold(Self::one(), |acc, c| acc * Self::p_minus(c))
    }

    pub fn from_terms<I: IntoIterator<Item = (i64, BigRational)>>(it: I) -> Self {
        let mut out = Self::zero();
        for (k, c) in it {
            out.add_term(k, c);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&0).is_some_and(|c| c.is_one())
    }

    /// Single term `c p^k`, if this is a monomial.
    pub fn as_monomial(&self) -> Option<(i64, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next().map(|(k, c)| (*k, c))
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &BigRational)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, k: i64, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Multiply by `p^k`.
    pub fn shift(&self, k: i64) -> Self {
        PrimeLaurent {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        PrimeLaurent {
            terms: self.terms.iter().map(|(e, v)| (*e, v * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(Self::one(), |acc, _| acc * self.clone())
    }

    /// Floating-point value at a real `p > 0`.
    pub fn eval(&self, p: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| rat_to_f64(c) * p.powi(*k as i32))
            .sum()
    }

    /// Exact value at a rational `p`.
    pub fn eval_exact(&self, p: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for (k, c) in &self.terms {
            acc += c * rat_pow(p, *k);
        }
        acc
    }
}

pub(crate) fn rat_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or_else(|| {
        // Fall back to a scaled division when numerator or denominator overflows.
        let n = c.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = c.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub(crate) fn rat_pow(p: &BigRational, k: i64) -> BigRational {
    let base = if k < 0 { p.recip() } else { p.clone() };
    num_traits::pow(base, k.unsigned_abs() as usize)
}

impl Add for PrimeLaurent {
    type Output = PrimeLaurent;
    fn add(mut self, rhs: PrimeLaurent) -> PrimeLaurent {
        for (k, c) in rhs.terms {
            self.add_term(k, c);
        }
        self
    }
}

impl<'a> Add<&'a PrimeLaurent> for &'a PrimeLaurent {
    type Output = PrimeLaurent;
    fn add(self, rhs: &PrimeLaurent) -> PrimeLaurent {
        self.clone() + rhs.clone()
    }
}

impl Neg for PrimeLaurent {
    type Output = PrimeLaurent;
    fn neg(self) -> PrimeLaurent {
        PrimeLaurent {
            terms: self.terms.into_iter().map(|(k, c)| (k, -c)).collect(),
        }
    }
}

impl Sub for PrimeLaurent {
    type Output = PrimeLaurent;
    fn sub(self, rhs: PrimeLaurent) -> PrimeLaurent {
        self + (-rhs)
    }
}

impl Mul for PrimeLaurent {
    type Output = PrimeLaurent;
    fn mul(self, rhs: PrimeLaurent) -> PrimeLaurent {
        &self * &rhs
    }
}

impl<'a> Mul<&'a PrimeLaurent> for &'a PrimeLaurent {
    type Output = PrimeLaurent;
    fn mul(self, rhs: &PrimeLaurent) -> PrimeLaurent {
        let mut out = PrimeLaurent::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a + b, x * y);
            }
        }
        out
    }
}

impl fmt::Display for PrimeLaurent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (k, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            let unit = mag.is_one();
            match (*k, unit) {
                (0, _) => write!(f, "{mag}")?,
                (1, true) => write!(f, "p")?,
                (1, false) => write!(f, "{mag}*p")?,
                (k, true) => write!(f, "p^({k})")?,
                (k, false) => write!(f, "{mag}*p^({k})")?,
            }
        }
        Ok(())
    }
}
