use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use super::SVar;
use crate::error::{Error, Result};

/// Constant-free integer linear combination of amplitude variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinearForm {
    coeffs: BTreeMap<SVar, i64>,
}

/// Numeric values for the amplitude variables.
pub type Assignment = HashMap<SVar, Complex64>;

impl LinearForm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn var(v: SVar) -> Self {
        Self::term(v, 1)
    }

    pub fn term(v: SVar, c: i64) -> Self {
        let mut f = Self::zero();
        f.add_coeff(v, c);
        f
    }

    pub fn sum<I: IntoIterator<Item = SVar>>(vars: I) -> Self {
        let mut f = Self::zero();
        for v in vars {
            f.add_coeff(v, 1);
        }
        f
    }

    pub fn from_coeffs<I: IntoIterator<Item = (SVar, i64)>>(it: I) -> Self {
        let mut f = Self::zero();
        for (v, c) in it {
            f.add_coeff(v, c);
        }
        f
    }

    pub fn add_coeff(&mut self, v: SVar, c: i64) {
        if c == 0 {
            return;
        }
        let e = self.coeffs.entry(v).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(&v);
        }
    }

    pub fn coeff(&self, v: SVar) -> i64 {
        self.coeffs.get(&v).copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (SVar, i64)> + '_ {
        self.coeffs.iter().map(|(v, c)| (*v, *c))
    }

    pub fn vars(&self) -> impl Iterator<Item = SVar> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, k: i64) -> Self {
        if k == 0 {
            return Self::zero();
        }
        LinearForm {
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
        }
    }

    /// First nonzero entry, used to pick a pivot variable.
    pub(crate) fn first(&self) -> Option<(SVar, i64)> {
        self.coeffs.iter().next().map(|(v, c)| (*v, *c))
    }

    pub fn eval(&self, assign: &Assignment) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (v, c) in &self.coeffs {
            let x = assign
                .get(v)
                .ok_or_else(|| Error::MissingAssignment(v.to_string()))?;
            acc += x * (*c as f64);
        }
        Ok(acc)
    }

    /// Value at an integer point; variables not in `assign` count as 0.
    pub fn eval_int(&self, assign: &HashMap<SVar, i64>) -> i64 {
        self.coeffs
            .iter()
            .map(|(v, c)| c * assign.get(v).copied().unwrap_or(0))
            .sum()
    }

    /// Drop the variables present in `assign`, returning the integer
    /// contribution they make and the residual form.
    pub fn substitute(&self, assign: &HashMap<SVar, i64>) -> (i64, LinearForm) {
        let mut k = 0;
        let mut rest = LinearForm::zero();
        for (v, c) in &self.coeffs {
            match assign.get(v) {
                Some(x) => k += c * x,
                None => rest.add_coeff(*v, *c),
            }
        }
        (k, rest)
    }
}

impl Add for &LinearForm {
    type Output = LinearForm;
    fn add(self, rhs: &LinearForm) -> LinearForm {
        let mut out = self.clone();
        for (v, c) in &rhs.coeffs {
            out.add_coeff(*v, *c);
        }
        out
    }
}

impl Add for LinearForm {
    type Output = LinearForm;
    fn add(self, rhs: LinearForm) -> LinearForm {
        &self + &rhs
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        self.scale(-1)
    }
}

impl Neg for &LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        self.scale(-1)
    }
}

impl Sub for LinearForm {
    type Output = LinearForm;
    fn sub(self, rhs: LinearForm) -> LinearForm {
        &self + &rhs.scale(-1)
    }
}

/// Renders `a + c1*s_i_j + ...` with the leading constant `a` (omitted when 0).
pub(crate) fn render_affine(a: i64, form: &LinearForm) -> String {
    let mut out = String::new();
    if a != 0 || form.is_zero() {
        out.push_str(&a.to_string());
    }
    for (v, c) in form.iter() {
        let (sign, mag) = if c < 0 { ('-', -c) } else { ('+', c) };
        if out.is_empty() {
            if sign == '-' {
                out.push('-');
            }
        } else {
            out.push(' ');
            out.push(sign);
            out.push(' ');
        }
        if mag != 1 {
            out.push_str(&format!("{mag}*"));
        }
        out.push_str(&v.to_string());
    }
    out
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let s = render_affine(0, self);
        write!(f, "{s}")
    }
}
