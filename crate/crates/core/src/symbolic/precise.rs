//! Double-double evaluation of exponential polynomials.
//!
//! Each `p^{s_v}` is rounded once to `f64`; monomials and sums are then formed
//! in double-double arithmetic, so cancellation between the many terms of an
//! expanded numerator costs no more than the function's own conditioning.

use std::collections::HashMap;

use num_complex::Complex64;
use num_traits::ToPrimitive;
use twofloat::TwoFloat;

use super::{Assignment, LinearForm, PolyExpr, PrimeLaurent, SVar};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Cdd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Cdd {
    const ZERO: Cdd = Cdd {
        re: TwoFloat::from_f64(0.0),
        im: TwoFloat::from_f64(0.0),
    };
    const ONE: Cdd = Cdd {
        re: TwoFloat::from_f64(1.0),
        im: TwoFloat::from_f64(0.0),
    };

    fn from_c64(z: Complex64) -> Self {
        Cdd {
            re: z.re.into(),
            im: z.im.into(),
        }
    }

    pub(crate) fn to_c64(self) -> Complex64 {
        Complex64::new(self.re.hi() + self.re.lo(), self.im.hi() + self.im.lo())
    }

    fn mul(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }

    fn scale(self, t: TwoFloat) -> Cdd {
        Cdd {
            re: self.re * t,
            im: self.im * t,
        }
    }

    pub(crate) fn add(self, o: Cdd) -> Cdd {
        Cdd {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }

    fn recip(self) -> Cdd {
        let n = (self.re * self.re + self.im * self.im).recip();
        Cdd {
            re: self.re * n,
            im: -(self.im * n),
        }
    }

    fn powi(self, n: i64) -> Cdd {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut e = n.unsigned_abs();
        let mut acc = Cdd::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            base = base.mul(base);
            e >>= 1;
        }
        acc
    }
}

pub(crate) struct Evaluator<'a> {
    p: f64,
    assign: &'a Assignment,
    vars: HashMap<(SVar, i64), Cdd>,
    p_pows: HashMap<i64, TwoFloat>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(p: f64, assign: &'a Assignment) -> Self {
        Evaluator {
            p,
            assign,
            vars: HashMap::new(),
            p_pows: HashMap::new(),
        }
    }

    fn p_pow(&mut self, k: i64) -> TwoFloat {
        let p = self.p;
        *self.p_pows.entry(k).or_insert_with(|| {
            let pk = TwoFloat::from(p).powi(k.unsigned_abs() as i32);
            if k < 0 {
                pk.recip()
            } else {
                pk
            }
        })
    }

    fn var_pow(&mut self, v: SVar, c: i64) -> Result<Cdd> {
        if let Some(x) = self.vars.get(&(v, c)) {
            return Ok(*x);
        }
        let s = self
            .assign
            .get(&v)
            .ok_or_else(|| Error::MissingAssignment(v.to_string()))?;
        let x = Cdd::from_c64((s * self.p.ln()).exp()).powi(c);
        self.vars.insert((v, c), x);
        Ok(x)
    }

    fn laurent(&mut self, c: &PrimeLaurent) -> TwoFloat {
        let mut acc = TwoFloat::from(0.0);
        for (k, q) in c.terms() {
            let hi = q.to_f64().unwrap_or(f64::NAN);
            let lo = num_rational::BigRational::from_float(hi)
                .map(|h| (q - h).to_f64().unwrap_or(0.0))
                .unwrap_or(0.0);
            acc += TwoFloat::new_add(hi, lo) * self.p_pow(k);
        }
        acc
    }

    /// `p^{a + L(s)}`.
    fn monomial(&mut self, a: i64, form: &LinearForm) -> Result<Cdd> {
        let mut m = Cdd::ONE.scale(self.p_pow(a));
        for (v, c) in form.iter() {
            m = m.mul(self.var_pow(v, c)?);
        }
        Ok(m)
    }

    pub(crate) fn poly(&mut self, poly: &PolyExpr) -> Result<Cdd> {
        let mut acc = Cdd::ZERO;
        for (form, c) in poly.raw_terms() {
            let coeff = self.laurent(c);
            acc = acc.add(self.monomial(0, form)?.scale(coeff));
        }
        Ok(acc)
    }

    /// `1 - p^{a + L(s)}`.
    pub(crate) fn one_minus(&mut self, a: i64, form: &LinearForm) -> Result<Cdd> {
        let m = self.monomial(a, form)?;
        Ok(Cdd {
            re: TwoFloat::from(1.0) - m.re,
            im: -m.im,
        })
    }

    pub(crate) fn div(num: Cdd, den: Cdd) -> Cdd {
        num.mul(den.recip())
    }

    pub(crate) fn mul(a: Cdd, b: Cdd) -> Cdd {
        a.mul(b)
    }

    pub(crate) fn pow(z: Cdd, n: u32) -> Cdd {
        z.powi(n as i64)
    }
}
