//! Evaluation modulo the Mersenne prime `2^61 - 1`, used as a one-sided
//! filter before exact trial division: if the numerator does not vanish at a
//! point of the hypersurface `p^a p^L = 1`, then `1 - p^a p^L` cannot divide it.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};

use super::{LinearForm, PolyExpr, SVar};

const Q: u64 = (1 << 61) - 1;

fn mul(a: u64, b: u64) -> u64 {
    ((a as u128 * b as u128) % Q as u128) as u64
}

fn pow(mut b: u64, mut e: u64) -> u64 {
    let mut r = 1;
    while e > 0 {
        if e & 1 == 1 {
            r = mul(r, b);
        }
        b = mul(b, b);
        e >>= 1;
    }
    r
}

fn inv(a: u64) -> u64 {
    pow(a, Q - 2)
}

fn reduce_big(x: &BigInt) -> u64 {
    let q = BigInt::from(Q);
    let mut r = x % &q;
    if r < BigInt::from(0) {
        r += &q;
    }
    r.to_u64().expect("residue fits")
}

fn rat(c: &BigRational) -> Option<u64> {
    if c.denom().is_one() {
        if let Some(n) = c.numer().to_i64() {
            return Some(n.rem_euclid(Q as i64) as u64);
        }
    }
    let d = reduce_big(c.denom());
    (d != 0).then(|| mul(reduce_big(c.numer()), inv(d)))
}

/// Deterministic pseudo-random nonzero residue for a label.
fn draw(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    2 + z % (Q - 3)
}

fn label(v: SVar) -> u64 {
    ((v.i() as u64) << 32) | v.j() as u64
}

/// A point of the torus over `F_Q`: values for `p` and for every variable,
/// each stored with its inverse.
pub(crate) struct ModPoint {
    seed: u64,
    gp: (u64, u64),
    vars: HashMap<SVar, (u64, u64)>,
}

fn pw((g, gi): (u64, u64), e: i64) -> u64 {
    if e < 0 {
        pow(gi, e.unsigned_abs())
    } else {
        pow(g, e as u64)
    }
}

impl ModPoint {
    /// Random point with `p^a p^L = 1`, or `None` when `L` has no pivot with
    /// coefficient `±1`.
    pub(crate) fn on_hypersurface(a: i64, l: &LinearForm, seed: u64) -> Option<ModPoint> {
        let (pivot, c) = l.first()?;
        if c.abs() != 1 {
            return None;
        }
        let g = draw(seed, u64::MAX);
        let mut pt = ModPoint {
            seed,
            gp: (g, inv(g)),
            vars: HashMap::new(),
        };
        let mut rest = pw(pt.gp, a);
        for (v, k) in l.iter() {
            if v != pivot {
                let g = pt.var(v);
                rest = mul(rest, pw(g, k));
            }
        }
        // g_pivot^c * rest = 1
        let gv = if c == 1 { inv(rest) } else { rest };
        pt.vars.insert(pivot, (gv, inv(gv)));
        Some(pt)
    }

    fn var(&mut self, v: SVar) -> (u64, u64) {
        let seed = self.seed;
        *self.vars.entry(v).or_insert_with(|| {
            let g = draw(seed, label(v));
            (g, inv(g))
        })
    }

    fn monomial(&mut self, e: i64, f: &LinearForm) -> u64 {
        let mut m = pw(self.gp, e);
        for (v, k) in f.iter() {
            let g = self.var(v);
            m = mul(m, pw(g, k));
        }
        m
    }

    /// `None` if a coefficient denominator vanishes mod `Q`.
    pub(crate) fn poly(&mut self, num: &PolyExpr) -> Option<u64> {
        let mut acc = 0u64;
        for (f, coeff) in num.raw_terms() {
            let mono = self.monomial(0, f);
            let mut cval = 0u64;
            for (e, r) in coeff.terms() {
                cval = (cval + mul(rat(r)?, pw(self.gp, e))) % Q;
            }
            acc = (acc + mul(cval, mono)) % Q;
        }
        Some(acc)
    }

    /// Value of `1 - p^a p^L`.
    pub(crate) fn one_minus(&mut self, a: i64, l: &LinearForm) -> u64 {
        (1 + Q - self.monomial(a, l)) % Q
    }

    pub(crate) fn mul(a: u64, b: u64) -> u64 {
        mul(a, b)
    }

    pub(crate) fn add(a: u64, b: u64) -> u64 {
        (a + b) % Q
    }
}

/// `Some(false)` when `1 - p^a p^L` certainly does not divide `num`;
/// `None` when the filter does not apply.
pub(crate) fn may_divide(num: &PolyExpr, a: i64, l: &LinearForm) -> Option<bool> {
    let mut pt = ModPoint::on_hypersurface(a, l, 0x5EED_0000)?;
    Some(pt.poly(num)? == 0)
}
