//! Memoized recursions for the auxiliary integrals and the full `Z^(N)(s)`.
//!
//! Integrals (all over the listed domain, `T = {2..N-2}`):
//!
//! * `L0(J)`: `(Z_p^×)^J`, `∏ |x_i - x_j|^{s_ij}`.
//! * `L1(I)`: `Z_p^I`, same integrand.
//! * `L2(I, K, t)`: `Z_p^I`, `∏_{i∈K} |x_i|^{s_ti} ∏ |x_i - x_j|^{s_ij}`.
//! * `M1(J)`: `(Z_p^×)^J`, `∏ |1 - x_i|^{s_(N-1)i} ∏ |x_i - x_j|^{s_ij}`.
//! * `Z0(I)`: `Z_p^I`, `∏ |x_i|^{s_1i} |1 - x_i|^{s_(N-1)i} ∏ |x_i - x_j|^{s_ij}`.
//! * `Z1(I)`: `Z_p^I`, `∏ |x_i|^{-2-e_i} ∏ |x_i - x_j|^{s_ij}` with
//!   `e_i = s_1i + s_(N-1)i + Σ_{j∈T, j≠i} s_ij`.
//!
//! Every recursion splits `Z_p^I` into `(pZ_p)^I` and the cells where a
//! nonempty `J ⊆ I` is exactly the set of unit coordinates.
//!
//! Concurrency: an [`Engine`] owns its memo table and every query takes
//! `&mut self`, so the engine is single-threaded by construction. Results
//! are plain values and may be shared freely.

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde_json::{Map, Value};

use crate::combinatorics::{
    class_count, delta_count, enumerate_marked, enumerate_patterns, marked_class_count, pi_count,
    CoincidencePattern, IndexSet,
};
use crate::error::{Error, Result};
use crate::symbolic::{LazySum, LinearForm, PrimeLaurent, RationalFn, SVar, Term};

/// Which endpoint variable family an `L2` factor uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    /// `s_1i`
    First,
    /// `s_(N-1)i`
    Last,
}

/// The index data of an `N`-point amplitude.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmplitudeContext {
    n: u32,
    t: IndexSet,
}

impl AmplitudeContext {
    pub const MAX_N: u32 = 8;

    pub fn new(n: u32) -> Result<Self> {
        if !(4..=Self::MAX_N).contains(&n) {
            return Err(Error::NOutOfRange(n));
        }
        Ok(AmplitudeContext {
            n,
            t: IndexSet::range(2, n - 2),
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `T = {2, ..., N-2}`.
    pub fn t(&self) -> IndexSet {
        self.t
    }

    /// The last endpoint index `N-1`.
    pub fn last(&self) -> u32 {
        self.n - 1
    }

    /// All variables, in canonical order; `D = N(N-3)/2` of them.
    pub fn vars(&self) -> Vec<SVar> {
        let mut out = Vec::new();
        for i in self.t.iter() {
            out.push(self.s1(i));
        }
        for (i, j) in self.t.pairs() {
            out.push(self.sij(i, j));
        }
        for i in self.t.iter() {
            out.push(self.slast(i));
        }
        out.sort();
        out
    }

    /// Validate and canonicalize a pair of indices.
    pub fn var(&self, i: u32, j: u32) -> Result<SVar> {
        let bad = || Error::InvalidVariable(format!("s_{i}_{j} (N={})", self.n));
        let (lo, hi) = (i.min(j), i.max(j));
        if lo == hi {
            return Err(bad());
        }
        if lo == 1 && self.t.contains(hi) {
            Ok(self.s1(hi))
        } else if hi == self.last() && self.t.contains(lo) {
            Ok(self.slast(lo))
        } else if self.t.contains(lo) && self.t.contains(hi) {
            Ok(self.sij(lo, hi))
        } else {
            Err(bad())
        }
    }

    pub fn canonical(&self, v: SVar) -> Result<SVar> {
        self.var(v.i(), v.j())
    }

    pub fn s1(&self, i: u32) -> SVar {
        SVar::endpoint(1, i)
    }

    pub fn slast(&self, i: u32) -> SVar {
        SVar::endpoint(self.last(), i)
    }

    pub fn st(&self, t: Endpoint, i: u32) -> SVar {
        match t {
            Endpoint::First => self.s1(i),
            Endpoint::Last => self.slast(i),
        }
    }

    pub fn sij(&self, i: u32, j: u32) -> SVar {
        SVar::inner(i, j)
    }

    /// `Σ_{i<j ∈ J} s_ij`.
    pub fn pair_sum(&self, j: IndexSet) -> LinearForm {
        LinearForm::sum(j.pairs().map(|(a, b)| self.sij(a, b)))
    }

    /// `Σ_{i ∈ S} s_ti`.
    pub fn endpoint_sum(&self, t: Endpoint, s: IndexSet) -> LinearForm {
        LinearForm::sum(s.iter().map(|i| self.st(t, i)))
    }

    /// Form of the exponent shared by `Z1` and the sector prefactor:
    /// `Σ_{i∈A}(s_1i + s_(N-1)i)` plus every `s_ij` with `i, j ∈ T`
    /// touching `A`, each counted once.
    pub fn sector_form(&self, a: IndexSet) -> LinearForm {
        let mut f = &self.endpoint_sum(Endpoint::First, a) + &self.endpoint_sum(Endpoint::Last, a);
        for (i, j) in self.t.pairs() {
            if a.contains(i) || a.contains(j) {
                f.add_coeff(self.sij(i, j), 1);
            }
        }
        f
    }

    /// `e_i = s_1i + s_(N-1)i + Σ_{j∈T, j≠i} s_ij`.
    pub fn e_form(&self, i: u32) -> LinearForm {
        self.sector_form(IndexSet::singleton(i))
    }

    fn check_subset(&self, s: IndexSet) -> Result<()> {
        if s.is_subset(self.t) {
            Ok(())
        } else {
            Err(Error::InvalidVariable(format!(
                "index set {s} not inside T = {}",
                self.t
            )))
        }
    }
}

/// Canonical key of a memoized integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MemoKey {
    L0(IndexSet),
    L1(IndexSet),
    L2(IndexSet, IndexSet, Endpoint),
    M1(IndexSet),
    Z0(IndexSet),
    Z1(IndexSet),
}

impl fmt::Display for MemoKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemoKey::L0(j) => write!(f, "L0:{j}"),
            MemoKey::L1(j) => write!(f, "L1:{j}"),
            MemoKey::L2(i, k, t) => {
                let t = match t {
                    Endpoint::First => "1",
                    Endpoint::Last => "N-1",
                };
                write!(f, "L2:{i}:{k}:{t}")
            }
            MemoKey::M1(j) => write!(f, "M1:{j}"),
            MemoKey::Z0(j) => write!(f, "Z0:{j}"),
            MemoKey::Z1(j) => write!(f, "Z1:{j}"),
        }
    }
}

impl MemoKey {
    fn parse(s: &str) -> Option<MemoKey> {
        let set = |x: &str| -> Option<IndexSet> {
            let inner = x.strip_prefix('{')?.strip_suffix('}')?;
            if inner.is_empty() {
                return Some(IndexSet::EMPTY);
            }
            inner
                .split(',')
                .map(|d| d.parse::<u32>().ok().filter(|i| *i < 64))
                .collect::<Option<Vec<u32>>>()
                .map(|v| v.into_iter().collect())
        };
        let mut it = s.split(':');
        let kind = it.next()?;
        let a = set(it.next()?)?;
        let key = match kind {
            "L0" => MemoKey::L0(a),
            "L1" => MemoKey::L1(a),
            "M1" => MemoKey::M1(a),
            "Z0" => MemoKey::Z0(a),
            "Z1" => MemoKey::Z1(a),
            "L2" => {
                let k = set(it.next()?)?;
                let t = match it.next()? {
                    "1" => Endpoint::First,
                    "N-1" => Endpoint::Last,
                    _ => return None,
                };
                MemoKey::L2(a, k, t)
            }
            _ => return None,
        };
        it.next().is_none().then_some(key)
    }
}

fn p_term(a: i64, form: LinearForm) -> Term {
    Term::p_pow(a, form)
}

fn scaled(x: &RationalFn, c: PrimeLaurent, a: i64, form: LinearForm) -> RationalFn {
    x.mul_term(&Term::new(c.shift(a), form))
}

/// Term budget for expanding the amplitude over a common denominator.
pub const ZN_EXPAND_BUDGET: u64 = 2_000_000;

/// The symbolic engine for one value of `N`.
#[derive(Debug, Clone)]
pub struct Engine {
    ctx: AmplitudeContext,
    memo: HashMap<MemoKey, RationalFn>,
}

impl Engine {
    pub fn new(n: u32) -> Result<Self> {
        Ok(Engine {
            ctx: AmplitudeContext::new(n)?,
            memo: HashMap::new(),
        })
    }

    pub fn ctx(&self) -> &AmplitudeContext {
        &self.ctx
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    pub fn clear_memo(&mut self) {
        self.memo.clear();
    }

    fn memoized(
        &mut self,
        key: MemoKey,
        f: impl FnOnce(&mut Self) -> Result<RationalFn>,
    ) -> Result<RationalFn> {
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        let v = f(self)?;
        self.memo.insert(key, v.clone());
        Ok(v)
    }

    /// `∫_{(Z_p^×)^J} ∏_{i<j∈J} |x_i - x_j|^{s_ij}`.
    pub fn l0(&mut self, j: IndexSet) -> Result<RationalFn> {
        if j.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        self.ctx.check_subset(j)?;
        self.memoized(MemoKey::L0(j), |e| {
            if j.len() == 1 {
                return Ok(RationalFn::from_laurent(PrimeLaurent::one_minus_p_pow(-1)));
            }
            let single = CoincidencePattern::new(vec![j])?;
            let mut parts = e.l0_classes(j)?;
            parts.push(e.class_term(&single)?);
            Ok(RationalFn::sum(parts))
        })
    }

    /// `count · p^{-|J| - Σ_K s} · L1_pattern` for one coincidence class.
    fn class_term(&mut self, pat: &CoincidencePattern) -> Result<RationalFn> {
        let size = pat.support().len() as i64;
        let mut form = LinearForm::zero();
        for b in pat.blocks() {
            form = &form + &self.ctx.pair_sum(b);
        }
        let inner = self.l1_pattern(pat)?;
        Ok(scaled(&inner, class_count(pat), -size, -form))
    }

    /// All classes of `L0(J)` except the single-block one, plus the
    /// all-distinct class.
    fn l0_classes(&mut self, j: IndexSet) -> Result<Vec<RationalFn>> {
        let mut parts = vec![RationalFn::from_laurent(
            delta_count(j).shift(-(j.len() as i64)),
        )];
        for pat in enumerate_patterns(j)? {
            if pat.block_count() == 1 {
                continue;
            }
            parts.push(self.class_term(&pat)?);
        }
        Ok(parts)
    }

    /// Product of `L1` over the non-singleton blocks; `1` if there are none.
    pub fn l1_pattern(&mut self, pat: &CoincidencePattern) -> Result<RationalFn> {
        let mut acc = RationalFn::one();
        for b in pat.blocks() {
            acc = acc.mul(&self.l1(b)?);
        }
        Ok(acc)
    }

    /// `L1` on a set, with the convention `L1({i}) = 1`.
    fn l1_or_one(&mut self, i: IndexSet) -> Result<RationalFn> {
        if i.len() <= 1 {
            Ok(RationalFn::one())
        } else {
            self.l1(i)
        }
    }

    /// `∫_{Z_p^I} ∏_{i<j∈I} |x_i - x_j|^{s_ij}`, `|I| ≥ 2`.
    pub fn l1(&mut self, i: IndexSet) -> Result<RationalFn> {
        if i.len() < 2 {
            return Err(Error::IndexTooSmall {
                need: 2,
                got: i.len(),
            });
        }
        self.ctx.check_subset(i)?;
        self.memoized(MemoKey::L1(i), |e| {
            // The single-block class of L0(I) is (p-1) p^{-|I|-Σs} L1(I);
            // together with the (pZ_p)^I term it gives 1 - p^{1-|I|-Σs}.
            let mut parts = e.l0_classes(i)?;
            for j in i.proper_nonempty_subsets() {
                let rest = i.minus(j);
                let part = e.l1_or_one(rest)?.mul(&e.l0(j)?);
                let form = -e.ctx.pair_sum(rest);
                parts.push(part.mul_term(&p_term(-(rest.len() as i64), form)));
            }
            let form = -e.ctx.pair_sum(i);
            Ok(RationalFn::sum(parts).div_one_minus(1 - i.len() as i64, &form))
        })
    }

    /// `∫_{Z_p^I} ∏_{i∈K} |x_i|^{s_ti} ∏_{i<j∈I} |x_i - x_j|^{s_ij}`.
    pub fn l2(&mut self, i: IndexSet, k: IndexSet, t: Endpoint) -> Result<RationalFn> {
        if i.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        if !k.is_subset(i) {
            return Err(Error::KNotSubset);
        }
        self.ctx.check_subset(i)?;
        if k.is_empty() {
            return self.l1_or_one(i);
        }
        self.memoized(MemoKey::L2(i, k, t), |e| {
            // L0(I) holds L1(I), not L2(I, K): with K nonempty there is no
            // self-reference to move across.
            let mut parts = vec![e.l0(i)?];
            for j in i.proper_nonempty_subsets() {
                let rest = i.minus(j);
                let krest = k.minus(j);
                let part = e.l2(rest, krest, t)?.mul(&e.l0(j)?);
                let form = -(&e.ctx.endpoint_sum(t, krest) + &e.ctx.pair_sum(rest));
                parts.push(part.mul_term(&p_term(-(rest.len() as i64), form)));
            }
            let form = -(&e.ctx.endpoint_sum(t, k) + &e.ctx.pair_sum(i));
            Ok(RationalFn::sum(parts).div_one_minus(-(i.len() as i64), &form))
        })
    }

    /// `∫_{(Z_p^×)^J} ∏ |1 - x_i|^{s_(N-1)i} ∏ |x_i - x_j|^{s_ij}`.
    pub fn m1(&mut self, j: IndexSet) -> Result<RationalFn> {
        if j.is_empty() {
            return Err(Error::EmptyIndexSet);
        }
        self.ctx.check_subset(j)?;
        self.memoized(MemoKey::M1(j), |e| {
            let size = j.len() as i64;
            let mut parts = vec![RationalFn::from_laurent(pi_count(j).shift(-size))];
            for pat in enumerate_marked(j)? {
                let mut form = LinearForm::zero();
                for b in pat.pattern.blocks() {
                    form = &form + &e.ctx.pair_sum(b);
                }
                let mut inner = RationalFn::one();
                if let Some(b) = pat.marked_block() {
                    form = &form + &e.ctx.endpoint_sum(Endpoint::Last, b);
                    inner = inner.mul(&e.l2(b, b, Endpoint::Last)?);
                }
                for b in pat.unmarked_blocks() {
                    inner = inner.mul(&e.l1(b)?);
                }
                parts.push(scaled(&inner, marked_class_count(&pat), -size, -form));
            }
            Ok(RationalFn::sum(parts))
        })
    }

    /// An alternative closed form for the one-variable `M1`,
    /// `p^{-1}[(1-p^{-1})/(1-p^{-1-s}) + p - 2]`, which disagrees with direct
    /// integration. Kept for the verification report; the engine never uses it.
    pub fn m1_singleton_alternative_form(&self, i: u32) -> RationalFn {
        let s = LinearForm::var(self.ctx.slast(i));
        let first =
            RationalFn::from_laurent(PrimeLaurent::one_minus_p_pow(-1)).div_one_minus(-1, &-s);
        first
            .add(&RationalFn::from_laurent(PrimeLaurent::p_minus(2)))
            .mul_term(&p_term(-1, LinearForm::zero()))
    }

    /// `p^{-|X| - Σ_X s_1i - Σ_{T_X} s_ij} L2(X, X, 1)`, and `1` on `∅`.
    fn h0(&mut self, x: IndexSet) -> Result<RationalFn> {
        if x.is_empty() {
            return Ok(RationalFn::one());
        }
        let form = -(&self.ctx.endpoint_sum(Endpoint::First, x) + &self.ctx.pair_sum(x));
        Ok(self
            .l2(x, x, Endpoint::First)?
            .mul_term(&p_term(-(x.len() as i64), form)))
    }

    /// `∫_{Z_p^I} ∏ |x_i|^{s_1i} |1 - x_i|^{s_(N-1)i} ∏ |x_i - x_j|^{s_ij}`.
    pub fn z0(&mut self, i: IndexSet) -> Result<RationalFn> {
        self.ctx.check_subset(i)?;
        if i.is_empty() {
            return Ok(RationalFn::one());
        }
        self.memoized(MemoKey::Z0(i), |e| {
            // Split by the set J of coordinates with |x_i - 1| < 1.
            let mut parts = vec![e.h0(i)?];
            for j in i.subsets().filter(|j| !j.is_empty()) {
                parts.push(e.h0(i.minus(j))?.mul(&e.m1(j)?));
            }
            Ok(RationalFn::sum(parts))
        })
    }

    /// `∫_{Z_p^I} ∏ |x_i|^{-2-e_i} ∏_{i<j∈I} |x_i - x_j|^{s_ij}`.
    pub fn z1(&mut self, i: IndexSet) -> Result<RationalFn> {
        self.ctx.check_subset(i)?;
        if i.is_empty() {
            return Ok(RationalFn::one());
        }
        self.memoized(MemoKey::Z1(i), |e| {
            let mut parts = vec![e.l0(i)?];
            for j in i.proper_nonempty_subsets() {
                let rest = i.minus(j);
                let part = e.z1(rest)?.mul(&e.l0(j)?);
                let form = e.ctx.sector_form(rest);
                parts.push(part.mul_term(&p_term(rest.len() as i64, form)));
            }
            let form = e.ctx.sector_form(i);
            Ok(RationalFn::sum(parts).div_one_minus(i.len() as i64, &form))
        })
    }

    /// `p^{M(s)}` for the sector where exactly the coordinates in `I` are
    /// integral.
    pub fn sector_exponent(&self, i: IndexSet) -> Result<Term> {
        self.ctx.check_subset(i)?;
        let a = self.ctx.t().minus(i);
        Ok(p_term(a.len() as i64, self.ctx.sector_form(a)))
    }

    /// The terms of `Z^(N)(s) = Σ_{I⊆T} p^{M(s)} Z0(I) Z1(T∖I)`, unexpanded.
    pub fn zn_sectors(&mut self) -> Result<LazySum> {
        let t = self.ctx.t();
        let mut parts = Vec::new();
        for i in t.subsets() {
            let term = self.z0(i)?.mul(&self.z1(t.minus(i))?);
            parts.push(term.mul_term(&self.sector_exponent(i)?));
        }
        Ok(LazySum::new(parts))
    }

    /// `Z^(N)(s)` as one reduced rational function.
    ///
    /// Fails with [`Error::BudgetExceeded`] when the common-denominator
    /// numerator could exceed [`ZN_EXPAND_BUDGET`] terms; from `N = 6` on use
    /// [`Engine::zn_sectors`].
    pub fn zn(&mut self) -> Result<RationalFn> {
        self.zn_sectors()?.expand(Some(ZN_EXPAND_BUDGET))
    }

    /// Look up a memoized value by key, computing it on demand.
    pub fn get(&mut self, key: MemoKey) -> Result<RationalFn> {
        match key {
            MemoKey::L0(j) => self.l0(j),
            MemoKey::L1(j) => self.l1(j),
            MemoKey::L2(i, k, t) => self.l2(i, k, t),
            MemoKey::M1(j) => self.m1(j),
            MemoKey::Z0(j) => self.z0(j),
            MemoKey::Z1(j) => self.z1(j),
        }
    }

    fn memo_file(&self, dir: &Path) -> PathBuf {
        dir.join(format!("knzeta-memo-N{}.json", self.ctx.n))
    }

    /// Merge a memo table previously written by [`Engine::save_memo`].
    /// Returns the number of entries loaded; a missing file loads nothing.
    pub fn load_memo(&mut self, dir: &Path) -> Result<usize> {
        let path = self.memo_file(dir);
        let text = match std::fs::read_to_string(&path) {
            Ok(t) => t,
            Err(_) => return Ok(0),
        };
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse(format!("{}: expected an object", path.display())))?;
        let mut n = 0;
        for (k, val) in obj {
            let key =
                MemoKey::parse(k).ok_or_else(|| Error::Parse(format!("bad memo key {k:?}")))?;
            self.memo.insert(key, RationalFn::from_json(val)?);
            n += 1;
        }
        Ok(n)
    }

    pub fn save_memo(&self, dir: &Path) -> Result<()> {
        let mut keys: Vec<&MemoKey> = self.memo.keys().collect();
        keys.sort();
        let mut obj = Map::new();
        for k in keys {
            obj.insert(k.to_string(), self.memo[k].to_json());
        }
        std::fs::create_dir_all(dir).map_err(|e| Error::Parse(e.to_string()))?;
        let text = serde_json::to_string(&Value::Object(obj)).expect("memo serializes");
        std::fs::write(self.memo_file(dir), text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// `Z(s1, s2, s3) = ∫_{Z_p^2} |x|^{s1} |y|^{s2} |x - y|^{s3}`, assembled from
/// the three residue pieces. `None` stands for an exponent fixed at 0.
pub fn base_z_f(s1: Option<SVar>, s2: Option<SVar>, s3: SVar) -> RationalFn {
    let one_minus_inv = || RationalFn::from_laurent(PrimeLaurent::one_minus_p_pow(-1));
    let form = |s: Option<SVar>| s.map(LinearForm::var).unwrap_or_default();
    let edge = |s: Option<SVar>| -> RationalFn {
        // (1-p^{-1})^2 p^{-1-s} / (1 - p^{-1-s})
        let f = form(s);
        one_minus_inv()
            .mul(&one_minus_inv())
            .mul_term(&p_term(-1, -f.clone()))
            .div_one_minus(-1, &-f)
    };
    let f3 = LinearForm::var(s3);
    let z03 = RationalFn::from_laurent(PrimeLaurent::falling(1, 2).shift(-2)).add(
        &one_minus_inv()
            .mul_term(&Term::new(PrimeLaurent::p_minus(1).shift(-2), -f3.clone()))
            .div_one_minus(-1, &-f3.clone()),
    );
    let total = &(&form(s1) + &form(s2)) + &f3;
    edge(s1).add(&edge(s2)).add(&z03).div_one_minus(-2, &-total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn set(v: &[u32]) -> IndexSet {
        v.iter().copied().collect()
    }

    #[test]
    fn variable_count() {
        for n in 4..=8 {
            let ctx = AmplitudeContext::new(n).unwrap();
            assert_eq!(ctx.vars().len() as u32, n * (n - 3) / 2);
        }
        assert_eq!(AmplitudeContext::new(3), Err(Error::NOutOfRange(3)));
    }

    #[test]
    fn var_validation() {
        let ctx = AmplitudeContext::new(5).unwrap();
        assert_eq!(ctx.var(2, 4).unwrap().to_string(), "s_4_2");
        assert_eq!(ctx.var(3, 2).unwrap().to_string(), "s_2_3");
        assert_eq!(ctx.var(2, 1).unwrap().to_string(), "s_1_2");
        assert!(ctx.var(1, 4).is_err());
        assert!(ctx.var(2, 5).is_err());
    }

    #[test]
    fn sector_exponent_examples() {
        let e = Engine::new(5).unwrap();
        let t = e.sector_exponent(set(&[2])).unwrap();
        assert_eq!(t.coeff, PrimeLaurent::p_pow(1));
        let ctx = e.ctx();
        let want = LinearForm::sum([ctx.s1(3), ctx.slast(3), ctx.sij(2, 3)]);
        assert_eq!(t.form, want);
        let full = e.sector_exponent(ctx.t()).unwrap();
        assert!(full.coeff.is_one() && full.form.is_zero());
    }

    #[test]
    fn memo_key_roundtrip() {
        let keys = [
            MemoKey::L0(set(&[2, 3])),
            MemoKey::L2(set(&[2, 4]), set(&[4]), Endpoint::Last),
            MemoKey::Z1(IndexSet::EMPTY),
        ];
        for k in keys {
            assert_eq!(MemoKey::parse(&k.to_string()), Some(k));
        }
    }

    #[test]
    fn l1_pair_closed_form() {
        let mut e = Engine::new(5).unwrap();
        let got = e.l1(set(&[2, 3])).unwrap();
        let s = LinearForm::var(e.ctx().sij(2, 3));
        let want =
            RationalFn::from_laurent(PrimeLaurent::one_minus_p_pow(-1)).div_one_minus(-1, &-s);
        assert_eq!(got, want);
    }

    #[test]
    fn z1_singleton_closed_form() {
        let mut e = Engine::new(4).unwrap();
        let got = e.z1(set(&[2])).unwrap();
        let ctx = e.ctx().clone();
        let f = LinearForm::sum([ctx.s1(2), ctx.slast(2)]);
        let want = RationalFn::from_laurent(PrimeLaurent::one_minus_p_pow(-1)).div_one_minus(1, &f);
        assert_eq!(got, want);
    }

    #[test]
    fn m1_singleton_value() {
        let mut e = Engine::new(4).unwrap();
        let m = e.m1(set(&[2])).unwrap();
        let assign = [(e.ctx().slast(2), Complex64::new(1.0, 0.0))]
            .into_iter()
            .collect();
        let v = m.eval(3.0, &assign).unwrap();
        assert!((v.re - 5.0 / 12.0).abs() < 1e-14);
        let r = e
            .m1_singleton_alternative_form(2)
            .eval(3.0, &assign)
            .unwrap();
        assert!((r.re - 7.0 / 12.0).abs() < 1e-14);
    }
}
