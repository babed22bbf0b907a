//! Convergence conditions, the interior witness point and pole hyperplanes.
//!
//! Conditions apply to real parts. The explicit family (`C1'` to `C4'`) is
//! generated exhaustively over subsets of `T`; the denominator family has one
//! condition per factor `1 - p^{a + L(s)}` of the amplitude, namely
//! `a + L(Re s) < 0`, which is exactly where its geometric series converges.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde_json::{json, Map, Value};

use crate::combinatorics::IndexSet;
use crate::error::{Error, Result};
use crate::recursion::{AmplitudeContext, Endpoint, Engine};
use crate::symbolic::{Assignment, DenFactor, LinearForm, RationalFn, SVar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Relation {
    Lt,
    Gt,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Gt => ">",
        }
    }

    pub fn flipped(self) -> Relation {
        match self {
            Relation::Lt => Relation::Gt,
            Relation::Gt => Relation::Lt,
        }
    }
}

/// `constant + Σ coeffs·Re(s) (<|>) 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffineCondition {
    pub label: String,
    pub constant: BigRational,
    pub coeffs: BTreeMap<SVar, BigRational>,
    pub relation: Relation,
}

fn int(k: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

fn rat_str(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rat(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(
            s.trim().parse().map_err(|_| bad())?,
        )),
    }
}

impl AffineCondition {
    /// From an integer affine form.
    pub fn from_form(
        label: impl Into<String>,
        a: i64,
        form: &LinearForm,
        relation: Relation,
    ) -> Self {
        AffineCondition {
            label: label.into(),
            constant: int(a),
            coeffs: form.iter().map(|(v, c)| (v, int(c))).collect(),
            relation,
        }
    }

    /// The complementary open condition (boundary excluded on both sides).
    pub fn negated(&self) -> Self {
        AffineCondition {
            relation: self.relation.flipped(),
            ..self.clone()
        }
    }

    fn holds_value(&self, v: f64) -> bool {
        match self.relation {
            Relation::Lt => v < 0.0,
            Relation::Gt => v > 0.0,
        }
    }

    /// Left-hand side at the real parts of `assign`.
    pub fn value(&self, assign: &Assignment) -> Result<f64> {
        let mut acc = self.constant.to_f64().unwrap_or(f64::NAN);
        for (v, c) in &self.coeffs {
            let z = assign
                .get(v)
                .ok_or_else(|| Error::MissingAssignment(v.to_string()))?;
            acc += c.to_f64().unwrap_or(f64::NAN) * z.re;
        }
        Ok(acc)
    }

    pub fn holds(&self, assign: &Assignment) -> Result<bool> {
        Ok(self.holds_value(self.value(assign)?))
    }

    /// Exact test at a rational point.
    pub fn holds_exact(&self, point: &BTreeMap<SVar, BigRational>) -> Result<bool> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            let x = point
                .get(v)
                .ok_or_else(|| Error::MissingAssignment(v.to_string()))?;
            acc += c * x;
        }
        Ok(match self.relation {
            Relation::Lt => acc.is_negative(),
            Relation::Gt => acc.is_positive(),
        })
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Map<String, Value> = self
            .coeffs
            .iter()
            .map(|(v, c)| (v.to_string(), Value::String(rat_str(c))))
            .collect();
        json!({
            "label": self.label,
            "const": rat_str(&self.constant),
            "coeffs": coeffs,
            "rel": self.relation.symbol(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("condition: {what}"));
        let constant = parse_rat(v["const"].as_str().ok_or_else(|| bad("const"))?)?;
        let relation = match v["rel"].as_str() {
            Some("<") => Relation::Lt,
            Some(">") => Relation::Gt,
            _ => return Err(bad("rel")),
        };
        let mut coeffs = BTreeMap::new();
        for (k, c) in v["coeffs"].as_object().ok_or_else(|| bad("coeffs"))? {
            let var: SVar = k.parse()?;
            coeffs.insert(
                var,
                parse_rat(c.as_str().ok_or_else(|| bad("coefficient"))?)?,
            );
        }
        Ok(AffineCondition {
            label: v["label"].as_str().unwrap_or_default().to_string(),
            constant,
            coeffs,
            relation,
        })
    }
}

impl fmt::Display for AffineCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", rat_str(&self.constant))?;
        for (v, c) in &self.coeffs {
            if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let a = c.abs();
            if a.is_one() {
                write!(f, "Re({v})")?;
            } else {
                write!(f, "{}*Re({v})", rat_str(&a))?;
            }
        }
        write!(f, " {} 0", self.relation.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConditionFamily {
    /// The explicit conditions defining `H0`.
    CPrimed,
    /// One convergence condition per denominator factor of the amplitude.
    FromDenominators,
}

fn set_label(j: IndexSet) -> String {
    j.to_string()
}

/// `C1'` to `C4'` in full.
pub fn c_primed(ctx: &AmplitudeContext) -> Vec<AffineCondition> {
    let t = ctx.t();
    let mut out = Vec::new();
    for j in t.subsets().filter(|j| !j.is_empty()) {
        out.push(AffineCondition::from_form(
            format!("C1'(J={})", set_label(j)),
            j.len() as i64,
            &ctx.sector_form(j),
            Relation::Lt,
        ));
    }
    for j in t.subsets().filter(|j| j.len() >= 2) {
        out.push(AffineCondition::from_form(
            format!("C2'(J={})", set_label(j)),
            j.len() as i64 - 1,
            &ctx.pair_sum(j),
            Relation::Gt,
        ));
    }
    for (tag, ep) in [("1", Endpoint::First), ("N-1", Endpoint::Last)] {
        for j in t.subsets().filter(|j| !j.is_empty()) {
            for s in j.subsets() {
                if s.is_empty() && j.len() < 2 {
                    continue;
                }
                let form = &ctx.endpoint_sum(ep, s) + &ctx.pair_sum(j);
                out.push(AffineCondition::from_form(
                    format!("C3'(t={tag},J={},S={})", set_label(j), set_label(s)),
                    j.len() as i64,
                    &form,
                    Relation::Gt,
                ));
            }
        }
    }
    for v in ctx.vars() {
        out.push(AffineCondition::from_form(
            format!("C4'({v})"),
            1,
            &LinearForm::var(v),
            Relation::Gt,
        ));
    }
    out
}

/// `a + L(Re s) < 0` for each factor `1 - p^{a + L(s)}`.
pub fn from_denominators(dens: &[DenFactor]) -> Vec<AffineCondition> {
    dens.iter()
        .map(|d| AffineCondition::from_form(format!("den({d})"), d.a, &d.form, Relation::Lt))
        .collect()
}

/// Either family for the engine's `N`. The denominator family reads the
/// reduced denominator of the amplitude (computing it if needed).
pub fn convergence_conditions(
    engine: &mut Engine,
    family: ConditionFamily,
) -> Result<Vec<AffineCondition>> {
    match family {
        ConditionFamily::CPrimed => Ok(c_primed(engine.ctx())),
        ConditionFamily::FromDenominators => {
            let dens = engine.zn_sectors()?.denominator();
            Ok(from_denominators(&dens))
        }
    }
}

/// `N1 = (N-4)(N-3)/2`, the number of pairs inside `T`.
fn n1(ctx: &AmplitudeContext) -> i64 {
    let n = ctx.n() as i64;
    (n - 4) * (n - 3) / 2
}

/// Midpoints of the box bands: `-1/(3 N1)` inside `T`, `-7/12` at the
/// endpoints. For `N = 4` there are no inner pairs.
pub fn witness_point(ctx: &AmplitudeContext) -> Result<BTreeMap<SVar, BigRational>> {
    let inner = if n1(ctx) > 0 {
        BigRational::new(BigInt::from(-1), BigInt::from(3 * n1(ctx)))
    } else {
        BigRational::zero()
    };
    let endpoint = BigRational::new(BigInt::from(-7), BigInt::from(12));
    let mut point = BTreeMap::new();
    for i in ctx.t().iter() {
        point.insert(ctx.s1(i), endpoint.clone());
        point.insert(ctx.slast(i), endpoint.clone());
    }
    for (i, j) in ctx.t().pairs() {
        point.insert(ctx.sij(i, j), inner.clone());
    }
    for c in c_primed(ctx) {
        if !c.holds_exact(&point)? {
            return Err(Error::WitnessFailed(format!("{}: {c}", c.label)));
        }
    }
    Ok(point)
}

/// A rational point as a complex assignment with zero imaginary parts.
pub fn to_assignment(point: &BTreeMap<SVar, BigRational>) -> Assignment {
    point
        .iter()
        .map(|(v, r)| (*v, Complex64::new(r.to_f64().unwrap_or(f64::NAN), 0.0)))
        .collect()
}

/// Uniform sample from the open box: inner pairs in `(-2/(3 N1), 0)`,
/// endpoint variables in `(-2/3, -1/2)`.
pub fn box_sample<R: Rng + ?Sized>(ctx: &AmplitudeContext, rng: &mut R) -> Assignment {
    let open = |rng: &mut R, lo: f64, hi: f64| loop {
        let x = rng.gen_range(lo..hi);
        if x > lo {
            return x;
        }
    };
    let mut out = Assignment::new();
    for i in ctx.t().iter() {
        for v in [ctx.s1(i), ctx.slast(i)] {
            out.insert(v, Complex64::new(open(rng, -2.0 / 3.0, -0.5), 0.0));
        }
    }
    let w = 2.0 / (3.0 * n1(ctx).max(1) as f64);
    for (i, j) in ctx.t().pairs() {
        out.insert(ctx.sij(i, j), Complex64::new(open(rng, -w, 0.0), 0.0));
    }
    out
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub checked: usize,
    pub violated: Vec<AffineCondition>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.violated.is_empty()
    }
}

pub fn check_point(conds: &[AffineCondition], assign: &Assignment) -> Result<CheckReport> {
    let mut violated = Vec::new();
    for c in conds {
        if !c.holds(assign)? {
            violated.push(c.clone());
        }
    }
    Ok(CheckReport {
        checked: conds.len(),
        violated,
    })
}

/// `constant + Σ coeffs·Re(s) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PoleHyperplane {
    pub constant: i64,
    pub coeffs: BTreeMap<SVar, i64>,
    pub multiplicity: u32,
}

impl PoleHyperplane {
    pub fn from_factor(d: &DenFactor) -> Self {
        PoleHyperplane {
            constant: d.a,
            coeffs: d.form.iter().collect(),
            multiplicity: d.multiplicity,
        }
    }

    pub fn form(&self) -> LinearForm {
        LinearForm::from_coeffs(self.coeffs.iter().map(|(v, c)| (*v, *c)))
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Map<String, Value> = self
            .coeffs
            .iter()
            .map(|(v, c)| (v.to_string(), Value::String(c.to_string())))
            .collect();
        json!({
            "const": self.constant.to_string(),
            "coeffs": coeffs,
            "rel": "=",
            "multiplicity": self.multiplicity,
        })
    }
}

impl fmt::Display for PoleHyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (v, c) in &self.coeffs {
            let sign = if *c < 0 { "-" } else { "+" };
            if c.abs() == 1 {
                write!(f, " {sign} Re({v})")?;
            } else {
                write!(f, " {sign} {}*Re({v})", c.abs())?;
            }
        }
        write!(f, " = 0")?;
        if self.multiplicity > 1 {
            write!(f, "  (multiplicity {})", self.multiplicity)?;
        }
        Ok(())
    }
}

/// One hyperplane per distinct denominator factor.
pub fn pole_hyperplanes(x: &RationalFn) -> Vec<PoleHyperplane> {
    x.den().map(|d| PoleHyperplane::from_factor(&d)).collect()
}

pub fn hyperplanes_of(dens: &[DenFactor]) -> Vec<PoleHyperplane> {
    dens.iter().map(PoleHyperplane::from_factor).collect()
}

/// The affine families a pole of the amplitude may lie on.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PoleShape {
    /// `|J| + Σ_J (s_1i + s_(N-1)i) + Σ_{pairs of T meeting J} s_ij`.
    C1(IndexSet),
    /// `|K| - 1 + Σ_{i<j∈K} s_ij`, `|K| ≥ 2`.
    C2(IndexSet),
    /// `1 + s` for a single variable.
    C3(SVar),
    /// `|J| + Σ_S s_ti + Σ_{i<j∈J} s_ij`, `S ⊆ J`, `S ≠ ∅` or `|J| ≥ 2`.
    C4 {
        j: IndexSet,
        s: IndexSet,
        t: Endpoint,
    },
}

impl fmt::Display for PoleShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PoleShape::C1(j) => write!(f, "C1(J={j})"),
            PoleShape::C2(k) => write!(f, "C2(K={k})"),
            PoleShape::C3(v) => write!(f, "C3({v})"),
            PoleShape::C4 { j, s, t } => {
                let t = match t {
                    Endpoint::First => "1",
                    Endpoint::Last => "N-1",
                };
                write!(f, "C4(t={t},J={j},S={s})")
            }
        }
    }
}

/// Every admissible shape for this `N`, keyed by its affine form `(a, L)`
/// normalized to a positive constant.
pub fn pole_shapes(ctx: &AmplitudeContext) -> BTreeMap<(i64, LinearForm), BTreeSet<PoleShape>> {
    let t = ctx.t();
    let mut out: BTreeMap<(i64, LinearForm), BTreeSet<PoleShape>> = BTreeMap::new();
    let mut add = |a: i64, l: LinearForm, s: PoleShape| {
        out.entry((a, l)).or_default().insert(s);
    };
    for j in t.subsets().filter(|j| !j.is_empty()) {
        add(j.len() as i64, ctx.sector_form(j), PoleShape::C1(j));
        if j.len() >= 2 {
            add(j.len() as i64 - 1, ctx.pair_sum(j), PoleShape::C2(j));
        }
        for ep in [Endpoint::First, Endpoint::Last] {
            for s in j.subsets() {
                if s.is_empty() && j.len() < 2 {
                    continue;
                }
                let l = &ctx.endpoint_sum(ep, s) + &ctx.pair_sum(j);
                add(j.len() as i64, l, PoleShape::C4 { j, s, t: ep });
            }
        }
    }
    for v in ctx.vars() {
        add(1, LinearForm::var(v), PoleShape::C3(v));
    }
    out
}

/// Shapes matching `a + L = 0` up to sign; empty when none does.
pub fn classify_pole(
    shapes: &BTreeMap<(i64, LinearForm), BTreeSet<PoleShape>>,
    h: &PoleHyperplane,
) -> BTreeSet<PoleShape> {
    let form = h.form();
    let key = if h.constant < 0 {
        (-h.constant, -form)
    } else {
        (h.constant, form)
    };
    shapes.get(&key).cloned().unwrap_or_default()
}
