//! Canonical JSON form of [`RationalFn`].
//!
//! `{"num":[{"coeff":[[k,"n/d"],...],"form":{"s_1_2":c}}],"den":[{"a":a,"form":{...},"mult":m}]}`

use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use super::{DenFactor, LinearForm, PolyExpr, PrimeLaurent, RationalFn, SVar};
use crate::error::{Error, Result};

fn rat_str(c: &BigRational) -> String {
    format!("{}/{}", c.numer(), c.denom())
}

fn parse_rat(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
            let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => Ok(BigRational::from_integer(
            BigInt::from_str(s.trim()).map_err(|_| bad())?,
        )),
    }
}

pub fn form_to_json(f: &LinearForm) -> Value {
    let mut m = Map::new();
    for (v, c) in f.iter() {
        m.insert(v.to_string(), json!(c));
    }
    Value::Object(m)
}

pub fn form_from_json(v: &Value) -> Result<LinearForm> {
    let obj = v
        .as_object()
        .ok_or_else(|| Error::Parse("form must be an object".into()))?;
    let mut f = LinearForm::zero();
    for (k, c) in obj {
        let var = SVar::from_str(k)?;
        let c = c
            .as_i64()
            .ok_or_else(|| Error::Parse(format!("coefficient of {k} must be an integer")))?;
        f.add_coeff(var, c);
    }
    Ok(f)
}

fn laurent_to_json(c: &PrimeLaurent) -> Value {
    Value::Array(c.terms().map(|(k, r)| json!([k, rat_str(r)])).collect())
}

fn laurent_from_json(v: &Value) -> Result<PrimeLaurent> {
    let arr = v
        .as_array()
        .ok_or_else(|| Error::Parse("coeff must be an array".into()))?;
    let mut out = PrimeLaurent::zero();
    for t in arr {
        let pair = t
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::Parse("coeff entries are [k, \"n/d\"]".into()))?;
        let k = pair[0]
            .as_i64()
            .ok_or_else(|| Error::Parse("exponent must be an integer".into()))?;
        let r = pair[1]
            .as_str()
            .ok_or_else(|| Error::Parse("coefficient must be a string".into()))?;
        out.add_term(k, parse_rat(r)?);
    }
    Ok(out)
}

impl RationalFn {
    pub fn to_json(&self) -> Value {
        let num: Vec<Value> = self
            .num()
            .terms()
            .map(|t| json!({"coeff": laurent_to_json(&t.coeff), "form": form_to_json(&t.form)}))
            .collect();
        let den: Vec<Value> = self
            .den()
            .map(|d| json!({"a": d.a, "form": form_to_json(&d.form), "mult": d.multiplicity}))
            .collect();
        json!({"num": num, "den": den})
    }

    pub fn from_json(v: &Value) -> Result<RationalFn> {
        let field = |name: &str| {
            v.get(name)
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse(format!("missing array field {name:?}")))
        };
        let mut num = PolyExpr::zero();
        for t in field("num")? {
            let coeff = laurent_from_json(t.get("coeff").unwrap_or(&Value::Null))?;
            let form = form_from_json(t.get("form").unwrap_or(&Value::Null))?;
            num.add_term(coeff, form);
        }
        let mut den = Vec::new();
        for d in field("den")? {
            let a = d
                .get("a")
                .and_then(Value::as_i64)
                .ok_or_else(|| Error::Parse("den.a must be an integer".into()))?;
            let mult = d
                .get("mult")
                .and_then(Value::as_u64)
                .filter(|m| *m > 0)
                .ok_or_else(|| Error::Parse("den.mult must be a positive integer".into()))?;
            let form = form_from_json(d.get("form").unwrap_or(&Value::Null))?;
            den.push(DenFactor {
                a,
                form,
                multiplicity: mult as u32,
            });
        }
        RationalFn::new(num, den)
    }
}

impl Serialize for RationalFn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalFn {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        RationalFn::from_json(&v).map_err(D::Error::custom)
    }
}
