//! Integrands of the auxiliary integrals and of the amplitude sectors, built
//! directly from their definitions. Coordinates are the elements of the
//! index set in increasing order.

use crate::combinatorics::IndexSet;
use crate::recursion::{AmplitudeContext, Endpoint};
use crate::symbolic::{LinearForm, SVar};

use super::spec::{Domain, Exponent, FactorKind, IntegralSpec};

fn var(v: SVar) -> Exponent {
    Exponent::form(LinearForm::var(v))
}

fn with_diffs(ctx: &AmplitudeContext, mut spec: IntegralSpec, set: IndexSet) -> IntegralSpec {
    let idx: Vec<u32> = set.iter().collect();
    for a in 0..idx.len() {
        for b in a + 1..idx.len() {
            spec = spec.with(FactorKind::AbsDiff(a, b), var(ctx.sij(idx[a], idx[b])));
        }
    }
    spec
}

pub fn l0_spec(ctx: &AmplitudeContext, j: IndexSet) -> IntegralSpec {
    let spec = IntegralSpec::new(format!("L0{j}"), vec![Domain::Units; j.len()]);
    with_diffs(ctx, spec, j)
}

pub fn l1_spec(ctx: &AmplitudeContext, i: IndexSet) -> IntegralSpec {
    let spec = IntegralSpec::new(format!("L1{i}"), vec![Domain::Zp; i.len()]);
    with_diffs(ctx, spec, i)
}

pub fn l2_spec(ctx: &AmplitudeContext, i: IndexSet, k: IndexSet, t: Endpoint) -> IntegralSpec {
    let tag = match t {
        Endpoint::First => "1",
        Endpoint::Last => "N-1",
    };
    let mut spec = IntegralSpec::new(format!("L2{i}{k}t={tag}"), vec![Domain::Zp; i.len()]);
    for (pos, x) in i.iter().enumerate() {
        if k.contains(x) {
            spec = spec.with(FactorKind::AbsX(pos), var(ctx.st(t, x)));
        }
    }
    with_diffs(ctx, spec, i)
}

pub fn m1_spec(ctx: &AmplitudeContext, j: IndexSet) -> IntegralSpec {
    let mut spec = IntegralSpec::new(format!("M1{j}"), vec![Domain::Units; j.len()]);
    for (pos, x) in j.iter().enumerate() {
        spec = spec.with(FactorKind::AbsOneMinusX(pos), var(ctx.slast(x)));
    }
    with_diffs(ctx, spec, j)
}

pub fn z0_spec(ctx: &AmplitudeContext, i: IndexSet) -> IntegralSpec {
    let mut spec = IntegralSpec::new(format!("Z0{i}"), vec![Domain::Zp; i.len()]);
    for (pos, x) in i.iter().enumerate() {
        spec = spec
            .with(FactorKind::AbsX(pos), var(ctx.s1(x)))
            .with(FactorKind::AbsOneMinusX(pos), var(ctx.slast(x)));
    }
    with_diffs(ctx, spec, i)
}

pub fn z1_spec(ctx: &AmplitudeContext, i: IndexSet) -> IntegralSpec {
    let mut spec = IntegralSpec::new(format!("Z1{i}"), vec![Domain::Zp; i.len()]);
    for (pos, x) in i.iter().enumerate() {
        spec = spec.with(FactorKind::AbsX(pos), Exponent::new(-2, -ctx.e_form(x)));
    }
    with_diffs(ctx, spec, i)
}

/// The Koba-Nielsen integrand on the sector where exactly the coordinates in
/// `i` are integral.
pub fn sector_spec(ctx: &AmplitudeContext, i: IndexSet) -> IntegralSpec {
    let t = ctx.t();
    let domains = t
        .iter()
        .map(|x| {
            if i.contains(x) {
                Domain::Zp
            } else {
                Domain::Inverted
            }
        })
        .collect();
    amplitude_integrand(ctx, IntegralSpec::new(format!("Sect{i}"), domains))
}

/// One spec per sector; their sum is the amplitude.
pub fn amplitude_specs(ctx: &AmplitudeContext) -> Vec<IntegralSpec> {
    ctx.t().subsets().map(|i| sector_spec(ctx, i)).collect()
}

/// The amplitude integrand over all of `Q_p^T`, for the divergence probe.
pub fn amplitude_qp_spec(ctx: &AmplitudeContext) -> IntegralSpec {
    let n = ctx.t().len();
    amplitude_integrand(ctx, IntegralSpec::new("Z(N) over Qp", vec![Domain::Qp; n]))
}

fn amplitude_integrand(ctx: &AmplitudeContext, mut spec: IntegralSpec) -> IntegralSpec {
    let t = ctx.t();
    for (pos, x) in t.iter().enumerate() {
        spec = spec
            .with(FactorKind::AbsX(pos), var(ctx.s1(x)))
            .with(FactorKind::AbsOneMinusX(pos), var(ctx.slast(x)));
    }
    with_diffs(ctx, spec, t)
}

/// `∫_{Z_p^2} |x|^{s1} |y|^{s2} |x - y|^{s3}`; `None` leaves the factor out.
pub fn base_z_spec(s1: Option<SVar>, s2: Option<SVar>, s3: SVar) -> IntegralSpec {
    let mut spec = IntegralSpec::new("Z(s1,s2,s3)", vec![Domain::Zp, Domain::Zp]);
    if let Some(v) = s1 {
        spec = spec.with(FactorKind::AbsX(0), var(v));
    }
    if let Some(v) = s2 {
        spec = spec.with(FactorKind::AbsX(1), var(v));
    }
    spec.with(FactorKind::AbsDiff(0, 1), var(s3))
}
