//! Hand-derived examples and frozen values. The frozen amplitude values were
//! confirmed against the integration oracle when recorded; the tests below
//! re-run the oracle where it is cheap.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;

use knzeta::combinatorics::{
    class_count, delta_count, enumerate_patterns, marked_class_count, pi_count, CoincidencePattern,
    MarkedPattern,
};
use knzeta::domain;
use knzeta::oracle::{
    self, exact_truncated, lemmas, mc_integral, Budget, Domain, Exponent, FactorKind, IntegralSpec,
    Verdict,
};
use knzeta::verify::{positive_point, z1_point};
use knzeta::{base_z_f, Assignment, Engine, IndexSet, LinearForm, PrimeLaurent, RationalFn, SVar};

fn s(i: u32, j: u32) -> SVar {
    SVar::raw(i, j)
}

fn at(pairs: &[(SVar, f64)]) -> Assignment {
    pairs
        .iter()
        .map(|&(v, x)| (v, Complex64::new(x, 0.0)))
        .collect()
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn set(v: &[u32]) -> IndexSet {
    v.iter().copied().collect()
}

fn geometric(v: SVar) -> RationalFn {
    RationalFn::from_laurent(PrimeLaurent::one_minus_p_pow(-1))
        .div_one_minus(-1, &-LinearForm::var(v))
}

#[test]
fn geometric_series_value() {
    let v = s(1, 2);
    let f = geometric(v);
    let x = f.eval(2.0, &at(&[(v, 1.0)])).unwrap();
    assert!((x.re - 2.0 / 3.0).abs() < 1e-15);
    let spec = IntegralSpec::new("|x|", vec![Domain::Zp])
        .with(FactorKind::AbsX(0), Exponent::form(LinearForm::var(v)));
    let t = exact_truncated(&spec, 2, &at(&[(v, 1.0)]), 10).unwrap();
    let partial = 2.0 / 3.0 * (1.0 - 4f64.powi(-10));
    assert!((t.value.re - partial).abs() < 1e-15);
    assert!(t.tail_bound <= 4f64.powi(-10) * 1.000001);
}

#[test]
fn common_denominator_sum() {
    let (a, b) = (s(1, 2), s(3, 2));
    let one = |v| RationalFn::one().div_one_minus(-1, &-LinearForm::var(v));
    let sum = one(a).add(&one(b));
    assert_eq!(sum.den_len(), 2);
    assert_eq!(sum.clone().reduced(), sum);
    let x = sum.eval(2.0, &at(&[(a, 1.0), (b, 1.0)])).unwrap();
    assert!((x.re - 2.0 / (1.0 - 0.25)).abs() < 1e-14);
}

#[test]
fn pattern_counts() {
    assert_eq!(enumerate_patterns(set(&[2, 3, 4])).unwrap().len(), 4);
    assert_eq!(enumerate_patterns(set(&[2, 3, 4, 5])).unwrap().len(), 14);
    let pat = CoincidencePattern::new(vec![set(&[2, 3]), set(&[4])]).unwrap();
    assert_eq!(class_count(&pat).eval_exact(&rat(5)), rat(12));
    assert_eq!(delta_count(set(&[2, 3])).eval_exact(&rat(3)), rat(2));
    assert_eq!(pi_count(set(&[2])).eval_exact(&rat(5)), rat(3));
    assert_eq!(delta_count(set(&[2])).eval_exact(&rat(7)), rat(6));
    let unmarked = MarkedPattern::of_tuple(set(&[2]), &[3]);
    assert!(unmarked.marked_block().is_none());
    let marked = MarkedPattern::of_tuple(set(&[2, 3]), &[1, 1]);
    assert_eq!(marked.marked_block(), Some(set(&[2, 3])));
    assert_eq!(marked_class_count(&marked).eval_exact(&rat(5)), rat(1));
}

#[test]
fn worked_example_blocks() {
    let pat = CoincidencePattern::of_tuple(IndexSet::range(2, 6), &[1, 2, 1, 2, 2]);
    assert_eq!(pat.blocks(), vec![set(&[2, 4]), set(&[3, 5, 6])]);
}

#[test]
fn base_integral_examples() {
    let v = s(2, 3);
    let z = base_z_f(None, None, v);
    assert_eq!(z.clone().reduced(), geometric(v));
    let zero = z.eval(3.0, &at(&[(v, 0.0)])).unwrap();
    assert!((zero.re - 1.0).abs() < 1e-15);
    let spec = lemmas::base_z_spec(None, None, v);
    let t = exact_truncated(&spec, 3, &at(&[(v, 2.0)]), 6).unwrap();
    let want = z.eval(3.0, &at(&[(v, 2.0)])).unwrap();
    assert!((t.value - want).norm() <= t.tail_bound + 1e-14);
}

#[test]
fn l1_pair_and_triple() {
    let mut e = Engine::new(5).unwrap();
    let pair = e.l1(set(&[2, 3])).unwrap().reduced();
    assert_eq!(pair, geometric(s(2, 3)));
    let mut e6 = Engine::new(6).unwrap();
    let ctx = e6.ctx().clone();
    let one: Assignment = ctx
        .vars()
        .into_iter()
        .map(|v| (v, Complex64::new(1.0, 0.0)))
        .collect();
    let f = e6.l1(ctx.t()).unwrap().eval(3.0, &one).unwrap();
    let t = exact_truncated(&lemmas::l1_spec(&ctx, ctx.t()), 3, &one, 8).unwrap();
    assert!((t.value - f).norm() <= t.tail_bound + 1e-12);
}

#[test]
fn m1_singleton_is_five_twelfths() {
    let e = Engine::new(4).unwrap();
    let mut e2 = Engine::new(4).unwrap();
    let v = e.ctx().slast(2);
    let point = at(&[(v, 1.0)]);
    let m1 = e2.m1(set(&[2])).unwrap().eval(3.0, &point).unwrap();
    assert!((m1.re - 5.0 / 12.0).abs() < 1e-14);
    let alt = e
        .m1_singleton_alternative_form(2)
        .eval(3.0, &point)
        .unwrap();
    assert!((alt.re - 7.0 / 12.0).abs() < 1e-14);
    let t = exact_truncated(&lemmas::m1_spec(e.ctx(), set(&[2])), 3, &point, 12).unwrap();
    assert!((t.value.re - 5.0 / 12.0).abs() <= t.tail_bound + 1e-14);
}

#[test]
fn z0_singleton_closed_form() {
    let mut e = Engine::new(4).unwrap();
    let (a, b) = (e.ctx().s1(2), e.ctx().slast(2));
    let pt = at(&[(a, 0.3), (b, -0.45)]);
    let got = e.z0(set(&[2])).unwrap().eval(5.0, &pt).unwrap();
    let p: f64 = 5.0;
    let g = |x: f64| p.powf(-1.0 - x) / (1.0 - p.powf(-1.0 - x));
    let want = (1.0 - 1.0 / p) * (g(0.3) + g(-0.45)) + (p - 2.0) / p;
    assert!((got.re - want).abs() < 1e-13, "{got} vs {want}");
}

#[test]
fn sector_exponents() {
    let e = Engine::new(4).unwrap();
    let t = e.sector_exponent(IndexSet::EMPTY).unwrap();
    assert_eq!(t.coeff, PrimeLaurent::p_pow(1));
    assert_eq!(t.form, LinearForm::sum([s(1, 2), s(3, 2)]));
}

#[test]
fn n4_domain_condition() {
    let ctx = knzeta::AmplitudeContext::new(4).unwrap();
    let c1: Vec<_> = domain::c_primed(&ctx)
        .into_iter()
        .filter(|c| c.label.starts_with("C1'"))
        .collect();
    assert_eq!(c1.len(), 1);
    assert_eq!(c1[0].to_string(), "1 + Re(s_1_2) + Re(s_3_2) < 0");
}

/// `Z^(N)` at the witness point, as recorded.
const WITNESS_VALUES: [(u32, u64, f64); 9] = [
    (4, 2, 7.069399890508947),
    (4, 3, 5.947907357429387),
    (4, 5, 4.874945226005653),
    (5, 2, 23.714252411258254),
    (5, 3, 16.790513268580362),
    (5, 5, 11.288967150180314),
    (6, 2, 123.08247072263637),
    (6, 3, 73.32774343155592),
    (6, 5, 40.42159218374836),
];

#[test]
fn frozen_witness_values() {
    for n in [4u32, 5, 6] {
        let mut e = Engine::new(n).unwrap();
        let ctx = e.ctx().clone();
        let w = domain::to_assignment(&domain::witness_point(&ctx).unwrap());
        let sectors = e.zn_sectors().unwrap();
        for &(_, p, want) in WITNESS_VALUES.iter().filter(|r| r.0 == n) {
            let got = sectors.eval(p as f64, &w).unwrap();
            assert!(
                ((got.re - want) / want).abs() < 1e-11 && got.im.abs() < 1e-9,
                "N={n} p={p}: {got} vs {want}"
            );
            if n <= 5 {
                let c = oracle::compare_value(
                    got,
                    &lemmas::amplitude_specs(&ctx),
                    p,
                    &w,
                    &Budget::default(),
                );
                assert_eq!(c.verdict, Verdict::Pass, "N={n} p={p}: {:?}", c.note);
            }
        }
    }
}

/// `L0(T)`, `Z0(T)` at the positive test point and `Z1(T)` at its own point, `p = 3`.
const LEMMA_VALUES: [(u32, [f64; 3]); 3] = [
    (
        4,
        [0.6666666666666667, 0.5258732277275796, 1.0616405342607014],
    ),
    (
        5,
        [0.29834499911002943, 0.19324210866990826, 1.2332064406336174],
    ),
    (
        6,
        [0.06534641378787999, 0.05451241439780347, 1.6242587376783082],
    ),
];

#[test]
fn frozen_lemma_values() {
    for (n, [l0, z0, z1]) in LEMMA_VALUES {
        let mut e = Engine::new(n).unwrap();
        let ctx = e.ctx().clone();
        let t = ctx.t();
        let pos = positive_point(&ctx);
        let zp = z1_point(&ctx);
        let got = [
            e.l0(t).unwrap().eval(3.0, &pos).unwrap().re,
            e.z0(t).unwrap().eval(3.0, &pos).unwrap().re,
            e.z1(t).unwrap().eval(3.0, &zp).unwrap().re,
        ];
        for (g, w) in got.iter().zip([l0, z0, z1]) {
            assert!(((g - w) / w).abs() < 1e-11, "N={n}: {g} vs {w}");
        }
    }
}

#[test]
fn monte_carlo_examples() {
    let v = s(1, 2);
    let spec = IntegralSpec::new("|x|", vec![Domain::Zp])
        .with(FactorKind::AbsX(0), Exponent::form(LinearForm::var(v)));
    let e = mc_integral(&spec, 2, &at(&[(v, 1.0)]), 100_000, 20, 3).unwrap();
    assert!((e.value.re - 2.0 / 3.0).abs() <= 4.0 * e.stderr + e.bias_bound);
    let units = IntegralSpec::new("1", vec![Domain::Units, Domain::Units]);
    let e = mc_integral(&units, 3, &Assignment::new(), 10_000, 4, 3).unwrap();
    assert!((e.value.re - 4.0 / 9.0).abs() <= 4.0 * e.stderr + 1e-12);
}

#[test]
fn z1_sector_matches_inverted_integral() {
    let mut e = Engine::new(5).unwrap();
    let ctx = e.ctx().clone();
    let w = domain::to_assignment(&domain::witness_point(&ctx).unwrap());
    let sector = e
        .z1(ctx.t())
        .unwrap()
        .mul_term(&e.sector_exponent(IndexSet::EMPTY).unwrap());
    let c = oracle::compare(
        &sector,
        &[lemmas::sector_spec(&ctx, IndexSet::EMPTY)],
        3,
        &w,
        &Budget::default(),
    )
    .unwrap();
    assert_eq!(c.verdict, Verdict::Pass, "{:?}", c.note);
}
