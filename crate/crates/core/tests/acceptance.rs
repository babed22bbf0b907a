//! Acceptance suite. Prints one PASS/FAIL line per criterion, with the
//! evidence underneath, then fails the test if any criterion fails for a
//! reason other than the one documented as unattainable (the divergent
//! oracle point of criterion 1).

use std::collections::{BTreeSet, HashMap};
use std::time::Instant;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use knzeta::combinatorics::CoincidencePattern;
use knzeta::domain::{self, ConditionFamily};
use knzeta::oracle::{self, lemmas, Budget, Domain, IntegralSpec, Verdict};
use knzeta::verify::{count_check, run_suite, uniform_point, SuiteConfig};
use knzeta::{
    base_z_f, AmplitudeContext, Assignment, DenFactor, Endpoint, Engine, IndexSet, LinearForm,
    PrimeLaurent, RationalFn, SVar, Term,
};

struct Criterion {
    id: u32,
    title: &'static str,
    lines: Vec<String>,
    failed: bool,
    /// Set by failures other than [`Criterion::unattainable`] ones.
    unexpected: bool,
}

impl Criterion {
    fn new(id: u32, title: &'static str) -> Self {
        Criterion {
            id,
            title,
            lines: Vec::new(),
            failed: false,
            unexpected: false,
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        let what = what.into();
        self.lines
            .push(format!("    [{}] {what}", if ok { "ok" } else { "FAIL" }));
        self.failed |= !ok;
        self.unexpected |= !ok;
    }

    /// A failure that cannot be turned into a pass; it still prints FAIL.
    fn unattainable(&mut self, what: impl Into<String>) {
        self.lines.push(format!("    [FAIL] {}", what.into()));
        self.failed = true;
    }

    fn note(&mut self, what: impl Into<String>) {
        self.lines.push(format!("    {}", what.into()));
    }

    fn print(&self) {
        println!(
            "criterion {:>2}: {} {}",
            self.id,
            if self.failed { "FAIL" } else { "PASS" },
            self.title
        );
        for l in &self.lines {
            println!("{l}");
        }
    }
}

fn set(v: &[u32]) -> IndexSet {
    v.iter().copied().collect()
}

fn real_point(ctx: &AmplitudeContext, x: f64) -> Assignment {
    ctx.vars()
        .into_iter()
        .map(|v| (v, Complex64::new(x, 0.0)))
        .collect()
}

fn den_set(f: &RationalFn) -> BTreeSet<String> {
    f.den().map(|d| d.to_string()).collect()
}

fn criterion_1() -> Criterion {
    let mut c = Criterion::new(1, "N=4 closed form and end-to-end oracle");
    let mut e = Engine::new(4).unwrap();
    let ctx = e.ctx().clone();
    let z = e.zn().unwrap();
    let (a, b) = (LinearForm::var(ctx.s1(2)), LinearForm::var(ctx.slast(2)));
    let want: BTreeSet<String> = [
        RationalFn::one().div_one_minus(-1, &-a.clone()),
        RationalFn::one().div_one_minus(-1, &-b.clone()),
        RationalFn::one().div_one_minus(1, &(&a + &b)),
    ]
    .iter()
    .flat_map(den_set)
    .collect();
    c.check(
        den_set(&z) == want,
        format!("denominator factors {:?}", den_set(&z)),
    );

    let specs = lemmas::amplitude_specs(&ctx);
    let budget = Budget {
        samples: 1_000_000,
        ..Budget::default()
    };
    let at = real_point(&ctx, -0.4);
    let mut diverges = false;
    for p in [2u64, 3] {
        let start = Instant::now();
        let v = z.eval(p as f64, &at).unwrap();
        let cmp = oracle::compare_value(v, &specs, p, &at, &budget);
        let ok = cmp.verdict == Verdict::Pass;
        let line = format!(
            "p={p}, s=-0.4: symbolic {:.10} vs oracle {} ({:.2?}){}",
            v.re,
            cmp.estimate
                .as_ref()
                .map_or("none".to_string(), |e| format!("{:.10}", e.value.re)),
            start.elapsed(),
            cmp.note
                .as_deref()
                .map_or(String::new(), |n| format!(": {n}")),
        );
        if ok {
            c.check(true, line);
        } else {
            // The inverted sector behaves like ∫_{|x|>1} |x|^{a+b} dx, which
            // needs a + b < -1. At a = b = -0.4 the partial integrals grow.
            let probe =
                oracle::divergence_probe(&lemmas::amplitude_qp_spec(&ctx), p, &at, 6, 20).unwrap();
            let growth: Vec<String> = probe.iter().map(|s| format!("{:.4}", s.value.re)).collect();
            let increasing = probe.windows(2).all(|w| w[1].value.re > w[0].value.re);
            if increasing {
                c.unattainable(line);
                diverges = true;
            } else {
                c.check(false, line);
            }
            c.note(format!(
                "  partial integrals over B_1..B_6 at p={p}: {}",
                growth.join(", ")
            ));
        }
    }
    // The same comparison where every sector converges.
    let w = domain::to_assignment(&domain::witness_point(&ctx).unwrap());
    for p in [2u64, 3] {
        let v = z.eval(p as f64, &w).unwrap();
        let cmp = oracle::compare_value(v, &specs, p, &w, &budget);
        c.check(
            cmp.verdict == Verdict::Pass,
            format!(
                "p={p}, witness s=-7/12: symbolic {:.10}, deviation {:.2e} <= {:.2e}",
                v.re,
                cmp.deviation(),
                cmp.tolerance()
            ),
        );
    }
    if diverges {
        c.note("s=-0.4 lies outside the convergence region (1 + s_1_2 + s_3_2 > 0): the integral diverges");
        c.note("there, so no oracle can confirm the continued value; this part is unattainable as stated.");
    }
    c
}

fn criterion_2() -> Criterion {
    let mut c = Criterion::new(2, "two-variable base integral");
    let (s1, s2, s3) = (SVar::raw(1, 2), SVar::raw(1, 3), SVar::raw(2, 3));
    let f = |v: Option<SVar>| v.map(LinearForm::var).unwrap_or_default();
    let omp = || RationalFn::from_laurent(PrimeLaurent::one_minus_p_pow(-1));
    // Assembled piece by piece from the residue decomposition.
    let piece = |s: Option<SVar>| {
        omp()
            .mul(&omp())
            .mul_term(&Term::p_pow(-1, -f(s)))
            .div_one_minus(-1, &-f(s))
    };
    let z03 = RationalFn::from_laurent(PrimeLaurent::p_minus(1) * PrimeLaurent::p_minus(2))
        .mul_term(&Term::p_pow(-2, LinearForm::zero()))
        .add(
            &omp()
                .mul_term(&Term::new(PrimeLaurent::p_minus(1), LinearForm::zero()))
                .mul_term(&Term::p_pow(-2, -f(Some(s3))))
                .div_one_minus(-1, &-f(Some(s3))),
        );
    for (a, b) in [
        (Some(s1), Some(s2)),
        (None, Some(s2)),
        (Some(s1), None),
        (None, None),
    ] {
        let total = &(&f(a) + &f(b)) + &f(Some(s3));
        let want = piece(a)
            .add(&piece(b))
            .add(&z03)
            .div_one_minus(-2, &-total)
            .reduced();
        let got = base_z_f(a, b, s3).reduced();
        c.check(
            got == want,
            format!(
                "Z({:?}, {:?}, s3) matches the assembled pieces",
                a.is_some(),
                b.is_some()
            ),
        );
    }
    let z00 = base_z_f(None, None, s3).reduced();
    let dens: Vec<DenFactor> = z00.den().collect();
    let expect = RationalFn::one().div_one_minus(-1, &-f(Some(s3)));
    c.check(
        den_set(&z00) == den_set(&expect),
        format!("Z(0,0,s) denominator {:?}", den_set(&z00)),
    );
    c.check(dens.len() == 1, "exactly one denominator factor");
    let closed = omp().div_one_minus(-1, &-f(Some(s3)));
    c.check(z00 == closed.reduced(), "Z(0,0,s) = (1-p^-1)/(1-p^(-1-s))");
    // Oracle cross-checks.
    let budget = Budget::default();
    let mut assign: Assignment = HashMap::new();
    assign.insert(s3, Complex64::new(1.0, 0.0));
    let cmp = oracle::compare(
        &z00,
        &[lemmas::base_z_spec(None, None, s3)],
        2,
        &assign,
        &budget,
    )
    .unwrap();
    c.check(
        cmp.verdict == Verdict::Pass && (cmp.symbolic.re - 2.0 / 3.0).abs() < 1e-12,
        format!(
            "p=2, s=1: {:.12} vs oracle, deviation {:.1e}",
            cmp.symbolic.re,
            cmp.deviation()
        ),
    );
    let mut assign: Assignment = HashMap::new();
    for (v, x) in [(s1, -0.3), (s2, 0.7), (s3, -0.45)] {
        assign.insert(v, Complex64::new(x, 0.2));
    }
    for p in [2u64, 3, 5] {
        let cmp = oracle::compare(
            &base_z_f(Some(s1), Some(s2), s3),
            &[lemmas::base_z_spec(Some(s1), Some(s2), s3)],
            p,
            &assign,
            &budget,
        )
        .unwrap();
        c.check(
            cmp.verdict == Verdict::Pass,
            format!(
                "p={p}, complex point: deviation {:.1e} <= {:.1e}",
                cmp.deviation(),
                cmp.tolerance()
            ),
        );
    }
    c
}

fn criterion_3() -> Criterion {
    let mut c = Criterion::new(3, "per-lemma oracle agreement");
    let start = Instant::now();
    let lemma = |name: &str| {
        ["L0", "L1", "L2", "M1", "Z0", "Z1"]
            .iter()
            .any(|l| name.starts_with(l))
    };
    for n in [4u32, 5] {
        let report = run_suite(&SuiteConfig::new(n, vec![2, 3, 5])).unwrap();
        let checks: Vec<_> = report
            .checks
            .iter()
            .filter(|r| lemma(&r.spec) && !r.spec.contains("alternative"))
            .collect();
        let bad: Vec<String> = checks
            .iter()
            .filter(|r| r.verdict != Verdict::Pass)
            .map(|r| format!("{} p={}: dev {:.2e}", r.spec, r.p, r.deviation()))
            .collect();
        let families: BTreeSet<&str> = checks.iter().map(|r| &r.spec[..2]).collect();
        c.check(
            // L1 needs two inner points, so N=4 has five families.
            bad.is_empty() && families.len() == if n == 4 { 5 } else { 6 },
            format!(
                "N={n}, p in {{2,3,5}}: {} checks over {:?}{}",
                checks.len(),
                families,
                if bad.is_empty() {
                    String::new()
                } else {
                    format!("; failing {bad:?}")
                }
            ),
        );
    }
    // |J| = 3 needs three inner points, which first happens at N = 6.
    let mut e = Engine::new(6).unwrap();
    let ctx = e.ctx().clone();
    let j = ctx.t();
    let at = knzeta::verify::positive_point(&ctx);
    for p in [2u64, 3, 5] {
        for (name, f, spec) in [
            ("L0", e.l0(j).unwrap(), lemmas::l0_spec(&ctx, j)),
            ("L1", e.l1(j).unwrap(), lemmas::l1_spec(&ctx, j)),
        ] {
            let cmp = oracle::compare(&f, &[spec], p, &at, &Budget::default()).unwrap();
            c.check(
                cmp.verdict == Verdict::Pass,
                format!(
                    "N=6 {name}{j} p={p}: deviation {:.1e} <= {:.1e}",
                    cmp.deviation(),
                    cmp.tolerance()
                ),
            );
        }
    }
    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 600.0, format!("runtime {secs:.1} s"));
    c
}

fn criterion_4() -> Criterion {
    let mut c = Criterion::new(4, "combinatorial completeness");
    for p in [3u64, 5, 7] {
        for size in 1..=4 {
            let r = count_check(p, size);
            c.check(
                r.verdict == Verdict::Pass,
                format!(
                    "p={p}, |J|={size}: {} tuples, {} classes{}",
                    r.tuples,
                    r.classes,
                    r.note.map_or(String::new(), |n| format!(": {n}"))
                ),
            );
        }
    }
    c
}

fn criterion_5() -> Criterion {
    let mut c = Criterion::new(5, "degeneration and factorization identities");
    let mut e = Engine::new(6).unwrap();
    let t = e.ctx().t();
    for i in t.subsets().filter(|i| (2..=3).contains(&i.len())) {
        let l1 = e.l1(i).unwrap().reduced();
        for tt in [Endpoint::First, Endpoint::Last] {
            let l2 = e.l2(i, IndexSet::EMPTY, tt).unwrap().reduced();
            c.check(l2 == l1, format!("L2({i}, {{}}, {tt:?}) = L1({i})"));
        }
    }
    let mut e = Engine::new(8).unwrap();
    let j = IndexSet::range(2, 6);
    let pat = CoincidencePattern::of_tuple(j, &[1, 2, 1, 2, 2]);
    let blocks = pat.blocks();
    c.check(
        blocks == vec![set(&[2, 4]), set(&[3, 5, 6])],
        format!("blocks of (1,2,1,2,2): {} and {}", blocks[0], blocks[1]),
    );
    let lhs = e.l1_pattern(&pat).unwrap();
    let rhs = e
        .l1(set(&[2, 4]))
        .unwrap()
        .mul(&e.l1(set(&[3, 5, 6])).unwrap());
    let one = uniform_point(e.ctx(), 1.0);
    let (x, y) = (lhs.eval(3.0, &one).unwrap(), rhs.eval(3.0, &one).unwrap());
    let rel = (x - y).norm() / y.norm();
    c.check(
        rel <= 1e-10,
        format!(
            "L1_pattern = product of block factors at p=3, s=1: {:.12} vs {:.12} (rel {rel:.1e})",
            x.re, y.re
        ),
    );
    c
}

fn criterion_6() -> Criterion {
    let mut c = Criterion::new(6, "Z0 at s = 0");
    for n in [4u32, 5, 6] {
        let mut e = Engine::new(n).unwrap();
        let zero: HashMap<SVar, i64> = e.ctx().vars().into_iter().map(|v| (v, 0)).collect();
        let mut bad = Vec::new();
        let mut count = 0;
        for i in e.ctx().t().subsets() {
            count += 1;
            let z = e.z0(i).unwrap().substitute_int(&zero).unwrap();
            if z.as_constant().is_none_or(|k| !k.is_one()) {
                bad.push(i.to_string());
            }
        }
        c.check(
            bad.is_empty(),
            format!(
                "N={n}: Z0(0; I) = 1 for all {count} subsets I{}",
                if bad.is_empty() {
                    String::new()
                } else {
                    format!("; not for {bad:?}")
                }
            ),
        );
    }
    c
}

fn criterion_7() -> Criterion {
    let mut c = Criterion::new(7, "convergence domain");
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in [4u32, 5, 6] {
        let mut e = Engine::new(n).unwrap();
        let ctx = e.ctx().clone();
        let conds = domain::c_primed(&ctx);
        let w = domain::witness_point(&ctx).unwrap();
        let wa = domain::to_assignment(&w);
        let r = domain::check_point(&conds, &wa).unwrap();
        c.check(
            r.passed(),
            format!("N={n}: witness passes {} C' conditions", r.checked),
        );
        let mut interior = true;
        for v in ctx.vars() {
            for d in [-0.01, 0.01] {
                let mut a = wa.clone();
                *a.get_mut(&v).unwrap() += d;
                interior &= domain::check_point(&conds, &a).unwrap().passed();
            }
        }
        c.check(
            interior,
            format!("N={n}: witness stays feasible under ±1/100 moves"),
        );
        let poles =
            domain::convergence_conditions(&mut e, ConditionFamily::FromDenominators).unwrap();
        let mut inside = 0;
        let mut feasible = Vec::new();
        for _ in 0..100 {
            let a = domain::box_sample(&ctx, &mut rng);
            if domain::check_point(&poles, &a).unwrap().passed() {
                inside += 1;
            }
            if domain::check_point(&conds, &a).unwrap().passed() {
                feasible.push(a);
            }
        }
        c.check(
            inside == 100,
            format!(
                "N={n}: {inside}/100 box points satisfy all {} denominator conditions",
                poles.len()
            ),
        );
        while feasible.len() < 101 {
            let a = domain::box_sample(&ctx, &mut rng);
            if domain::check_point(&conds, &a).unwrap().passed() {
                feasible.push(a);
            }
        }
        let mut mid_ok = 0;
        for k in 0..100 {
            let (x, y) = (&feasible[k], &feasible[k + 1]);
            let m: Assignment = x.iter().map(|(v, z)| (*v, (z + y[v]) / 2.0)).collect();
            if domain::check_point(&conds, &m).unwrap().passed() {
                mid_ok += 1;
            }
        }
        c.check(
            mid_ok == 100,
            format!("N={n}: {mid_ok}/100 midpoints of feasible pairs are feasible"),
        );
    }
    c
}

fn criterion_8() -> Criterion {
    let mut c = Criterion::new(8, "divergence at s = 0");
    let ctx = AmplitudeContext::new(4).unwrap();
    let steps = oracle::divergence_probe(
        &lemmas::amplitude_qp_spec(&ctx),
        2,
        &real_point(&ctx, 0.0),
        6,
        4,
    )
    .unwrap();
    let vals: Vec<f64> = steps.iter().map(|s| s.value.re).collect();
    let increasing = vals.windows(2).all(|w| w[1] > w[0]);
    c.check(
        increasing,
        format!("Z^(4) partial integrals at p=2, m=1..6: {vals:?}"),
    );
    let single = IntegralSpec::new("I(0)", vec![Domain::Qp]);
    let steps = oracle::divergence_probe(&single, 2, &Assignment::new(), 6, 0).unwrap();
    let exact = steps.iter().all(|s| {
        s.value.re == 2f64.powi(s.level as i32)
            || (s.value.re - 2f64.powi(s.level as i32)).abs() < 1e-12
    });
    c.check(
        exact,
        format!(
            "∫_(B_m) dx at p=2: {:?}",
            steps.iter().map(|s| s.value.re).collect::<Vec<_>>()
        ),
    );
    c
}

fn criterion_9() -> Criterion {
    let mut c = Criterion::new(9, "pole-shape audit");
    for n in [4u32, 5, 6] {
        let mut e = Engine::new(n).unwrap();
        let dens = e.zn_sectors().unwrap().denominator();
        let shapes = domain::pole_shapes(e.ctx());
        let hs = domain::hyperplanes_of(&dens);
        let unmatched: Vec<String> = hs
            .iter()
            .filter(|h| domain::classify_pole(&shapes, h).is_empty())
            .map(|h| h.to_string())
            .collect();
        c.check(
            unmatched.is_empty(),
            format!(
                "N={n}: {} hyperplanes, all of an admissible shape{}",
                hs.len(),
                if unmatched.is_empty() {
                    String::new()
                } else {
                    format!("; unmatched {unmatched:?}")
                }
            ),
        );
        if n == 4 {
            c.check(hs.len() == 3, "N=4 has exactly three hyperplanes");
        }
    }
    c
}

fn criterion_10() -> Criterion {
    let mut c = Criterion::new(10, "one-variable M1 value");
    let report = run_suite(&SuiteConfig::new(4, vec![3])).unwrap();
    let find = |s: &str| report.checks.iter().find(|r| r.spec == s).cloned();
    let engine = find("M1{2} at s=1").expect("engine M1 recorded");
    let alt = find("M1{2} alternative form at s=1").expect("alternative M1 recorded");
    let oracle = engine.estimate.unwrap()[0];
    c.check(
        engine.verdict == Verdict::Pass && (engine.symbolic[0] - 5.0 / 12.0).abs() < 1e-12,
        format!(
            "engine M1 = {:.12} (5/12), oracle {oracle:.12}: {}",
            engine.symbolic[0],
            engine.verdict.as_str()
        ),
    );
    c.check(
        alt.verdict == Verdict::Refuted && (alt.symbolic[0] - 7.0 / 12.0).abs() < 1e-12,
        format!(
            "alternative value {:.12} (7/12): {}",
            alt.symbolic[0],
            alt.verdict.as_str()
        ),
    );
    c.check(
        (oracle - 5.0 / 12.0).abs() < 1e-6,
        "oracle decides for 5/12",
    );
    c
}

#[test]
fn acceptance() {
    let runs: [fn() -> Criterion; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut unexpected = Vec::new();
    for run in runs {
        let start = Instant::now();
        let c = run();
        c.print();
        println!("    ({:.2?})", start.elapsed());
        if c.unexpected {
            unexpected.push(c.id);
        }
    }
    assert!(unexpected.is_empty(), "criteria failed: {unexpected:?}");
}
