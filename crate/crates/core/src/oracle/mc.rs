//! Stratified Monte Carlo over residues modulo `p^m`.
//!
//! Each coordinate is split by its distance to the centers of its `|z - c|`
//! atoms: shells `v(z - c) = k` for `1 ≤ k < m`, a residual ball
//! `v(z - c) ≥ m`, and the far part. Shells are sampled; the residual balls
//! are bounded analytically through the dominating product `∏_i g_i(z_i)`
//! with `g_i = ∏ |z_i - c|^{Re e}`, which is valid because every difference
//! atom is then required to have `Re e ≥ 0` and so is at most 1.
//!
//! Stratum `s` (in enumeration order) draws from `ChaCha8Rng` seeded with
//! `seed` on stream `s`, so results do not depend on thread scheduling.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::exact::g_factor;
use super::spec::{AtomKind, Base, Compiled, IntegralSpec};
use super::Estimate;
use crate::error::{Error, Result};
use crate::numeric::Neumaier;
use crate::symbolic::Assignment;

/// One coordinate's piece of a stratum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoordStratum {
    /// `v(z - c) = k`.
    Near { c: u64, k: u32 },
    /// `v(z - c) ≥ m`.
    Residual { c: u64 },
    /// Distance 1 from every center.
    Far,
    /// The whole domain (no centers on this coordinate).
    Whole,
}

/// A product of coordinate pieces with its exact measure.
#[derive(Debug, Clone)]
pub struct Stratum {
    pub parts: Vec<CoordStratum>,
    pub measure: BigRational,
}

impl Stratum {
    pub fn is_residual(&self) -> bool {
        self.parts
            .iter()
            .any(|c| matches!(c, CoordStratum::Residual { .. }))
    }
}

/// A level-`m` residue sample: `m` base-`p` digits per coordinate, least
/// significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PadicSample {
    pub digits: Vec<Vec<u8>>,
    pub level: u32,
}

impl PadicSample {
    pub fn from_residues(res: &[u64], p: u64, level: u32) -> Self {
        let digits = res
            .iter()
            .map(|&r| {
                let mut r = r;
                (0..level)
                    .map(|_| {
                        let d = (r % p) as u8;
                        r /= p;
                        d
                    })
                    .collect()
            })
            .collect();
        PadicSample { digits, level }
    }

    pub fn residues(&self, p: u64) -> Vec<u64> {
        self.digits
            .iter()
            .map(|ds| ds.iter().rev().fold(0u64, |acc, &d| acc * p + d as u64))
            .collect()
    }
}

struct Piece {
    kind: CoordStratum,
    measure: BigRational,
    /// `∫ g_i` over the piece.
    dominant: f64,
}

fn rat_pow(p: u64, k: u32) -> BigRational {
    BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(p), k as usize))
}

fn base_measure(b: Base, p: u64) -> BigRational {
    let inv = rat_pow(p, 1);
    match b {
        Base::Zp => BigRational::one(),
        Base::PZp => inv,
        Base::Units => BigRational::one() - inv,
    }
}

fn centers(c: &Compiled, i: usize, p: u64) -> Result<Vec<(u64, f64)>> {
    let mut out: Vec<(u64, f64)> = Vec::new();
    for a in &c.atoms {
        if let AtomKind::Lin { i: ai, c: center } = a.kind {
            if ai != i {
                continue;
            }
            let relevant = match c.bases[i] {
                Base::Zp => true,
                Base::PZp => center % p == 0,
                Base::Units => center % p != 0,
            };
            if relevant {
                if out.iter().any(|(o, _)| o % p == center % p) {
                    return Err(Error::UnsupportedSpec(
                        "two centers in one residue class".into(),
                    ));
                }
                out.push((center, a.e.re));
            }
        }
    }
    Ok(out)
}

fn pieces(c: &Compiled, i: usize, p: u64, m: u32) -> Result<Vec<Piece>> {
    let pf = p as f64;
    let cs = centers(c, i, p)?;
    let base = c.bases[i];
    if cs.is_empty() {
        return Ok(vec![Piece {
            kind: CoordStratum::Whole,
            measure: base_measure(base, p),
            dominant: base.measure(pf),
        }]);
    }
    let mut out = Vec::new();
    let one_minus = BigRational::one() - rat_pow(p, 1);
    for &(center, re) in &cs {
        for k in 1..m {
            out.push(Piece {
                kind: CoordStratum::Near { c: center, k },
                measure: rat_pow(p, k) * &one_minus,
                dominant: pf.powi(-(k as i32)) * (1.0 - 1.0 / pf) * pf.powf(-(k as f64) * re),
            });
        }
        let dominant = if re > -1.0 {
            pf.powf(-(m as f64) * (1.0 + re)) * g_factor(pf, re)
        } else {
            f64::INFINITY
        };
        out.push(Piece {
            kind: CoordStratum::Residual { c: center },
            measure: rat_pow(p, m),
            dominant,
        });
    }
    let far = base_measure(base, p) - BigRational::from_integer(cs.len().into()) * rat_pow(p, 1);
    if !far.is_zero() {
        out.push(Piece {
            kind: CoordStratum::Far,
            dominant: base.measure(pf) - cs.len() as f64 / pf,
            measure: far,
        });
    }
    Ok(out)
}

fn check_level(p: u64, m: u32) -> Result<u64> {
    if m == 0 {
        return Err(Error::UnsupportedSpec("level must be positive".into()));
    }
    p.checked_pow(m)
        .filter(|&q| q <= u64::MAX / p)
        .ok_or_else(|| Error::UnsupportedSpec(format!("p^m overflows at p={p}, m={m}")))
}

/// Every stratum, residual ones included, with exact measures.
pub fn stratification(spec: &IntegralSpec, p: u64, m: u32) -> Result<Vec<Stratum>> {
    let c = Compiled::new(spec, &neutral_assignment(spec))?;
    check_level(p, m)?;
    let per: Vec<Vec<Piece>> = (0..c.n())
        .map(|i| pieces(&c, i, p, m))
        .collect::<Result<_>>()?;
    let mut out = vec![Stratum {
        parts: Vec::new(),
        measure: BigRational::one(),
    }];
    for ps in &per {
        out = out
            .into_iter()
            .flat_map(|s| {
                ps.iter().map(move |pc| {
                    let mut parts = s.parts.clone();
                    parts.push(pc.kind);
                    Stratum {
                        parts,
                        measure: &s.measure * &pc.measure,
                    }
                })
            })
            .collect();
    }
    Ok(out)
}

/// Every variable of the spec set to 1, so that no exponent vanishes by accident.
fn neutral_assignment(spec: &IntegralSpec) -> Assignment {
    spec.factors
        .iter()
        .flat_map(|(_, e)| e.form.vars().collect::<Vec<_>>())
        .map(|v| (v, Complex64::new(1.0, 0.0)))
        .collect()
}

fn val(mut x: u64, p: u64) -> u32 {
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

fn draw<R: Rng>(
    rng: &mut R,
    piece: CoordStratum,
    base: Base,
    centers: &[u64],
    p: u64,
    pm: u64,
) -> u64 {
    match piece {
        CoordStratum::Near { c, k } => {
            let pk = p.pow(k);
            let span = pm / pk;
            loop {
                let u = rng.gen_range(0..span);
                if u % p != 0 {
                    return (c % pm + pk * u) % pm;
                }
            }
        }
        CoordStratum::Far | CoordStratum::Whole => loop {
            let z = match base {
                Base::PZp => p * rng.gen_range(0..pm / p),
                _ => rng.gen_range(0..pm),
            };
            if base == Base::Units && z % p == 0 {
                continue;
            }
            if centers.iter().any(|c| c % p == z % p) {
                continue;
            }
            return z;
        },
        CoordStratum::Residual { .. } => unreachable!("residual strata are not sampled"),
    }
}

struct StratumResult {
    sum: Complex64,
    var: f64,
    bias: f64,
    events: u64,
    n: u64,
}

/// Estimate the integral with about `samples` draws at resolution `p^m`.
pub fn mc_integral(
    spec: &IntegralSpec,
    p: u64,
    assign: &Assignment,
    samples: u64,
    m: u32,
    seed: u64,
) -> Result<Estimate> {
    let c = Compiled::new(spec, assign)?;
    let pm = check_level(p, m)?;
    let pf = p as f64;
    let lnp = pf.ln();
    let n = c.n();
    let per: Vec<Vec<Piece>> = (0..n).map(|i| pieces(&c, i, p, m)).collect::<Result<_>>()?;
    let center_lists: Vec<Vec<u64>> = (0..n)
        .map(|i| centers(&c, i, p).map(|v| v.into_iter().map(|(c, _)| c).collect()))
        .collect::<Result<_>>()?;

    // Residual bias: ∏ total_i - ∏ sampled_i, telescoped.
    let totals: Vec<f64> = per
        .iter()
        .map(|ps| ps.iter().map(|q| q.dominant).sum())
        .collect();
    let sampled: Vec<f64> = per
        .iter()
        .map(|ps| {
            ps.iter()
                .filter(|q| !matches!(q.kind, CoordStratum::Residual { .. }))
                .map(|q| q.dominant)
                .sum()
        })
        .collect();
    let mut residual_bias = 0.0;
    for i in 0..n {
        let left: f64 = sampled[..i].iter().product();
        let right: f64 = totals[i + 1..].iter().product();
        residual_bias += left * (totals[i] - sampled[i]) * right;
    }
    let negative_diff = c
        .atoms
        .iter()
        .any(|a| matches!(a.kind, AtomKind::Diff { .. }) && a.e.re < 0.0);
    if negative_diff {
        residual_bias = f64::INFINITY;
    }

    // Sampled strata in a fixed order.
    let mut strata: Vec<(Vec<usize>, f64, f64)> = vec![(Vec::new(), 1.0, 1.0)];
    for ps in &per {
        let keep: Vec<usize> = (0..ps.len())
            .filter(|&j| !matches!(ps[j].kind, CoordStratum::Residual { .. }))
            .collect();
        strata = strata
            .into_iter()
            .flat_map(|(idx, mu, w)| {
                keep.iter().map(move |&j| {
                    let mut idx = idx.clone();
                    idx.push(j);
                    (idx, mu, w)
                })
            })
            .collect();
    }
    for (idx, mu, w) in strata.iter_mut() {
        for (i, &j) in idx.iter().enumerate() {
            let q = &per[i][j];
            *mu *= num_traits::ToPrimitive::to_f64(&q.measure).unwrap_or(0.0);
            *w *= q.dominant;
        }
    }
    let total_w: f64 = strata.iter().map(|s| s.2).sum();

    let results: Vec<StratumResult> = strata
        .par_iter()
        .enumerate()
        .map(|(s_idx, (idx, mu, w))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s_idx as u64);
            let share = if total_w > 0.0 { w / total_w } else { 0.0 };
            let count = ((samples as f64 * share).round() as u64).max(2);
            let parts: Vec<CoordStratum> = idx
                .iter()
                .enumerate()
                .map(|(i, &j)| per[i][j].kind)
                .collect();
            let mut z = vec![0u64; n];
            let mut sum = Neumaier::default();
            let mut sq = 0.0;
            let mut values = Vec::with_capacity(count as usize);
            let mut bias = 0.0;
            let mut events = 0;
            for _ in 0..count {
                for i in 0..n {
                    z[i] = draw(&mut rng, parts[i], c.bases[i], &center_lists[i], p, pm);
                }
                let mut expo = Complex64::new(0.0, 0.0);
                let mut unresolved_re = 0.0;
                let mut unresolved = false;
                for a in &c.atoms {
                    let v = match a.kind {
                        AtomKind::Lin { i, c: center } => match parts[i] {
                            CoordStratum::Near { c: c0, k } if c0 == center => k,
                            _ => 0,
                        },
                        AtomKind::Diff { i, j } => {
                            let d = (z[i] + pm - z[j]) % pm;
                            if d == 0 {
                                unresolved = true;
                                unresolved_re += m as f64 * a.e.re;
                                continue;
                            }
                            val(d, p)
                        }
                    };
                    expo -= a.e * v as f64;
                }
                if unresolved {
                    events += 1;
                    bias += mu / count as f64 * ((expo.re - unresolved_re) * lnp).exp();
                    values.push(Complex64::new(0.0, 0.0));
                    continue;
                }
                let f = (expo * lnp).exp();
                sum.add(f);
                values.push(f);
            }
            let mean = sum.sum() / count as f64;
            for v in &values {
                sq += (v - mean).norm_sqr();
            }
            let var = if count > 1 {
                sq / (count - 1) as f64
            } else {
                0.0
            };
            StratumResult {
                sum: mean * *mu,
                var: mu * mu * var / count as f64,
                bias,
                events,
                n: count,
            }
        })
        .collect();

    let mut value = Neumaier::default();
    let mut var = 0.0;
    let mut bias = residual_bias;
    let mut events = 0;
    let mut drawn = 0;
    for r in &results {
        value.add(r.sum);
        var += r.var;
        bias += r.bias;
        events += r.events;
        drawn += r.n;
    }
    Ok(Estimate {
        value: value.sum(),
        stderr: var.sqrt(),
        bias_bound: bias,
        samples: drawn,
        bias_events: events,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::spec::{Domain, Exponent, FactorKind};
    use crate::symbolic::{LinearForm, SVar};

    fn s() -> SVar {
        SVar::raw(1, 2)
    }

    fn at(x: f64) -> Assignment {
        [(s(), Complex64::new(x, 0.0))].into_iter().collect()
    }

    #[test]
    fn sample_digits_roundtrip() {
        let r = vec![0, 7, 80];
        let s = PadicSample::from_residues(&r, 3, 5);
        assert_eq!(s.digits[1], vec![1, 2, 0, 0, 0]);
        assert_eq!(s.residues(3), r);
    }

    #[test]
    fn units_square_measure() {
        let spec = IntegralSpec::new("1", vec![Domain::Units, Domain::Units]);
        let e = mc_integral(&spec, 3, &Assignment::new(), 1000, 6, 1).unwrap();
        assert!((e.value.re - 4.0 / 9.0).abs() < 1e-12);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn abs_x_within_four_sigma() {
        let spec = IntegralSpec::new("|x|^s", vec![Domain::Zp])
            .with(FactorKind::AbsX(0), Exponent::form(LinearForm::var(s())));
        let e = mc_integral(&spec, 2, &at(1.0), 100_000, 20, 9).unwrap();
        let d = (e.value.re - 2.0 / 3.0).abs();
        assert!(d <= 4.0 * e.stderr + e.bias_bound + 1e-12, "{e:?}");
        assert!(e.bias_bound < 1e-6);
    }

    #[test]
    fn deterministic() {
        let spec = IntegralSpec::new("|x-y|^s", vec![Domain::Zp, Domain::Zp]).with(
            FactorKind::AbsDiff(0, 1),
            Exponent::form(LinearForm::var(s())),
        );
        let a = mc_integral(&spec, 3, &at(0.5), 5000, 8, 42).unwrap();
        let b = mc_integral(&spec, 3, &at(0.5), 5000, 8, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn negative_difference_has_infinite_bias() {
        let spec = IntegralSpec::new("|x-y|^s", vec![Domain::Zp, Domain::Zp]).with(
            FactorKind::AbsDiff(0, 1),
            Exponent::form(LinearForm::var(s())),
        );
        let e = mc_integral(&spec, 3, &at(-0.5), 1000, 8, 42).unwrap();
        assert!(e.bias_bound.is_infinite());
    }
}
