use std::collections::BTreeMap;

use num_complex::Complex64;

use super::modular::ModPoint;
use super::precise::{Cdd, Evaluator};
use super::{Assignment, DenFactor, DenKey, RationalFn};
use crate::error::{Error, Result};

/// Unexpanded sum of rational functions.
///
/// Bringing many parts over a common denominator can cost far more than the
/// parts themselves (the `N = 6` amplitude is the first case where it does),
/// so the sum is kept as a list. Evaluation and the reduced denominator are
/// available without expanding.
#[derive(Debug, Clone, Default)]
pub struct LazySum {
    /// Parts grouped by identical denominator.
    groups: Vec<RationalFn>,
}

impl LazySum {
    pub fn new<I: IntoIterator<Item = RationalFn>>(parts: I) -> Self {
        let mut by_den: BTreeMap<Vec<DenFactor>, Vec<RationalFn>> = BTreeMap::new();
        for x in parts {
            if !x.is_zero() {
                by_den.entry(x.den().collect()).or_default().push(x);
            }
        }
        let groups = by_den
            .into_values()
            .map(RationalFn::sum)
            .filter(|x| !x.is_zero())
            .collect();
        LazySum { groups }
    }

    pub fn parts(&self) -> &[RationalFn] {
        &self.groups
    }

    pub fn eval(&self, p: f64, assign: &Assignment) -> Result<Complex64> {
        let mut ev = Evaluator::new(p, assign);
        let mut acc: Option<Cdd> = None;
        for g in &self.groups {
            let v = g.eval_with(&mut ev)?;
            acc = Some(match acc {
                Some(a) => a.add(v),
                None => v,
            });
        }
        Ok(acc.map(Cdd::to_c64).unwrap_or_default())
    }

    fn lub(&self) -> BTreeMap<DenKey, u32> {
        let mut lub = BTreeMap::new();
        for g in &self.groups {
            for d in g.den() {
                let e = lub
                    .entry(DenKey {
                        form: d.form,
                        a: d.a,
                    })
                    .or_insert(0);
                *e = (*e).max(d.multiplicity);
            }
        }
        lub
    }

    /// Denominator of the reduced sum.
    ///
    /// A factor `f` of multiplicity `m` in the common denominator loses one
    /// order when the coefficient of `f^{-m}` vanishes on `f = 1`; that is
    /// tested at random points of the hypersurface modulo a large prime.
    /// Factors the test cannot handle (no unit pivot, or not primitive) are
    /// kept, and a vanishing top coefficient lowers the order by exactly one,
    /// so the result always contains the true denominator.
    pub fn denominator(&self) -> Vec<DenFactor> {
        if self.groups.len() == 1 {
            return self.groups[0].den().collect();
        }
        let lub = self.lub();
        let dens: Vec<BTreeMap<DenKey, u32>> = self
            .groups
            .iter()
            .map(|g| {
                g.den()
                    .map(|d| {
                        (
                            DenKey {
                                form: d.form,
                                a: d.a,
                            },
                            d.multiplicity,
                        )
                    })
                    .collect()
            })
            .collect();
        let mut out = Vec::new();
        for (f, &m) in &lub {
            let cancels = f.is_primitive() && self.top_coefficient_vanishes(f, m, &lub, &dens);
            let mult = if cancels { m - 1 } else { m };
            if mult > 0 {
                out.push(DenFactor {
                    a: f.a,
                    form: f.form.clone(),
                    multiplicity: mult,
                });
            }
        }
        out
    }

    fn top_coefficient_vanishes(
        &self,
        f: &DenKey,
        m: u32,
        lub: &BTreeMap<DenKey, u32>,
        dens: &[BTreeMap<DenKey, u32>],
    ) -> bool {
        let mut tested = 0;
        for seed in 0..8u64 {
            let Some(mut pt) = ModPoint::on_hypersurface(f.a, &f.form, 0xD0_0000 + seed) else {
                return false;
            };
            let mut acc = 0u64;
            let mut degenerate = false;
            for (g, den) in self.groups.iter().zip(dens) {
                if den.get(f).copied().unwrap_or(0) != m {
                    continue;
                }
                let Some(mut v) = pt.poly(g.num()) else {
                    degenerate = true;
                    break;
                };
                for (h, &mh) in lub {
                    if h == f {
                        continue;
                    }
                    let hv = pt.one_minus(h.a, &h.form);
                    if hv == 0 {
                        degenerate = true;
                        break;
                    }
                    for _ in den.get(h).copied().unwrap_or(0)..mh {
                        v = ModPoint::mul(v, hv);
                    }
                }
                if degenerate {
                    break;
                }
                acc = ModPoint::add(acc, v);
            }
            if degenerate {
                continue;
            }
            if acc != 0 {
                return false;
            }
            tested += 1;
            if tested == 2 {
                return true;
            }
        }
        false
    }

    /// Upper bound on the numerator size after bringing every part over the
    /// common denominator.
    pub fn expanded_size_bound(&self) -> u128 {
        let lub = self.lub();
        let total: u32 = lub.values().sum();
        self.groups
            .iter()
            .map(|g| {
                let own: u32 = g.den().map(|d| d.multiplicity).sum();
                (g.num().len() as u128) << (total - own).min(100)
            })
            .sum()
    }

    /// Expand into one reduced rational function. With a budget, refuses when
    /// [`LazySum::expanded_size_bound`] exceeds it.
    pub fn expand(&self, budget: Option<u64>) -> Result<RationalFn> {
        if let Some(b) = budget {
            if self.expanded_size_bound() > b as u128 {
                return Err(Error::BudgetExceeded(b));
            }
        }
        Ok(RationalFn::sum(self.groups.iter().cloned()))
    }

    pub fn num_terms(&self) -> usize {
        self.groups.iter().map(|g| g.num().len()).sum()
    }
}

impl From<RationalFn> for LazySum {
    fn from(x: RationalFn) -> Self {
        LazySum::new([x])
    }
}
