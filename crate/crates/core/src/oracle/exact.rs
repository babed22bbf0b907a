//! Exact summation over residue cells.
//!
//! A cell is a product of balls `a_i + p^{k_i} Z_p`. An atom is resolved on a
//! cell when its valuation is constant there; a cell with every atom resolved
//! contributes `p^{-Σk} ∏ p^{-v e}` exactly. Unresolved cells are refined by
//! splitting one coordinate, and whatever is left at the depth limit is
//! bounded from above.
//!
//! In adaptive mode self-similar cells are summed in closed form. Call a cell
//! homogeneous when the coordinates `G` of its unresolved atoms share one
//! ball `B = x0 + p^k Z_p`, every unresolved `|z_i - c|` has `c = x0`, and the
//! rest are differences within `G`. Then `z ↦ x0 + p(z - x0)` maps the cell
//! onto its child at `x0 + p^{k+1} Z_p` and scales the integral by
//! `λ = p^{-|G| - Σe}`, so `V = V_others + λ V`. Without linear atoms every
//! diagonal child is a translate of that one and `V = V_others + pλ V`.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::spec::{AtomKind, Base, Compiled, IntegralSpec};
use crate::error::{Error, Result};
use crate::numeric::Neumaier;
use crate::symbolic::Assignment;

/// Default cap on visited cells.
pub const MAX_CELLS: u64 = 20_000_000;

/// Partial sum over resolved cells with a bound on the rest.
#[derive(Debug, Clone)]
pub struct Truncated {
    pub value: Complex64,
    /// The partial sum as an exact rational, when every exponent is an integer.
    pub exact: Option<BigRational>,
    /// Upper bound on `|integral - value|`.
    pub tail_bound: f64,
    pub cells: u64,
}

#[derive(Debug, Clone)]
struct Cell {
    a: Vec<u64>,
    k: Vec<u32>,
    /// Multiplies everything this cell contributes.
    w: Complex64,
}

enum Status {
    Resolved(Vec<u32>),
    /// Valuations where known, and the coordinate to split next.
    Open(Vec<Option<u32>>, usize),
}

struct Engine<'a> {
    c: &'a Compiled,
    p: u64,
    pf: f64,
    lnp: f64,
    pow: Vec<u64>,
    acc: HashMap<(u32, Vec<u32>), u64>,
    /// Contributions of cells with weight other than 1.
    weighted: Neumaier,
    any_weighted: bool,
    cells: u64,
    max_cells: u64,
}

fn val(mut x: u64, p: u64) -> u32 {
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

/// `(1 - p^{-1}) / (1 - p^{-1-ρ})`, so that `∫_{p^k Z_p} |t|^ρ = p^{-k(1+ρ)} G`.
/// Calls `f(rank)` for every ordering, `rank[i]` being the position of `i`.
fn for_each_permutation(n: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(pos: usize, rank: &mut Vec<usize>, used: &mut Vec<bool>, f: &mut impl FnMut(&[usize])) {
        if pos == rank.len() {
            f(rank);
            return;
        }
        for i in 0..rank.len() {
            if !used[i] {
                used[i] = true;
                rank[i] = pos;
                rec(pos + 1, rank, used, f);
                used[i] = false;
            }
        }
    }
    rec(0, &mut vec![0; n], &mut vec![false; n], f);
}

pub(crate) fn g_factor(pf: f64, rho: f64) -> f64 {
    (1.0 - 1.0 / pf) / (1.0 - pf.powf(-1.0 - rho))
}

impl<'a> Engine<'a> {
    fn new(c: &'a Compiled, p: u64, max_cells: u64) -> Result<Self> {
        if p < 2 || (2..p).any(|d| d * d <= p && p.is_multiple_of(d)) {
            return Err(Error::UnsupportedSpec(format!("{p} is not prime")));
        }
        let mut pow = vec![1u64];
        while let Some(x) = pow.last().unwrap().checked_mul(p) {
            if x > u64::MAX / p {
                break;
            }
            pow.push(x);
        }
        Ok(Engine {
            c,
            p,
            pf: p as f64,
            lnp: (p as f64).ln(),
            pow,
            acc: HashMap::new(),
            weighted: Neumaier::default(),
            any_weighted: false,
            cells: 0,
            max_cells,
        })
    }

    fn max_level(&self) -> u32 {
        (self.pow.len() - 2) as u32
    }

    fn initial(&self) -> Vec<Cell> {
        let mut cells = vec![Cell {
            a: Vec::new(),
            k: Vec::new(),
            w: Complex64::new(1.0, 0.0),
        }];
        for b in &self.c.bases {
            let opts: Vec<(u64, u32)> = match b {
                Base::Zp => vec![(0, 0)],
                Base::PZp => vec![(0, 1)],
                Base::Units => (1..self.p).map(|a| (a, 1)).collect(),
            };
            cells = cells
                .into_iter()
                .flat_map(|c| {
                    opts.iter().map(move |&(a, k)| {
                        let mut c = c.clone();
                        c.a.push(a);
                        c.k.push(k);
                        c
                    })
                })
                .collect();
        }
        cells
    }

    fn status(&self, cell: &Cell) -> Status {
        let mut vals = Vec::with_capacity(self.c.atoms.len());
        let mut split = None;
        for atom in &self.c.atoms {
            let (diff, k, coord) = match atom.kind {
                AtomKind::Lin { i, c } => {
                    let m = self.pow[cell.k[i] as usize];
                    ((cell.a[i] % m + m - c % m) % m, cell.k[i], i)
                }
                AtomKind::Diff { i, j } => {
                    let k = cell.k[i].min(cell.k[j]);
                    let m = self.pow[k as usize];
                    let coord = if cell.k[j] < cell.k[i] { j } else { i };
                    ((cell.a[i] % m + m - cell.a[j] % m) % m, k, coord)
                }
            };
            if k > 0 && diff != 0 {
                vals.push(Some(val(diff, self.p)));
            } else {
                vals.push(None);
                if split.is_none_or(|s: usize| cell.k[coord] < cell.k[s]) {
                    split = Some(coord);
                }
            }
        }
        match split {
            None => Status::Resolved(vals.into_iter().map(|v| v.expect("resolved")).collect()),
            Some(s) => Status::Open(vals, s),
        }
    }

    fn children(&self, cell: &Cell, i: usize) -> impl Iterator<Item = Cell> + '_ {
        let step = self.pow[cell.k[i] as usize];
        let cell = cell.clone();
        (0..self.p).map(move |t| {
            let mut c = cell.clone();
            c.a[i] += t * step;
            c.k[i] += 1;
            c
        })
    }

    fn record(&mut self, cell: &Cell, vals: Vec<u32>) {
        let sk: u32 = cell.k.iter().sum();
        if cell.w == Complex64::new(1.0, 0.0) {
            *self.acc.entry((sk, vals)).or_insert(0) += 1;
            return;
        }
        let mut z = Complex64::new(-(sk as f64), 0.0);
        for (atom, v) in self.c.atoms.iter().zip(&vals) {
            z -= atom.e * *v as f64;
        }
        self.weighted.add(cell.w * (z * self.lnp).exp());
        self.any_weighted = true;
    }

    /// For a homogeneous cell: its coordinates `G`, the scaling center, and
    /// the ratio `r` with `V = V_others + r V`, provided `|r| < 1`.
    fn homogeneous(
        &self,
        cell: &Cell,
        vals: &[Option<u32>],
    ) -> Option<(Vec<usize>, u64, bool, Complex64)> {
        let mut g: Vec<usize> = Vec::new();
        let mut center: Option<u64> = None;
        let mut esum = Complex64::new(0.0, 0.0);
        for (atom, v) in self.c.atoms.iter().zip(vals) {
            if v.is_some() {
                continue;
            }
            esum += atom.e;
            match atom.kind {
                AtomKind::Lin { i, c } => {
                    if center.is_some_and(|x| x != c) {
                        return None;
                    }
                    center = Some(c);
                    g.push(i);
                }
                AtomKind::Diff { i, j } => g.extend([i, j]),
            }
        }
        g.sort_unstable();
        g.dedup();
        let k = cell.k[g[0]];
        let a = cell.a[g[0]];
        if g.iter().any(|&i| cell.k[i] != k || cell.a[i] != a) || (k as usize + 1) >= self.pow.len()
        {
            return None;
        }
        let lin = center.is_some();
        let x0 = center.unwrap_or(a);
        let mut r = (-(g.len() as f64 + esum) * self.lnp).exp();
        if !lin {
            r *= self.pf;
        }
        (r.norm() < 1.0 - 1e-12).then_some((g, x0, lin, r))
    }

    /// Children of a homogeneous cell, without the self-similar ones.
    fn homogeneous_children(
        &self,
        cell: &Cell,
        g: &[usize],
        x0: u64,
        lin: bool,
        r: Complex64,
    ) -> Vec<Cell> {
        let k = cell.k[g[0]] as usize;
        let step = self.pow[k];
        let digit = (x0 % self.pow[k + 1]) / step;
        let w = cell.w / (1.0 - r);
        let mut out = Vec::new();
        let total = self.p.pow(g.len() as u32);
        for code in 0..total {
            let digits: Vec<u64> = (0..g.len())
                .map(|t| (code / self.p.pow(t as u32)) % self.p)
                .collect();
            let similar = if lin {
                digits.iter().all(|&d| d == digit)
            } else {
                digits.iter().all(|&d| d == digits[0])
            };
            if similar {
                continue;
            }
            let mut c = cell.clone();
            for (&i, &d) in g.iter().zip(&digits) {
                c.a[i] += d * step;
                c.k[i] += 1;
            }
            c.w = w;
            out.push(c);
        }
        out
    }

    /// Upper bound on `∫_cell |integrand|`.
    ///
    /// Unresolved atoms with nonnegative real exponent are bounded by their
    /// supremum. The others are integrated out one coordinate at a time in
    /// some order, each atom charged to its first coordinate. For a single
    /// coordinate `sup_w ∫_{a + p^k Z_p} ∏ |z - w_a|^{ρ_a} dz` is attained with
    /// all `w_a` equal, since balls nest and `t ↦ ∫_{pZ_p} (|z|^{-t} - 1)` is
    /// convex and vanishes at 0, hence superadditive. That gives
    /// `p^{-k(1+R)} G(R)` with `R = Σ ρ_a`, finite for `R > -1`. The smallest
    /// bound over all orders is returned.
    fn bound(&self, cell: &Cell, vals: &[Option<u32>]) -> Result<f64> {
        let n = self.c.n();
        let mut log = 0.0;
        let mut neg: Vec<(AtomKind, f64)> = Vec::new();
        for (atom, v) in self.c.atoms.iter().zip(vals) {
            let re = atom.e.re;
            match v {
                Some(v) => log -= *v as f64 * re,
                None if re >= 0.0 => {
                    let k = match atom.kind {
                        AtomKind::Lin { i, .. } => cell.k[i],
                        AtomKind::Diff { i, j } => cell.k[i].min(cell.k[j]),
                    };
                    log -= k as f64 * re;
                }
                None => neg.push((atom.kind, re)),
            }
        }
        let mut best: Option<f64> = None;
        let mut charge = |rank: &[usize]| {
            let mut r = vec![0.0; n];
            for &(kind, re) in &neg {
                let q = match kind {
                    AtomKind::Lin { i, .. } => i,
                    AtomKind::Diff { i, j } => {
                        if rank[i] < rank[j] {
                            i
                        } else {
                            j
                        }
                    }
                };
                r[q] += re;
            }
            if r.iter().any(|&x| x <= -1.0) {
                return;
            }
            let mut lg = 0.0;
            let mut factor = 1.0;
            for (q, &x) in r.iter().enumerate() {
                lg -= cell.k[q] as f64 * (1.0 + x);
                factor *= g_factor(self.pf, x);
            }
            let b = factor * (lg * self.lnp).exp();
            if best.is_none_or(|old| b < old) {
                best = Some(b);
            }
        };
        if neg.iter().any(|(k, _)| matches!(k, AtomKind::Diff { .. })) && n <= 6 {
            for_each_permutation(n, &mut charge);
        } else {
            charge(&(0..n).collect::<Vec<_>>());
        }
        match best {
            Some(b) => Ok(b * (log * self.lnp).exp()),
            None => Err(Error::TailNotGeometric(
                "no integration order keeps every charged exponent above -1".into(),
            )),
        }
    }

    fn tick(&mut self) -> Result<()> {
        self.cells += 1;
        if self.cells > self.max_cells {
            return Err(Error::BudgetExceeded(self.max_cells));
        }
        Ok(())
    }

    fn run_depth(&mut self, m: u32) -> Result<f64> {
        let m = m.min(self.max_level());
        let mut stack = self.initial();
        let mut tail = Neumaier::default();
        while let Some(cell) = stack.pop() {
            self.tick()?;
            match self.status(&cell) {
                Status::Resolved(vals) => self.record(&cell, vals),
                Status::Open(vals, s) => {
                    if cell.k[s] >= m {
                        tail.add(Complex64::new(
                            self.bound(&cell, &vals)? * cell.w.norm(),
                            0.0,
                        ));
                    } else {
                        stack.extend(self.children(&cell, s));
                    }
                }
            }
        }
        Ok(tail.sum().re)
    }

    fn run_adaptive(&mut self, target: f64) -> Result<f64> {
        let max_level = self.max_level();
        let mut heap = BinaryHeap::new();
        let mut frozen = Neumaier::default();
        let mut open = 0.0;
        let mut pending = self.initial();
        loop {
            for cell in pending.drain(..) {
                self.tick()?;
                match self.status(&cell) {
                    Status::Resolved(vals) => self.record(&cell, vals),
                    Status::Open(vals, s) => {
                        // Cells containing two singular points of one
                        // coordinate have no useful bound until split.
                        let b = self.bound(&cell, &vals).unwrap_or(f64::INFINITY) * cell.w.norm();
                        if cell.k[s] >= max_level {
                            frozen.add(Complex64::new(b, 0.0));
                        } else {
                            if b.is_finite() {
                                open += b;
                            }
                            heap.push(ByBound(b, cell, s, vals));
                        }
                    }
                }
            }
            let unbounded = heap.peek().is_some_and(|top| top.0.is_infinite());
            let widest = self.p.saturating_pow(self.c.n() as u32);
            if (!unbounded && open + frozen.sum().re <= target)
                || self.cells.saturating_add(widest) > self.max_cells
            {
                break;
            }
            let Some(ByBound(b, cell, s, vals)) = heap.pop() else {
                break;
            };
            if b.is_finite() {
                open -= b;
            }
            match self.homogeneous(&cell, &vals) {
                Some((g, x0, lin, r)) => {
                    pending.extend(self.homogeneous_children(&cell, &g, x0, lin, r))
                }
                None => pending.extend(self.children(&cell, s)),
            }
        }
        let mut tail = frozen;
        // Re-sum in a fixed order so the result does not depend on drift in `open`.
        let mut rest: Vec<f64> = heap.into_iter().map(|ByBound(b, ..)| b).collect();
        rest.sort_by(f64::total_cmp);
        for b in rest {
            tail.add(Complex64::new(b, 0.0));
        }
        let tail = tail.sum().re;
        if !tail.is_finite() {
            return Err(Error::TailNotGeometric(
                "a cell with unbounded integrand was never resolved".into(),
            ));
        }
        Ok(tail)
    }

    fn finish(self, tail: f64) -> Truncated {
        let mut keys: Vec<_> = self.acc.into_iter().collect();
        keys.sort();
        let mut sum = Neumaier::default();
        let mut by_exp: HashMap<i64, u64> = HashMap::new();
        let exact_ok = self.c.integer_exponents() && !self.any_weighted;
        for ((sk, vals), count) in &keys {
            let mut z = Complex64::new(-(*sk as f64), 0.0);
            let mut ez = -(*sk as i64);
            for (atom, v) in self.c.atoms.iter().zip(vals) {
                z -= atom.e * *v as f64;
                if let Some(e) = atom.int {
                    ez -= e * *v as i64;
                }
            }
            sum.add((z * self.lnp).exp() * *count as f64);
            if exact_ok {
                *by_exp.entry(ez).or_insert(0) += count;
            }
        }
        let exact = exact_ok.then(|| {
            let p = BigInt::from(self.p);
            let mut total = BigRational::zero();
            for (e, count) in by_exp {
                let pe = num_traits::pow(p.clone(), e.unsigned_abs() as usize);
                let term = if e >= 0 {
                    BigRational::from_integer(pe)
                } else {
                    BigRational::new(BigInt::one(), pe)
                };
                total += term * BigRational::from_integer(BigInt::from(count));
            }
            total
        });
        Truncated {
            value: sum.sum() + self.weighted.sum(),
            exact,
            tail_bound: tail,
            cells: self.cells,
        }
    }
}

struct ByBound(f64, Cell, usize, Vec<Option<u32>>);

impl PartialEq for ByBound {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for ByBound {}
impl PartialOrd for ByBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByBound {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| other.1.k.cmp(&self.1.k))
            .then_with(|| other.1.a.cmp(&self.1.a))
    }
}

/// Sum every cell resolved before refinement level `m`; bound the rest.
pub fn exact_truncated(
    spec: &IntegralSpec,
    p: u64,
    assign: &Assignment,
    m: u32,
) -> Result<Truncated> {
    let c = Compiled::new(spec, assign)?;
    exact_compiled(&c, p, m, MAX_CELLS)
}

pub(crate) fn exact_compiled(c: &Compiled, p: u64, m: u32, max_cells: u64) -> Result<Truncated> {
    let mut e = Engine::new(c, p, max_cells)?;
    let tail = e.run_depth(m)?;
    Ok(e.finish(tail))
}

/// Refine the cell with the largest bound first until the total tail bound is
/// at most `target` or the next refinement could exceed `max_cells` cells; in
/// the latter case the result carries whatever tail bound was reached.
pub fn exact_adaptive(
    spec: &IntegralSpec,
    p: u64,
    assign: &Assignment,
    target: f64,
    max_cells: u64,
) -> Result<Truncated> {
    let c = Compiled::new(spec, assign)?;
    let mut e = Engine::new(&c, p, max_cells.max(p.saturating_pow(c.n() as u32 + 1)))?;
    let tail = e.run_adaptive(target)?;
    Ok(e.finish(tail))
}
