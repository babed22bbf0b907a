//! Residue-class combinatorics over `(F_p^×)^|J|`.
//!
//! A tuple of nonzero residues is classified by which coordinates agree.
//! Each class is a set partition of `J`; its size is a falling factorial in
//! `p`, so counts stay symbolic.

use std::fmt;

use crate::error::{Error, Result};
use crate::symbolic::PrimeLaurent;

/// A finite set of small positive indices, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IndexSet(u64);

impl IndexSet {
    pub const EMPTY: IndexSet = IndexSet(0);

    pub fn from_bits(bits: u64) -> Self {
        IndexSet(bits)
    }

    pub fn bits(&self) -> u64 {
        self.0
    }

    pub fn singleton(i: u32) -> Self {
        assert!(i < 64, "index {i} out of range");
        IndexSet(1 << i)
    }

    /// `{lo, ..., hi}`, empty if `hi < lo`.
    pub fn range(lo: u32, hi: u32) -> Self {
        (lo..=hi)
            .map(IndexSet::singleton)
            .fold(IndexSet::EMPTY, |a, b| a | b)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, i: u32) -> bool {
        i < 64 && self.0 >> i & 1 == 1
    }

    pub fn is_subset(&self, other: IndexSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn insert(&mut self, i: u32) {
        *self = *self | IndexSet::singleton(i);
    }

    pub fn minus(&self, other: IndexSet) -> IndexSet {
        IndexSet(self.0 & !other.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> {
        let bits = self.0;
        (0..64u32).filter(move |i| bits >> i & 1 == 1)
    }

    /// Unordered pairs `i < j` inside the set (the set `T_J`).
    pub fn pairs(&self) -> impl Iterator<Item = (u32, u32)> {
        let v: Vec<u32> = self.iter().collect();
        let mut out = Vec::with_capacity(v.len() * v.len().saturating_sub(1) / 2);
        for (a, &i) in v.iter().enumerate() {
            for &j in &v[a + 1..] {
                out.push((i, j));
            }
        }
        out.into_iter()
    }

    /// Every subset, including the empty set and the set itself.
    pub fn subsets(&self) -> impl Iterator<Item = IndexSet> {
        let full = self.0;
        let mut cur = Some(0u64);
        std::iter::from_fn(move || {
            let s = cur?;
            cur = if s == full {
                None
            } else {
                Some((s.wrapping_sub(full)) & full)
            };
            Some(IndexSet(s))
        })
    }

    /// Nonempty proper subsets.
    pub fn proper_nonempty_subsets(&self) -> impl Iterator<Item = IndexSet> {
        let me = *self;
        self.subsets().filter(move |s| !s.is_empty() && *s != me)
    }
}

impl std::ops::BitOr for IndexSet {
    type Output = IndexSet;
    fn bitor(self, rhs: IndexSet) -> IndexSet {
        IndexSet(self.0 | rhs.0)
    }
}

impl std::ops::BitAnd for IndexSet {
    type Output = IndexSet;
    fn bitand(self, rhs: IndexSet) -> IndexSet {
        IndexSet(self.0 & rhs.0)
    }
}

impl FromIterator<u32> for IndexSet {
    fn from_iter<I: IntoIterator<Item = u32>>(it: I) -> Self {
        it.into_iter()
            .map(IndexSet::singleton)
            .fold(IndexSet::EMPTY, |a, b| a | b)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v: Vec<String> = self.iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", v.join(","))
    }
}

/// A set partition of an index set; blocks sorted by least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoincidencePattern {
    blocks: Vec<IndexSet>,
}

impl CoincidencePattern {
    /// Build from blocks; they must be nonempty and pairwise disjoint.
    pub fn new(mut blocks: Vec<IndexSet>) -> Result<Self> {
        let mut seen = IndexSet::EMPTY;
        for b in &blocks {
            if b.is_empty() {
                return Err(Error::EmptyIndexSet);
            }
            if !(seen & *b).is_empty() {
                return Err(Error::Parse("blocks overlap".into()));
            }
            seen = seen | *b;
        }
        blocks.sort_by_key(|b| b.bits().trailing_zeros());
        Ok(CoincidencePattern { blocks })
    }

    /// The pattern of a residue tuple `a` indexed by the members of `j`.
    pub fn of_tuple(j: IndexSet, a: &[u64]) -> Self {
        let idx: Vec<u32> = j.iter().collect();
        assert_eq!(idx.len(), a.len());
        let mut blocks: Vec<(u64, IndexSet)> = Vec::new();
        for (pos, &v) in a.iter().enumerate() {
            match blocks.iter_mut().find(|(r, _)| *r == v) {
                Some((_, b)) => b.insert(idx[pos]),
                None => blocks.push((v, IndexSet::singleton(idx[pos]))),
            }
        }
        CoincidencePattern::new(blocks.into_iter().map(|(_, b)| b).collect())
            .expect("tuple blocks are disjoint")
    }

    pub fn all_blocks(&self) -> &[IndexSet] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn support(&self) -> IndexSet {
        self.blocks.iter().fold(IndexSet::EMPTY, |a, b| a | *b)
    }

    /// Non-singleton blocks.
    pub fn blocks(&self) -> Vec<IndexSet> {
        self.blocks
            .iter()
            .copied()
            .filter(|b| b.len() >= 2)
            .collect()
    }

    /// Pairs `i < j` with equal residues, i.e. `K(ā)`.
    pub fn coincident_pairs(&self) -> Vec<(u32, u32)> {
        self.blocks.iter().flat_map(|b| b.pairs()).collect()
    }
}

/// A set partition with an optional block pinned to residue 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MarkedPattern {
    pub pattern: CoincidencePattern,
    pub marker: Option<usize>,
}

impl MarkedPattern {
    pub fn marked_block(&self) -> Option<IndexSet> {
        self.marker.map(|k| self.pattern.blocks[k])
    }

    /// Non-singleton unmarked blocks.
    pub fn unmarked_blocks(&self) -> Vec<IndexSet> {
        self.pattern
            .blocks
            .iter()
            .enumerate()
            .filter(|(k, b)| Some(*k) != self.marker && b.len() >= 2)
            .map(|(_, b)| *b)
            .collect()
    }

    /// The marked block (tagged `true`, even when singleton) followed by the
    /// non-singleton unmarked blocks.
    pub fn blocks(&self) -> Vec<(IndexSet, bool)> {
        let mut out: Vec<(IndexSet, bool)> =
            self.marked_block().map(|b| (b, true)).into_iter().collect();
        out.extend(self.unmarked_blocks().into_iter().map(|b| (b, false)));
        out
    }

    /// The pattern of a residue tuple, marking the block of residue 1.
    pub fn of_tuple(j: IndexSet, a: &[u64]) -> Self {
        let pattern = CoincidencePattern::of_tuple(j, a);
        let idx: Vec<u32> = j.iter().collect();
        let marker = a.iter().position(|&v| v == 1).map(|pos| {
            pattern
                .blocks
                .iter()
                .position(|b| b.contains(idx[pos]))
                .expect("index is covered")
        });
        MarkedPattern { pattern, marker }
    }
}

/// All set partitions of `j`, via restricted growth strings.
pub fn set_partitions(j: IndexSet) -> Vec<CoincidencePattern> {
    let idx: Vec<u32> = j.iter().collect();
    let n = idx.len();
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut rgs = vec![0usize; n];
    loop {
        let k = rgs.iter().max().map_or(0, |m| m + 1);
        let mut blocks = vec![IndexSet::EMPTY; k];
        for (pos, &b) in rgs.iter().enumerate() {
            blocks[b].insert(idx[pos]);
        }
        out.push(CoincidencePattern { blocks });
        // Advance to the next restricted growth string.
        let next = (1..n).rev().find(|&pos| {
            let prefix_max = rgs[..pos].iter().max().copied().unwrap_or(0);
            rgs[pos] <= prefix_max
        });
        match next {
            Some(pos) => {
                rgs[pos] += 1;
                for r in rgs.iter_mut().skip(pos + 1) {
                    *r = 0;
                }
            }
            None => return out,
        }
    }
}

/// Classes of `(F_p^×)^|J|` with at least one coincidence.
pub fn enumerate_patterns(j: IndexSet) -> Result<Vec<CoincidencePattern>> {
    if j.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    Ok(set_partitions(j)
        .into_iter()
        .filter(|p| p.blocks.len() < j.len())
        .collect())
}

/// Classes of `(F_p^×)^|J|` tracked jointly by coincidences and by which
/// block equals 1; the all-distinct, none-equal-to-1 class is excluded.
pub fn enumerate_marked(j: IndexSet) -> Result<Vec<MarkedPattern>> {
    if j.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let mut out = Vec::new();
    for pattern in set_partitions(j) {
        let k = pattern.blocks.len();
        if k < j.len() {
            out.push(MarkedPattern {
                pattern: pattern.clone(),
                marker: None,
            });
        }
        for m in 0..k {
            out.push(MarkedPattern {
                pattern: pattern.clone(),
                marker: Some(m),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    Plain,
    ExcludingOne,
}

/// Number of tuples realizing a pattern with `k` blocks:
/// `(p-1)...(p-k)` in plain mode.
pub fn class_count(pat: &CoincidencePattern) -> PrimeLaurent {
    PrimeLaurent::falling(1, pat.block_count() as i64)
}

/// Count for a marked pattern: the marked block is pinned to 1 and the other
/// blocks take distinct values different from 1.
pub fn marked_class_count(pat: &MarkedPattern) -> PrimeLaurent {
    let k = pat.pattern.block_count() as i64;
    match pat.marker {
        Some(_) => PrimeLaurent::falling(2, k),
        None => PrimeLaurent::falling(2, k + 1),
    }
}

/// `|Δ̄(J)| = (p-1)...(p-|J|)`.
pub fn delta_count(j: IndexSet) -> PrimeLaurent {
    PrimeLaurent::falling(1, j.len() as i64)
}

/// `|Π̄(J)| = (p-2)...(p-|J|-1)`.
pub fn pi_count(j: IndexSet) -> PrimeLaurent {
    PrimeLaurent::falling(2, j.len() as i64 + 1)
}
