use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// An amplitude variable `s_ij`.
///
/// Pairs touching an endpoint keep the endpoint first (`s_1_i`, `s_{N-1}_i`);
/// pairs inside `T = {2..N-2}` are stored with `i < j`. Validation against a
/// concrete `N` happens in [`crate::recursion::AmplitudeContext::var`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SVar {
    i: u32,
    j: u32,
}

impl SVar {
    /// Build a variable from a raw pair, putting `1` first when present.
    /// An inner pair is sorted. The last endpoint cannot be recognized
    /// without `N`; use the context for that.
    pub fn raw(i: u32, j: u32) -> Self {
        if j == 1 {
            SVar { i: 1, j: i }
        } else {
            SVar { i, j }
        }
    }

    pub(crate) fn endpoint(t: u32, i: u32) -> Self {
        SVar { i: t, j: i }
    }

    pub(crate) fn inner(i: u32, j: u32) -> Self {
        SVar {
            i: i.min(j),
            j: i.max(j),
        }
    }

    pub fn i(&self) -> u32 {
        self.i
    }

    pub fn j(&self) -> u32 {
        self.j
    }
}

impl fmt::Display for SVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s_{}_{}", self.i, self.j)
    }
}

impl FromStr for SVar {
    type Err = Error;

    /// Parses `s_<i>_<j>`, keeping the written order (see [`SVar::raw`]).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidVariable(s.to_string());
        let rest = s.strip_prefix("s_").ok_or_else(bad)?;
        let (a, b) = rest.split_once('_').ok_or_else(bad)?;
        let i: u32 = a.parse().map_err(|_| bad())?;
        let j: u32 = b.parse().map_err(|_| bad())?;
        if i == j || i == 0 || j == 0 {
            return Err(bad());
        }
        Ok(SVar { i, j }.normalize_one())
    }
}

impl SVar {
    fn normalize_one(self) -> Self {
        SVar::raw(self.i, self.j)
    }
}
