//! Subbasis indices. Constructors build new index sets by tagging old ones,
//! so every index carries its own construction path.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, Q};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Index {
    Nat(u32),
    /// Index `inner` of constituent `k` (product factors, lift flags, copies).
    Tag(u32, Box<Index>),
    /// `L_q` of a Dedekind cut.
    Lower(Q),
    /// `R_q` of a Dedekind cut.
    Upper(Q),
    /// Formal ball `B(a, r)` around the `center`-th point of a metric space.
    Ball {
        center: u32,
        radius: Q,
    },
}

impl Index {
    pub fn tag(k: u32, inner: Index) -> Index {
        Index::Tag(k, Box::new(inner))
    }

    /// Strips tag `k`; `None` if the index belongs elsewhere.
    pub fn untag(&self, k: u32) -> Option<&Index> {
        match self {
            Index::Tag(j, inner) if *j == k => Some(inner),
            _ => None,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Nat(n) => write!(f, "{n}"),
            Index::Tag(k, inner) => write!(f, "{k}.{inner}"),
            Index::Lower(q) => write!(f, "L{}", fmt_q(q)),
            Index::Upper(q) => write!(f, "R{}", fmt_q(q)),
            Index::Ball { center, radius } => write!(f, "B({center};{})", fmt_q(radius)),
        }
    }
}

impl FromStr for Index {
    type Err = Error;

    fn from_str(s: &str) -> Result<Index> {
        let bad = || Error::Schema(format!("bad index {s:?}"));
        if let Some(rest) = s.strip_prefix('L') {
            return Ok(Index::Lower(parse_q(rest)?));
        }
        if let Some(rest) = s.strip_prefix('R') {
            return Ok(Index::Upper(parse_q(rest)?));
        }
        if let Some(rest) = s.strip_prefix("B(").and_then(|r| r.strip_suffix(')')) {
            let (c, r) = rest.split_once(';').ok_or_else(bad)?;
            return Ok(Index::Ball { center: c.parse().map_err(|_| bad())?, radius: parse_q(r)? });
        }
        match s.split_once('.') {
            Some((k, inner)) => Ok(Index::tag(k.parse().map_err(|_| bad())?, inner.parse()?)),
            None => Ok(Index::Nat(s.parse().map_err(|_| bad())?)),
        }
    }
}

impl serde::Serialize for Index {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for Index {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A finite set of indices, i.e. the basic open `↑s` of `S^I`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct BasicOpen(BTreeSet<Index>);

impl BasicOpen {
    /// `↑∅`, the whole space.
    pub fn top() -> Self {
        BasicOpen(BTreeSet::new())
    }

    pub fn single(i: Index) -> Self {
        BasicOpen([i].into_iter().collect())
    }

    pub fn indices(&self) -> &BTreeSet<Index> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn meet(&self, other: &BasicOpen) -> BasicOpen {
        BasicOpen(self.0.union(&other.0).cloned().collect())
    }

    /// `↑self ⊇ ↑other`.
    pub fn contains_basic(&self, other: &BasicOpen) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Whether a point (set of observed indices) lies in `↑self`.
    pub fn holds_in(&self, point: &BTreeSet<Index>) -> bool {
        self.0.is_subset(point)
    }

    pub fn retag(&self, k: u32) -> BasicOpen {
        BasicOpen(self.0.iter().map(|i| Index::tag(k, i.clone())).collect())
    }

    pub fn map(&self, f: impl Fn(&Index) -> Index) -> BasicOpen {
        BasicOpen(self.0.iter().map(f).collect())
    }
}

impl FromIterator<Index> for BasicOpen {
    fn from_iter<T: IntoIterator<Item = Index>>(iter: T) -> Self {
        BasicOpen(iter.into_iter().collect())
    }
}

impl fmt::Display for BasicOpen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "⊤");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "↑{{{}}}", parts.join(","))
    }
}

/// The indices of `point` tagged `k`, untagged.
pub fn untag_set(point: &BTreeSet<Index>, k: u32) -> BTreeSet<Index> {
    point.iter().filter_map(|i| i.untag(k).cloned()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn display_parse_roundtrip() {
        let cases = [
            Index::Nat(3),
            Index::tag(2, Index::tag(0, Index::Nat(1))),
            Index::Lower(q(-1, 2)),
            Index::tag(1, Index::Upper(q(7, 3))),
            Index::Ball { center: 4, radius: q(1, 64) },
        ];
        for c in cases {
            let s = c.to_string();
            assert_eq!(s.parse::<Index>().unwrap(), c, "{s}");
        }
        assert!("x".parse::<Index>().is_err());
    }

    #[test]
    fn basic_open_containment() {
        let a = BasicOpen::single(Index::Nat(0));
        let ab: BasicOpen = [Index::Nat(0), Index::Nat(1)].into_iter().collect();
        assert!(a.contains_basic(&ab));
        assert!(!ab.contains_basic(&a));
        assert!(BasicOpen::top().contains_basic(&a));
        assert_eq!(a.meet(&BasicOpen::single(Index::Nat(1))), ab);
    }
}
