//! The real line as Dedekind cuts over `{L_q, R_q : q ∈ ℚ}`.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::index::{BasicOpen, Index};
use crate::rational::{first_rationals, fmt_q, parse_q, rational_at, unpair, Q};

use super::{Copresentation, IndexDomain, IndexEnum, OpenCode, OpenFamily, Relation, RelationFamily};

/// `L_q` at even positions, `R_q` at odd, `q` running through the fixed
/// rational enumeration.
#[derive(Debug)]
pub struct CutIndices;

impl IndexEnum for CutIndices {
    fn index(&self, n: u64) -> Option<Index> {
        let q = rational_at(n / 2);
        Some(if n.is_multiple_of(2) { Index::Lower(q) } else { Index::Upper(q) })
    }

    fn contains(&self, i: &Index) -> bool {
        matches!(i, Index::Lower(_) | Index::Upper(_))
    }

    fn spec(&self) -> Value {
        json!({"kind": "cuts"})
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    fn index(self, q: Q) -> Index {
        match self {
            Side::Lower => Index::Lower(q),
            Side::Upper => Index::Upper(q),
        }
    }

    fn read(self, i: &Index) -> Option<&Q> {
        match (self, i) {
            (Side::Lower, Index::Lower(q)) | (Side::Upper, Index::Upper(q)) => Some(q),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Side::Lower => "lower",
            Side::Upper => "upper",
        }
    }

    pub fn parse(s: &str) -> Option<Side> {
        match s {
            "lower" => Some(Side::Lower),
            "upper" => Some(Side::Upper),
            _ => None,
        }
    }
}

/// `⋃ ↑{L_q}` (or `R_q`) over the `q` strictly beyond an optional bound:
/// above it for the lower side, below it for the upper side.
#[derive(Debug, Clone)]
pub struct CutOpens {
    pub side: Side,
    pub beyond: Option<Q>,
}

impl CutOpens {
    fn admits(&self, q: &Q) -> bool {
        match (&self.beyond, self.side) {
            (None, _) => true,
            (Some(p), Side::Lower) => q > p,
            (Some(p), Side::Upper) => q < p,
        }
    }
}

impl OpenFamily for CutOpens {
    fn generator(&self, n: u64) -> Option<BasicOpen> {
        let q = rational_at(n);
        self.admits(&q).then(|| BasicOpen::single(self.side.index(q)))
    }

    fn find_in(&self, point: &BTreeSet<Index>) -> Option<BasicOpen> {
        point.iter().find(|i| self.side.read(i).is_some_and(|q| self.admits(q))).map(|i| BasicOpen::single(i.clone()))
    }

    fn describe(&self) -> String {
        let v = if self.side == Side::Lower { "L" } else { "R" };
        match &self.beyond {
            None => format!("⋃_q {v}_q"),
            Some(p) if self.side == Side::Lower => format!("⋃_{{q>{}}} L_q", fmt_q(p)),
            Some(p) => format!("⋃_{{q<{}}} R_q", fmt_q(p)),
        }
    }

    fn spec(&self) -> Value {
        json!({"kind": "cut_opens", "side": self.side.name(), "beyond": self.beyond.as_ref().map(fmt_q)})
    }
}

/// The relation families of a Dedekind cut.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CutFamily {
    /// `⊤ ⇒ ⋃ L_q`.
    NonemptyLower,
    /// `⊤ ⇒ ⋃ R_q`.
    NonemptyUpper,
    /// `L_q ⇒ L_p` for `p < q`.
    DownLower,
    /// `R_p ⇒ R_q` for `p < q`.
    UpUpper,
    /// `L_p ⇒ ⋃_{q>p} L_q`.
    RoundLower,
    /// `R_p ⇒ ⋃_{q<p} R_q`.
    RoundUpper,
    /// `L_p ∩ R_p ⇒ ∅`.
    Disjoint,
    /// `⊤ ⇒ L_p ∪ R_q` for `p < q`.
    Located,
}

impl CutFamily {
    pub const ALL: [CutFamily; 8] = [
        CutFamily::NonemptyLower,
        CutFamily::NonemptyUpper,
        CutFamily::DownLower,
        CutFamily::UpUpper,
        CutFamily::RoundLower,
        CutFamily::RoundUpper,
        CutFamily::Disjoint,
        CutFamily::Located,
    ];

    pub fn key(self) -> &'static str {
        match self {
            CutFamily::NonemptyLower => "nonempty_lower",
            CutFamily::NonemptyUpper => "nonempty_upper",
            CutFamily::DownLower => "down_lower",
            CutFamily::UpUpper => "up_upper",
            CutFamily::RoundLower => "round_lower",
            CutFamily::RoundUpper => "round_upper",
            CutFamily::Disjoint => "disjoint",
            CutFamily::Located => "located",
        }
    }

    pub fn parse(s: &str) -> Option<CutFamily> {
        Self::ALL.into_iter().find(|f| f.key() == s)
    }

    fn single(&self, p: Q) -> Relation {
        match self {
            CutFamily::RoundLower => Relation::new(
                OpenCode::single(Index::Lower(p.clone())),
                OpenCode::family(Arc::new(CutOpens { side: Side::Lower, beyond: Some(p) })),
            ),
            CutFamily::RoundUpper => Relation::new(
                OpenCode::single(Index::Upper(p.clone())),
                OpenCode::family(Arc::new(CutOpens { side: Side::Upper, beyond: Some(p) })),
            ),
            CutFamily::Disjoint => Relation::new(
                OpenCode::basic([Index::Lower(p.clone()), Index::Upper(p)].into_iter().collect()),
                OpenCode::empty(),
            ),
            _ => unreachable!("not a single-parameter family"),
        }
    }

    /// Instance for `p < q`.
    fn double(&self, p: Q, q: Q) -> Relation {
        match self {
            CutFamily::DownLower => Relation::new(OpenCode::single(Index::Lower(q)), OpenCode::single(Index::Lower(p))),
            CutFamily::UpUpper => Relation::new(OpenCode::single(Index::Upper(p)), OpenCode::single(Index::Upper(q))),
            CutFamily::Located => Relation::new(
                OpenCode::top(),
                OpenCode::finite(vec![BasicOpen::single(Index::Lower(p)), BasicOpen::single(Index::Upper(q))]),
            ),
            _ => unreachable!("not a two-parameter family"),
        }
    }

    fn arity(&self) -> usize {
        match self {
            CutFamily::NonemptyLower | CutFamily::NonemptyUpper => 0,
            CutFamily::RoundLower | CutFamily::RoundUpper | CutFamily::Disjoint => 1,
            _ => 2,
        }
    }
}

/// Rationals occurring in `point`, plus the first `fuel` of the enumeration.
pub fn parameter_pool(fuel: u64, point: &BTreeSet<Index>) -> Vec<Q> {
    let mut pool: BTreeSet<Q> = first_rationals(fuel).into_iter().collect();
    for i in point {
        if let Index::Lower(q) | Index::Upper(q) = i {
            pool.insert(q.clone());
        }
    }
    pool.into_iter().collect()
}

impl RelationFamily for CutFamily {
    fn name(&self) -> String {
        self.key().into()
    }

    fn instance(&self, n: u64) -> Option<Relation> {
        match self.arity() {
            0 => (n == 0).then(|| {
                let side = if *self == CutFamily::NonemptyLower { Side::Lower } else { Side::Upper };
                Relation::new(OpenCode::top(), OpenCode::family(Arc::new(CutOpens { side, beyond: None })))
            }),
            1 => Some(self.single(rational_at(n))),
            _ => {
                let (i, k) = unpair(n);
                let (p, q) = (rational_at(i), rational_at(k));
                (p < q).then(|| self.double(p, q))
            }
        }
    }

    fn relevant(&self, fuel: u64, point: &BTreeSet<Index>) -> Vec<Relation> {
        let pool = parameter_pool(fuel, point);
        match self.arity() {
            0 => self.instance(0).into_iter().collect(),
            1 => pool.into_iter().map(|p| self.single(p)).collect(),
            _ => {
                let mut out = Vec::new();
                for (a, p) in pool.iter().enumerate() {
                    for q in &pool[a + 1..] {
                        out.push(self.double(p.clone(), q.clone()));
                    }
                }
                out
            }
        }
    }

    fn spec(&self) -> Value {
        json!({"kind": "cut", "family": self.key()})
    }
}

/// `ℝ` as the space of Dedekind cuts.
pub fn reals_dedekind() -> Copresentation {
    Copresentation::new(
        IndexDomain::Countable(Arc::new(CutIndices)),
        vec![],
        CutFamily::ALL.iter().map(|f| Arc::new(*f) as Arc<dyn RelationFamily>).collect(),
        vec!["reals_dedekind".into()],
    )
    .expect("built-in families are well formed")
}

/// Position of `L_q` or `R_q` in [`CutIndices`].
pub fn cut_position(i: &Index) -> Option<u64> {
    match i {
        Index::Lower(q) => Some(2 * crate::rational::rational_position(q)),
        Index::Upper(q) => Some(2 * crate::rational::rational_position(q) + 1),
        _ => None,
    }
}

pub(crate) fn parse_opt_q(v: &Value) -> crate::error::Result<Option<Q>> {
    match v {
        Value::Null => Ok(None),
        Value::String(s) => parse_q(s).map(Some),
        _ => Err(crate::error::Error::Schema("expected a rational string".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{pair, q};

    fn cut_of(r: &Q, fuel: u64) -> BTreeSet<Index> {
        let mut s = BTreeSet::new();
        for n in 0..fuel {
            let x = rational_at(n);
            if &x < r {
                s.insert(Index::Lower(x));
            } else if &x > r {
                s.insert(Index::Upper(x));
            }
        }
        s
    }

    #[test]
    fn rational_cut_has_no_violations() {
        let c = reals_dedekind();
        let pt = cut_of(&q(1, 3), 40);
        for f in c.families() {
            for r in f.relevant(40, &pt) {
                assert!(!(r.antecedent.holds_in(&pt) && r.consequent.is_empty_code()), "{}", r);
            }
        }
    }

    #[test]
    fn half_both_sides_breaks_disjointness() {
        let pt: BTreeSet<Index> = [Index::Lower(q(1, 2)), Index::Upper(q(1, 2))].into_iter().collect();
        let bad = CutFamily::Disjoint.relevant(4, &pt).into_iter().any(|r| !r.holds_at(&pt));
        assert!(bad);
    }

    #[test]
    fn instances_are_well_formed() {
        let c = reals_dedekind();
        c.validate().unwrap();
        assert_eq!(CutFamily::DownLower.instance(pair(0, 1)).unwrap().to_string(), "↑{L0} ⇒ ↑{L-1}");
        assert!(CutFamily::DownLower.instance(pair(1, 0)).is_none());
        for n in 0..50 {
            let i = CutIndices.index(n).unwrap();
            assert_eq!(cut_position(&i), Some(n));
        }
    }
}
