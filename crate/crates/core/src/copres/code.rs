//! Open codes (unions of basic opens) and Π⁰₂ relations between them.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::index::{untag_set, BasicOpen, Index};
use crate::rational::unpair;

/// An enumerable union of basic opens. Every family must answer the exact
/// question "does some generator lie below this finite point?".
pub trait OpenFamily: Send + Sync + fmt::Debug {
    /// The `n`-th generator; `None` marks a blank slot of the enumeration.
    fn generator(&self, n: u64) -> Option<BasicOpen>;
    /// Some generator `↑s` with `s ⊆ point`, if any.
    fn find_in(&self, point: &BTreeSet<Index>) -> Option<BasicOpen>;
    fn describe(&self) -> String;
    fn spec(&self) -> Value;
}

/// `⋃` of finitely many basic opens and finitely many enumerable families.
#[derive(Clone, Debug, Default)]
pub struct OpenCode {
    finite: Vec<BasicOpen>,
    families: Vec<Arc<dyn OpenFamily>>,
}

impl OpenCode {
    /// The code with no generators; denotes `∅`.
    pub fn empty() -> Self {
        OpenCode::default()
    }

    pub fn top() -> Self {
        Self::basic(BasicOpen::top())
    }

    pub fn basic(b: BasicOpen) -> Self {
        OpenCode { finite: vec![b], families: vec![] }
    }

    pub fn single(i: Index) -> Self {
        Self::basic(BasicOpen::single(i))
    }

    pub fn finite(gens: Vec<BasicOpen>) -> Self {
        let mut gens = gens;
        gens.sort();
        gens.dedup();
        OpenCode { finite: gens, families: vec![] }
    }

    pub fn family(f: Arc<dyn OpenFamily>) -> Self {
        OpenCode { finite: vec![], families: vec![f] }
    }

    pub fn generators(&self) -> &[BasicOpen] {
        &self.finite
    }

    pub fn families(&self) -> &[Arc<dyn OpenFamily>] {
        &self.families
    }

    pub fn is_finite(&self) -> bool {
        self.families.is_empty()
    }

    /// Syntactically empty: no generators at all.
    pub fn is_empty_code(&self) -> bool {
        self.finite.is_empty() && self.families.is_empty()
    }

    pub fn union(&self, other: &OpenCode) -> OpenCode {
        let mut finite = self.finite.clone();
        finite.extend(other.finite.iter().cloned());
        finite.sort();
        finite.dedup();
        let mut families = self.families.clone();
        families.extend(other.families.iter().cloned());
        OpenCode { finite, families }
    }

    pub fn union_all<'a>(codes: impl IntoIterator<Item = &'a OpenCode>) -> OpenCode {
        codes.into_iter().fold(OpenCode::empty(), |acc, c| acc.union(c))
    }

    /// `self ∩ ↑t`, distributing over generators.
    pub fn meet_basic(&self, t: &BasicOpen) -> OpenCode {
        let finite = self.finite.iter().map(|s| s.meet(t)).collect();
        let families = self
            .families
            .iter()
            .map(|f| Arc::new(MeetBasic { inner: f.clone(), with: t.clone() }) as Arc<dyn OpenFamily>)
            .collect();
        let mut out = OpenCode { finite, families };
        out.finite.sort();
        out.finite.dedup();
        out
    }

    /// `(⋃↑s) ∩ (⋃↑t) = ⋃↑(s ∪ t)`; family pairs interleave by the diagonal
    /// pairing.
    pub fn meet(&self, other: &OpenCode) -> OpenCode {
        let mut out = OpenCode::empty();
        for t in &other.finite {
            out = out.union(&self.meet_basic(t));
        }
        for g in &other.families {
            for s in &self.finite {
                out.families.push(Arc::new(MeetBasic { inner: g.clone(), with: s.clone() }));
            }
            for f in &self.families {
                out.families.push(Arc::new(MeetFamilies { left: f.clone(), right: g.clone() }));
            }
        }
        out
    }

    pub fn retag(&self, k: u32) -> OpenCode {
        OpenCode {
            finite: self.finite.iter().map(|s| s.retag(k)).collect(),
            families: self
                .families
                .iter()
                .map(|f| Arc::new(Retag { inner: f.clone(), tag: k }) as Arc<dyn OpenFamily>)
                .collect(),
        }
    }

    /// Renames finite generators; fails on family parts, which cannot be
    /// renamed pointwise.
    pub fn map_finite(&self, f: impl Fn(&Index) -> Index) -> Option<OpenCode> {
        if !self.is_finite() {
            return None;
        }
        Some(OpenCode::finite(self.finite.iter().map(|s| s.map(&f)).collect()))
    }

    /// A generator confirmed by `point`, finite generators first.
    pub fn find_in(&self, point: &BTreeSet<Index>) -> Option<BasicOpen> {
        self.finite
            .iter()
            .find(|s| s.holds_in(point))
            .cloned()
            .or_else(|| self.families.iter().find_map(|f| f.find_in(point)))
    }

    pub fn holds_in(&self, point: &BTreeSet<Index>) -> bool {
        self.find_in(point).is_some()
    }

    /// The `n`-th generator of the interleaved enumeration (finite
    /// generators first, then families round-robin).
    pub fn generator(&self, n: u64) -> Option<BasicOpen> {
        let nf = self.finite.len() as u64;
        if n < nf {
            return Some(self.finite[n as usize].clone());
        }
        if self.families.is_empty() {
            return None;
        }
        let m = n - nf;
        let k = self.families.len() as u64;
        self.families[(m % k) as usize].generator(m / k)
    }

    /// Every index mentioned by finite generators.
    pub fn finite_indices(&self) -> BTreeSet<Index> {
        self.finite.iter().flat_map(|s| s.indices().iter().cloned()).collect()
    }

    pub fn spec(&self) -> Value {
        json!({
            "finite": self.finite.iter().map(|s| s.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "families": self.families.iter().map(|f| f.spec()).collect::<Vec<_>>(),
        })
    }

    pub(crate) fn from_parts(finite: Vec<BasicOpen>, families: Vec<Arc<dyn OpenFamily>>) -> Self {
        let mut c = OpenCode { finite, families };
        c.finite.sort();
        c.finite.dedup();
        c
    }
}

impl fmt::Display for OpenCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty_code() {
            return write!(f, "∅");
        }
        let mut parts: Vec<String> = self.finite.iter().map(|s| s.to_string()).collect();
        parts.extend(self.families.iter().map(|g| g.describe()));
        write!(f, "{}", parts.join(" ∪ "))
    }
}

#[derive(Debug)]
pub struct MeetBasic {
    pub inner: Arc<dyn OpenFamily>,
    pub with: BasicOpen,
}

impl OpenFamily for MeetBasic {
    fn generator(&self, n: u64) -> Option<BasicOpen> {
        self.inner.generator(n).map(|s| s.meet(&self.with))
    }

    fn find_in(&self, point: &BTreeSet<Index>) -> Option<BasicOpen> {
        if !self.with.holds_in(point) {
            return None;
        }
        self.inner.find_in(point).map(|s| s.meet(&self.with))
    }

    fn describe(&self) -> String {
        format!("({}) ∩ {}", self.inner.describe(), self.with)
    }

    fn spec(&self) -> Value {
        json!({"kind": "meet_basic", "inner": self.inner.spec(),
               "with": self.with.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>()})
    }
}

#[derive(Debug)]
pub struct MeetFamilies {
    pub left: Arc<dyn OpenFamily>,
    pub right: Arc<dyn OpenFamily>,
}

impl OpenFamily for MeetFamilies {
    fn generator(&self, n: u64) -> Option<BasicOpen> {
        let (i, k) = unpair(n);
        Some(self.left.generator(i)?.meet(&self.right.generator(k)?))
    }

    fn find_in(&self, point: &BTreeSet<Index>) -> Option<BasicOpen> {
        Some(self.left.find_in(point)?.meet(&self.right.find_in(point)?))
    }

    fn describe(&self) -> String {
        format!("({}) ∩ ({})", self.left.describe(), self.right.describe())
    }

    fn spec(&self) -> Value {
        json!({"kind": "meet", "left": self.left.spec(), "right": self.right.spec()})
    }
}

#[derive(Debug)]
pub struct Retag {
    pub inner: Arc<dyn OpenFamily>,
    pub tag: u32,
}

impl OpenFamily for Retag {
    fn generator(&self, n: u64) -> Option<BasicOpen> {
        self.inner.generator(n).map(|s| s.retag(self.tag))
    }

    fn find_in(&self, point: &BTreeSet<Index>) -> Option<BasicOpen> {
        self.inner.find_in(&untag_set(point, self.tag)).map(|s| s.retag(self.tag))
    }

    fn describe(&self) -> String {
        format!("{}.[{}]", self.tag, self.inner.describe())
    }

    fn spec(&self) -> Value {
        json!({"kind": "retag", "tag": self.tag, "inner": self.inner.spec()})
    }
}

/// A Π⁰₂ relation `U ⇒ V`.
#[derive(Clone, Debug)]
pub struct Relation {
    pub antecedent: OpenCode,
    pub consequent: OpenCode,
}

impl Relation {
    pub fn new(antecedent: OpenCode, consequent: OpenCode) -> Self {
        Relation { antecedent, consequent }
    }

    pub fn retag(&self, k: u32) -> Relation {
        Relation::new(self.antecedent.retag(k), self.consequent.retag(k))
    }

    pub fn guard(&self, t: &BasicOpen) -> Relation {
        Relation::new(self.antecedent.meet_basic(t), self.consequent.clone())
    }

    pub fn is_finite(&self) -> bool {
        self.antecedent.is_finite() && self.consequent.is_finite()
    }

    /// Exact for points given as finite index sets.
    pub fn holds_at(&self, point: &BTreeSet<Index>) -> bool {
        !self.antecedent.holds_in(point) || self.consequent.holds_in(point)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⇒ {}", self.antecedent, self.consequent)
    }
}

/// An enumerable family of relations.
pub trait RelationFamily: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    /// The `n`-th instance; `None` marks a blank slot.
    fn instance(&self, n: u64) -> Option<Relation>;
    /// A finite, deterministic slice of instances to check against an
    /// observation at budget `fuel`: by default the first `fuel` slots.
    /// Parameterized families add the instances built from parameters that
    /// occur in `point`.
    fn relevant(&self, fuel: u64, point: &BTreeSet<Index>) -> Vec<Relation> {
        let _ = point;
        (0..fuel).filter_map(|n| self.instance(n)).collect()
    }
    fn spec(&self) -> Value;
}

/// `retag(U) ∩ guard ⇒ retag(V)` for every instance `U ⇒ V` of `inner`.
#[derive(Debug)]
pub struct Mapped {
    pub inner: Arc<dyn RelationFamily>,
    pub tag: Option<u32>,
    pub guard: BasicOpen,
}

impl Mapped {
    fn map(&self, r: Relation) -> Relation {
        let r = match self.tag {
            Some(k) => r.retag(k),
            None => r,
        };
        if self.guard.is_empty() {
            r
        } else {
            r.guard(&self.guard)
        }
    }
}

impl RelationFamily for Mapped {
    fn name(&self) -> String {
        match self.tag {
            Some(k) => format!("{k}.{}", self.inner.name()),
            None => self.inner.name(),
        }
    }

    fn instance(&self, n: u64) -> Option<Relation> {
        self.inner.instance(n).map(|r| self.map(r))
    }

    fn relevant(&self, fuel: u64, point: &BTreeSet<Index>) -> Vec<Relation> {
        let local = match self.tag {
            Some(k) => untag_set(point, k),
            None => point.clone(),
        };
        self.inner.relevant(fuel, &local).into_iter().map(|r| self.map(r)).collect()
    }

    fn spec(&self) -> Value {
        json!({"kind": "mapped", "tag": self.tag, "inner": self.inner.spec(),
               "guard": self.guard.indices().iter().map(|i| i.to_string()).collect::<Vec<_>>()})
    }
}
