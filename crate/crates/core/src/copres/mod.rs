//! Π⁰₂ copresentations: a subbasis index set plus relations `U ⇒ V`
//! between open codes, denoting a subset of `S^I`.

mod build;
mod code;
pub mod json;
pub mod metric;
pub mod reals;

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::bits::{bit, bits, contains};
use crate::error::{Error, Result};
use crate::finite::FiniteSpace;
use crate::index::{BasicOpen, Index};

pub use build::*;
pub use code::{Mapped, MeetBasic, MeetFamilies, OpenCode, OpenFamily, Relation, RelationFamily, Retag};

/// An effectively enumerable index set.
pub trait IndexEnum: Send + Sync + fmt::Debug {
    /// The `n`-th index; `None` marks a blank slot.
    fn index(&self, n: u64) -> Option<Index>;
    fn contains(&self, i: &Index) -> bool;
    fn spec(&self) -> Value;
}

#[derive(Clone, Debug)]
pub enum IndexDomain {
    Finite(Vec<Index>),
    Countable(Arc<dyn IndexEnum>),
}

impl IndexDomain {
    pub fn contains(&self, i: &Index) -> bool {
        match self {
            IndexDomain::Finite(v) => v.contains(i),
            IndexDomain::Countable(e) => e.contains(i),
        }
    }

    pub fn index(&self, n: u64) -> Option<Index> {
        match self {
            IndexDomain::Finite(v) => v.get(n as usize).cloned(),
            IndexDomain::Countable(e) => e.index(n),
        }
    }

    pub fn finite_len(&self) -> Option<usize> {
        match self {
            IndexDomain::Finite(v) => Some(v.len()),
            IndexDomain::Countable(_) => None,
        }
    }

    pub fn retag(&self, k: u32) -> IndexDomain {
        TaggedUnion::new(vec![(k, self.clone())]).into_domain()
    }

    pub fn spec(&self) -> Value {
        match self {
            IndexDomain::Finite(v) => json!(v.len()),
            IndexDomain::Countable(e) => e.spec(),
        }
    }
}

/// All naturals `Nat(n)`.
#[derive(Debug)]
pub struct Naturals;

impl IndexEnum for Naturals {
    fn index(&self, n: u64) -> Option<Index> {
        u32::try_from(n).ok().map(Index::Nat)
    }

    fn contains(&self, i: &Index) -> bool {
        matches!(i, Index::Nat(_))
    }

    fn spec(&self) -> Value {
        json!({"kind": "naturals"})
    }
}

/// Tagged disjoint union of index domains, interleaved round-robin.
#[derive(Clone, Debug)]
pub struct TaggedUnion {
    parts: Vec<(u32, IndexDomain)>,
}

impl TaggedUnion {
    pub fn new(parts: Vec<(u32, IndexDomain)>) -> Self {
        TaggedUnion { parts }
    }

    /// Finite when every part is finite.
    pub fn into_domain(self) -> IndexDomain {
        if self.parts.iter().all(|(_, d)| d.finite_len().is_some()) {
            let mut all = Vec::new();
            for (k, d) in &self.parts {
                if let IndexDomain::Finite(v) = d {
                    all.extend(v.iter().map(|i| Index::tag(*k, i.clone())));
                }
            }
            IndexDomain::Finite(all)
        } else {
            IndexDomain::Countable(Arc::new(self))
        }
    }
}

impl IndexEnum for TaggedUnion {
    fn index(&self, n: u64) -> Option<Index> {
        let m = self.parts.len() as u64;
        if m == 0 {
            return None;
        }
        let (k, d) = &self.parts[(n % m) as usize];
        d.index(n / m).map(|i| Index::tag(*k, i))
    }

    fn contains(&self, i: &Index) -> bool {
        match i {
            Index::Tag(k, inner) => self.parts.iter().any(|(j, d)| j == k && d.contains(inner)),
            _ => false,
        }
    }

    fn spec(&self) -> Value {
        json!({"kind": "tagged_union",
               "parts": self.parts.iter().map(|(k, d)| json!({"tag": k, "domain": d.spec()})).collect::<Vec<_>>()})
    }
}

/// A relation as antecedent and consequent generator masks.
type MaskRelation = (Vec<u64>, Vec<u64>);

/// A countable copresentation.
#[derive(Clone, Debug)]
pub struct Copresentation {
    domain: IndexDomain,
    relations: Vec<Relation>,
    families: Vec<Arc<dyn RelationFamily>>,
    provenance: Vec<String>,
}

/// Largest finite index set accepted by [`Copresentation::denotation`].
pub const MAX_DENOTATION_INDICES: usize = 63;
/// Largest number of points [`Copresentation::denotation`] will list.
pub const MAX_DENOTATION_POINTS: usize = 1 << 16;

/// Instances sampled from each family by [`Copresentation::validate`].
const VALIDATION_SAMPLE: u64 = 64;

impl Copresentation {
    pub fn new(
        domain: IndexDomain,
        relations: Vec<Relation>,
        families: Vec<Arc<dyn RelationFamily>>,
        provenance: Vec<String>,
    ) -> Result<Self> {
        let c = Copresentation { domain, relations, families, provenance };
        c.validate()?;
        Ok(c)
    }

    pub fn finite(indices: Vec<Index>, relations: Vec<Relation>, step: &str) -> Result<Self> {
        Self::new(IndexDomain::Finite(indices), relations, vec![], vec![step.to_string()])
    }

    pub fn domain(&self) -> &IndexDomain {
        &self.domain
    }

    pub fn indices(&self) -> Option<&[Index]> {
        match &self.domain {
            IndexDomain::Finite(v) => Some(v),
            IndexDomain::Countable(_) => None,
        }
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn families(&self) -> &[Arc<dyn RelationFamily>] {
        &self.families
    }

    pub fn provenance(&self) -> &[String] {
        &self.provenance
    }

    pub fn is_finite(&self) -> bool {
        self.domain.finite_len().is_some() && self.families.is_empty() && self.relations.iter().all(|r| r.is_finite())
    }

    pub(crate) fn with_step(mut self, step: String) -> Self {
        self.provenance.push(step);
        self
    }

    /// Every index mentioned by a relation belongs to the domain. Families
    /// and countable domains are checked on a fixed sample.
    pub fn validate(&self) -> Result<()> {
        let check_code = |c: &OpenCode, what: &str| -> Result<()> {
            for s in c.generators() {
                if let Some(i) = s.indices().iter().find(|i| !self.domain.contains(i)) {
                    return Err(Error::Invalid(format!("{what} mentions index {i} outside the domain")));
                }
            }
            for n in 0..VALIDATION_SAMPLE {
                if let Some(s) = c.families().iter().find_map(|f| f.generator(n)) {
                    if let Some(i) = s.indices().iter().find(|i| !self.domain.contains(i)) {
                        return Err(Error::Invalid(format!("{what} family mentions index {i} outside the domain")));
                    }
                }
            }
            Ok(())
        };
        for r in &self.relations {
            check_code(&r.antecedent, "antecedent")?;
            check_code(&r.consequent, "consequent")?;
        }
        for f in &self.families {
            for n in 0..VALIDATION_SAMPLE {
                if let Some(r) = f.instance(n) {
                    check_code(&r.antecedent, &f.name())?;
                    check_code(&r.consequent, &f.name())?;
                }
            }
        }
        Ok(())
    }

    /// Adds relations over the same index set.
    pub fn pi02_subspace(&self, rels: Vec<Relation>) -> Result<Copresentation> {
        let mut c = self.clone();
        let n = rels.len();
        c.relations.extend(rels);
        c.validate()?;
        Ok(c.with_step(format!("pi02_subspace({n})")))
    }

    /// All relations of a finite copresentation compiled to index bit-masks.
    fn compiled(&self) -> Result<(usize, Vec<MaskRelation>)> {
        let idx = self.indices().ok_or_else(|| Error::NotFinite("countable index set".into()))?;
        if !self.families.is_empty() {
            return Err(Error::NotFinite("relation families present".into()));
        }
        if idx.len() > MAX_DENOTATION_INDICES {
            return Err(Error::TooLarge(idx.len(), MAX_DENOTATION_INDICES));
        }
        let pos = |i: &Index| idx.iter().position(|j| j == i).expect("validated index");
        let mask = |s: &BasicOpen| s.indices().iter().fold(0u64, |m, i| m | bit(pos(i)));
        let code = |c: &OpenCode| -> Result<Vec<u64>> {
            if !c.is_finite() {
                return Err(Error::NotFinite("open family in a relation".into()));
            }
            Ok(c.generators().iter().map(mask).collect())
        };
        let rels = self
            .relations
            .iter()
            .map(|r| Ok((code(&r.antecedent)?, code(&r.consequent)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok((idx.len(), rels))
    }

    /// Brute-force denotation of a finite copresentation: every `z ⊆ I`
    /// satisfying all relations, as bit-masks over index positions,
    /// ascending. Depth-first with three-valued pruning.
    pub fn denotation(&self) -> Result<Vec<u64>> {
        let (n, rels) = self.compiled()?;
        let mut out = Vec::new();
        fn state(gens: &[u64], ones: u64, zeros: u64) -> Option<bool> {
            if gens.iter().any(|&g| g & !ones == 0) {
                Some(true)
            } else if gens.iter().all(|&g| g & zeros != 0) {
                Some(false)
            } else {
                None
            }
        }
        fn go(
            k: usize,
            n: usize,
            ones: u64,
            zeros: u64,
            rels: &[(Vec<u64>, Vec<u64>)],
            out: &mut Vec<u64>,
        ) -> Result<()> {
            let broken =
                rels.iter().any(|(a, c)| state(a, ones, zeros) == Some(true) && state(c, ones, zeros) == Some(false));
            if broken {
                return Ok(());
            }
            if k == n {
                out.push(ones);
                if out.len() > MAX_DENOTATION_POINTS {
                    return Err(Error::TooLarge(out.len(), MAX_DENOTATION_POINTS));
                }
                return Ok(());
            }
            go(k + 1, n, ones, zeros | bit(k), rels, out)?;
            go(k + 1, n, ones | bit(k), zeros, rels, out)
        }
        go(0, n, 0, 0, &rels, &mut out)?;
        out.sort_unstable();
        Ok(out)
    }

    /// Whether the point `z` (bit-mask over index positions) is denoted.
    pub fn contains_mask(&self, z: u64) -> Result<bool> {
        let (_, rels) = self.compiled()?;
        Ok(rels.iter().all(|(a, c)| !a.iter().any(|&g| g & !z == 0) || c.iter().any(|&g| g & !z == 0)))
    }

    /// The denotation with the subspace topology of `S^I`.
    pub fn denotation_space(&self) -> Result<Denotation> {
        let points = self.denotation()?;
        if points.len() > 64 {
            return Err(Error::TooLarge(points.len(), 64));
        }
        let idx = self.indices().expect("finite");
        let labels = points.iter().map(|&z| mask_label(idx, z)).collect();
        let subbasis: Vec<u64> = (0..idx.len())
            .map(|i| points.iter().enumerate().filter(|(_, &z)| contains(z, i)).fold(0, |m, (p, _)| m | bit(p)))
            .collect();
        let space = FiniteSpace::new(labels, &subbasis)?;
        Ok(Denotation { points, space })
    }

    /// Bit-mask of a finite code over the index positions; `None` for codes
    /// with families or outside the domain.
    pub fn code_masks(&self, c: &OpenCode) -> Option<Vec<u64>> {
        let idx = self.indices()?;
        if !c.is_finite() {
            return None;
        }
        c.generators()
            .iter()
            .map(|s| s.indices().iter().try_fold(0u64, |m, i| Some(m | bit(idx.iter().position(|j| j == i)?))))
            .collect()
    }

    /// Points of a denotation lying in a finite code, as a point-set.
    pub fn eval_code(&self, d: &Denotation, c: &OpenCode) -> Option<u64> {
        let gens = self.code_masks(c)?;
        Some(
            d.points
                .iter()
                .enumerate()
                .filter(|(_, &z)| gens.iter().any(|&g| g & !z == 0))
                .fold(0, |m, (p, _)| m | bit(p)),
        )
    }
}

pub fn mask_label(idx: &[Index], z: u64) -> String {
    let parts: Vec<String> = bits(z).map(|i| idx[i].to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// A brute-forced denotation and its subspace topology; point `p` of the
/// space is `points[p]`.
#[derive(Clone, Debug)]
pub struct Denotation {
    pub points: Vec<u64>,
    pub space: FiniteSpace,
}

impl Denotation {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point_of(&self, z: u64) -> Option<usize> {
        self.points.binary_search(&z).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sierpinski_square_with_relation() {
        let c = sierpinski_power(2);
        assert_eq!(c.denotation().unwrap().len(), 4);
        let r = Relation::new(OpenCode::single(Index::Nat(0)), OpenCode::single(Index::Nat(1)));
        let d = c.pi02_subspace(vec![r]).unwrap();
        assert_eq!(d.denotation().unwrap(), vec![0b00, 0b10, 0b11]);
        let e = c.pi02_subspace(vec![Relation::new(OpenCode::top(), OpenCode::empty())]).unwrap();
        assert!(e.denotation().unwrap().is_empty());
    }

    #[test]
    fn rejects_foreign_index() {
        let r = Relation::new(OpenCode::single(Index::Nat(5)), OpenCode::empty());
        assert!(sierpinski_power(2).pi02_subspace(vec![r]).is_err());
    }
}
