//! Space constructors on copresentations.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde_json::{json, Value};

use crate::bits::{bit, bits, is_subset};
use crate::borel::BorelCode;
use crate::error::{Error, Result};
use crate::finite::transfer::{finite_image_relations, pi02_transfer, FiniteRelation, TransferData, WChoice};
use crate::finite::FiniteSpace;
use crate::index::{untag_set, BasicOpen, Index};

use super::{Copresentation, IndexDomain, Mapped, Naturals, OpenCode, Relation, RelationFamily, TaggedUnion};

fn nat(n: usize) -> Index {
    Index::Nat(n as u32)
}

/// The flag index of a lift.
pub fn lift_flag() -> Index {
    Index::tag(1, Index::Nat(0))
}

pub fn sierpinski() -> Copresentation {
    sierpinski_power(1)
}

/// `S^n` over indices `0..n`, no relations.
pub fn sierpinski_power(n: usize) -> Copresentation {
    Copresentation::finite((0..n).map(nat).collect(), vec![], &format!("sierpinski_power({n})")).expect("no relations")
}

/// `S^ℕ`.
pub fn sierpinski_power_countable() -> Copresentation {
    Copresentation::new(
        IndexDomain::Countable(Arc::new(Naturals)),
        vec![],
        vec![],
        vec!["sierpinski_power(countable)".into()],
    )
    .expect("no relations")
}

/// Finite product; factor `k` contributes indices `k.i`.
pub fn product(factors: &[Copresentation]) -> Result<Copresentation> {
    let domain = TaggedUnion::new(factors.iter().enumerate().map(|(k, c)| (k as u32, c.domain().clone())).collect())
        .into_domain();
    let mut relations = Vec::new();
    let mut families: Vec<Arc<dyn RelationFamily>> = Vec::new();
    for (k, c) in factors.iter().enumerate() {
        relations.extend(c.relations().iter().map(|r| r.retag(k as u32)));
        families.extend(c.families().iter().map(|f| {
            Arc::new(Mapped { inner: f.clone(), tag: Some(k as u32), guard: BasicOpen::top() })
                as Arc<dyn RelationFamily>
        }));
    }
    Copresentation::new(domain, relations, families, vec![format!("product({})", factors.len())])
}

/// `↑{0.i} ⇒ ↑{a}` for every index `i` of a countable domain.
#[derive(Debug)]
pub struct LiftFlags {
    pub domain: IndexDomain,
}

impl LiftFlags {
    fn rel(i: Index) -> Relation {
        Relation::new(OpenCode::single(Index::tag(0, i)), OpenCode::single(lift_flag()))
    }
}

impl RelationFamily for LiftFlags {
    fn name(&self) -> String {
        "lift_flags".into()
    }

    fn instance(&self, n: u64) -> Option<Relation> {
        self.domain.index(n).map(Self::rel)
    }

    fn relevant(&self, fuel: u64, point: &BTreeSet<Index>) -> Vec<Relation> {
        let mut out: Vec<Relation> = (0..fuel).filter_map(|n| self.instance(n)).collect();
        out.extend(untag_set(point, 0).into_iter().map(Self::rel));
        out
    }

    fn spec(&self) -> Value {
        json!({"kind": "lift_flags", "domain": self.domain.spec()})
    }
}

/// `X_⊥`: indices `0.i` plus the flag `1.0`.
pub fn lift(c: &Copresentation) -> Result<Copresentation> {
    let a = BasicOpen::single(lift_flag());
    let domain =
        TaggedUnion::new(vec![(0, c.domain().clone()), (1, IndexDomain::Finite(vec![Index::Nat(0)]))]).into_domain();
    let mut relations = Vec::new();
    let mut families: Vec<Arc<dyn RelationFamily>> = Vec::new();
    match c.domain() {
        IndexDomain::Finite(v) => relations.extend(v.iter().cloned().map(LiftFlags::rel)),
        IndexDomain::Countable(_) => families.push(Arc::new(LiftFlags { domain: c.domain().clone() })),
    }
    relations.extend(c.relations().iter().map(|r| r.retag(0).guard(&a)));
    families.extend(
        c.families()
            .iter()
            .map(|f| Arc::new(Mapped { inner: f.clone(), tag: Some(0), guard: a.clone() }) as Arc<dyn RelationFamily>),
    );
    Copresentation::new(domain, relations, families, vec!["lift".into()])
}

/// The flag of summand `k` inside a product of lifts.
pub fn summand_flag(k: usize) -> Index {
    Index::tag(k as u32, lift_flag())
}

/// Index `i` of summand `k` inside a product of lifts.
pub fn summand_index(k: usize, i: &Index) -> Index {
    Index::tag(k as u32, Index::tag(0, i.clone()))
}

fn summand_code(k: usize, c: &OpenCode) -> OpenCode {
    c.retag(0).retag(k as u32)
}

fn product_of_lifts(parts: &[Copresentation]) -> Result<Copresentation> {
    let lifts = parts.iter().map(lift).collect::<Result<Vec<_>>>()?;
    product(&lifts)
}

/// Disjoint union as a subspace of `∏ (X_k)_⊥`.
pub fn disjoint_union(parts: &[Copresentation]) -> Result<Copresentation> {
    let base = product_of_lifts(parts)?;
    let mut rels = vec![Relation::new(
        OpenCode::top(),
        OpenCode::finite((0..parts.len()).map(|k| BasicOpen::single(summand_flag(k))).collect()),
    )];
    for i in 0..parts.len() {
        for j in i + 1..parts.len() {
            rels.push(Relation::new(
                OpenCode::basic([summand_flag(i), summand_flag(j)].into_iter().collect()),
                OpenCode::empty(),
            ));
        }
    }
    let n = parts.len();
    Ok(base.pi02_subspace(rels)?.with_step(format!("disjoint_union({n})")))
}

/// Overlap data for the ordered pair of pieces `(from, to)`.
#[derive(Clone, Debug)]
pub struct Overlap {
    pub from: usize,
    pub to: usize,
    /// Open code over piece `from` denoting the overlap.
    pub region: OpenCode,
    /// For every index `j` of piece `to`, an open code over piece `from`
    /// denoting the overlap points lying in `↑{j}` of `to`.
    pub translate: BTreeMap<Index, OpenCode>,
}

/// Glues open pieces along their overlaps. Every compatibility condition is
/// rendered with an open antecedent:
///
/// - `⊤ ⇒ ⋃ a_u`;
/// - `O_{u,v} ∩ a_u ⇒ a_v` and `a_u ∩ a_v ⇒ O_{u,v}`;
/// - `↑j_v ∩ a_v ∩ a_u ⇒ τ_{u,v}(j)` and `τ_{u,v}(j) ∩ a_v ⇒ ↑j_v`.
pub fn glue(pieces: &[Copresentation], overlaps: &[Overlap]) -> Result<Copresentation> {
    let n = pieces.len();
    let mut table: BTreeMap<(usize, usize), &Overlap> = BTreeMap::new();
    for o in overlaps {
        if o.from >= n || o.to >= n || o.from == o.to {
            return Err(Error::IncoherentOverlap(o.from, o.to, "bad piece numbers".into()));
        }
        if table.insert((o.from, o.to), o).is_some() {
            return Err(Error::IncoherentOverlap(o.from, o.to, "duplicate overlap".into()));
        }
    }
    for (&(u, v), o) in &table {
        if !table.contains_key(&(v, u)) {
            return Err(Error::IncoherentOverlap(u, v, "missing reverse overlap".into()));
        }
        if let Some(idx) = pieces[v].indices() {
            if let Some(j) = idx.iter().find(|j| !o.translate.contains_key(j)) {
                return Err(Error::IncoherentOverlap(u, v, format!("index {j} untranslated")));
            }
        }
        if let Some(j) = o.translate.keys().find(|j| !pieces[v].domain().contains(j)) {
            return Err(Error::IncoherentOverlap(u, v, format!("translation of foreign index {j}")));
        }
    }
    check_overlaps(pieces, &table)?;

    let base = product_of_lifts(pieces)?;
    let flag = |k: usize| BasicOpen::single(summand_flag(k));
    let mut rels = vec![Relation::new(OpenCode::top(), OpenCode::finite((0..n).map(flag).collect()))];
    for u in 0..n {
        for v in 0..n {
            if u == v {
                continue;
            }
            let both = flag(u).meet(&flag(v));
            match table.get(&(u, v)) {
                None => rels.push(Relation::new(OpenCode::basic(both), OpenCode::empty())),
                Some(o) => {
                    let region = summand_code(u, &o.region);
                    rels.push(Relation::new(region.meet_basic(&flag(u)), OpenCode::basic(flag(v))));
                    rels.push(Relation::new(OpenCode::basic(both.clone()), region));
                    for (j, tau) in &o.translate {
                        let tau = summand_code(u, tau);
                        let jv = BasicOpen::single(summand_index(v, j));
                        rels.push(Relation::new(OpenCode::basic(jv.meet(&both)), tau.clone()));
                        rels.push(Relation::new(tau.meet_basic(&flag(v)), OpenCode::basic(jv)));
                    }
                }
            }
        }
    }
    Ok(base.pi02_subspace(rels)?.with_step(format!("glue({n})")))
}

/// At finite scale, the overlap translations must be mutually inverse
/// bijections between the overlap regions.
fn check_overlaps(pieces: &[Copresentation], table: &BTreeMap<(usize, usize), &Overlap>) -> Result<()> {
    for (&(u, v), o) in table {
        let (pu, pv) = (&pieces[u], &pieces[v]);
        if !(pu.is_finite() && pv.is_finite()) {
            continue;
        }
        let back = table[&(v, u)];
        let du = pu.denotation()?;
        let dv = pv.denotation()?;
        let iu = pu.indices().expect("finite");
        let iv = pv.indices().expect("finite");
        let err = |m: String| Error::IncoherentOverlap(u, v, m);
        let code_masks = |c: &Copresentation, code: &OpenCode| {
            c.code_masks(code).ok_or_else(|| err("overlap code not finite over its piece".into()))
        };
        let holds = |gens: &[u64], z: u64| gens.iter().any(|&g| is_subset(g, z));
        let region_u = code_masks(pu, &o.region)?;
        let region_v = code_masks(pv, &back.region)?;
        let fwd: Vec<(usize, Vec<u64>)> = o
            .translate
            .iter()
            .map(|(j, c)| Ok((iv.iter().position(|x| x == j).expect("checked"), code_masks(pu, c)?)))
            .collect::<Result<_>>()?;
        let bwd: Vec<(usize, Vec<u64>)> = back
            .translate
            .iter()
            .map(|(j, c)| Ok((iu.iter().position(|x| x == j).expect("checked"), code_masks(pv, c)?)))
            .collect::<Result<_>>()?;
        let map =
            |tr: &[(usize, Vec<u64>)], z: u64| tr.iter().filter(|(_, g)| holds(g, z)).fold(0, |m, (i, _)| m | bit(*i));
        let mut image = Vec::new();
        for &z in du.iter().filter(|&&z| holds(&region_u, z)) {
            let w = map(&fwd, z);
            if dv.binary_search(&w).is_err() || !holds(&region_v, w) {
                return Err(err(format!("point {} has no counterpart", super::mask_label(iu, z))));
            }
            if map(&bwd, w) != z {
                return Err(err(format!("translation does not round-trip at {}", super::mask_label(iu, z))));
            }
            image.push(w);
        }
        let count_v = dv.iter().filter(|&&w| holds(&region_v, w)).count();
        image.sort_unstable();
        image.dedup();
        if image.len() != count_v {
            return Err(err("overlap regions differ in size".into()));
        }
    }
    Ok(())
}

fn sigma2_pieces(code: &BorelCode<OpenCode>) -> Result<Pieces> {
    match code {
        BorelCode::Open(u) => Ok(vec![(u.clone(), OpenCode::empty())]),
        BorelCode::Union { level, pieces } => {
            if *level > 2 {
                return Err(Error::Invalid(format!("expected a Σ⁰₂ code, got level {level}")));
            }
            pieces
                .iter()
                .map(|(a, b)| match (a, b) {
                    (BorelCode::Open(a), BorelCode::Open(b)) => Ok((a.clone(), b.clone())),
                    _ => Err(Error::Invalid("Σ⁰₂ pieces must be open".into())),
                })
                .collect()
        }
    }
}

/// The index marking the `n`-th adjoined set.
pub fn adjoined_index(n: usize) -> Index {
    Index::tag(1, nat(n))
}

/// `⋃ (B_i ∖ C_i)` as its pairs `(B_i, C_i)`.
type Pieces = Vec<(OpenCode, OpenCode)>;

/// Adjoins Δ⁰₂ sets: each pair gives Σ⁰₂ codes for `A` and `¬A`. New index
/// `1.n` marks `A_n`; base indices become `0.i`.
pub fn adjoin_delta02(
    c: &Copresentation,
    pairs: &[(BorelCode<OpenCode>, BorelCode<OpenCode>)],
) -> Result<Copresentation> {
    let split: Vec<(Pieces, Pieces)> =
        pairs.iter().map(|(a, na)| Ok((sigma2_pieces(a)?, sigma2_pieces(na)?))).collect::<Result<_>>()?;
    if c.is_finite() {
        let den = c.denotation()?;
        for (n, (a, na)) in split.iter().enumerate() {
            let eval = |ps: &[(OpenCode, OpenCode)], z: u64| -> Result<bool> {
                for (b, cc) in ps {
                    let bm = c.code_masks(b).ok_or(Error::NotComplementary(n))?;
                    let cm = c.code_masks(cc).ok_or(Error::NotComplementary(n))?;
                    let inb = bm.iter().any(|&g| is_subset(g, z));
                    let inc = cm.iter().any(|&g| is_subset(g, z));
                    if inb && !inc {
                        return Ok(true);
                    }
                }
                Ok(false)
            };
            for &z in &den {
                if eval(a, z)? == eval(na, z)? {
                    return Err(Error::NotComplementary(n));
                }
            }
        }
    }
    let domain =
        TaggedUnion::new(vec![(0, c.domain().clone()), (1, IndexDomain::Finite((0..pairs.len()).map(nat).collect()))])
            .into_domain();
    let mut relations: Vec<Relation> = c.relations().iter().map(|r| r.retag(0)).collect();
    for (n, (a, na)) in split.iter().enumerate() {
        let flag = BasicOpen::single(adjoined_index(n));
        for (b, cc) in a {
            relations.push(Relation::new(b.retag(0), cc.retag(0).union(&OpenCode::basic(flag.clone()))));
        }
        for (b, cc) in na {
            relations.push(Relation::new(b.retag(0).meet_basic(&flag), cc.retag(0)));
        }
    }
    let families = c
        .families()
        .iter()
        .map(|f| {
            Arc::new(Mapped { inner: f.clone(), tag: Some(0), guard: BasicOpen::top() }) as Arc<dyn RelationFamily>
        })
        .collect();
    let mut prov = c.provenance().to_vec();
    prov.push(format!("adjoin_delta02({})", pairs.len()));
    Copresentation::new(domain, relations, families, prov)
}

/// Joins finer topologies on the same space. Each finer copresentation comes
/// with an injection of the base indices into its own. Indices: `0.i` for
/// the base, `(k+1).j` for finer copy `k`.
pub fn join_topologies(
    base: &Copresentation,
    finer: &[(Copresentation, BTreeMap<Index, Index>)],
) -> Result<Copresentation> {
    if finer.is_empty() {
        return Ok(base.clone().with_step("join_topologies(0)".into()));
    }
    let bidx =
        base.indices().ok_or_else(|| Error::BadTranslation("join needs a finite base index set".into()))?.to_vec();
    for (k, (f, tr)) in finer.iter().enumerate() {
        if let Some(i) = bidx.iter().find(|i| !tr.contains_key(i)) {
            return Err(Error::BadTranslation(format!("copy {k}: base index {i} untranslated")));
        }
        if let Some(i) = tr.keys().find(|i| !bidx.contains(i)) {
            return Err(Error::BadTranslation(format!("copy {k}: {i} is not a base index")));
        }
        if let Some(j) = tr.values().find(|j| !f.domain().contains(j)) {
            return Err(Error::BadTranslation(format!("copy {k}: target {j} outside the finer index set")));
        }
        let targets: BTreeSet<&Index> = tr.values().collect();
        if targets.len() != tr.len() {
            return Err(Error::BadTranslation(format!("copy {k}: translation not injective")));
        }
        if base.is_finite() && f.is_finite() {
            check_same_points(base, f, tr).map_err(|m| Error::BadTranslation(format!("copy {k}: {m}")))?;
        }
    }
    let mut parts = vec![base.clone()];
    parts.extend(finer.iter().map(|(f, _)| f.clone()));
    let prod = product(&parts)?;
    let mut rels = Vec::new();
    for (k, (_, tr)) in finer.iter().enumerate() {
        for (i, j) in tr {
            let a = OpenCode::single(Index::tag(0, i.clone()));
            let b = OpenCode::single(Index::tag(k as u32 + 1, j.clone()));
            rels.push(Relation::new(a.clone(), b.clone()));
            rels.push(Relation::new(b, a));
        }
    }
    Ok(prod.pi02_subspace(rels)?.with_step(format!("join_topologies({})", finer.len())))
}

/// The finer denotation maps bijectively onto the base denotation by
/// reading the translated indices.
fn check_same_points(
    base: &Copresentation,
    f: &Copresentation,
    tr: &BTreeMap<Index, Index>,
) -> std::result::Result<(), String> {
    let err = |e: Error| e.to_string();
    let bd = base.denotation().map_err(err)?;
    let fd = f.denotation().map_err(err)?;
    let bi = base.indices().expect("finite");
    let fi = f.indices().expect("finite");
    let pairs: Vec<(usize, usize)> = tr
        .iter()
        .map(|(i, j)| (bi.iter().position(|x| x == i).unwrap(), fi.iter().position(|x| x == j).unwrap()))
        .collect();
    let mut img: Vec<u64> =
        fd.iter().map(|&z| pairs.iter().filter(|(_, j)| z & bit(*j) != 0).fold(0, |m, (i, _)| m | bit(*i))).collect();
    img.sort_unstable();
    img.dedup();
    if img.len() != fd.len() {
        return Err("finer points collapse onto one base point".into());
    }
    if img != bd {
        return Err("finer points differ from base points".into());
    }
    Ok(())
}

/// Result of [`sigma_refine`]: the finer copresentation, where each base
/// index went, and every input code as an open code of the result.
#[derive(Clone, Debug)]
pub struct Refinement {
    pub copres: Copresentation,
    pub translation: BTreeMap<Index, Index>,
    pub opens: Vec<OpenCode>,
}

impl Refinement {
    fn identity(c: &Copresentation, opens: Vec<OpenCode>) -> Result<Refinement> {
        let idx = c.indices().ok_or_else(|| Error::NotFinite("refinement needs a finite index set".into()))?;
        Ok(Refinement { copres: c.clone(), translation: idx.iter().map(|i| (i.clone(), i.clone())).collect(), opens })
    }
}

fn translate_code(c: &OpenCode, tr: &BTreeMap<Index, Index>) -> Result<OpenCode> {
    c.map_finite(|i| tr.get(i).cloned().unwrap_or_else(|| i.clone()))
        .ok_or_else(|| Error::NotFinite("refinement of codes with open families".into()))
}

fn leaf_code(code: &BorelCode<OpenCode>) -> Option<&OpenCode> {
    match code {
        BorelCode::Open(u) => Some(u),
        _ => None,
    }
}

/// Refines `c` so that each code becomes open. Level-1 codes need nothing;
/// a level-ξ code `⋃ (B_i ∖ C_i)` refines for the `B_i, C_i`, joins those
/// refinements, and adjoins each `B_i ∖ C_i` as a Δ⁰₂ set.
pub fn sigma_refine(c: &Copresentation, codes: &[BorelCode<OpenCode>]) -> Result<Refinement> {
    for code in codes {
        code.validate()?;
    }
    let mut subs = Vec::new();
    let mut leaves = Vec::new();
    for (k, code) in codes.iter().enumerate() {
        match leaf_code(code) {
            Some(u) => leaves.push((k, u.clone())),
            None => subs.push((k, refine_one(c, code)?)),
        }
    }
    let opens_of = |slot: usize, tr: &dyn Fn(&OpenCode, usize) -> Result<OpenCode>| -> Result<OpenCode> {
        if let Some((_, u)) = leaves.iter().find(|(k, _)| *k == slot) {
            return tr(u, usize::MAX);
        }
        let pos = subs.iter().position(|(k, _)| *k == slot).expect("slot");
        tr(&subs[pos].1.opens[0], pos)
    };
    match subs.len() {
        0 => Refinement::identity(c, codes.iter().map(|x| leaf_code(x).unwrap().clone()).collect()),
        1 => {
            let r = &subs[0].1;
            let opens = (0..codes.len())
                .map(|slot| {
                    opens_of(slot, &|u, pos| {
                        if pos == usize::MAX {
                            translate_code(u, &r.translation)
                        } else {
                            Ok(u.clone())
                        }
                    })
                })
                .collect::<Result<_>>()?;
            Ok(Refinement { copres: r.copres.clone(), translation: r.translation.clone(), opens })
        }
        _ => {
            let refs: Vec<&Refinement> = subs.iter().map(|(_, r)| r).collect();
            let joined = join_refinements(c, &refs)?;
            let opens = (0..codes.len())
                .map(|slot| {
                    opens_of(slot, &|u, pos| {
                        if pos == usize::MAX {
                            translate_code(u, &joined.translation)
                        } else {
                            Ok(u.retag(pos as u32 + 1))
                        }
                    })
                })
                .collect::<Result<_>>()?;
            Ok(Refinement { opens, ..joined })
        }
    }
}

/// Joins refinements of `c`; refinement `k` lands under tag `k+1`.
fn join_refinements(c: &Copresentation, refs: &[&Refinement]) -> Result<Refinement> {
    let finer: Vec<(Copresentation, BTreeMap<Index, Index>)> =
        refs.iter().map(|r| (r.copres.clone(), r.translation.clone())).collect();
    let copres = join_topologies(c, &finer)?;
    let idx = c.indices().expect("finite base");
    Ok(Refinement {
        copres,
        translation: idx.iter().map(|i| (i.clone(), Index::tag(0, i.clone()))).collect(),
        opens: vec![],
    })
}

fn refine_one(c: &Copresentation, code: &BorelCode<OpenCode>) -> Result<Refinement> {
    let pieces = match code {
        BorelCode::Open(u) => return Refinement::identity(c, vec![u.clone()]),
        BorelCode::Union { pieces, .. } => pieces,
    };
    let subcodes: Vec<BorelCode<OpenCode>> = pieces.iter().flat_map(|(b, cc)| [b.clone(), cc.clone()]).collect();
    let mid = sigma_refine(c, &subcodes)?;
    let pairs: Vec<(BorelCode<OpenCode>, BorelCode<OpenCode>)> = (0..pieces.len())
        .map(|i| {
            let b = mid.opens[2 * i].clone();
            let cc = mid.opens[2 * i + 1].clone();
            let a =
                BorelCode::Union { level: 2, pieces: vec![(BorelCode::Open(b.clone()), BorelCode::Open(cc.clone()))] };
            let not_a = BorelCode::Union {
                level: 2,
                pieces: vec![
                    (BorelCode::Open(OpenCode::top()), BorelCode::Open(b)),
                    (BorelCode::Open(cc), BorelCode::Open(OpenCode::empty())),
                ],
            };
            (a, not_a)
        })
        .collect();
    let copres = adjoin_delta02(&mid.copres, &pairs)?.with_step(format!("sigma_refine(level {})", code.level()));
    let translation = mid.translation.iter().map(|(i, j)| (i.clone(), Index::tag(0, j.clone()))).collect();
    let open = OpenCode::finite((0..pieces.len()).map(|n| BasicOpen::single(adjoined_index(n))).collect());
    Ok(Refinement { copres, translation, opens: vec![open] })
}

/// Evaluates a Borel code over open codes on a finite denotation.
pub fn eval_borel_code(c: &Copresentation, points: &[u64], code: &BorelCode<OpenCode>) -> Result<u64> {
    match code {
        BorelCode::Open(u) => {
            let gens = c.code_masks(u).ok_or_else(|| Error::NotFinite("open family in a Borel code".into()))?;
            Ok(points
                .iter()
                .enumerate()
                .filter(|(_, &z)| gens.iter().any(|&g| is_subset(g, z)))
                .fold(0, |m, (p, _)| m | bit(p)))
        }
        BorelCode::Union { pieces, .. } => {
            let mut acc = 0;
            for (a, b) in pieces {
                acc |= eval_borel_code(c, points, a)? & !eval_borel_code(c, points, b)?;
            }
            Ok(acc)
        }
    }
}

/// Finite-scale report on a refinement: the refined points correspond
/// bijectively to the base points, each input code is open in the result,
/// and every open of the result lies in `Σ⁰_ξ` of the base.
#[derive(Clone, Debug, serde::Serialize)]
pub struct RefinementCheck {
    pub bijective: bool,
    pub codes_open: bool,
    pub opens_in_level: bool,
}

impl RefinementCheck {
    pub fn passed(&self) -> bool {
        self.bijective && self.codes_open && self.opens_in_level
    }
}

pub fn check_refinement(c: &Copresentation, codes: &[BorelCode<OpenCode>], r: &Refinement) -> Result<RefinementCheck> {
    let base = c.denotation_space()?;
    let fine = r.copres.denotation_space()?;
    let bi = c.indices().expect("finite");
    let fi = r.copres.indices().ok_or_else(|| Error::NotFinite("refined index set".into()))?;
    let pairs: Vec<(usize, usize)> = r
        .translation
        .iter()
        .map(|(i, j)| (bi.iter().position(|x| x == i).unwrap(), fi.iter().position(|x| x == j).unwrap()))
        .collect();
    // refined point -> base point
    let to_base: Vec<Option<usize>> = fine
        .points
        .iter()
        .map(|&z| base.point_of(pairs.iter().filter(|(_, j)| z & bit(*j) != 0).fold(0, |m, (i, _)| m | bit(*i))))
        .collect();
    let mut hit: Vec<usize> = to_base.iter().flatten().copied().collect();
    hit.sort_unstable();
    hit.dedup();
    let bijective = to_base.iter().all(|p| p.is_some()) && hit.len() == fine.len() && hit.len() == base.len();
    if !bijective {
        return Ok(RefinementCheck { bijective, codes_open: false, opens_in_level: false });
    }
    let pull = |set: u64| -> u64 {
        to_base.iter().enumerate().filter(|(_, b)| set & bit(b.unwrap()) != 0).fold(0, |m, (p, _)| m | bit(p))
    };
    let push = |set: u64| -> u64 { bits(set).fold(0, |m, p| m | bit(to_base[p].unwrap())) };
    let mut codes_open = true;
    for code in codes {
        let s = eval_borel_code(c, &base.points, code)?;
        codes_open &= fine.space.is_open(pull(s));
    }
    let level = codes.iter().map(|c| c.level()).max().unwrap_or(1);
    let opens_in_level =
        fine.space.opens().iter().all(|&o| crate::borel::sigma_level_membership(&base.space, push(o), level));
    Ok(RefinementCheck { bijective, codes_open, opens_in_level })
}

/// `x ↦ {U ∈ 𝒰 : x ∈ U}`, as bit-masks over positions in `family`.
pub fn canonical_embedding(x: &FiniteSpace, family: &[u64]) -> Result<Vec<u64>> {
    if family.len() > 64 || family.iter().any(|&u| !x.is_open(u)) {
        return Err(Error::NotSubbasis { separating: false });
    }
    let emb: Vec<u64> = (0..x.len())
        .map(|p| family.iter().enumerate().filter(|(_, &u)| u & bit(p) != 0).fold(0, |m, (i, _)| m | bit(i)))
        .collect();
    let mut sorted = emb.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != emb.len() {
        return Err(Error::NotSubbasis { separating: false });
    }
    let generated = FiniteSpace::new(x.labels().to_vec(), family)?;
    if generated.opens() != x.opens() {
        return Err(Error::NotSubbasis { separating: true });
    }
    Ok(emb)
}

/// Largest `|𝒰|` for which the relations are produced by the transfer
/// construction inside `S^𝒰`; beyond it the direct image relations are used.
const TRANSFER_LIMIT: usize = 6;

/// Minimal elements of an up-set of `S^n` given as a point-set over masks.
fn minimal_masks(upset: u64) -> Vec<u64> {
    let pts: Vec<u64> = bits(upset).map(|p| p as u64).collect();
    pts.iter().copied().filter(|&p| !pts.iter().any(|&q| q != p && is_subset(q, p))).collect()
}

/// A finite space as a copresentation over its nontrivial minimal
/// neighborhoods. Returns the copresentation and the family used; the
/// embedding is [`canonical_embedding`] of that family.
pub fn from_finite_space(x: &FiniteSpace) -> Result<(Copresentation, Vec<u64>)> {
    let mut family: Vec<u64> = x.minimal_basis().into_iter().filter(|&u| u != x.full() && u != 0).collect();
    family.sort_unstable();
    family.dedup();
    let emb = canonical_embedding(x, &family)?;
    let n = family.len();
    let mut rels: Vec<FiniteRelation> = if n <= TRANSFER_LIMIT {
        let cube_sub: Vec<u64> =
            (0..n).map(|i| (0..1u64 << n).filter(|z| z & bit(i) != 0).fold(0, |m, z| m | bit(z as usize))).collect();
        let labels = (0..1usize << n).map(|z| format!("{z:b}")).collect();
        let cube = FiniteSpace::new(labels, &cube_sub)?;
        let image = emb.iter().fold(0, |m, &z| m | bit(z as usize));
        let data = TransferData::canonical(&cube, image, WChoice::Smallest, cube_sub)?;
        let result = pi02_transfer(&cube, image, &data)?;
        match result.complement {
            BorelCode::Union { pieces, .. } => pieces
                .iter()
                .filter_map(|(a, b)| match (a, b) {
                    (BorelCode::Open(a), BorelCode::Open(b)) if !is_subset(*a, *b) => {
                        Some(FiniteRelation::new(minimal_masks(*a), minimal_masks(*b)))
                    }
                    _ => None,
                })
                .collect(),
            BorelCode::Open(_) => vec![],
        }
    } else {
        finite_image_relations(n, &emb)
    };
    let mut seen = BTreeSet::new();
    rels.retain(|r| seen.insert((r.antecedent.clone(), r.consequent.clone())));
    let to_code =
        |gens: &[u64]| OpenCode::finite(gens.iter().map(|&g| bits(g).map(nat).collect::<BasicOpen>()).collect());
    let relations = rels.iter().map(|r| Relation::new(to_code(&r.antecedent), to_code(&r.consequent))).collect();
    let c = Copresentation::finite((0..n).map(nat).collect(), relations, "from_finite_space")?;
    let mut den = c.denotation()?;
    let mut want = emb.clone();
    want.sort_unstable();
    den.sort_unstable();
    if den != want {
        return Err(Error::TransferMismatch {
            computed: den.iter().fold(0, |m, &z| m | bit(z as usize % 64)),
            expected: want.iter().fold(0, |m, &z| m | bit(z as usize % 64)),
        });
    }
    Ok((c, family))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::enumerate::spaces_up_to;

    fn n(i: u32) -> Index {
        Index::Nat(i)
    }

    fn count(c: &Copresentation) -> usize {
        c.denotation().unwrap().len()
    }

    #[test]
    fn basic_counts() {
        assert_eq!(sierpinski().denotation().unwrap(), vec![0, 1]);
        assert_eq!(count(&sierpinski_power(2)), 4);
        assert_eq!(count(&product(&[]).unwrap()), 1);
        assert_eq!(count(&product(&[sierpinski(), sierpinski()]).unwrap()), 4);
        let one_rel = sierpinski_power(2)
            .pi02_subspace(vec![Relation::new(OpenCode::single(n(0)), OpenCode::single(n(1)))])
            .unwrap();
        assert_eq!(count(&product(&[sierpinski(), one_rel]).unwrap()), 6);
    }

    #[test]
    fn lift_adds_bottom() {
        assert_eq!(count(&lift(&sierpinski_power(0)).unwrap()), 2);
        let l = lift(&sierpinski()).unwrap();
        assert_eq!(count(&l), 3);
        let d = l.denotation_space().unwrap();
        assert_eq!(d.points[0], 0);
        assert!(d.space.is_homeomorphic(&FiniteSpace::sierpinski().lift()));
        for p in 1..d.len() {
            assert!(d.space.leq(0, p) && !d.space.leq(p, 0));
        }
    }

    #[test]
    fn disjoint_union_counts() {
        let pt = sierpinski_power(0);
        assert_eq!(count(&disjoint_union(&[pt.clone(), pt.clone()]).unwrap()), 2);
        let u = disjoint_union(&[sierpinski(), pt]).unwrap();
        let d = u.denotation_space().unwrap();
        assert_eq!(d.len(), 3);
        let sum = FiniteSpace::sum(&[&FiniteSpace::sierpinski(), &FiniteSpace::point()]).unwrap().0;
        assert!(d.space.is_homeomorphic(&sum));
        assert!(disjoint_union(&[]).unwrap().denotation().unwrap().is_empty());
    }

    fn two_sierpinskis() -> (Vec<Copresentation>, Vec<Overlap>) {
        let s = sierpinski();
        let o = |from, to| Overlap {
            from,
            to,
            region: OpenCode::single(n(0)),
            translate: [(n(0), OpenCode::single(n(0)))].into_iter().collect(),
        };
        (vec![s.clone(), s], vec![o(0, 1), o(1, 0)])
    }

    #[test]
    fn glue_two_sierpinskis_along_top() {
        let (pieces, overlaps) = two_sierpinskis();
        let g = glue(&pieces, &overlaps).unwrap();
        let d = g.denotation_space().unwrap();
        let want = FiniteSpace::from_order(3, |x, y| x == y || y == 0).unwrap();
        assert_eq!(d.len(), 3);
        assert!(d.space.is_homeomorphic(&want));
    }

    #[test]
    fn glue_single_piece_and_incoherent() {
        let g = glue(&[sierpinski()], &[]).unwrap();
        assert!(g.denotation_space().unwrap().space.is_homeomorphic(&FiniteSpace::sierpinski()));
        let (pieces, mut overlaps) = two_sierpinskis();
        overlaps[1].region = OpenCode::top();
        assert!(matches!(glue(&pieces, &overlaps), Err(Error::IncoherentOverlap(..))));
    }

    fn open(i: u32) -> BorelCode<OpenCode> {
        BorelCode::Open(OpenCode::single(n(i)))
    }

    fn s2(pieces: Vec<(OpenCode, OpenCode)>) -> BorelCode<OpenCode> {
        BorelCode::Union {
            level: 2,
            pieces: pieces.into_iter().map(|(a, b)| (BorelCode::Open(a), BorelCode::Open(b))).collect(),
        }
    }

    #[test]
    fn adjoin_open_whole_and_empty() {
        let c = sierpinski_power(2);
        let u = OpenCode::single(n(0));
        let pair = (open(0), s2(vec![(OpenCode::top(), u.clone())]));
        let a = adjoin_delta02(&c, &[pair]).unwrap();
        let den = a.denotation().unwrap();
        assert_eq!(den.len(), 4);
        let idx = a.indices().unwrap();
        let flag = idx.iter().position(|i| *i == adjoined_index(0)).unwrap();
        let base0 = idx.iter().position(|i| *i == Index::tag(0, n(0))).unwrap();
        for z in &den {
            assert_eq!(z & bit(flag) != 0, z & bit(base0) != 0);
        }
        let whole = (BorelCode::Open(OpenCode::top()), BorelCode::Open(OpenCode::empty()));
        let a = adjoin_delta02(&c, &[whole]).unwrap();
        assert!(a.denotation().unwrap().iter().all(|z| z & bit(flag) != 0));
        let none = (BorelCode::Open(OpenCode::empty()), BorelCode::Open(OpenCode::top()));
        let a = adjoin_delta02(&c, &[none]).unwrap();
        assert!(a.denotation().unwrap().iter().all(|z| z & bit(flag) == 0));
        let bad = (open(0), open(1));
        assert!(matches!(adjoin_delta02(&c, &[bad]), Err(Error::NotComplementary(0))));
    }

    #[test]
    fn join_two_adjoined() {
        let c = sierpinski_power(2);
        let not = |i: u32| s2(vec![(OpenCode::top(), OpenCode::single(n(i)))]);
        let f0 = adjoin_delta02(&c, &[(not(0), open(0))]).unwrap();
        let f1 = adjoin_delta02(&c, &[(not(1), open(1))]).unwrap();
        let tr: BTreeMap<Index, Index> = [n(0), n(1)].into_iter().map(|i| (i.clone(), Index::tag(0, i))).collect();
        assert!(join_topologies(&c, &[]).unwrap().denotation().unwrap().len() == 4);
        let single = join_topologies(&c, &[(f0.clone(), tr.clone())]).unwrap();
        assert!(single.denotation_space().unwrap().space.is_homeomorphic(&f0.denotation_space().unwrap().space));
        let j = join_topologies(&c, &[(f0, tr.clone()), (f1, tr)]).unwrap();
        let d = j.denotation_space().unwrap();
        assert_eq!(d.len(), 4);
        assert!(d.space.is_homeomorphic(&FiniteSpace::discrete(4)));
        let bad: BTreeMap<Index, Index> = [(n(0), n(0)), (n(1), n(0))].into_iter().collect();
        assert!(matches!(join_topologies(&c, &[(c.clone(), bad)]), Err(Error::BadTranslation(_))));
    }

    #[test]
    fn refine_levels() {
        let s = sierpinski();
        let r = sigma_refine(&s, &[open(0)]).unwrap();
        assert_eq!(r.copres.denotation().unwrap().len(), 2);
        let bottom = s2(vec![(OpenCode::top(), OpenCode::single(n(0)))]);
        let r = sigma_refine(&s, std::slice::from_ref(&bottom)).unwrap();
        let d = r.copres.denotation_space().unwrap();
        assert!(d.space.is_homeomorphic(&FiniteSpace::discrete(2)));
        assert!(check_refinement(&s, &[bottom], &r).unwrap().passed());

        let c = sierpinski_power(3);
        let inner = s2(vec![(OpenCode::single(n(0)), OpenCode::single(n(1)))]);
        let nested = BorelCode::Union { level: 3, pieces: vec![(inner, BorelCode::Open(OpenCode::single(n(2))))] };
        let r = sigma_refine(&c, std::slice::from_ref(&nested)).unwrap();
        let chk = check_refinement(&c, &[nested], &r).unwrap();
        assert!(chk.passed(), "{chk:?}");
    }

    #[test]
    fn canonical_embedding_cases() {
        let s = FiniteSpace::sierpinski();
        assert_eq!(canonical_embedding(&s, &[0b10]).unwrap(), vec![0, 1]);
        let ch = FiniteSpace::chain(3);
        let emb = canonical_embedding(&ch, &[0b110, 0b100]).unwrap();
        assert_eq!(emb, vec![0b00, 0b01, 0b11]);
        let d = FiniteSpace::discrete(2);
        assert_eq!(canonical_embedding(&d, &[d.full()]), Err(Error::NotSubbasis { separating: false }));
    }

    #[test]
    fn finite_space_roundtrip() {
        let (c, fam) = from_finite_space(&FiniteSpace::sierpinski()).unwrap();
        assert_eq!(fam.len(), 1);
        assert_eq!(c.indices().unwrap().len(), 1);
        for x in spaces_up_to(4) {
            let (c, _) = from_finite_space(&x).unwrap();
            assert!(c.denotation_space().unwrap().space.is_homeomorphic(&x));
        }
    }
}
