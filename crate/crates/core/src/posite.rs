//! Finite posites, their spaces of filters and coideals, and the generic
//! prime-filter construction.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bits::{bit, bits, contains, full, is_subset, submasks};
use crate::copres::{Copresentation, OpenCode, Relation};
use crate::error::{Error, Result};
use crate::finite::set_label;
use crate::finite::transfer::{finite_image_relations, FiniteRelation, MAX_TRANSFER_INDICES};
use crate::finite::FiniteSpace;
use crate::index::{BasicOpen, Index};
use crate::points::ListStream;

pub const MAX_CARRIER: usize = 64;

/// `parts ▷ of`, with `parts` a bit-set over the carrier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub parts: u64,
    pub of: usize,
}

/// How refinements of a cover to a smaller element are produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    /// Least-indexed existing cover of `U'` that refines the given cover.
    Search,
    /// `table[c][U']` is the cover of `U'` refining cover `c`.
    Table(Vec<BTreeMap<usize, usize>>),
}

/// A refining cover together with its refinement map `V' ↦ V`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Stability {
    pub cover: usize,
    pub refine: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Posite {
    labels: Vec<String>,
    below: Vec<u64>,
    covers: Vec<Cover>,
    witness: Witness,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AxiomReport {
    /// `(cover, V)` with `V ∈ 𝒱` but `V ≰ U`.
    pub pcpl: Option<(usize, usize)>,
    /// `(cover, U', reason)`.
    pub stability: Option<(usize, usize, String)>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.pcpl.is_none() && self.stability.is_none()
    }
}

impl Posite {
    /// `leq` lists generating pairs `u ≤ v`; the reflexive-transitive closure
    /// must be antisymmetric.
    pub fn new(labels: Vec<String>, leq: &[(usize, usize)], covers: Vec<Cover>, witness: Witness) -> Result<Posite> {
        let n = labels.len();
        if n > MAX_CARRIER {
            return Err(Error::TooLarge(n, MAX_CARRIER));
        }
        let mut below: Vec<u64> = (0..n).map(bit).collect();
        for &(u, v) in leq {
            if u >= n || v >= n {
                return Err(Error::Invalid(format!("order pair ({u}, {v}) out of range")));
            }
            below[v] |= bit(u);
        }
        loop {
            let mut changed = false;
            for v in 0..n {
                let b = bits(below[v]).fold(below[v], |m, u| m | below[u]);
                if b != below[v] {
                    below[v] = b;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        for u in 0..n {
            for v in 0..u {
                if contains(below[u], v) && contains(below[v], u) {
                    return Err(Error::Invalid(format!("order is not antisymmetric at {u}, {v}")));
                }
            }
        }
        for c in &covers {
            if c.of >= n || c.parts & !full(n) != 0 {
                return Err(Error::Invalid("cover out of range".into()));
            }
        }
        if let Witness::Table(t) = &witness {
            if t.len() != covers.len() || t.iter().flat_map(|m| m.iter()).any(|(&u, &c)| u >= n || c >= covers.len()) {
                return Err(Error::Invalid("witness table does not match the covers".into()));
            }
        }
        Ok(Posite { labels, below, covers, witness })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn covers(&self) -> &[Cover] {
        &self.covers
    }

    pub fn witness(&self) -> &Witness {
        &self.witness
    }

    pub fn full(&self) -> u64 {
        full(self.len())
    }

    pub fn leq(&self, u: usize, v: usize) -> bool {
        contains(self.below[v], u)
    }

    /// `↓u`.
    pub fn down(&self, u: usize) -> u64 {
        self.below[u]
    }

    /// `↑u`.
    pub fn up(&self, u: usize) -> u64 {
        (0..self.len()).filter(|&v| self.leq(u, v)).fold(0, |m, v| m | bit(v))
    }

    /// Pairs `u < v` of the order.
    pub fn order_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|v| bits(self.below[v]).filter(move |&u| u != v).map(move |u| (u, v))).collect()
    }

    fn refinement(&self, from: usize, to: usize) -> Option<Vec<(usize, usize)>> {
        let target = self.covers[from].parts;
        bits(self.covers[to].parts).map(|v2| bits(target).find(|&v| self.leq(v2, v)).map(|v| (v2, v))).collect()
    }

    /// The stability witness for cover `c` and `u2 ≤ U`.
    pub fn stability(&self, c: usize, u2: usize) -> Option<Stability> {
        let cover = match &self.witness {
            Witness::Search => {
                (0..self.covers.len()).find(|&j| self.covers[j].of == u2 && self.refinement(c, j).is_some())?
            }
            Witness::Table(t) => *t.get(c)?.get(&u2)?,
        };
        let refine = self.refinement(c, cover).unwrap_or_default();
        Some(Stability { cover, refine })
    }

    pub fn check_axioms(&self) -> AxiomReport {
        let mut rep = AxiomReport::default();
        for (k, c) in self.covers.iter().enumerate() {
            if let Some(v) = bits(c.parts).find(|&v| !self.leq(v, c.of)) {
                rep.pcpl = Some((k, v));
                break;
            }
        }
        'outer: for (k, c) in self.covers.iter().enumerate() {
            for u2 in bits(self.below[c.of]) {
                let reason = match self.stability(k, u2) {
                    None => Some("no witness".to_string()),
                    Some(s) if self.covers[s.cover].of != u2 => {
                        Some(format!("witness cover {} is not over it", s.cover))
                    }
                    Some(s) if self.refinement(k, s.cover).is_none() => {
                        Some(format!("witness cover {} does not refine", s.cover))
                    }
                    Some(s) => {
                        let ok = s.refine.len() == bits(self.covers[s.cover].parts).len()
                            && s.refine.iter().all(|&(a, b)| contains(c.parts, b) && self.leq(a, b));
                        (!ok).then(|| "refinement map is not order-correct".to_string())
                    }
                };
                if let Some(r) = reason {
                    rep.stability = Some((k, u2, r));
                    break 'outer;
                }
            }
        }
        rep
    }

    pub fn is_up(&self, a: u64) -> bool {
        bits(a).all(|u| is_subset(self.up(u), a))
    }

    pub fn is_filter(&self, a: u64) -> bool {
        a != 0 && self.is_up(a) && bits(a).all(|u| bits(a).all(|v| self.below[u] & self.below[v] & a != 0))
    }

    pub fn is_coideal(&self, a: u64) -> bool {
        self.is_up(a) && self.covers.iter().all(|c| !contains(a, c.of) || c.parts & a != 0)
    }

    pub fn is_ideal(&self, a: u64) -> bool {
        bits(a).all(|u| is_subset(self.below[u], a))
            && self.covers.iter().all(|c| !is_subset(c.parts, a) || contains(a, c.of))
    }

    /// All prime filters by exhaustive search over subsets.
    pub fn prime_filters_brute(&self) -> Result<Vec<u64>> {
        if self.len() > 20 {
            return Err(Error::TooLarge(self.len(), 20));
        }
        Ok(submasks(self.full()).filter(|&a| self.is_filter(a) && self.is_coideal(a)).collect())
    }

    /// The largest coideal inside the up-set generated by `a`.
    pub fn coideal_interior(&self, a: u64) -> u64 {
        let mut a = bits(a).fold(a, |m, u| m | self.up(u));
        loop {
            let bad = self.covers.iter().find(|c| contains(a, c.of) && c.parts & a == 0);
            match bad {
                Some(c) => a &= !self.below[c.of],
                None => return a,
            }
        }
    }
}

fn indices(p: &Posite) -> Vec<Index> {
    (0..p.len() as u32).map(Index::Nat).collect()
}

fn node(u: usize) -> OpenCode {
    OpenCode::single(Index::Nat(u as u32))
}

fn union_of(a: u64) -> OpenCode {
    OpenCode::finite(bits(a).map(|u| BasicOpen::single(Index::Nat(u as u32))).collect())
}

fn up_relations(p: &Posite) -> Vec<Relation> {
    p.order_pairs().into_iter().map(|(u, v)| Relation::new(node(u), node(v))).collect()
}

fn filter_relations(p: &Posite) -> Vec<Relation> {
    let n = p.len();
    let mut rels = vec![Relation::new(OpenCode::top(), union_of(p.full()))];
    for u in 0..n {
        for v in u + 1..n {
            let both = BasicOpen::single(Index::Nat(u as u32)).meet(&BasicOpen::single(Index::Nat(v as u32)));
            rels.push(Relation::new(OpenCode::basic(both), union_of(p.down(u) & p.down(v))));
        }
    }
    rels
}

fn cover_relations(p: &Posite) -> Vec<Relation> {
    p.covers.iter().map(|c| Relation::new(node(c.of), union_of(c.parts))).collect()
}

/// Up-closed subsets of the carrier.
pub fn upset_space(p: &Posite) -> Result<Copresentation> {
    Copresentation::finite(indices(p), up_relations(p), "upset_space")
}

pub fn filt_space(p: &Posite) -> Result<Copresentation> {
    let mut rels = up_relations(p);
    rels.extend(filter_relations(p));
    Copresentation::finite(indices(p), rels, "filt_space")
}

pub fn coidl_space(p: &Posite) -> Result<Copresentation> {
    let mut rels = up_relations(p);
    rels.extend(cover_relations(p));
    Copresentation::finite(indices(p), rels, "coidl_space")
}

/// The space copresented by the posite: prime filters.
pub fn pfilt_space(p: &Posite) -> Result<Copresentation> {
    let mut rels = up_relations(p);
    rels.extend(filter_relations(p));
    rels.extend(cover_relations(p));
    Copresentation::finite(indices(p), rels, "pfilt_space")
}

/// A posite on a basis of a finite space, ordered by inclusion, with the
/// basis sets it names.
#[derive(Clone, Debug)]
pub struct BasicPosite {
    pub posite: Posite,
    pub sets: Vec<u64>,
}

impl BasicPosite {
    /// Every emitted cover's union equals the covered set.
    pub fn is_subcanonical(&self) -> bool {
        self.posite.covers.iter().all(|c| bits(c.parts).fold(0, |m, v| m | self.sets[v]) == self.sets[c.of])
    }

    /// `e(x) = {U : x ∈ U}` for each point.
    pub fn embedding(&self, x: &FiniteSpace) -> Vec<u64> {
        embedding(x, &self.sets)
    }
}

fn embedding(x: &FiniteSpace, basis: &[u64]) -> Vec<u64> {
    (0..x.len())
        .map(|p| basis.iter().enumerate().filter(|(_, &b)| contains(b, p)).fold(0, |m, (i, _)| m | bit(i)))
        .collect()
}

pub fn is_basis(x: &FiniteSpace, basis: &[u64]) -> bool {
    basis.iter().all(|&b| x.is_open(b))
        && (0..x.len()).all(|p| basis.iter().any(|&b| contains(b, p) && is_subset(b, x.up(p))))
}

/// A basic posite on `basis`: for each relation `↑𝒰_i ⇒ ⋃_{𝒱 ∈ 𝔙_i} ↑𝒱`
/// of the image data and each `U ⊆ ⋂𝒰_i`, the cover
/// `{V : V ⊆ U ∩ ⋂𝒱 for some 𝒱 ∈ 𝔙_i} ▷ U`. Without explicit data the
/// exact finite image relations of the embedding are used.
pub fn posite_from_copres(x: &FiniteSpace, basis: &[u64], data: Option<&[FiniteRelation]>) -> Result<BasicPosite> {
    if !is_basis(x, basis) {
        return Err(Error::NotABasis);
    }
    let m = basis.len();
    if m > MAX_CARRIER {
        return Err(Error::TooLarge(m, MAX_CARRIER));
    }
    for i in 0..m {
        if basis[..i].contains(&basis[i]) {
            return Err(Error::Invalid(format!("basis element {i} is repeated")));
        }
    }
    let emb = embedding(x, basis);
    let rels: Vec<FiniteRelation> = match data {
        Some(d) => d.to_vec(),
        None if m <= MAX_TRANSFER_INDICES => finite_image_relations(m, &emb),
        None => return Err(Error::TooLarge(m, MAX_TRANSFER_INDICES)),
    };
    for r in &rels {
        if r.antecedent.iter().chain(&r.consequent).any(|&s| s & !full(m) != 0) {
            return Err(Error::Invalid("image data refers to a missing basis element".into()));
        }
        if let Some(p) = emb.iter().position(|&e| !r.holds_at(e)) {
            return Err(Error::Invalid(format!("image data excludes point {}", x.label(p))));
        }
    }
    let meet = |s: u64| bits(s).fold(x.full(), |acc, i| acc & basis[i]);
    let mut covers = Vec::new();
    let mut by_key: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    // each antecedent generator is a separate S_i
    let split: Vec<(u64, &[u64])> =
        rels.iter().flat_map(|r| r.antecedent.iter().map(move |&s| (s, r.consequent.as_slice()))).collect();
    for (i, &(s, cons)) in split.iter().enumerate() {
        let bound = meet(s);
        for (u, &set) in basis.iter().enumerate() {
            if !is_subset(set, bound) {
                continue;
            }
            let parts = (0..m)
                .filter(|&v| cons.iter().any(|&t| is_subset(basis[v], set & meet(t))))
                .fold(0, |acc, v| acc | bit(v));
            by_key.insert((i, u), covers.len());
            covers.push(Cover { parts, of: u });
        }
    }
    let mut table = vec![BTreeMap::new(); covers.len()];
    for (&(i, u), &c) in &by_key {
        for u2 in 0..m {
            if is_subset(basis[u2], basis[u]) {
                table[c].insert(u2, by_key[&(i, u2)]);
            }
        }
    }
    let leq: Vec<(usize, usize)> = (0..m)
        .flat_map(|u| (0..m).filter(move |&v| u != v).map(move |v| (u, v)))
        .filter(|&(u, v)| is_subset(basis[u], basis[v]))
        .collect();
    let labels = basis.iter().map(|&b| set_label(x, b)).collect();
    let posite = Posite::new(labels, &leq, covers, Witness::Table(table))?;
    Ok(BasicPosite { posite, sets: basis.to_vec() })
}

/// Result of the generic prime-filter construction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GenericFilter {
    /// The descending pivot chain, starting at `W`.
    pub pivots: Vec<usize>,
    /// `(step, cover)` for every cover visit.
    pub visits: Vec<(u64, usize)>,
    /// `{U : some pivot ≤ U}`.
    pub filter: u64,
}

impl GenericFilter {
    /// Step `k` emits the elements newly above the `k`-th pivot.
    pub fn stream(&self, p: &Posite) -> ListStream {
        let mut seen = 0u64;
        let steps = self
            .pivots
            .iter()
            .map(|&c| {
                let new = p.up(c) & !seen;
                seen |= new;
                bits(new).map(|u| Index::Nat(u as u32)).collect()
            })
            .collect();
        ListStream(steps)
    }
}

/// Default schedule length: enough for every cover to be visited after the
/// last possible pivot move.
pub fn default_budget(p: &Posite) -> u64 {
    ((p.len() + 1) * (p.covers.len() + 1)) as u64
}

/// Builds a prime filter `𝒳` with `W ∈ 𝒳 ⊆ 𝒜`. At step `t` every cover
/// `k` with `(k+1) | t` is visited; if the pivot lies below the covered
/// element, the stability witness gives a cover of the pivot and the new
/// pivot is its least element accepted by the oracle.
pub fn generic_prime_filter(
    p: &Posite,
    coideal: &dyn Fn(usize) -> bool,
    w: usize,
    budget: u64,
) -> Result<GenericFilter> {
    if w >= p.len() || !coideal(w) {
        return Err(Error::Invalid("W must be an element of the coideal".into()));
    }
    let mut pivot = w;
    let mut out = GenericFilter { pivots: vec![w], visits: Vec::new(), filter: 0 };
    for t in 1..=budget {
        for (k, c) in p.covers.iter().enumerate() {
            if t % (k as u64 + 1) != 0 {
                continue;
            }
            out.visits.push((t, k));
            if !p.leq(pivot, c.of) {
                continue;
            }
            let st =
                p.stability(k, pivot).ok_or_else(|| Error::Invalid(format!("no stability witness for cover {k}")))?;
            let next = bits(p.covers[st.cover].parts).find(|&v| coideal(v)).ok_or(Error::OracleBreach { cover: k })?;
            if next != pivot {
                pivot = next;
                out.pivots.push(next);
            }
        }
    }
    out.filter = p.up(pivot);
    Ok(out)
}

/// `𝒜 ↦ ⋃_{U ∈ 𝒜} (PFilt ∩ ↑{U})`, as a bit-set over `points`.
pub fn ideal_to_open(p: &Posite, points: &[u64], ideal: u64) -> Result<u64> {
    if !p.is_ideal(ideal) {
        return Err(Error::NotAnIdeal(format!("{ideal:#b}")));
    }
    Ok(points.iter().enumerate().filter(|(_, &x)| x & ideal != 0).fold(0, |m, (i, _)| m | bit(i)))
}

/// `C ↦ {U : PFilt ∩ ↑{U} ⊆ C}`.
pub fn open_to_ideal(p: &Posite, points: &[u64], open: u64) -> Result<u64> {
    let n = points.len();
    let upward =
        (0..n).all(|i| !contains(open, i) || (0..n).all(|j| !is_subset(points[i], points[j]) || contains(open, j)));
    if open & !full(n) != 0 || !upward {
        return Err(Error::NotOpen);
    }
    Ok((0..p.len())
        .filter(|&u| (0..n).all(|i| !contains(points[i], u) || contains(open, i)))
        .fold(0, |m, u| m | bit(u)))
}

fn basic_mask(b: &BasicOpen, n: usize) -> Result<u64> {
    b.indices().iter().try_fold(0u64, |m, i| match i {
        Index::Nat(k) if (*k as usize) < n => Ok(m | bit(*k as usize)),
        other => Err(Error::Invalid(format!("index {other} is outside the finite index set"))),
    })
}

/// Baire-category point construction in `S^n`: `s_0 = ∅` and `s_{k+1}` adds
/// to `s_k` the first generator `t` of `U_k` with `F ∩ ↑(s_k ∪ t) ≠ ∅`.
/// The oracle answers `F ∩ ↑s ≠ ∅` for a nonempty closed `F`.
pub fn generic_point_bct(n: usize, f: &dyn Fn(u64) -> bool, opens: &[OpenCode], rounds: usize) -> Result<u64> {
    if n > 64 {
        return Err(Error::TooLarge(n, 64));
    }
    if !f(0) {
        return Err(Error::Invalid("F is empty".into()));
    }
    let mut s = 0u64;
    for (k, u) in opens.iter().take(rounds).enumerate() {
        if !u.families().is_empty() {
            return Err(Error::Invalid("opens must be finite codes".into()));
        }
        let mut next = None;
        for g in u.generators() {
            let t = basic_mask(g, n)?;
            if f(s | t) {
                next = Some(s | t);
                break;
            }
        }
        s = next.ok_or(Error::DensityFailure(k))?;
    }
    Ok(s)
}

/// Oracle for the closed set `↓points` of `S^n`.
pub fn closed_oracle(points: Vec<u64>) -> impl Fn(u64) -> bool {
    move |s| points.iter().any(|&p| is_subset(s, p))
}

/// A random posite on at most `max_n` elements whose covers are closed
/// under restriction, so that [`Witness::Search`] always succeeds.
pub fn random_posite<R: Rng>(rng: &mut R, max_n: usize, max_covers: usize) -> Posite {
    loop {
        let n = rng.gen_range(1..=max_n);
        let mut leq = Vec::new();
        for v in 0..n {
            for u in 0..v {
                if rng.gen_bool(0.3) {
                    leq.push((v, u));
                }
            }
        }
        let base = Posite::new((0..n).map(|i| format!("u{i}")).collect(), &leq, vec![], Witness::Search)
            .expect("descending edges are antisymmetric");
        let mut covers: Vec<Cover> = Vec::new();
        for _ in 0..rng.gen_range(0..=3) {
            let of = rng.gen_range(0..n);
            let parts = base.down(of) & rng.gen::<u64>();
            for u2 in bits(base.down(of)) {
                let restricted =
                    bits(base.down(u2)).filter(|&v| bits(parts).any(|w| base.leq(v, w))).fold(0, |m, v| m | bit(v));
                let c = Cover { parts: restricted, of: u2 };
                if !covers.contains(&c) {
                    covers.push(c);
                }
            }
        }
        if covers.len() <= max_covers {
            return Posite { covers, ..base };
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverJson {
    #[serde(rename = "U")]
    u: String,
    #[serde(rename = "V")]
    v: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PositeJson {
    carrier: Vec<String>,
    #[serde(default)]
    leq: Vec<(String, String)>,
    #[serde(default)]
    covers: Vec<CoverJson>,
}

/// Reads `{"carrier": [...], "leq": [[u, v], ...], "covers": [{"U": u, "V": [...]}]}`.
/// The stability witness is [`Witness::Search`].
pub fn posite_from_json(s: &str) -> Result<Posite> {
    let j: PositeJson = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
    let pos =
        |l: &str| j.carrier.iter().position(|c| c == l).ok_or_else(|| Error::Schema(format!("unknown element {l}")));
    let leq = j.leq.iter().map(|(u, v)| Ok((pos(u)?, pos(v)?))).collect::<Result<Vec<_>>>()?;
    let covers = j
        .covers
        .iter()
        .map(|c| Ok(Cover { of: pos(&c.u)?, parts: c.v.iter().try_fold(0, |m, v| pos(v).map(|i| m | bit(i)))? }))
        .collect::<Result<Vec<_>>>()?;
    Posite::new(j.carrier.clone(), &leq, covers, Witness::Search).map_err(|e| match e {
        Error::Invalid(m) => Error::Schema(m),
        e => e,
    })
}

pub fn posite_to_json(p: &Posite) -> String {
    let l = |u: usize| p.labels[u].clone();
    let j = PositeJson {
        carrier: p.labels.clone(),
        leq: p.order_pairs().into_iter().map(|(u, v)| (l(u), l(v))).collect(),
        covers: p.covers.iter().map(|c| CoverJson { u: l(c.of), v: bits(c.parts).map(l).collect() }).collect(),
    };
    serde_json::to_string_pretty(&j).expect("posite serializes")
}

/// `{⊤, a, b}` with `a, b ≤ ⊤`, `{a, b} ▷ ⊤`, `{a} ▷ a`, `{b} ▷ b`.
pub fn three_element() -> Posite {
    Posite::new(
        vec!["top".into(), "a".into(), "b".into()],
        &[(1, 0), (2, 0)],
        vec![Cover { parts: 0b110, of: 0 }, Cover { parts: 0b010, of: 1 }, Cover { parts: 0b100, of: 2 }],
        Witness::Search,
    )
    .expect("well formed")
}
