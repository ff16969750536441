//! Transfer of a Π⁰₂ definition of a subspace from `S^I` back into the
//! ambient space, via the relation-substitution construction.

use serde::Serialize;

use crate::bits::{bit, bits, contains, full, is_subset, submasks};
use crate::borel::BorelCode;
use crate::error::{Error, Result};

use super::FiniteSpace;

/// Largest `|I|` accepted; the construction ranges over all `s ⊆ I`.
pub const MAX_TRANSFER_INDICES: usize = 16;

/// A relation `U ⇒ V` over `S^I`, each side a finite union of basic opens
/// `↑s` given as index bit-sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteRelation {
    pub antecedent: Vec<u64>,
    pub consequent: Vec<u64>,
}

impl FiniteRelation {
    pub fn new(antecedent: Vec<u64>, consequent: Vec<u64>) -> Self {
        FiniteRelation { antecedent, consequent }
    }

    pub fn holds_at(&self, z: u64) -> bool {
        !covers(&self.antecedent, z) || covers(&self.consequent, z)
    }
}

/// `↑s ⊆ ⋃ ↑t` iff some generator `t ⊆ s`.
pub fn covers(generators: &[u64], s: u64) -> bool {
    generators.iter().any(|&t| is_subset(t, s))
}

/// Exact Π⁰₂ definition of a finite set of points of `S^I`: for each `s` not in
/// the set, `↑s ⇒ ⋃{↑p : p ⊇ s, p in the set}`.
pub fn finite_image_relations(indices: usize, image: &[u64]) -> Vec<FiniteRelation> {
    submasks(full(indices))
        .filter(|s| !image.contains(s))
        .map(|s| {
            let mut cons: Vec<u64> = image.iter().copied().filter(|&p| is_subset(s, p)).collect();
            cons.sort_unstable();
            FiniteRelation::new(vec![s], cons)
        })
        .collect()
}

/// Inputs of the transfer: the embedding of `Y` (one index set per point of
/// `Y`, in ascending point order), the relations cutting out its image,
/// the chosen opens `W_i`, and a subbasis `𝒲` of the ambient space.
#[derive(Clone, Debug)]
pub struct TransferData {
    pub indices: usize,
    pub embedding: Vec<u64>,
    pub relations: Vec<FiniteRelation>,
    pub w: Vec<u64>,
    pub subbasis: Vec<u64>,
}

/// How `W_i` is chosen among the opens with the required trace on `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WChoice {
    Smallest,
    Largest,
}

impl TransferData {
    /// Canonical data for an arbitrary subset `y` of `x`: `I` indexes the
    /// relative minimal neighborhoods of the points of `Y`, and the image is
    /// cut out by [`finite_image_relations`].
    pub fn canonical(x: &FiniteSpace, y: u64, choice: WChoice, subbasis: Vec<u64>) -> Result<Self> {
        let pts: Vec<usize> = bits(y).collect();
        if pts.len() > MAX_TRANSFER_INDICES {
            return Err(Error::TooLarge(pts.len(), MAX_TRANSFER_INDICES));
        }
        let nbhd: Vec<u64> = pts.iter().map(|&p| x.up(p) & y).collect();
        let embedding: Vec<u64> =
            pts.iter().map(|&q| (0..pts.len()).filter(|&i| contains(nbhd[i], q)).fold(0, |m, i| m | bit(i))).collect();
        let w = nbhd
            .iter()
            .map(|&o| match choice {
                WChoice::Smallest => x.saturation(o),
                WChoice::Largest => x.opens().iter().filter(|&&v| is_subset(v & y, o)).fold(0, |m, &v| m | v),
            })
            .collect();
        let relations = finite_image_relations(pts.len(), &embedding);
        Ok(TransferData { indices: pts.len(), embedding, relations, w, subbasis })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransferResult {
    /// `A = ⋂_n (¬U'_n ∪ V'_n)` with `U'_n, V'_n` the substituted opens.
    pub a: u64,
    /// `B_W` for each `W ∈ 𝒲`, in the given order.
    pub b: Vec<u64>,
    /// `A ∩ ⋂ B_W`; equal to `Y` on success.
    pub set: u64,
    /// Level-2 code for the complement `X ∖ Y`.
    pub complement: BorelCode<u64>,
}

fn generates(opens: &[u64], within: u64, family: &[u64]) -> bool {
    // every relative open is a union of finite intersections of the family
    let mut meets: Vec<u64> = vec![within];
    for &f in family {
        let extra: Vec<u64> = meets.iter().map(|&m| m & f).collect();
        meets.extend(extra);
        meets.sort_unstable();
        meets.dedup();
    }
    opens.iter().all(|&o| {
        let o = o & within;
        meets.iter().filter(|&&m| is_subset(m, o)).fold(0, |acc, &m| acc | m) == o
    })
}

/// Runs the construction and checks `A ∩ ⋂ B_W = Y` by brute force.
pub fn pi02_transfer(x: &FiniteSpace, y: u64, data: &TransferData) -> Result<TransferResult> {
    let n = data.indices;
    if n > MAX_TRANSFER_INDICES {
        return Err(Error::TooLarge(n, MAX_TRANSFER_INDICES));
    }
    let pts: Vec<usize> = bits(y).collect();
    if data.embedding.len() != pts.len() || data.w.len() != n {
        return Err(Error::Invalid("transfer data sized inconsistently".into()));
    }
    if !is_subset(y, x.full()) {
        return Err(Error::Invalid("Y is not a subset of X".into()));
    }
    let f = &data.embedding;
    let idx_mask = full(n);
    if f.iter().any(|&z| !is_subset(z, idx_mask)) {
        return Err(Error::NotEmbedding("embedding uses indices outside I".into()));
    }
    // f⁻¹(↑s) as a subset of X (inside Y)
    let pre = |s: u64| -> u64 { pts.iter().zip(f).filter(|(_, &z)| is_subset(s, z)).fold(0, |m, (&p, _)| m | bit(p)) };
    let mut sorted = f.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != f.len() {
        return Err(Error::NotEmbedding("embedding is not injective".into()));
    }
    let pre_subbasis: Vec<u64> = (0..n).map(|i| pre(bit(i))).collect();
    let rel_opens: Vec<u64> = {
        let mut v: Vec<u64> = x.opens().iter().map(|&o| o & y).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    if pre_subbasis.iter().any(|p| rel_opens.binary_search(p).is_err()) || !generates(&rel_opens, y, &pre_subbasis) {
        return Err(Error::NotEmbedding("preimages of subbasics do not generate the subspace topology".into()));
    }
    let image_ok = submasks(idx_mask).all(|z| {
        let inside = data.relations.iter().all(|r| r.holds_at(z));
        inside == f.contains(&z)
    });
    if !image_ok {
        return Err(Error::NotEmbedding("relations do not cut out the image".into()));
    }
    for (i, &wi) in data.w.iter().enumerate() {
        if !x.is_open(wi) || wi & y != pre(bit(i)) {
            return Err(Error::Invalid(format!("W_{i} does not trace f⁻¹(↑{{{i}}}) on Y")));
        }
    }
    if data.subbasis.iter().any(|&w| !x.is_open(w)) || !generates(x.opens(), x.full(), &data.subbasis) {
        return Err(Error::NotSubbasis { separating: false });
    }

    let w_s = |s: u64| bits(s).fold(x.full(), |m, i| m & data.w[i]);
    let subst = |gens: &[u64]| -> u64 { submasks(idx_mask).filter(|&s| covers(gens, s)).fold(0, |m, s| m | w_s(s)) };
    let mut pieces = Vec::new();
    let mut a = x.full();
    for r in &data.relations {
        let u = subst(&r.antecedent);
        let v = subst(&r.consequent);
        a &= !u | v;
        pieces.push((BorelCode::Open(u), BorelCode::Open(v)));
    }
    let mut b = Vec::with_capacity(data.subbasis.len());
    let mut set = a;
    for &w in &data.subbasis {
        let z = submasks(idx_mask).filter(|&s| is_subset(pre(s), w)).fold(0, |m, s| m | w_s(s));
        let bw = x.full() & !(w ^ z);
        b.push(bw);
        set &= bw;
        pieces.push((BorelCode::Open(w), BorelCode::Open(z)));
        pieces.push((BorelCode::Open(z), BorelCode::Open(w)));
    }
    if set != y {
        return Err(Error::TransferMismatch { computed: set, expected: y });
    }
    let complement = BorelCode::union(2, pieces)?;
    Ok(TransferResult { a, b, set, complement })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn whole_space_transfers_to_itself() {
        let s = FiniteSpace::chain(3);
        let data = TransferData::canonical(&s, s.full(), WChoice::Smallest, s.minimal_basis()).unwrap();
        let r = pi02_transfer(&s, s.full(), &data).unwrap();
        assert_eq!(r.set, s.full());
        assert_eq!(r.complement.eval(&s).unwrap(), 0);
    }

    #[test]
    fn sierpinski_top_point() {
        let s = FiniteSpace::sierpinski();
        let data = TransferData {
            indices: 1,
            embedding: vec![0b1],
            relations: vec![FiniteRelation::new(vec![0], vec![0b1])],
            w: vec![0b10],
            subbasis: vec![0b10],
        };
        let r = pi02_transfer(&s, 0b10, &data).unwrap();
        assert_eq!(r.set, 0b10);
        assert_eq!(r.complement.eval(&s).unwrap(), 0b01);
    }

    #[test]
    fn every_subset_of_small_spaces() {
        let vee = FiniteSpace::from_order(4, |x, y| x == y || y == 0).unwrap();
        for x in [FiniteSpace::chain(4), vee, FiniteSpace::discrete(3)] {
            for y in submasks(x.full()) {
                for choice in [WChoice::Smallest, WChoice::Largest] {
                    for sub in [x.minimal_basis(), x.opens().to_vec()] {
                        let data = TransferData::canonical(&x, y, choice, sub).unwrap();
                        let r = pi02_transfer(&x, y, &data).unwrap();
                        assert_eq!(r.set, y);
                        assert_eq!(r.complement.eval(&x).unwrap(), x.full() & !y);
                    }
                }
            }
        }
    }

    #[test]
    fn wrong_image_is_reported() {
        let s = FiniteSpace::sierpinski();
        let data =
            TransferData { indices: 1, embedding: vec![0b1], relations: vec![], w: vec![0b10], subbasis: vec![0b10] };
        assert!(matches!(pi02_transfer(&s, 0b10, &data), Err(Error::NotEmbedding(_))));
    }

    #[test]
    fn finite_image_relations_are_exact() {
        let image = [0b000, 0b011, 0b101];
        let rels = finite_image_relations(3, &image);
        for z in submasks(0b111) {
            assert_eq!(rels.iter().all(|r| r.holds_at(z)), image.contains(&z));
        }
    }
}
