//! The lower powerspace `F(X)` of a finite space, presented as the coideals of
//! a basic posite, and the open-surjection embedding `y ↦ cl(f⁻¹(y))`.

use serde::Serialize;

use crate::bits::{bit, contains, is_subset};
use crate::copres::{Copresentation, OpenCode, Relation};
use crate::error::{Error, Result};
use crate::finite::{FiniteMap, FiniteSpace};
use crate::index::{BasicOpen, Index};
use crate::posite::{coidl_space, posite_from_copres, BasicPosite};

#[derive(Clone, Debug)]
pub struct PowerspaceHandle {
    pub space: FiniteSpace,
    pub base: BasicPosite,
    pub copres: Copresentation,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PowerspaceReport {
    pub closed_sets: usize,
    pub coideals: usize,
    pub bijective: bool,
    /// `f_𝒰⁻¹(Coidl ∩ ↑{U}) = ⬦U` for every basis element.
    pub diamond_ok: bool,
}

impl PowerspaceReport {
    pub fn passed(&self) -> bool {
        self.bijective && self.diamond_ok && self.closed_sets == self.coideals
    }
}

/// `F(X)` through the basic posite on the minimal basis `{↑x}`.
pub fn powerspace(x: &FiniteSpace) -> Result<PowerspaceHandle> {
    let base = posite_from_copres(x, &x.minimal_basis(), None)?;
    let copres = coidl_space(&base.posite)?;
    Ok(PowerspaceHandle { space: x.clone(), base, copres })
}

impl PowerspaceHandle {
    pub fn basis(&self) -> &[u64] {
        &self.base.sets
    }

    /// `f_𝒰(F) = {U : F ∩ U ≠ ∅}`.
    pub fn to_coideal(&self, closed: u64) -> u64 {
        self.basis().iter().enumerate().filter(|(_, &u)| u & closed != 0).fold(0, |m, (i, _)| m | bit(i))
    }

    /// The closed set missing exactly the basis elements outside `a`.
    pub fn from_coideal(&self, a: u64) -> u64 {
        let missed = self.basis().iter().enumerate().filter(|(i, _)| !contains(a, *i)).fold(0, |m, (_, &u)| m | u);
        self.space.full() & !missed
    }

    /// `⬦W` for an open `W`, expanded through the basis elements inside it.
    pub fn diamond(&self, w: u64) -> OpenCode {
        OpenCode::finite(
            self.basis()
                .iter()
                .enumerate()
                .filter(|(_, &u)| is_subset(u, w))
                .map(|(i, _)| BasicOpen::single(Index::Nat(i as u32)))
                .collect(),
        )
    }

    /// Denoted closed sets, ascending.
    pub fn closed_sets(&self) -> Result<Vec<u64>> {
        self.denoted_closed(&self.copres)
    }

    fn denoted_closed(&self, c: &Copresentation) -> Result<Vec<u64>> {
        let mut out: Vec<u64> = c.denotation()?.into_iter().map(|a| self.from_coideal(a)).collect();
        out.sort_unstable();
        Ok(out)
    }

    pub fn verify(&self) -> Result<PowerspaceReport> {
        let coideals = self.copres.denotation()?;
        let closed = self.space.closed_sets();
        let mut images: Vec<u64> = closed.iter().map(|&f| self.to_coideal(f)).collect();
        images.sort_unstable();
        let bijective = images == coideals && coideals.iter().all(|&a| self.to_coideal(self.from_coideal(a)) == a);
        let diamond_ok = (0..self.basis().len()).all(|i| {
            let u = self.basis()[i];
            coideals.iter().all(|&a| contains(a, i) == (self.from_coideal(a) & u != 0))
        });
        Ok(PowerspaceReport { closed_sets: closed.len(), coideals: coideals.len(), bijective, diamond_ok })
    }
}

/// `⊤ ⇒ ⬦X` and `⬦U ∩ ⬦V ⇒ ⬦(U ∩ V)` over basis pairs: cuts out the
/// irreducible closed sets.
pub fn down_copres(h: &PowerspaceHandle) -> Vec<Relation> {
    let b = h.basis();
    let mut rels = vec![Relation::new(OpenCode::top(), h.diamond(h.space.full()))];
    for i in 0..b.len() {
        for j in i + 1..b.len() {
            let both = BasicOpen::single(Index::Nat(i as u32)).meet(&BasicOpen::single(Index::Nat(j as u32)));
            rels.push(Relation::new(OpenCode::basic(both), h.diamond(b[i] & b[j])));
        }
    }
    rels
}

/// Closed sets denoted by [`down_copres`] inside `F(X)`.
pub fn down_closed_sets(h: &PowerspaceHandle) -> Result<Vec<u64>> {
    h.denoted_closed(&h.copres.pi02_subspace(down_copres(h))?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EssentialReport {
    /// `y ↦ f⁻¹(cl{y})` is continuous into `F(X)`.
    pub via_powerspace: bool,
    pub direct: bool,
}

impl EssentialReport {
    pub fn agree(&self) -> bool {
        self.via_powerspace == self.direct
    }
}

/// `y ↦ f⁻¹(cl{y})`, as closed sets of the source.
pub fn inverse_down(f: &FiniteMap) -> Vec<u64> {
    (0..f.target().len()).map(|y| f.preimage(f.target().closure_of_point(y))).collect()
}

/// Whether `g : Y → F(X)` is continuous: each `g⁻¹(⬦U)` is open in `Y`.
fn continuous_into(h: &PowerspaceHandle, y: &FiniteSpace, g: &[u64]) -> bool {
    h.basis().iter().all(|&u| {
        let pre = g.iter().enumerate().filter(|(_, &f)| f & u != 0).fold(0, |m, (k, _)| m | bit(k));
        y.is_open(pre)
    })
}

pub fn essential_check_via_powerspace(f: &FiniteMap) -> Result<EssentialReport> {
    f.require_continuous()?;
    let h = powerspace(f.source())?;
    let g = inverse_down(f);
    // route through the coideal presentation: preimages of ↑{U}
    let pts: Vec<u64> = g.iter().map(|&c| h.to_coideal(c)).collect();
    let via = (0..h.basis().len()).all(|i| {
        let pre = pts.iter().enumerate().filter(|(_, &a)| contains(a, i)).fold(0, |m, (k, _)| m | bit(k));
        f.target().is_open(pre)
    });
    debug_assert_eq!(via, continuous_into(&h, f.target(), &g));
    Ok(EssentialReport { via_powerspace: via, direct: f.is_essential() })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberReport {
    pub holds: bool,
    /// A point `y` with `f⁻¹(cl{y}) ≠ cl(f⁻¹(y))`.
    pub witness: Option<usize>,
}

/// `f⁻¹(cl{y}) = cl(f⁻¹(y))` for all `y`. Requires an open map unless
/// `allow_non_open` is set.
pub fn openmap_fiber_closure_check(f: &FiniteMap, allow_non_open: bool) -> Result<FiberReport> {
    f.require_continuous()?;
    if !allow_non_open {
        f.require_open()?;
    }
    let g = inverse_down(f);
    let witness = (0..f.target().len()).find(|&y| g[y] != f.source().closure(f.fiber(y)));
    Ok(FiberReport { holds: witness.is_none(), witness })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OpenSurjReport {
    /// `cl(f⁻¹(y))` for each `y`.
    pub embedding: Vec<u64>,
    pub is_embedding: bool,
    /// `g⁻¹(⬦U) = f(U)` for every open `U`.
    pub star_ok: bool,
    /// Closed sets cut out by the three conditions, ascending.
    pub described: Vec<u64>,
    pub image_matches: bool,
}

impl OpenSurjReport {
    pub fn passed(&self) -> bool {
        self.is_embedding && self.star_ok && self.image_matches
    }
}

/// The three-condition subset of `F(X)`: `⊤ ⇒ ⬦X`,
/// `⬦U ∩ ⬦V ⇒ ⬦(f⁻¹f(U) ∩ V)`, and `⬦f⁻¹f(U) ⇒ ⬦U`.
pub fn open_surj_relations(h: &PowerspaceHandle, f: &FiniteMap) -> Vec<Relation> {
    let b = h.basis();
    let sat = |u: u64| f.preimage(f.image(u));
    let mut rels = vec![Relation::new(OpenCode::top(), h.diamond(h.space.full()))];
    for i in 0..b.len() {
        for j in 0..b.len() {
            let ante = BasicOpen::single(Index::Nat(i as u32)).meet(&BasicOpen::single(Index::Nat(j as u32)));
            rels.push(Relation::new(OpenCode::basic(ante), h.diamond(sat(b[i]) & b[j])));
        }
    }
    for (i, &u) in b.iter().enumerate() {
        rels.push(Relation::new(h.diamond(sat(u)), OpenCode::single(Index::Nat(i as u32))));
    }
    rels
}

pub fn open_surj_embedding(f: &FiniteMap) -> Result<OpenSurjReport> {
    f.require_continuous()?;
    f.require_open()?;
    if !f.is_surjective() {
        return Err(Error::NotSurjective);
    }
    let (x, y) = (f.source(), f.target());
    let h = powerspace(x)?;
    let g: Vec<u64> = (0..y.len()).map(|k| x.closure(f.fiber(k))).collect();
    let pre = |u: u64| g.iter().enumerate().filter(|(_, &c)| c & u != 0).fold(0, |m, (k, _)| m | bit(k));
    let star_ok = x.opens().iter().all(|&u| pre(u) == f.image(u));
    let injective = (0..g.len()).all(|a| (0..a).all(|b| g[a] != g[b]));
    let traces: Vec<u64> = x.opens().iter().map(|&u| pre(u)).collect();
    let initial = FiniteSpace::from_subbasis(y.len(), &traces).map(|s| {
        let mut a = s.opens().to_vec();
        let mut b = y.opens().to_vec();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    });
    let is_embedding = injective && initial.unwrap_or(false);
    let described = h.denoted_closed(&h.copres.pi02_subspace(open_surj_relations(&h, f))?)?;
    let mut image = g.clone();
    image.sort_unstable();
    image.dedup();
    Ok(OpenSurjReport { embedding: g, is_embedding, star_ok, image_matches: described == image, described })
}

/// The first continuous map between spaces of at most three points, in
/// enumeration order, with `f⁻¹(cl{y}) ≠ cl(f⁻¹(y))` for some `y`.
pub fn fiber_closure_counterexample() -> FiniteMap {
    use crate::finite::enumerate::{continuous_maps, spaces_up_to};
    let spaces = spaces_up_to(3);
    spaces
        .iter()
        .flat_map(|x| spaces.iter().map(move |y| (x, y)))
        .flat_map(|(x, y)| continuous_maps(x, y))
        .find(|f| openmap_fiber_closure_check(f, true).is_ok_and(|r| !r.holds))
        .expect("a counterexample exists on three points")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::down_map;
    use crate::finite::enumerate::{continuous_maps, open_surjections, spaces_up_to};

    #[test]
    fn powerspace_counts() {
        for (x, n) in [(FiniteSpace::sierpinski(), 3), (FiniteSpace::point(), 2), (FiniteSpace::discrete(2), 4)] {
            let h = powerspace(&x).unwrap();
            let r = h.verify().unwrap();
            assert!(r.passed());
            assert_eq!(r.coideals, n);
        }
        for x in spaces_up_to(5) {
            assert!(powerspace(&x).unwrap().verify().unwrap().passed());
        }
    }

    #[test]
    fn down_is_irreducibles() {
        let s = powerspace(&FiniteSpace::sierpinski()).unwrap();
        assert_eq!(down_closed_sets(&s).unwrap(), vec![0b01, 0b11]);
        for x in spaces_up_to(5) {
            let h = powerspace(&x).unwrap();
            let mut irr = x.irreducible_closed_sets();
            irr.sort_unstable();
            assert_eq!(down_closed_sets(&h).unwrap(), irr);
            let (lp, d) = down_map(&x).unwrap();
            let mut img: Vec<u64> = d.graph().iter().map(|&k| lp.closed[k]).collect();
            img.sort_unstable();
            assert_eq!(img, irr);
        }
    }

    #[test]
    fn essential_agrees() {
        let id = FiniteMap::identity(&FiniteSpace::chain(3));
        assert!(essential_check_via_powerspace(&id).unwrap().direct);
        for x in spaces_up_to(3) {
            for y in spaces_up_to(3) {
                for f in continuous_maps(&x, &y) {
                    // up-sets of a finite space are open, so every map is essential
                    let r = essential_check_via_powerspace(&f).unwrap();
                    assert!(r.agree() && r.direct);
                }
            }
        }
    }

    #[test]
    fn fiber_closures() {
        let s = FiniteSpace::sierpinski();
        let p = FiniteMap::projection(&s, &s, 0).unwrap();
        assert!(openmap_fiber_closure_check(&p, false).unwrap().holds);
        let e = fiber_closure_counterexample();
        assert!(e.is_continuous());
        assert_eq!(openmap_fiber_closure_check(&e, false), Err(Error::NotOpenMap));
        assert!(!openmap_fiber_closure_check(&e, true).unwrap().holds);
    }

    #[test]
    fn open_surjections_embed() {
        let s = FiniteSpace::sierpinski();
        let r = open_surj_embedding(&FiniteMap::identity(&s)).unwrap();
        assert!(r.passed());
        assert_eq!(r.described, vec![0b01, 0b11]);
        let p = FiniteMap::projection(&s, &s, 0).unwrap();
        assert!(open_surj_embedding(&p).unwrap().passed());
        for x in spaces_up_to(4) {
            for y in spaces_up_to(3) {
                for f in open_surjections(&x, &y) {
                    assert!(open_surj_embedding(&f).unwrap().passed());
                }
            }
        }
    }
}
