//! The lower powerspace of a finite space and the embedding `x ↦ cl{x}`.

use crate::bits::bits;
use crate::error::Result;

use super::{FiniteMap, FiniteSpace};

/// `F(X)`: closed sets of `X` (ascending numeric order) with the topology
/// generated by `⬦U = {F : F ∩ U ≠ ∅}`.
#[derive(Clone, Debug)]
pub struct LowerPowerspace {
    pub space: FiniteSpace,
    pub closed: Vec<u64>,
}

impl LowerPowerspace {
    /// Index of a closed set among the points of `F(X)`.
    pub fn point_of(&self, closed: u64) -> Option<usize> {
        self.closed.binary_search(&closed).ok()
    }

    /// `⬦U` as a point-set of `F(X)`.
    pub fn diamond(&self, u: u64) -> u64 {
        self.closed.iter().enumerate().filter(|(_, &f)| f & u != 0).fold(0, |m, (i, _)| m | 1 << i)
    }
}

pub fn set_label(space: &FiniteSpace, set: u64) -> String {
    let parts: Vec<&str> = bits(set).map(|x| space.label(x)).collect();
    format!("{{{}}}", parts.join(","))
}

pub fn lower_powerspace(x: &FiniteSpace) -> Result<LowerPowerspace> {
    let closed = x.closed_sets();
    let labels = closed.iter().map(|&f| set_label(x, f)).collect();
    let subbasis: Vec<u64> = x
        .opens()
        .iter()
        .map(|&u| closed.iter().enumerate().filter(|(_, &f)| f & u != 0).fold(0, |m, (i, _)| m | 1 << i))
        .collect();
    let space = FiniteSpace::new(labels, &subbasis)?;
    Ok(LowerPowerspace { space, closed })
}

/// `↓ : X → F(X)`, `x ↦ cl{x}`.
pub fn down_map(x: &FiniteSpace) -> Result<(LowerPowerspace, FiniteMap)> {
    let lp = lower_powerspace(x)?;
    let graph = (0..x.len()).map(|p| lp.point_of(x.closure_of_point(p)).expect("point closures are closed")).collect();
    let map = FiniteMap::new(x.clone(), lp.space.clone(), graph)?;
    Ok((lp, map))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sierpinski_powerspace_is_a_chain() {
        let s = FiniteSpace::sierpinski();
        let lp = lower_powerspace(&s).unwrap();
        assert_eq!(lp.closed, vec![0b00, 0b01, 0b11]);
        assert!(lp.space.is_homeomorphic(&FiniteSpace::chain(3)));
        let (_, d) = down_map(&s).unwrap();
        assert_eq!(d.graph(), &[1, 2]);
    }

    #[test]
    fn point_and_discrete() {
        let lp = lower_powerspace(&FiniteSpace::point()).unwrap();
        assert!(lp.space.is_homeomorphic(&FiniteSpace::sierpinski()));
        let lp2 = lower_powerspace(&FiniteSpace::discrete(2)).unwrap();
        assert_eq!(lp2.closed.len(), 4);
        let sq = FiniteSpace::product(&[&FiniteSpace::sierpinski(), &FiniteSpace::sierpinski()]).unwrap();
        assert!(lp2.space.is_homeomorphic(&sq.0));
    }

    #[test]
    fn down_preimage_of_diamond() {
        for x in [FiniteSpace::chain(3), FiniteSpace::discrete(3), FiniteSpace::sierpinski()] {
            let (lp, d) = down_map(&x).unwrap();
            assert!(d.is_continuous());
            for &u in x.opens() {
                assert_eq!(d.preimage(lp.diamond(u)), u);
            }
            let image: Vec<u64> = (0..x.len()).map(|p| lp.closed[d.apply(p)]).collect();
            let mut image = image;
            image.sort_unstable();
            assert_eq!(image, x.irreducible_closed_sets());
        }
    }
}
