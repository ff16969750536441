use crate::bits::{bit, bits, contains};
use crate::error::{Error, Result};

use super::FiniteSpace;

/// A total function between the points of two finite spaces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteMap {
    source: FiniteSpace,
    target: FiniteSpace,
    graph: Vec<usize>,
}

impl FiniteMap {
    pub fn new(source: FiniteSpace, target: FiniteSpace, graph: Vec<usize>) -> Result<Self> {
        if graph.len() != source.len() {
            return Err(Error::Invalid(format!(
                "graph has {} entries for {} source points",
                graph.len(),
                source.len()
            )));
        }
        if let Some(&y) = graph.iter().find(|&&y| y >= target.len()) {
            return Err(Error::Invalid(format!("graph value {y} outside target")));
        }
        Ok(FiniteMap { source, target, graph })
    }

    pub fn identity(space: &FiniteSpace) -> Self {
        let graph = (0..space.len()).collect();
        FiniteMap { source: space.clone(), target: space.clone(), graph }
    }

    /// Projection of a binary product onto a factor (0 or 1).
    pub fn projection(a: &FiniteSpace, b: &FiniteSpace, factor: usize) -> Result<Self> {
        let (p, coords) = FiniteSpace::product(&[a, b])?;
        let target = if factor == 0 { a.clone() } else { b.clone() };
        let graph = coords.iter().map(|c| c[factor]).collect();
        Self::new(p, target, graph)
    }

    pub fn source(&self) -> &FiniteSpace {
        &self.source
    }

    pub fn target(&self) -> &FiniteSpace {
        &self.target
    }

    pub fn graph(&self) -> &[usize] {
        &self.graph
    }

    pub fn apply(&self, x: usize) -> usize {
        self.graph[x]
    }

    pub fn image(&self, set: u64) -> u64 {
        bits(set).fold(0, |m, x| m | bit(self.graph[x]))
    }

    pub fn preimage(&self, set: u64) -> u64 {
        self.graph.iter().enumerate().filter(|(_, &y)| contains(set, y)).fold(0, |m, (x, _)| m | bit(x))
    }

    pub fn fiber(&self, y: usize) -> u64 {
        self.preimage(bit(y))
    }

    pub fn is_continuous(&self) -> bool {
        self.target.opens().iter().all(|&o| self.source.is_open(self.preimage(o)))
    }

    pub fn is_open_map(&self) -> bool {
        self.source.opens().iter().all(|&o| self.target.is_open(self.image(o)))
    }

    pub fn is_surjective(&self) -> bool {
        self.image(self.source.full()) == self.target.full()
    }

    /// Smallest open set (in canonical order) whose image is not open.
    pub fn openness_counterexample(&self) -> Option<u64> {
        self.source.opens().iter().copied().find(|&o| !self.target.is_open(self.image(o)))
    }

    /// `↑f(U)` is open for every open `U`.
    pub fn is_essential(&self) -> bool {
        self.source.opens().iter().all(|&o| self.target.is_open(self.target.saturation(self.image(o))))
    }

    pub fn compose(&self, then: &FiniteMap) -> Result<FiniteMap> {
        if self.target != then.source {
            return Err(Error::Invalid("composition of mismatched maps".into()));
        }
        let graph = self.graph.iter().map(|&y| then.graph[y]).collect();
        FiniteMap::new(self.source.clone(), then.target.clone(), graph)
    }

    pub fn require_continuous(&self) -> Result<()> {
        if self.is_continuous() {
            Ok(())
        } else {
            Err(Error::NotContinuous)
        }
    }

    pub fn require_open(&self) -> Result<()> {
        self.require_continuous()?;
        if self.is_open_map() {
            Ok(())
        } else {
            Err(Error::NotOpenMap)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projection_is_continuous_open() {
        let s = FiniteSpace::sierpinski();
        let p = FiniteMap::projection(&s, &s, 0).unwrap();
        assert!(p.is_continuous());
        assert!(p.is_open_map());
        assert!(p.is_surjective());
        assert!(p.is_essential());
    }

    #[test]
    fn constant_maps_into_sierpinski_are_essential() {
        let s = FiniteSpace::sierpinski();
        let top = FiniteMap::new(s.clone(), s.clone(), vec![1, 1]).unwrap();
        let bottom = FiniteMap::new(s.clone(), s.clone(), vec![0, 0]).unwrap();
        assert!(top.is_continuous() && top.is_essential());
        assert!(bottom.is_continuous() && bottom.is_essential());
        // constant at 1 sends open X to {1}, open; constant at 0 sends {1} to {0}, not open
        assert!(top.is_open_map());
        assert!(!bottom.is_open_map());
    }

    #[test]
    fn rejects_bad_graph() {
        let s = FiniteSpace::sierpinski();
        assert!(FiniteMap::new(s.clone(), s.clone(), vec![0]).is_err());
        assert!(FiniteMap::new(s.clone(), s, vec![0, 2]).is_err());
    }
}
