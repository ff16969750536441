use std::collections::{BTreeSet, HashSet};

use crate::bits::{self, bit, bits, contains, is_subset};
use crate::error::{Error, Result};

/// Largest open lattice we are willing to materialize.
pub const MAX_OPENS: usize = 1 << 21;

/// A finite T0 topological space with its full lattice of open sets.
///
/// Points are `0..n` (with display labels); point-sets are `u64` bit-sets.
/// The open lattice is computed eagerly and kept in ascending numeric order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSpace {
    labels: Vec<String>,
    /// `up[x]` is the smallest open set containing `x`.
    up: Vec<u64>,
    opens: Vec<u64>,
}

fn minimal_neighborhoods(n: usize, subbasis: &[u64]) -> Vec<u64> {
    let all = bits::full(n);
    (0..n).map(|x| subbasis.iter().filter(|&&s| contains(s, x)).fold(all, |acc, &s| acc & s & all)).collect()
}

fn open_lattice(n: usize, up: &[u64]) -> Result<Vec<u64>> {
    // Finite topologies are Alexandrov: opens are exactly unions of minimal neighborhoods.
    let mut seen: HashSet<u64> = HashSet::new();
    let mut stack = vec![0u64];
    seen.insert(0);
    while let Some(o) = stack.pop() {
        for (x, &ux) in up.iter().enumerate().take(n) {
            if contains(o, x) {
                continue;
            }
            let next = o | ux;
            if seen.insert(next) {
                if seen.len() > MAX_OPENS {
                    return Err(Error::TooLarge(n, MAX_OPENS));
                }
                stack.push(next);
            }
        }
    }
    let mut opens: Vec<u64> = seen.into_iter().collect();
    opens.sort_unstable();
    Ok(opens)
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl FiniteSpace {
    /// Builds the space generated by `subbasis` (closure under finite unions and
    /// intersections, plus the empty and full sets). Non-T0 input is rejected.
    pub fn new(labels: Vec<String>, subbasis: &[u64]) -> Result<Self> {
        let n = labels.len();
        if n > 64 {
            return Err(Error::TooLarge(n, 64));
        }
        let all = bits::full(n);
        if let Some(s) = subbasis.iter().find(|&&s| s & !all != 0) {
            return Err(Error::Invalid(format!("open {s:#b} mentions points outside 0..{n}")));
        }
        let up = minimal_neighborhoods(n, subbasis);
        for x in 0..n {
            for y in x + 1..n {
                if up[x] == up[y] {
                    return Err(Error::NotT0(x, y));
                }
            }
        }
        let opens = open_lattice(n, &up)?;
        Ok(FiniteSpace { labels, up, opens })
    }

    pub fn from_subbasis(n: usize, subbasis: &[u64]) -> Result<Self> {
        Self::new(default_labels(n), subbasis)
    }

    /// Identifies topologically indistinguishable points. Returns the quotient
    /// and the class of every original point.
    pub fn t0_quotient(labels: Vec<String>, subbasis: &[u64]) -> Result<(Self, Vec<usize>)> {
        let n = labels.len();
        if n > 64 {
            return Err(Error::TooLarge(n, 64));
        }
        let up = minimal_neighborhoods(n, subbasis);
        let mut reps: Vec<usize> = Vec::new();
        let mut class = vec![0usize; n];
        for x in 0..n {
            match reps.iter().position(|&r| up[r] == up[x]) {
                Some(c) => class[x] = c,
                None => {
                    class[x] = reps.len();
                    reps.push(x);
                }
            }
        }
        let q_labels: Vec<String> = reps
            .iter()
            .map(|&r| {
                let members: Vec<&str> = (0..n).filter(|&x| class[x] == class[r]).map(|x| labels[x].as_str()).collect();
                members.join("~")
            })
            .collect();
        let q_subbasis: Vec<u64> = subbasis.iter().map(|&s| bits(s).fold(0, |m, x| m | bit(class[x]))).collect();
        let space = Self::new(q_labels, &q_subbasis)?;
        Ok((space, class))
    }

    /// The space whose opens are the up-sets of a partial order.
    pub fn from_order(n: usize, leq: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let subbasis: Vec<u64> = (0..n).map(|x| (0..n).filter(|&y| leq(x, y)).fold(0, |m, y| m | bit(y))).collect();
        Self::from_subbasis(n, &subbasis)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Invalid("label count mismatch".into()));
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn empty() -> Self {
        Self::from_subbasis(0, &[]).expect("empty space")
    }

    pub fn point() -> Self {
        Self::new(vec!["*".into()], &[]).expect("point")
    }

    /// Sierpinski space: points `0 < 1` with `{1}` open.
    pub fn sierpinski() -> Self {
        Self::from_subbasis(2, &[0b10]).expect("sierpinski")
    }

    pub fn discrete(n: usize) -> Self {
        let sub: Vec<u64> = (0..n).map(bit).collect();
        Self::from_subbasis(n, &sub).expect("discrete")
    }

    /// Chain `0 < 1 < ... < n-1`; opens are the final segments.
    pub fn chain(n: usize) -> Self {
        Self::from_order(n, |x, y| x <= y).expect("chain")
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

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn full(&self) -> u64 {
        bits::full(self.len())
    }

    pub fn opens(&self) -> &[u64] {
        &self.opens
    }

    pub fn is_open(&self, set: u64) -> bool {
        self.opens.binary_search(&set).is_ok()
    }

    pub fn is_closed(&self, set: u64) -> bool {
        self.is_open(!set & self.full())
    }

    /// Closed sets in ascending numeric order.
    pub fn closed_sets(&self) -> Vec<u64> {
        let all = self.full();
        let mut c: Vec<u64> = self.opens.iter().map(|&o| !o & all).collect();
        c.sort_unstable();
        c
    }

    /// Smallest open set containing `x`.
    pub fn up(&self, x: usize) -> u64 {
        self.up[x]
    }

    pub fn minimal_basis(&self) -> Vec<u64> {
        let mut b: Vec<u64> = self.up.clone();
        b.sort_unstable();
        b.dedup();
        b
    }

    /// `x <= y` in the specialization order.
    pub fn leq(&self, x: usize, y: usize) -> bool {
        contains(self.up[x], y)
    }

    /// The specialization order as the set of pairs `(x, y)` with `x <= y`.
    pub fn specialization(&self) -> BTreeSet<(usize, usize)> {
        let n = self.len();
        let mut out = BTreeSet::new();
        for x in 0..n {
            for y in bits(self.up[x]) {
                out.insert((x, y));
            }
        }
        out
    }

    /// Smallest closed superset: the downward closure.
    pub fn closure(&self, set: u64) -> u64 {
        (0..self.len()).filter(|&x| self.up[x] & set != 0).fold(0, |m, x| m | bit(x))
    }

    /// Upward closure: the intersection of all opens containing `set`.
    pub fn saturation(&self, set: u64) -> u64 {
        bits(set).fold(0, |m, x| m | self.up[x])
    }

    pub fn interior(&self, set: u64) -> u64 {
        (0..self.len()).filter(|&x| is_subset(self.up[x], set)).fold(0, |m, x| m | bit(x))
    }

    pub fn closure_of_point(&self, x: usize) -> u64 {
        self.closure(bit(x))
    }

    pub fn is_irreducible_closed(&self, f: u64) -> bool {
        if f == 0 || !self.is_closed(f) {
            return false;
        }
        let proper: Vec<u64> = self.closed_sets().into_iter().filter(|&c| c != f && is_subset(c, f)).collect();
        !proper.iter().any(|&g| proper.iter().any(|&h| g | h == f))
    }

    /// Irreducible closed sets, ascending.
    pub fn irreducible_closed_sets(&self) -> Vec<u64> {
        self.closed_sets().into_iter().filter(|&f| self.is_irreducible_closed(f)).collect()
    }

    /// Maps every irreducible closed set to its generic point.
    pub fn sober_witness(&self) -> Result<Vec<(u64, usize)>> {
        self.irreducible_closed_sets()
            .into_iter()
            .map(|f| {
                (0..self.len()).find(|&x| self.closure_of_point(x) == f).map(|x| (f, x)).ok_or(Error::WitnessMissing(f))
            })
            .collect()
    }

    /// The subspace on `mask`, with the embedding `sub point -> ambient point`.
    pub fn subspace(&self, mask: u64) -> (FiniteSpace, Vec<usize>) {
        let emb: Vec<usize> = bits(mask & self.full()).collect();
        let restrict =
            |o: u64| -> u64 { emb.iter().enumerate().filter(|(_, &x)| contains(o, x)).fold(0, |m, (i, _)| m | bit(i)) };
        let sub: Vec<u64> = emb.iter().map(|&x| restrict(self.up[x])).collect();
        let labels = emb.iter().map(|&x| self.labels[x].clone()).collect();
        let space = FiniteSpace::new(labels, &sub).expect("subspace of T0 space is T0");
        (space, emb)
    }

    /// Trace of an ambient set on a subspace given by its embedding.
    pub fn restrict(set: u64, emb: &[usize]) -> u64 {
        emb.iter().enumerate().filter(|(_, &x)| contains(set, x)).fold(0, |m, (i, _)| m | bit(i))
    }

    /// Image of a subspace set in the ambient space.
    pub fn extend(set: u64, emb: &[usize]) -> u64 {
        bits(set).fold(0, |m, i| m | bit(emb[i]))
    }

    /// Finite product; point `k` has coordinates `coords[k]` (first factor most significant).
    pub fn product(factors: &[&FiniteSpace]) -> Result<(FiniteSpace, Vec<Vec<usize>>)> {
        let total: usize = factors.iter().map(|f| f.len()).product();
        if total > 64 {
            return Err(Error::TooLarge(total, 64));
        }
        let mut coords: Vec<Vec<usize>> = vec![vec![]];
        for f in factors {
            coords = coords
                .into_iter()
                .flat_map(|c| {
                    (0..f.len()).map(move |x| {
                        let mut c = c.clone();
                        c.push(x);
                        c
                    })
                })
                .collect();
        }
        if factors.iter().any(|f| f.is_empty()) {
            coords.clear();
        }
        let mut subbasis = Vec::new();
        for (k, f) in factors.iter().enumerate() {
            for &o in f.opens() {
                let pre = coords.iter().enumerate().filter(|(_, c)| contains(o, c[k])).fold(0, |m, (i, _)| m | bit(i));
                subbasis.push(pre);
            }
        }
        let labels = coords
            .iter()
            .map(|c| {
                let parts: Vec<&str> = c.iter().enumerate().map(|(k, &x)| factors[k].label(x)).collect();
                format!("({})", parts.join(","))
            })
            .collect();
        Ok((FiniteSpace::new(labels, &subbasis)?, coords))
    }

    /// `X` with a new least point `⊥` (index 0); old point `x` becomes `x + 1`.
    pub fn lift(&self) -> FiniteSpace {
        let mut labels = vec!["⊥".to_string()];
        labels.extend(self.labels.iter().cloned());
        let mut sub: Vec<u64> = self.opens.iter().map(|&o| o << 1).collect();
        sub.push(bits::full(self.len() + 1));
        FiniteSpace::new(labels, &sub).expect("lift of T0 space")
    }

    /// Disjoint union; returns the offset of every summand.
    pub fn sum(parts: &[&FiniteSpace]) -> Result<(FiniteSpace, Vec<usize>)> {
        let total: usize = parts.iter().map(|p| p.len()).sum();
        if total > 64 {
            return Err(Error::TooLarge(total, 64));
        }
        let mut offsets = Vec::new();
        let mut labels = Vec::new();
        let mut sub = Vec::new();
        let mut off = 0;
        for (k, p) in parts.iter().enumerate() {
            offsets.push(off);
            labels.extend(p.labels.iter().map(|l| format!("{k}:{l}")));
            sub.extend(p.opens.iter().map(|&o| o << off));
            off += p.len();
        }
        Ok((FiniteSpace::new(labels, &sub)?, offsets))
    }

    /// Searches for a homeomorphism `self -> other`; `result[x]` is the image of `x`.
    pub fn homeomorphism(&self, other: &FiniteSpace) -> Option<Vec<usize>> {
        let n = self.len();
        if n != other.len() || self.opens.len() != other.opens.len() {
            return None;
        }
        let deg = |s: &FiniteSpace, x: usize| (s.up[x].count_ones(), s.closure_of_point(x).count_ones());
        let mut assign = vec![usize::MAX; n];
        let mut used = 0u64;
        fn go(
            a: &FiniteSpace,
            b: &FiniteSpace,
            x: usize,
            assign: &mut Vec<usize>,
            used: &mut u64,
            deg: &dyn Fn(&FiniteSpace, usize) -> (u32, u32),
        ) -> bool {
            let n = a.len();
            if x == n {
                return true;
            }
            for y in 0..n {
                if contains(*used, y) || deg(a, x) != deg(b, y) {
                    continue;
                }
                let consistent =
                    (0..x).all(|z| a.leq(x, z) == b.leq(y, assign[z]) && a.leq(z, x) == b.leq(assign[z], y));
                if !consistent {
                    continue;
                }
                assign[x] = y;
                *used |= bit(y);
                if go(a, b, x + 1, assign, used, deg) {
                    return true;
                }
                *used &= !bit(y);
            }
            false
        }
        if go(self, other, 0, &mut assign, &mut used, &deg) {
            Some(assign)
        } else {
            None
        }
    }

    pub fn is_homeomorphic(&self, other: &FiniteSpace) -> bool {
        self.homeomorphism(other).is_some()
    }

    /// Canonical encoding of the specialization order up to relabeling
    /// (lexicographically least adjacency word over all permutations).
    /// Exponential; intended for spaces of at most 7 points.
    pub fn canonical_form(&self) -> Vec<u64> {
        let n = self.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best: Option<Vec<u64>> = None;
        loop {
            // perm[i] = which original point sits at position i
            let word: Vec<u64> =
                (0..n).map(|i| (0..n).filter(|&j| self.leq(perm[i], perm[j])).fold(0, |m, j| m | bit(j))).collect();
            if best.as_ref().is_none_or(|b| word < *b) {
                best = Some(word);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        best.unwrap_or_default()
    }
}

pub(crate) fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sierpinski_specialization() {
        let s = FiniteSpace::sierpinski();
        let expected: BTreeSet<(usize, usize)> = [(0, 0), (1, 1), (0, 1)].into_iter().collect();
        assert_eq!(s.specialization(), expected);
        assert_eq!(s.opens(), &[0b00, 0b10, 0b11]);
    }

    #[test]
    fn discrete_specialization_is_identity() {
        let d = FiniteSpace::discrete(2);
        let expected: BTreeSet<(usize, usize)> = [(0, 0), (1, 1)].into_iter().collect();
        assert_eq!(d.specialization(), expected);
    }

    #[test]
    fn vee_specialization() {
        // points a=0, b=1, c=2; opens {∅,{a},{a,b},{a,c},{a,b,c}}
        let x = FiniteSpace::from_subbasis(3, &[0b001, 0b011, 0b101]).unwrap();
        let spec = x.specialization();
        let expected: BTreeSet<(usize, usize)> = [(0, 0), (1, 1), (2, 2), (1, 0), (2, 0)].into_iter().collect();
        assert_eq!(spec, expected);
    }

    #[test]
    fn closure_and_saturation() {
        let s = FiniteSpace::sierpinski();
        assert_eq!(s.closure(0b10), 0b11);
        assert_eq!(s.saturation(0b10), 0b10);
        assert_eq!(s.closure(0), 0);
        assert_eq!(s.saturation(0), 0);
        let c = FiniteSpace::chain(3);
        assert_eq!(c.closure(0b010), 0b011);
        assert_eq!(c.saturation(0b010), 0b110);
    }

    #[test]
    fn irreducibles_and_witnesses() {
        let s = FiniteSpace::sierpinski();
        assert_eq!(s.irreducible_closed_sets(), vec![0b01, 0b11]);
        assert_eq!(s.sober_witness().unwrap(), vec![(0b01, 0), (0b11, 1)]);
        let d = FiniteSpace::discrete(3);
        assert_eq!(d.irreducible_closed_sets(), vec![0b001, 0b010, 0b100]);
    }

    #[test]
    fn rejects_non_t0() {
        assert_eq!(FiniteSpace::from_subbasis(2, &[]), Err(Error::NotT0(0, 1)));
        let (q, class) = FiniteSpace::t0_quotient(vec!["a".into(), "b".into(), "c".into()], &[0b100]).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(class, vec![0, 0, 1]);
    }

    #[test]
    fn products_sums_lifts() {
        let s = FiniteSpace::sierpinski();
        let (p, coords) = FiniteSpace::product(&[&s, &s]).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(coords[3], vec![1, 1]);
        assert_eq!(p.up(3), 0b1000);
        assert_eq!(s.lift().len(), 3);
        assert!(s.lift().is_homeomorphic(&FiniteSpace::chain(3)));
        let (sum, offs) = FiniteSpace::sum(&[&s, &FiniteSpace::point()]).unwrap();
        assert_eq!(sum.len(), 3);
        assert_eq!(offs, vec![0, 2]);
        let (e, _) = FiniteSpace::product(&[]).unwrap();
        assert_eq!(e.len(), 1);
    }

    #[test]
    fn homeomorphism_detects_relabeling() {
        let a = FiniteSpace::from_subbasis(3, &[0b001, 0b011, 0b101]).unwrap();
        let b = FiniteSpace::from_subbasis(3, &[0b100, 0b110, 0b101]).unwrap();
        assert!(a.is_homeomorphic(&b));
        assert!(!a.is_homeomorphic(&FiniteSpace::chain(3)));
        assert_eq!(a.canonical_form(), b.canonical_form());
    }
}
